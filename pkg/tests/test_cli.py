import json
import subprocess
import sys

import pytest

from sovbaxter.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_jsonl(path):
    return [json.loads(line) for line in open(path) if line.strip()]


def strip_meta(rec):
    return {k: v for k, v in rec.items() if k != "meta"}


def test_verify_generic_n3(tmp_path, capsys):
    out = tmp_path / "run.jsonl"
    code = main(["verify", "--config", write_config(tmp_path, {"N": 3}), "--seed", "42", "--out", str(out)])
    assert code == EXIT_OK
    rec = read_jsonl(out)[0]
    assert rec["passed"] and rec["eigenvalue_count"] == 8
    statuses = {k: v["status"] for k, v in rec["checks"].items()}
    assert statuses.pop("homogeneous_limit") == "SKIP"
    assert set(statuses.values()) == {"PASS"}
    assert len(rec["det_c"]) == 8
    csv_text = (tmp_path / "run.csv").read_text().splitlines()
    assert csv_text[0].startswith("seed,model,N") and len(csv_text) == 2
    assert "eigenvalues=8" in capsys.readouterr().out


def test_run_alias_and_appending(tmp_path):
    out = tmp_path / "run.jsonl"
    cfg = write_config(tmp_path, {"N": 1, "model": "xxx"})
    for _ in range(2):
        assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert len(read_jsonl(out)) == 2
    assert len((tmp_path / "run.csv").read_text().splitlines()) == 3


def test_determinism_modulo_meta(tmp_path):
    cfg = write_config(tmp_path, {"N": 2, "boundary": "Y_zero(0,1)"})
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.jsonl"
        main(["verify", "--config", cfg, "--seed", "3", "--out", str(out)])
        outs.append(strip_meta(read_jsonl(out)[0]))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("argv_tail, data", [
    ([], {"N": 2, "colour": "red"}),
    ([], {"N": 99}),
    (["--tol-override", "baxter"], {"N": 2}),
    (["--tol-override", "baxter=abc"], {"N": 2}),
    (["--tol-override", "nosuch=1e-3"], {"N": 2}),
])
def test_config_errors_exit_2(tmp_path, capsys, argv_tail, data):
    assert main(["verify", "--config", write_config(tmp_path, data), *argv_tail]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    (tmp_path / "bad.json").write_text("[1, 2]")
    assert main(["verify", "--config", str(tmp_path / "bad.json")]) == EXIT_CONFIG


def test_failing_check_exit_1(tmp_path):
    # coinciding inhomogeneities defeat the node-based Q solve
    cfg = write_config(tmp_path, {"N": 2, "eta": [0.3, 0.2], "xi": [0.1, 0.1]})
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == EXIT_FAIL
    rec = read_jsonl(out)[0]
    assert rec["checks"]["baxter"]["status"] == "FAIL"
    assert "DuplicateNode" in rec["checks"]["baxter"]["diagnostic"]
    assert rec["checks"]["spectrum"]["status"] == "PASS"


def test_tolerance_override_reaches_checks(tmp_path):
    cfg = write_config(tmp_path, {"N": 2})
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--config", cfg, "--tol-override", "baxter=1e-30", "--out", str(out)]) == EXIT_FAIL
    rec = read_jsonl(out)[0]
    assert rec["config"]["tolerances"] == {"baxter": 1e-30}
    assert rec["checks"]["baxter"]["status"] == "FAIL"


@pytest.mark.parametrize("data", [
    {"N": 2, "boundary": {"zeta_plus": 0, "kappa_plus": 0.5, "tau_plus": 0.1,
                          "zeta_minus": 0.4, "kappa_minus": 0.3, "tau_minus": 0.2}},
    {"N": 3, "eta": [0.3, 0.2], "xi": [0.1, 0.1, 0.4]},
    # tau_- = tau_+ and (alpha_- + beta_-) - (alpha_+ - beta_+) = (N - 1) eta: both X predicates vanish
    {"N": 2, "eta": [0.3, 0.2], "boundary": {"tau_plus": 0.1, "alpha_plus": [0.2, 0.1], "beta_plus": 0.3,
                                               "tau_minus": 0.1, "alpha_minus": [0.3, 0.3],
                                               "beta_minus": [-0.1, 0.0]}},
])
def test_crash_freedom(tmp_path, data):
    out = tmp_path / "r.jsonl"
    code = main(["verify", "--config", write_config(tmp_path, data), "--out", str(out)])
    assert code in (EXIT_OK, EXIT_FAIL)
    rec = read_jsonl(out)[0]
    assert set(rec["checks"]) == {"structure", "spectrum", "sov", "baxter", "bethe", "symmetry",
                                  "homogeneous_limit"}
    assert all(c["status"] in ("PASS", "FAIL", "SKIP") for c in rec["checks"].values())


def test_n_sov_point_skips_baxter(tmp_path):
    data = {"N": 2, "eta": [0.3, 0.2], "xi": [0.15, -0.35],
            "boundary": {"tau_plus": 0.1, "alpha_plus": [0.2, 0.1], "beta_plus": 0.3, "tau_minus": 0.1,
                         "alpha_minus": [0.3, 0.3], "beta_minus": [-0.1, 0.0]}}
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--config", write_config(tmp_path, data), "--out", str(out)]) == EXIT_OK
    rec = read_jsonl(out)[0]
    assert rec["checks"]["spectrum"]["status"] == "PASS"
    assert rec["checks"]["baxter"]["status"] == "SKIP"
    assert "exceptional" in rec["checks"]["baxter"]["diagnostic"]


def test_diagonal_baxter_skip(tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--config", write_config(tmp_path, {"N": 2, "boundary": "diagonal"}),
                 "--out", str(out)]) == EXIT_OK
    rec = read_jsonl(out)[0]
    assert rec["checks"]["baxter"]["status"] == "SKIP" and "n/a" in rec["checks"]["baxter"]["diagnostic"]
    assert rec["checks"]["bethe"]["status"] == "SKIP"


def test_checks_subset(tmp_path):
    out = tmp_path / "r.jsonl"
    cfg = write_config(tmp_path, {"N": 2, "checks": ["bethe"]})
    main(["verify", "--config", cfg, "--out", str(out)])
    assert list(read_jsonl(out)[0]["checks"]) == ["bethe"]


def test_sweep_parallel_equals_serial(tmp_path, capsys):
    cfg = write_config(tmp_path, {"N": 2, "model": "xxx"})
    serial, parallel = tmp_path / "s.jsonl", tmp_path / "p.jsonl"
    assert main(["sweep", "--config", cfg, "--samples", "4", "--out", str(serial)]) == EXIT_OK
    assert main(["sweep", "--config", cfg, "--samples", "4", "--workers", "2", "--out", str(parallel)]) == EXIT_OK
    a, b = read_jsonl(serial), read_jsonl(parallel)
    assert [strip_meta(r) for r in a] == [strip_meta(r) for r in b]
    assert [r["config"]["seed"] for r in a] == [0, 1, 2, 3]
    summary = json.loads(capsys.readouterr().out.split("\n}\n")[0] + "\n}")
    assert summary["samples"] == 4 and summary["passed"] == 4


def test_empty_sweep(tmp_path, capsys):
    cfg = write_config(tmp_path, {"N": 2})
    assert main(["sweep", "--config", cfg, "--samples", "0"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["samples"] == 0 and summary["pass_rate"] is None
    assert main(["sweep", "--config", cfg, "--samples", "-1"]) == EXIT_CONFIG


def test_report_formats(tmp_path, capsys):
    runs = tmp_path / "runs.jsonl"
    cfg = write_config(tmp_path, {"N": 2})
    main(["sweep", "--config", cfg, "--samples", "2", "--out", str(runs)])
    capsys.readouterr()
    assert main(["report", str(runs), "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[0].split(",")[:3] == ["seed", "model", "N"]
    assert main(["report", str(runs), "--format", "md"]) == EXIT_OK
    md = capsys.readouterr().out.strip().splitlines()
    assert md[0].startswith("| seed |") and len(md) == 4
    target = tmp_path / "agg.json"
    assert main(["report", str(runs), "--format", "json", "--out", str(target)]) == EXIT_OK
    agg = json.loads(target.read_text())
    assert agg["samples"] == 2 and agg["checks"]["spectrum"]["PASS"] == 2
    assert main(["report", str(tmp_path / "missing.jsonl")]) == EXIT_CONFIG


def test_regimes(tmp_path, capsys):
    cfg = write_config(tmp_path, {"N": 3, "boundary": "M_lattice(0,0,0)"})
    assert main(["regimes", "--config", cfg]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["in_M_lattice"] and out["variant"] is None and [0, 0, 0] in out["M_triples"]
    cfg = write_config(tmp_path, {"N": 2, "model": "xxx", "boundary": "xi_b_zero"})
    assert main(["regimes", "--config", cfg]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["model"] == "xxx" and out["xi_b_zero"]


def test_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "sovbaxter.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("verify", "sweep", "regimes", "report"):
        assert name in res.stdout
