import json
from pathlib import Path

import numpy as np
import pytest

from sovbaxter.model6v import BoundaryParams, ChainParams, TransferFamily
from sovbaxter.sampling import sample_boundary, sample_chain, sample_xxx_boundary, sample_xxx_chain
from sovbaxter.sov import build_sov_functions, spectrum_extract
from sovbaxter.xxx import XXXBoundary, XXXTransferFamily, build_xxx_functions

DATA = Path(__file__).parent / "data"


def cplx(pair):
    return complex(pair[0], pair[1])


def generic_xxz(N, seed):
    rng = np.random.default_rng(seed)
    chain = sample_chain(N, rng)
    bp = sample_boundary(N, chain.eta, rng)
    fam = TransferFamily(chain, bp)
    return fam, build_sov_functions(fam)


def generic_xxx(N, seed, homogeneous=False, xi_b_zero=False):
    rng = np.random.default_rng(seed)
    chain = sample_xxx_chain(N, rng, homogeneous=homogeneous)
    b = sample_xxx_boundary(rng, xi_b_zero=xi_b_zero)
    fam = XXXTransferFamily(chain, b)
    return fam, build_xxx_functions(fam)


def oracle_family(case):
    chain = ChainParams(case["N"], cplx(case["eta"]), tuple(cplx(x) for x in case["xi"]))
    b = {k: cplx(v) for k, v in case["boundary"].items()}
    if case["model"] == "xxz":
        fam = TransferFamily(chain, BoundaryParams(**b))
        return fam, build_sov_functions(fam)
    fam = XXXTransferFamily(chain, XXXBoundary(**b))
    return fam, build_xxx_functions(fam)


@pytest.fixture(scope="session")
def oracle_cases():
    return json.loads((DATA / "oracle_frozen.json").read_text())["cases"]


@pytest.fixture(scope="session")
def xxz3():
    fam, fns = generic_xxz(3, 2024)
    return fam, fns, spectrum_extract(fam, fns)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
