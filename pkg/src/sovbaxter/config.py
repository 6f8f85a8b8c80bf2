"""Run configuration: JSON schema, validation and materialization into model objects."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .model6v import BoundaryParams, ChainParams
from .numerics import DEFAULT_TOL, Tolerances
from .sampling import (construct_diagonal, construct_m_lattice, construct_normal, construct_y_zero, eta_ok,
                       complex_box, m_lattice_triples, sample_boundary, sample_chain, sample_xxx_boundary,
                       sample_xxx_chain)
from .xxx import XXXBoundary

SCHEMA_VERSION = 1
DEFAULT_MAX_N = 6
CHECKS = ("structure", "spectrum", "sov", "baxter", "bethe", "symmetry", "homogeneous_limit")
MODELS = ("xxz", "xxx")
FIELDS = {"schema", "model", "N", "eta", "xi", "boundary", "tolerances", "checks", "seed", "sqrt_sign"}

_RANDOM = re.compile(r"^random(?:\((\d+)\))?$")
_Y_ZERO = re.compile(r"^Y_zero\(\s*([01])\s*,\s*(\d+)\s*\)$")
_M_LATTICE = re.compile(r"^M_lattice(?:\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\))?$")
XXZ_TAGS = ("generic", "diagonal", "normal_massless", "normal_massive")
XXX_TAGS = ("generic", "xi_b_zero")
XXZ_KEYS = ("zeta_plus", "kappa_plus", "tau_plus", "zeta_minus", "kappa_minus", "tau_minus")
XXZ_AB_KEYS = ("tau_plus", "alpha_plus", "beta_plus", "tau_minus", "alpha_minus", "beta_minus")
XXX_KEYS = ("p", "q", "xi_b")


def parse_complex(value: Any, what: str) -> complex:
    """Accept a number, ``[re, im]`` or a Python complex literal string."""
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{what}: cannot read {value!r} as a complex number")


def encode(obj: Any) -> Any:
    """JSON-ready copy with complex numbers as ``[re, im]`` and arrays as lists."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass(frozen=True)
class RunConfig:
    model: str = "xxz"
    N: int = 3
    eta: complex | None = None
    xi: Any = "random"
    boundary: Any = "generic"
    tolerances: dict = field(default_factory=dict)
    checks: tuple = CHECKS
    seed: int = 0
    sqrt_sign: int = 1
    schema: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data: dict, max_n: int = DEFAULT_MAX_N) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - FIELDS
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        schema = data.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema {schema!r}; expected {SCHEMA_VERSION}")
        model = data.get("model", "xxz")
        if model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        N = data.get("N", 3)
        if not isinstance(N, int) or isinstance(N, bool) or N < 1:
            raise ConfigError("N must be a positive integer")
        if N > max_n:
            raise ConfigError(f"N = {N} exceeds the maximum {max_n}")
        eta = data.get("eta")
        eta = None if eta is None else parse_complex(eta, "eta")
        xi = _parse_xi(data.get("xi", "random"), N)
        boundary = _parse_boundary(data.get("boundary", "generic"), model, N)
        tolerances = data.get("tolerances", {}) or {}
        if not isinstance(tolerances, dict):
            raise ConfigError("tolerances must be an object")
        try:
            DEFAULT_TOL.override(**tolerances)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"tolerances: {exc}") from exc
        checks = data.get("checks", list(CHECKS))
        if isinstance(checks, str):
            checks = [checks]
        if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
            raise ConfigError(f"checks must be a subset of {CHECKS}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        sqrt_sign = data.get("sqrt_sign", 1)
        if sqrt_sign not in (1, -1):
            raise ConfigError("sqrt_sign must be +1 or -1")
        ordered = tuple(c for c in CHECKS if c in checks)
        return cls(model, N, eta, xi, boundary, dict(tolerances), ordered, seed, sqrt_sign, schema)

    @classmethod
    def load(cls, path: str | Path, max_n: int = DEFAULT_MAX_N) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, max_n)

    def to_dict(self) -> dict:
        return encode({"schema": self.schema, "model": self.model, "N": self.N, "eta": self.eta,
                       "xi": self.xi, "boundary": self.boundary, "tolerances": self.tolerances,
                       "checks": list(self.checks), "seed": self.seed, "sqrt_sign": self.sqrt_sign})

    def with_seed(self, seed: int) -> "RunConfig":
        return RunConfig(self.model, self.N, self.eta, self.xi, self.boundary, self.tolerances,
                         self.checks, seed, self.sqrt_sign, self.schema)

    def with_tolerances(self, extra: dict) -> "RunConfig":
        merged = {**self.tolerances, **extra}
        return RunConfig.from_dict({**self.to_dict(), "tolerances": merged}, max(self.N, DEFAULT_MAX_N))

    @property
    def tol(self) -> Tolerances:
        return DEFAULT_TOL.override(**self.tolerances)


def _parse_xi(xi: Any, N: int):
    if isinstance(xi, str):
        if xi == "homogeneous" or _RANDOM.match(xi):
            return xi
        raise ConfigError(f"xi must be a list, 'homogeneous' or 'random(seed)', got {xi!r}")
    if isinstance(xi, list):
        if len(xi) != N:
            raise ConfigError(f"xi has {len(xi)} entries, expected N = {N}")
        return tuple(parse_complex(v, f"xi[{k}]") for k, v in enumerate(xi))
    raise ConfigError(f"xi: unsupported value {xi!r}")


def _parse_boundary(b: Any, model: str, N: int):
    if isinstance(b, str):
        if _RANDOM.match(b):
            return b
        if model == "xxx":
            if b in XXX_TAGS:
                return b
            raise ConfigError(f"xxx boundary tag must be one of {XXX_TAGS} or 'random(seed)'")
        if b in XXZ_TAGS:
            return b
        m = _Y_ZERO.match(b)
        if m:
            if int(m.group(2)) > N:
                raise ConfigError(f"Y_zero M must be <= N = {N}")
            return b
        m = _M_LATTICE.match(b)
        if m:
            if m.group(1) is not None and tuple(int(g) for g in m.groups()) not in m_lattice_triples(N):
                raise ConfigError(f"{b} is not a lattice triple for N = {N}")
            return b
        raise ConfigError(f"unknown boundary tag {b!r}")
    if isinstance(b, dict):
        if model == "xxx":
            allowed = set(XXX_KEYS)
            if set(b) - allowed or set(XXX_KEYS) - set(b):
                raise ConfigError(f"xxx boundary needs exactly {XXX_KEYS}")
            return {k: parse_complex(b[k], f"boundary.{k}") for k in XXX_KEYS}
        for keys in (XXZ_KEYS, XXZ_AB_KEYS):
            if set(b) == set(keys):
                return {k: parse_complex(b[k], f"boundary.{k}") for k in keys}
        raise ConfigError(f"xxz boundary needs exactly {XXZ_KEYS} or {XXZ_AB_KEYS}")
    raise ConfigError(f"boundary: unsupported value {b!r}")


@dataclass(frozen=True, eq=False)
class Problem:
    """A materialized configuration."""

    config: RunConfig
    chain: ChainParams
    boundary: BoundaryParams | XXXBoundary
    regime: str


def _sub_rng(spec: str, rng: np.random.Generator) -> np.random.Generator:
    m = _RANDOM.match(spec)
    return np.random.default_rng(int(m.group(1))) if m and m.group(1) is not None else rng


def materialize(cfg: RunConfig) -> Problem:
    """Draw every unspecified parameter from the config seed, in a fixed order."""
    rng = np.random.default_rng(cfg.seed)
    homogeneous = cfg.xi == "homogeneous"
    tag = cfg.boundary if isinstance(cfg.boundary, str) else "explicit"
    if cfg.model == "xxx":
        if cfg.eta is not None:
            chain = _xxx_chain_with_eta(cfg, rng, homogeneous)
        elif isinstance(cfg.xi, tuple):
            chain = ChainParams(cfg.N, complex_box(rng), cfg.xi)
        else:
            chain = sample_xxx_chain(cfg.N, _sub_rng(cfg.xi, rng), homogeneous=homogeneous)
        if isinstance(cfg.boundary, dict):
            b = cfg.boundary
            boundary = XXXBoundary(b["p"], b["q"], b["xi_b"], cfg.sqrt_sign)
        else:
            raw = sample_xxx_boundary(_sub_rng(cfg.boundary, rng), xi_b_zero=cfg.boundary == "xi_b_zero")
            boundary = XXXBoundary(raw.p, raw.q, raw.xi_b, cfg.sqrt_sign)
        return Problem(cfg, chain, boundary, "generic" if tag.startswith("random") else tag)

    if tag in ("normal_massless", "normal_massive"):
        if cfg.eta is not None or isinstance(cfg.xi, tuple):
            raise ConfigError(f"{tag} draws eta and xi itself; leave them unset (xi may be 'homogeneous')")
        chain, boundary = construct_normal(cfg.N, rng, tag.split("_")[1], homogeneous)
        return Problem(cfg, chain, boundary, tag)

    eta = cfg.eta
    if eta is None:
        for _ in range(10_000):
            eta = complex_box(rng)
            if eta_ok(eta):
                break
    if homogeneous:
        chain = ChainParams.homogeneous(cfg.N, eta)
    elif isinstance(cfg.xi, tuple):
        chain = ChainParams(cfg.N, eta, cfg.xi)
    else:
        chain = sample_chain(cfg.N, _sub_rng(cfg.xi, rng), eta=eta)

    if isinstance(cfg.boundary, dict):
        b = cfg.boundary
        if "alpha_plus" in b:
            boundary = BoundaryParams.from_alpha_beta(*(b[k] for k in XXZ_AB_KEYS))
        else:
            boundary = BoundaryParams(*(b[k] for k in XXZ_KEYS))
        return Problem(cfg, chain, boundary, "explicit")
    if tag == "generic" or _RANDOM.match(tag):
        return Problem(cfg, chain, sample_boundary(cfg.N, eta, _sub_rng(tag, rng)), "generic")
    if tag == "diagonal":
        return Problem(cfg, chain, construct_diagonal(rng), tag)
    m = _Y_ZERO.match(tag)
    if m:
        i, M = int(m.group(1)), int(m.group(2))
        return Problem(cfg, chain, construct_y_zero(cfg.N, eta, i, M, rng), tag)
    m = _M_LATTICE.match(tag)
    if m:
        triples = m_lattice_triples(cfg.N)
        triple = (tuple(int(g) for g in m.groups()) if m.group(1) is not None
                  else triples[int(rng.integers(len(triples)))])
        return Problem(cfg, chain, construct_m_lattice(cfg.N, eta, triple, rng), f"M_lattice{triple}")
    raise ConfigError(f"unknown boundary tag {tag!r}")


def _xxx_chain_with_eta(cfg: RunConfig, rng, homogeneous: bool) -> ChainParams:
    if homogeneous:
        return ChainParams.homogeneous(cfg.N, cfg.eta)
    if isinstance(cfg.xi, tuple):
        return ChainParams(cfg.N, cfg.eta, cfg.xi)
    return sample_xxx_chain(cfg.N, _sub_rng(cfg.xi, rng), eta=cfg.eta)
