"""Seeded parameter generators for generic and constructed boundary regimes.

Random values are drawn uniformly from the complex box ``[-1,1] + [-1,1]i``
and rejected when they fall within ``margin`` of a degeneracy, so that
"generic" is realized reproducibly.
"""
from __future__ import annotations

import itertools

import numpy as np

from .model6v import BoundaryParams, ChainParams
from .numerics import near_zero_mod_2pi_i
from .sov import near_zero_y, x_value, y_predicate
from .xxx import XXXBoundary

DEFAULT_MARGIN = 0.05
MAX_TRIES = 10_000


def complex_box(rng: np.random.Generator, size=None, scale: float = 1.0):
    re = rng.uniform(-scale, scale, size)
    im = rng.uniform(-scale, scale, size)
    return re + 1j * im if size is not None else complex(re, im)


def _rejecting(draw, ok, what: str):
    for _ in range(MAX_TRIES):
        value = draw()
        if ok(value):
            return value
    raise RuntimeError(f"rejection sampling failed for {what}")


def eta_ok(eta: complex, margin: float = DEFAULT_MARGIN) -> bool:
    return abs(np.sinh(eta)) > margin and abs(np.cosh(eta)) > margin


def sample_chain(N: int, rng: np.random.Generator, margin: float = DEFAULT_MARGIN,
                 homogeneous: bool = False, eta: complex | None = None) -> ChainParams:
    """Anisotropy and inhomogeneities with the genericity predicate satisfied by ``margin``."""
    if eta is None:
        eta = _rejecting(lambda: complex_box(rng), lambda e: eta_ok(e, margin), "eta")
    if homogeneous:
        return ChainParams.homogeneous(N, eta)

    def ok(xi):
        chain = ChainParams(N, eta, xi)
        if chain.genericity_violations(margin):
            return False
        # interpolation nodes must stay away from the fixed roots and the poles of A
        u0 = np.cosh(2 * (np.array(xi) - eta / 2))
        return (np.all(np.abs(u0 ** 2 - np.cosh(eta) ** 2) > margin)
                and np.all(np.abs(np.sinh(2 * (np.array(xi) + eta / 2))) > margin)
                and np.all(np.abs(np.sinh(2 * np.array(xi))) > margin))

    # spreading the imaginary parts over the full period keeps the nodes cosh(2 zeta0) apart,
    # which bounds the condition number of the node-based Q solve
    xi = _rejecting(lambda: tuple(rng.uniform(-1, 1, N) + 1j * rng.uniform(-np.pi / 2, np.pi / 2, N)),
                    ok, "inhomogeneities")
    return ChainParams(N, eta, xi)


def boundary_ok(bp: BoundaryParams, N: int, eta: complex, margin: float = DEFAULT_MARGIN,
                r_window: int | None = None) -> bool:
    """Away from singular K-matrices, ``N_SOV`` and every ``Y^(i,r)`` with ``|r| <= r_window``."""
    if abs(np.sinh(bp.zeta_plus)) < margin or abs(np.sinh(bp.zeta_minus)) < margin:
        return False
    if abs(bp.kappa_plus) < margin or abs(bp.kappa_minus) < margin:
        return False
    r_window = 2 * N + 2 if r_window is None else r_window
    t = bp.tau_minus - bp.tau_plus
    a = bp.alpha_minus + bp.alpha_plus
    b = bp.beta_minus - bp.beta_plus
    for i in range(2):
        for r in range(-r_window, r_window + 1):
            if near_zero_mod_2pi_i(y_predicate(t, a, b, eta, N, i, r), margin):
                return False
        for k, m in itertools.product(range(2), repeat=2):
            if near_zero_mod_2pi_i(x_value(bp, eta, i, N, k, m), margin):
                return False
    return True


def sample_boundary(N: int, eta: complex, rng: np.random.Generator, margin: float = DEFAULT_MARGIN) -> BoundaryParams:
    def draw():
        return BoundaryParams(*(complex_box(rng) for _ in range(6)))

    return _rejecting(draw, lambda bp: boundary_ok(bp, N, eta, margin), "boundary")


def _random_alpha_beta(rng):
    return [complex_box(rng) for _ in range(6)]


def construct_y_zero(N: int, eta: complex, i: int, M: int, rng: np.random.Generator,
                     margin: float = DEFAULT_MARGIN) -> BoundaryParams:
    """Boundary point with ``Y^(i,2M) = 0`` exactly (``tau_-`` solved for), other ``Y`` generic."""
    def draw():
        tp, ap, bp_, _, am, bm = _random_alpha_beta(rng)
        S = am + ap + bm - bp_
        tm = tp - (-1) ** i * ((N - 1 - 2 * M) * eta + S)
        return BoundaryParams.from_alpha_beta(tp, ap, bp_, tm, am, bm)

    def ok(bp):
        if abs(np.sinh(bp.zeta_plus)) < margin or abs(np.sinh(bp.zeta_minus)) < margin:
            return False
        zeros = near_zero_y(bp, N, eta, tol=margin, r_max=N + 1)
        return zeros == [(i, 2 * M)] and not any(
            near_zero_mod_2pi_i(x_value(bp, eta, j, N, k, m), margin)
            for j in range(2) for k in range(2) for m in range(2))

    return _rejecting(draw, ok, f"Y^({i},{2 * M}) = 0 boundary")


def m_lattice_triples(N: int) -> list[tuple[int, int, int]]:
    return [t for t in itertools.product(range(N), repeat=3) if 0 <= t[0] + t[2] - t[1] <= N - 1]


def construct_m_lattice(N: int, eta: complex, triple: tuple[int, int, int],
                        rng: np.random.Generator, margin: float = DEFAULT_MARGIN) -> BoundaryParams:
    """Boundary point realizing the lattice constraints for the integer ``triple``."""
    rpp, rmp, rmm = triple

    def draw():
        tp, ap, bp_ = complex_box(rng), complex_box(rng), complex_box(rng)
        am = (rmp - rpp) * eta - ap
        bm = bp_ + (rmm - rmp) * eta
        tm = tp + (N - 1 + rmm - 3 * rpp) * eta
        return BoundaryParams.from_alpha_beta(tp, ap, bp_, tm, am, bm)

    def ok(bp):
        return (abs(np.sinh(bp.zeta_plus)) > margin and abs(np.sinh(bp.zeta_minus)) > margin
                and abs(bp.kappa_plus) > margin and abs(bp.kappa_minus) > margin)

    return _rejecting(draw, ok, "lattice boundary")


def construct_diagonal(rng: np.random.Generator, margin: float = DEFAULT_MARGIN) -> BoundaryParams:
    def draw():
        return BoundaryParams(complex_box(rng), 0, complex_box(rng), complex_box(rng), 0, complex_box(rng))

    return _rejecting(draw, lambda bp: abs(np.sinh(bp.zeta_plus)) > margin and abs(np.sinh(bp.zeta_minus)) > margin,
                      "diagonal boundary")


def construct_normal(N: int, rng: np.random.Generator, regime: str, homogeneous: bool = False,
                     margin: float = DEFAULT_MARGIN) -> tuple[ChainParams, BoundaryParams]:
    """Parameters for which the transfer matrix is a normal operator.

    ``massless``: ``eta, zeta`` imaginary and ``xi`` real;
    ``massive``: ``eta, zeta`` real and ``xi`` imaginary.
    In both regimes ``kappa`` is real and ``tau`` imaginary, which is what
    ``T(lam)^H = T(conj(lam))`` requires for the K-matrix used here.
    """
    unit = 1j if regime == "massless" else 1.0
    other = 1.0 if regime == "massless" else 1j

    def real(low=0.1):
        return float(rng.choice([-1, 1]) * rng.uniform(low, 1.0))

    eta = unit * real(0.2)
    for _ in range(MAX_TRIES):
        xi = (0j,) * N if homogeneous else tuple(other * 0.5 * rng.uniform(-1, 1, N))
        chain = ChainParams(N, eta, xi, regime)
        if homogeneous or not chain.genericity_violations(margin):
            break
    for _ in range(MAX_TRIES):
        zp, kp, tp, zm, km, tm = (real() for _ in range(6))
        bp = BoundaryParams(unit * zp, kp, 1j * tp, unit * zm, km, 1j * tm)
        if abs(np.sinh(bp.zeta_plus)) > margin and abs(np.sinh(bp.zeta_minus)) > margin:
            return chain, bp
    raise RuntimeError("could not sample a normal-regime boundary")


def sample_xxx_boundary(rng: np.random.Generator, margin: float = DEFAULT_MARGIN,
                        xi_b_zero: bool = False) -> XXXBoundary:
    def draw():
        return XXXBoundary(complex_box(rng), complex_box(rng), 0j if xi_b_zero else complex_box(rng))

    def ok(b):
        # 1 - sqrt(1 + xi_b^2) is the scale of the inhomogeneous term
        return (abs(b.p) > margin and abs(b.q) > margin
                and (xi_b_zero or (abs(1 - b.root) > margin and abs(1 + b.xi_b ** 2) > margin)))

    return _rejecting(draw, ok, "XXX boundary")


def sample_xxx_chain(N: int, rng: np.random.Generator, margin: float = DEFAULT_MARGIN,
                     homogeneous: bool = False, eta: complex | None = None) -> ChainParams:
    # inhomogeneities spread wide compared with eta keep the node-based Q solve well conditioned
    if eta is None:
        eta = _rejecting(lambda: complex_box(rng, scale=0.5), lambda e: abs(e) > 0.15, "eta")
    if homogeneous:
        return ChainParams.homogeneous(N, eta)

    def ok(xi):
        chain = ChainParams(N, eta, xi)
        w0 = (np.array(xi) - eta / 2) ** 2
        return (not chain.genericity_violations(margin, period=0)
                and np.all(np.abs(w0 - eta * eta / 4) > margin) and np.all(np.abs(np.array(xi)) > margin))

    xi = _rejecting(lambda: tuple(complex_box(rng, N, scale=2.0)), ok, "inhomogeneities")
    return ChainParams(N, eta, xi)
