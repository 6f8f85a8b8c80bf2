"""Scalar functions of the separated-variables characterization.

Everything here is a function of the chain and boundary data alone, except
:func:`spectrum_extract`, which reads eigenvalue functions off the transfer
matrix by one diagonalization plus Rayleigh quotients.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSpectrum, PoleAtZero, SingularBoundary
from .model6v import BoundaryParams, TransferFamily
from .numerics import (DEFAULT_TOL, EvenTrigPoly, Tolerances, arccosh_principal, eig_dense, near_zero_mod_2pi_i,
                       trig_interpolate, variable)

DEFAULT_ANCHOR_SHIFT = 0.37 + 0.21j


@dataclass(frozen=True, eq=False)
class SOVFunctions:
    """Model data entering the quadratic system and the Baxter equation.

    ``A(lam) = P(lam) * G(lam)`` where ``P = p0 + p1 * s(lam)`` carries the
    simple poles at ``pole_points`` (``s ~ 1 / (2 (lam - pole))``) and ``G``
    is entire.  ``g`` is empty and ``f`` is ``None`` when the interpolation
    nodes degenerate (homogeneous chain).
    """

    model: str
    N: int
    eta: complex
    basis: str
    zeta0: np.ndarray
    zeta1: np.ndarray
    G: Callable[[complex], complex]
    prefactor: Callable[[complex], complex]
    pole_points: tuple
    pole_split: tuple
    pole_distance: Callable[[complex], float]
    f: EvenTrigPoly | None
    g: tuple
    q: np.ndarray
    q_qdet: np.ndarray
    F: EvenTrigPoly
    F0: complex
    q_leading: complex
    extras: dict = field(default_factory=dict)

    @property
    def interpolable(self) -> bool:
        return len(self.g) == self.N

    @property
    def degree(self) -> int:
        """Degree of eigenvalue functions in the even variable."""
        return self.N + 2 if self.model == "xxz" else self.N + 1

    def var(self, lam):
        return variable(lam, self.basis)

    def A(self, lam: complex, tol: Tolerances = DEFAULT_TOL) -> complex:
        return big_A(lam, self, tol)


def big_A(lam: complex, fns: SOVFunctions, tol: Tolerances = DEFAULT_TOL) -> complex:
    """The coefficient function multiplying ``Q(lam - eta)`` in the Baxter equation."""
    if fns.pole_distance(lam) < tol.node:
        raise PoleAtZero(f"A(lam) has a simple pole at lam={lam}")
    return complex(fns.prefactor(lam) * fns.G(lam))


# trigonometric model

def inhomogeneous_constant(bp: BoundaryParams, N: int, eta: complex) -> complex:
    """``F_0``: vanishes exactly on the hyperplanes ``Y^(i,2N) = 0``."""
    if abs(np.sinh(bp.zeta_plus)) < 1e-14 or abs(np.sinh(bp.zeta_minus)) < 1e-14:
        raise SingularBoundary("sinh(zeta) vanishes")
    if not bp.has_alpha_beta:
        return 0j
    shift = bp.alpha_plus + bp.alpha_minus - bp.beta_plus + bp.beta_minus - (N + 1) * eta
    return complex(2 * bp.kappa_plus * bp.kappa_minus * (np.cosh(bp.tau_plus - bp.tau_minus) - np.cosh(shift))
                   / (np.sinh(bp.zeta_plus) * np.sinh(bp.zeta_minus)))


def nodes_separated(nodes: np.ndarray, edge_roots: Sequence[complex], tol: float) -> bool:
    """Nodes pairwise distinct and away from the fixed roots ``edge_roots``."""
    pts = list(nodes) + list(edge_roots)
    return all(abs(pts[i] - pts[j]) > tol for i in range(len(pts)) for j in range(min(i, len(nodes))))


def lagrange_g(nodes: np.ndarray, edge_roots: Sequence[complex], basis: str) -> tuple:
    """``g_a(v) = E(v)/E(v_a) * prod_{b != a} (v - v_b)/(v_a - v_b)`` with ``E = prod(v - e)``."""
    out = []
    edge = EvenTrigPoly.from_roots(list(edge_roots), 1.0, basis)
    for a in range(nodes.size):
        others = np.delete(nodes, a)
        base = EvenTrigPoly.from_roots(list(others), 1.0 / np.prod(nodes[a] - others), basis)
        out.append(edge * base * (1.0 / edge.at(nodes[a])))
    return tuple(out)


def build_sov_functions(fam: TransferFamily, tol: Tolerances = DEFAULT_TOL) -> SOVFunctions:
    """Assemble every scalar function of the XXZ characterization for ``fam``."""
    chain, bp = fam.chain, fam.boundary
    N, eta = chain.N, chain.eta
    c = np.cosh(eta)
    xi = np.array(chain.xi)
    zeta0, zeta1 = xi - eta / 2, xi + eta / 2

    def G(lam):
        return (-1) ** N * fam.g_plus(lam) * fam.g_minus(lam) * fam.a(lam) * fam.d(-lam)

    def prefactor(lam):
        return np.sinh(2 * lam + eta) / np.sinh(2 * lam)

    def pole_distance(lam):
        return abs(np.sinh(2 * lam)) / 2

    def A(lam):
        return prefactor(lam) * G(lam)

    u0 = np.cosh(2 * zeta0)
    u1 = np.cosh(2 * zeta1)
    C = (bp.kappa_plus * bp.kappa_minus * np.cosh(bp.tau_plus - bp.tau_minus)
         / (np.sinh(bp.zeta_plus) * np.sinh(bp.zeta_minus)))
    g, f = (), None
    if nodes_separated(u0, [c, -c], tol.node):
        g = lagrange_g(u0, [c, -c], "cosh2")
        A_c = A(eta / 2)
        A_mc = A(eta / 2 + 1j * np.pi / 2)
        prod0 = EvenTrigPoly.from_roots(list(u0), 1.0, "cosh2")
        lin_p = EvenTrigPoly([c, 1.0])
        lin_m = EvenTrigPoly([-c, 1.0])
        f = (lin_p * prod0 * (A_c / (2 * c * np.prod(c - u0)))
             - lin_m * prod0 * ((-1) ** N * A_mc / (2 * c * np.prod(c + u0)))
             + EvenTrigPoly([-c * c, 0, 1.0]) * prod0 * (2.0 ** (1 - N) * C))

    q = np.array([A(z) * A(-z + eta) for z in zeta1])
    q_qdet = np.array([fam.qdet_k_plus(x) * (_qdet_u_minus(fam, x))
                       / (np.sinh(eta + 2 * x) * np.sinh(eta - 2 * x)) for x in xi])

    F0 = inhomogeneous_constant(bp, N, eta)
    F = EvenTrigPoly([-c * c, 0, 1.0]) * EvenTrigPoly.from_roots(list(u0) + list(u1), F0, "cosh2")
    return SOVFunctions(
        model="xxz", N=N, eta=eta, basis="cosh2", zeta0=zeta0, zeta1=zeta1,
        G=G, prefactor=prefactor, pole_points=(0j, 0.5j * np.pi), pole_split=(c, np.sinh(eta)),
        pole_distance=pole_distance, f=f, g=g, q=q, q_qdet=q_qdet, F=F, F0=F0,
        q_leading=2.0 ** N,
        extras={"C": C, "g_plus_g_minus": lambda lam: fam.g_plus(lam) * fam.g_minus(lam), "a": fam.a, "d": fam.d},
    )


def _qdet_u_minus(fam: TransferFamily, lam: complex) -> complex:
    from .model6v import quantum_det_U
    return quantum_det_U(lam, fam)


def sov_residual(x: np.ndarray, fns: SOVFunctions, q: np.ndarray | None = None) -> np.ndarray:
    """``|x_n (sum_a g_a(zeta1_n) x_a + f(zeta1_n)) - q_n|`` for each n."""
    q = fns.q if q is None else np.asarray(q)
    x = np.asarray(x, dtype=complex)
    Gm = np.array([[ga(z) for ga in fns.g] for z in fns.zeta1])
    fz = np.array([fns.f(z) for z in fns.zeta1])
    return np.abs(x * (Gm @ x + fz) - q)


def sov_newton(x0: np.ndarray, fns: SOVFunctions, iters: int = 5) -> np.ndarray:
    """Newton polish of a solution of the quadratic system."""
    x = np.asarray(x0, dtype=complex).copy()
    Gm = np.array([[ga(z) for ga in fns.g] for z in fns.zeta1])
    fz = np.array([fns.f(z) for z in fns.zeta1])
    for _ in range(iters):
        inner = Gm @ x + fz
        J = np.diag(inner) + x[:, None] * Gm
        step = np.linalg.solve(J, x * inner - fns.q)
        x = x - step
        if np.linalg.norm(step) <= 1e-15 * max(np.linalg.norm(x), 1.0):
            break
    return x


def tau_interpolate(x: np.ndarray, fns: SOVFunctions) -> EvenTrigPoly:
    """``tau = f + sum_a g_a x_a``."""
    if not fns.interpolable:
        raise ValueError("interpolation nodes coincide; use sampled reconstruction")
    tau = fns.f
    for ga, xa in zip(fns.g, x):
        tau = tau + ga * complex(xa)
    return tau


# boundary predicates

def y_predicate(tau_diff: complex, alpha_sum: complex, beta_diff: complex,
                eta: complex, N: int, i: int, r: int) -> complex:
    return complex(tau_diff + (-1) ** i * ((N - 1 - r) * eta + alpha_sum + beta_diff))


def boundary_combinations(bp: BoundaryParams, eps: tuple = (1, 1, 1)) -> tuple[complex, complex, complex]:
    """``(tau_- - tau_+, alpha_- + alpha_+, beta_- - beta_+)`` after the sign flips ``eps``."""
    et, ea, eb = eps
    return (et * (bp.tau_minus - bp.tau_plus), ea * (bp.alpha_minus + bp.alpha_plus),
            eb * (bp.beta_minus - bp.beta_plus))


def y_table(bp: BoundaryParams, N: int, eta: complex, eps: tuple = (1, 1, 1)) -> np.ndarray:
    """``Y^(i,2r)`` for ``i in {0,1}`` and ``r = 0..N`` (shape ``(2, N+1)``)."""
    t, a, b = boundary_combinations(bp, eps)
    return np.array([[y_predicate(t, a, b, eta, N, i, 2 * r) for r in range(N + 1)] for i in range(2)])


def x_value(bp: BoundaryParams, eta: complex, i: int, r: int, k: int, m: int) -> complex:
    return complex((-1) ** i * (1 - r) * eta + bp.tau_minus - bp.tau_plus
                   + (-1) ** k * (bp.alpha_minus + bp.beta_minus)
                   - (-1) ** m * (bp.alpha_plus - bp.beta_plus) + 1j * np.pi * (k + m))


def inhom_conditions_hold(bp: BoundaryParams, N: int, eta: complex, eps: tuple = (1, 1, 1),
                          tol: float = DEFAULT_TOL.gen) -> bool:
    """No ``Y^(i,2r)`` with ``r < N`` vanishes (mod ``2 pi i``) for the flipped parameters."""
    if not bp.has_alpha_beta:
        return False
    Y = y_table(bp, N, eta, eps)[:, :N]
    return not any(near_zero_mod_2pi_i(y, tol) for y in Y.ravel())


def near_zero_y(bp: BoundaryParams, N: int, eta: complex, eps: tuple = (1, 1, 1),
                tol: float = DEFAULT_TOL.gen, r_max: int | None = None) -> list:
    """Labels ``(i, 2r)`` of vanishing ``Y`` predicates, ``r = 0..r_max``."""
    r_max = N if r_max is None else r_max
    t, a, b = boundary_combinations(bp, eps)
    return [(i, 2 * r) for i in range(2) for r in range(r_max + 1)
            if near_zero_mod_2pi_i(y_predicate(t, a, b, eta, N, i, 2 * r), tol)]


def m_lattice_triples(bp: BoundaryParams, N: int, eta: complex, tol: float = DEFAULT_TOL.gen) -> list:
    """Integer triples ``(r_pp, r_mp, r_mm)`` realizing the lattice constraints at ``bp``."""
    hits = []
    for rpp, rmp, rmm in itertools.product(range(N), repeat=3):
        if not 0 <= rpp + rmm - rmp <= N - 1:
            continue
        conds = (bp.alpha_plus + bp.alpha_minus - (rmp - rpp) * eta,
                 bp.beta_minus - bp.beta_plus - (rmm - rmp) * eta,
                 bp.tau_minus - bp.tau_plus - (N - 1 + rmm - 3 * rpp) * eta)
        if all(near_zero_mod_2pi_i(c, tol) for c in conds):
            hits.append((rpp, rmp, rmm))
    return hits


@dataclass(frozen=True, eq=False)
class BoundaryClass:
    in_N_SOV: bool
    Y_table: np.ndarray | None
    X_table: np.ndarray | None
    in_M_lattice: bool
    diagonal: bool = False
    Y_zero: tuple = ()
    M_triples: tuple = ()

    def to_json(self) -> dict:
        def cplx(arr):
            return None if arr is None else np.stack([arr.real, arr.imag], -1).tolist()
        return {"in_N_SOV": self.in_N_SOV, "in_M_lattice": self.in_M_lattice, "diagonal": self.diagonal,
                "Y_zero": [list(p) for p in self.Y_zero], "M_triples": [list(t) for t in self.M_triples],
                "Y_table": cplx(self.Y_table), "X_table": cplx(self.X_table)}


def classify_boundary(bp: BoundaryParams, N: int, eta: complex, tol: float = DEFAULT_TOL.gen) -> BoundaryClass:
    """Evaluate the exceptional-set predicates for a boundary point.

    All vanishing tests are taken modulo ``2 pi i``; ``alpha`` and ``beta``
    are only defined up to such shifts.
    """
    if not bp.has_alpha_beta:
        return BoundaryClass(False, None, None, False, diagonal=True)
    Y = y_table(bp, N, eta)
    X = np.array([[[x_value(bp, eta, i, N, k, m) for m in range(2)] for k in range(2)] for i in range(2)])
    zero_x = [any(near_zero_mod_2pi_i(v, tol) for v in X[i].ravel()) for i in range(2)]
    triples = m_lattice_triples(bp, N, eta, tol)
    return BoundaryClass(
        in_N_SOV=bool(zero_x[0] and zero_x[1]), Y_table=Y, X_table=X,
        in_M_lattice=bool(triples), Y_zero=tuple(near_zero_y(bp, N, eta, tol=tol)), M_triples=tuple(triples),
    )


# spectrum

@dataclass(frozen=True, eq=False)
class SpectrumRecord:
    index: int
    tau: EvenTrigPoly
    x: np.ndarray
    vector: np.ndarray
    left: np.ndarray
    anchor: complex
    anchor_value: complex
    eig_residual: float


def _anchors(eta: complex, first: complex | None, count: int = 5) -> list:
    base = eta / 2 + DEFAULT_ANCHOR_SHIFT if first is None else complex(first)
    shifts = [0, 0.113 - 0.071j, -0.089 + 0.153j, 0.207 + 0.049j, -0.161 - 0.127j]
    return [base + s for s in shifts[:count]]


def _sample_points(fns: SOVFunctions, count: int) -> list:
    """Points whose even variable lies on the unit circle, where the monomial fit is well conditioned."""
    v = np.exp(2j * np.pi * (np.arange(count) + 0.25) / count)
    if fns.basis == "cosh2":
        return [arccosh_principal(x) / 2 for x in v]
    return [complex(np.sqrt(x)) for x in v]


def spectrum_extract(fam: TransferFamily, fns: SOVFunctions, anchor: complex | None = None,
                     tol: Tolerances = DEFAULT_TOL, hermitian_hint: bool = False) -> list[SpectrumRecord]:
    """All ``2**N`` eigenvalue functions of ``T`` as even polynomials.

    Diagonalizes ``T`` at an anchor point and evaluates two-sided Rayleigh
    quotients ``w^H T(lam) v / w^H v`` on the joint eigenvectors, either at the
    interpolation nodes or, for coinciding nodes, at fresh sample points.
    """
    failures = []
    for lam_star in _anchors(fns.eta, anchor):
        T_star = fam.transfer(lam_star)
        pairs = eig_dense(T_star, hermitian_hint, left=True, max_dim=max(64, T_star.shape[0]))
        vals = np.array([p.value for p in pairs])
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        if vals.size > 1 and np.min(gaps) < tol.sep * max(np.max(np.abs(vals)), 1.0):
            failures.append(f"anchor {lam_star}: eigenvalue gap {np.min(gaps):.2e}")
            continue
        V = np.stack([p.vector for p in pairs], axis=1)
        W = np.stack([p.left for p in pairs], axis=1)
        norms = np.einsum("ij,ij->j", W.conj(), V)

        def rayleigh(lam):
            return np.einsum("ij,ij->j", W.conj(), fam.transfer(lam) @ V) / norms

        if fns.interpolable:
            X = np.stack([rayleigh(z) for z in fns.zeta0], axis=1)
            taus = [tau_interpolate(X[j], fns) for j in range(vals.size)]
        else:
            pts = _sample_points(fns, fns.degree + 1)
            S = np.stack([rayleigh(p) for p in pts], axis=1)
            v = fns.var(np.array(pts))
            taus = [trig_interpolate(list(zip(v, S[j])), fns.degree, fns.basis, tol.override(eps_lin=1e-6))
                    for j in range(vals.size)]
            X = np.zeros((vals.size, 0), dtype=complex)
        sep = min((taus[i].distance(taus[j]) for i in range(len(taus)) for j in range(i)), default=np.inf)
        if sep <= tol.sep:
            failures.append(f"anchor {lam_star}: tau separation {sep:.2e}")
            continue
        return [SpectrumRecord(j, taus[j], X[j], V[:, j], W[:, j], lam_star, vals[j], pairs[j].residual)
                for j in range(vals.size)]
    raise DegenerateSpectrum("; ".join(failures))


def min_separation(records: Sequence[SpectrumRecord]) -> float:
    return min((records[i].tau.distance(records[j].tau) for i in range(len(records)) for j in range(i)),
               default=np.inf)
