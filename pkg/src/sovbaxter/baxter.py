"""Inhomogeneous Baxter T-Q machinery built on top of :mod:`sov`.

Model-agnostic: every routine works on :class:`~sovbaxter.sov.SOVFunctions`,
so the trigonometric (``u = cosh 2 lam``) and rational (``w = lam**2``)
chains share the code.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DuplicateNode, IllConditioned, RootOnPole, Singular, SingularC
from .model6v import BoundaryParams
from .numerics import (DEFAULT_TOL, EvenTrigPoly, Tolerances, arccosh_principal, poly_roots,
                       root_backward_errors, solve_linear)
from .sov import SOVFunctions, big_A, inhomogeneous_constant, near_zero_y

LIMIT_RADIUS = 1e-5
GRID_POLE_EXCLUSION = 0.05


@dataclass(frozen=True, eq=False)
class QPolynomial:
    form: EvenTrigPoly
    roots_u: np.ndarray
    roots_lambda: np.ndarray

    @classmethod
    def from_poly(cls, form: EvenTrigPoly, tol: Tolerances = DEFAULT_TOL) -> "QPolynomial":
        if form.degree == 0:
            return cls(form, np.zeros(0, dtype=complex), np.zeros(0, dtype=complex))
        roots = poly_roots(form, tol)
        return cls(form, roots, np.array([lambda_from_variable(r, form.basis) for r in roots]))

    @property
    def degree(self) -> int:
        return self.form.degree

    def __call__(self, lam):
        return self.form(lam)

    def root_errors(self) -> np.ndarray:
        return root_backward_errors(self.form.coeffs, self.roots_u)

    def to_json(self) -> dict:
        return {"form": self.form.to_json(),
                "roots_u": [[r.real, r.imag] for r in self.roots_u],
                "roots_lambda": [[r.real, r.imag] for r in self.roots_lambda]}


def lambda_from_variable(v: complex, basis: str) -> complex:
    """A spectral parameter with ``cosh 2 lam = v`` (or ``lam**2 = v``); any branch serves."""
    if basis == "cosh2":
        return arccosh_principal(v) / 2
    return complex(np.sqrt(complex(v)))


def f0(bp: BoundaryParams, N: int, eta: complex) -> complex:
    """Constant multiplying the inhomogeneous term of the trigonometric Baxter equation."""
    return inhomogeneous_constant(bp, N, eta)


def big_F(lam: complex, fns: SOVFunctions) -> complex:
    return complex(fns.F(lam))


def big_F_product(lam: complex, fns: SOVFunctions, a: Callable, d: Callable) -> complex:
    """Factorized form ``4^N F_0 (u^2 - cosh^2 eta) a(lam) a(-lam) d(lam) d(-lam)``."""
    u = np.cosh(2 * lam)
    return complex(4.0 ** fns.N * fns.F0 * (u * u - np.cosh(fns.eta) ** 2) * a(lam) * a(-lam) * d(lam) * d(-lam))


def _derivative(fn: Callable[[complex], complex], x: complex, h: float = 1e-3) -> complex:
    """Fourth-order central difference."""
    return (8 * (fn(x + h) - fn(x - h)) - (fn(x + 2 * h) - fn(x - 2 * h))) / (12 * h)


def z_q(lam: complex, Q: Callable[[complex], complex], fns: SOVFunctions) -> complex:
    """``A(lam) Q(lam - eta) + A(-lam) Q(lam + eta)``, continued through the poles of ``A``.

    At a pole ``lam0`` of the prefactor ``p0 + p1 s(lam)`` the two simple
    poles cancel and ``Z_Q(lam0) = 2 p0 G(lam0) + p1 G'(lam0)`` with
    ``G(lam) = G_A(lam) Q(lam - eta)``.
    """
    eta = fns.eta
    for pole in fns.pole_points:
        if abs(lam - pole) < LIMIT_RADIUS:
            p0, p1 = fns.pole_split

            def G(x):
                return fns.G(x) * Q(x - eta)

            return complex(2 * p0 * G(pole) + p1 * _derivative(G, pole))
    return complex(fns.prefactor(lam) * fns.G(lam) * Q(lam - eta) + fns.prefactor(-lam) * fns.G(-lam) * Q(lam + eta))


def system1_residual(tau: EvenTrigPoly, fns: SOVFunctions) -> np.ndarray:
    """``|tau(zeta0_b) tau(zeta1_b) - A(zeta1_b) A(-zeta0_b)| / |q_b|`` per node."""
    out = []
    for z0, z1, q in zip(fns.zeta0, fns.zeta1, fns.q):
        out.append(abs(tau(z0) * tau(z1) - big_A(z1, fns) * big_A(-z0, fns)) / max(abs(q), 1e-300))
    return np.array(out)


def _lagrange_node_polys(v0: np.ndarray, basis: str) -> list[EvenTrigPoly]:
    polys = []
    for a in range(v0.size):
        others = np.delete(v0, a)
        polys.append(EvenTrigPoly.from_roots(list(others), 1.0 / np.prod(v0[a] - others), basis))
    return polys


def c_matrix(tau: EvenTrigPoly, fns: SOVFunctions) -> np.ndarray:
    """``c_ab = L_a(v(zeta1_b)) - delta_ab tau(zeta0_b) / A(-zeta0_b)``."""
    v0, v1 = fns.var(fns.zeta0), fns.var(fns.zeta1)
    L = _lagrange_node_polys(v0, fns.basis)
    c = np.array([[L[a].at(v1[b]) for b in range(fns.N)] for a in range(fns.N)], dtype=complex)
    for b in range(fns.N):
        c[b, b] -= tau(fns.zeta0[b]) / big_A(-fns.zeta0[b], fns)
    return c


def solve_q(tau: EvenTrigPoly, fns: SOVFunctions, bp: BoundaryParams | None = None,
            tol: Tolerances = DEFAULT_TOL) -> tuple[QPolynomial, complex]:
    """Degree-N ``Q`` through its node values, from the ``c_ab`` linear system.

    Raises :class:`SingularC` when the system is numerically singular; the
    exception lists the ``Y`` predicates that vanish at ``bp``.
    """
    N = fns.N
    if not fns.interpolable:
        raise DuplicateNode("interpolation nodes coincide; the node-based Q solve needs generic inhomogeneities")
    v0, v1 = fns.var(fns.zeta0), fns.var(fns.zeta1)
    c = c_matrix(tau, fns)
    det_c = complex(np.linalg.det(c))
    hadamard = np.prod(np.linalg.norm(c, axis=0))
    near = near_zero_y(bp, N, fns.eta) if bp is not None and bp.has_alpha_beta and fns.model == "xxz" else []
    if hadamard == 0 or abs(det_c) < tol.pivot * hadamard:
        raise SingularC(f"|det c| = {abs(det_c):.3e} relative {abs(det_c) / max(hadamard, 1e-300):.3e}",
                        det_c, near)
    rhs = np.array([-fns.q_leading * np.prod(v1[b] - v0) for b in range(N)])
    try:
        qn = solve_linear(c.T, rhs, tol.override(eps_lin=1e-8))
    except Singular as exc:
        raise SingularC(str(exc), det_c, near) from exc
    form = EvenTrigPoly.from_roots(list(v0), fns.q_leading, fns.basis)
    for Li, qa in zip(_lagrange_node_polys(v0, fns.basis), qn):
        form = form + Li * complex(qa)
    return QPolynomial.from_poly(form, tol), det_c


def grid_points(fns: SOVFunctions, size: int, seed: int = 0) -> np.ndarray:
    """Seeded random points in the unit complex box, kept away from the poles of ``A``."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < size:
        lam = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if all(abs(lam - p) > GRID_POLE_EXCLUSION and abs(lam + p) > GRID_POLE_EXCLUSION for p in fns.pole_points):
            pts.append(lam)
    return np.array(pts)


def baxter_residuals(tau: EvenTrigPoly, Q: Callable, fns: SOVFunctions, points: Sequence[complex],
                     F: EvenTrigPoly | None = None) -> np.ndarray:
    F = fns.F if F is None else F
    out = []
    for lam in points:
        tq = tau(lam) * Q(lam)
        out.append(abs(tq - z_q(lam, Q, fns) - F(lam)) / (1 + abs(tq)))
    return np.array(out)


def verify_baxter(tau: EvenTrigPoly, Q: Callable, fns: SOVFunctions, grid_size: int | None = None,
                  seed: int = 0, F: EvenTrigPoly | None = None) -> float:
    """Max relative residual of ``tau Q = Z_Q + F`` on a seeded random grid."""
    size = 4 * fns.N + 8 if grid_size is None else grid_size
    return float(np.max(baxter_residuals(tau, Q, fns, grid_points(fns, size, seed), F)))


def construction_points(fns: SOVFunctions) -> list[complex]:
    """Points where the Baxter equation holds by construction of ``Q``."""
    eta = fns.eta
    pts = list(fns.zeta0) + list(fns.zeta1) + [eta / 2, -eta / 2]
    if fns.model == "xxz":
        pts += [eta / 2 + 0.5j * np.pi, -eta / 2 - 0.5j * np.pi]
    return pts


def bethe_residuals(Q: QPolynomial, fns: SOVFunctions, F: EvenTrigPoly | None = None,
                    tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``|Z_Q(lam_a) + F(lam_a)|`` at each Bethe root, relative to the size of its terms.

    The scale is the larger of the local term sizes and their typical size on
    a grid, so roots at common zeros of ``A(lam)`` and ``A(-lam)`` (where the
    equation is vacuous) do not blow up the relative measure.
    """
    F = fns.F if F is None else F
    eta = fns.eta
    grid = grid_points(fns, 16, seed=7)
    typical = float(np.median([abs(big_A(x, fns) * Q(x - eta)) + abs(big_A(-x, fns) * Q(x + eta)) + abs(F(x))
                               for x in grid]))
    # compare in the even variable too: near u = cosh(2 pole) the map to lam is square-root sensitive
    pole_vars = [complex(fns.var(p)) for p in fns.pole_points]
    out = []
    for v, lam in zip(Q.roots_u, Q.roots_lambda):
        if fns.pole_distance(lam) < tol.node or any(abs(v - pv) < tol.node * max(1.0, abs(v)) for pv in pole_vars):
            raise RootOnPole(f"Bethe root {lam} sits on a pole of A")
        t1 = big_A(lam, fns) * Q(lam - eta)
        t2 = big_A(-lam, fns) * Q(lam + eta)
        t3 = F(lam)
        scale = max(abs(t1) + abs(t2) + abs(t3), typical)
        out.append(abs(t1 + t2 + t3) / max(scale, 1e-300))
    return np.array(out)


def collocation_solve_q(tau: EvenTrigPoly, fns: SOVFunctions, degree: int, leading: complex,
                        F: EvenTrigPoly | None = None, seed: int = 1, extra: int = 12,
                        tol: Tolerances = DEFAULT_TOL) -> QPolynomial:
    """Least-squares ``Q`` of given degree and leading coefficient solving ``tau Q = Z_Q + F``.

    The equation is linear in the free coefficients; it is imposed on a
    seeded grid with ``degree + extra`` points (rows scaled to unit size).
    """
    F = EvenTrigPoly.constant(0.0, fns.basis) if F is None else F
    eta = fns.eta
    pts = grid_points(fns, 2 * degree + fns.N + extra, seed)
    rows, rhs = [], []
    for lam in pts:
        v, vm, vp = fns.var(lam), fns.var(lam - eta), fns.var(lam + eta)
        Ap, Am = big_A(lam, fns), big_A(-lam, fns)
        t = tau(lam)
        phi = np.array([t * v ** k - Ap * vm ** k - Am * vp ** k for k in range(degree + 1)])
        scale = 1 + np.max(np.abs(phi)) * abs(leading)
        rows.append(phi[:degree] / scale)
        rhs.append((F(lam) - leading * phi[degree]) / scale)
    if degree > 0:
        coef, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    else:
        coef = np.zeros(0, dtype=complex)
    form = EvenTrigPoly(np.concatenate([coef, [leading]]), fns.basis)
    return QPolynomial.from_poly(form, tol)


@dataclass(frozen=True, eq=False)
class BaxterReport:
    Q: QPolynomial | None
    det_c: complex
    baxter_residual: float
    bae_residuals: np.ndarray
    regime: str
    system1_residual: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return (self.Q is not None and self.baxter_residual < DEFAULT_TOL.baxter
                and (self.bae_residuals.size == 0 or np.max(self.bae_residuals) < DEFAULT_TOL.bethe))

    def to_json(self) -> dict:
        return {"Q": None if self.Q is None else self.Q.to_json(), "det_c": [self.det_c.real, self.det_c.imag],
                "baxter_residual": self.baxter_residual, "bae_residuals": self.bae_residuals.tolist(),
                "regime": self.regime, "system1_residual": self.system1_residual, "note": self.note}


def baxter_pipeline(tau: EvenTrigPoly, fns: SOVFunctions, bp: BoundaryParams | None = None, seed: int = 0,
                    tol: Tolerances = DEFAULT_TOL) -> BaxterReport:
    """Solve for ``Q``, verify the Baxter equation on a fresh grid and the Bethe equations."""
    regime = "homogeneous_full" if fns.F.is_zero() else "inhomogeneous"
    s1 = float(np.max(system1_residual(tau, fns)))
    Q, det_c = solve_q(tau, fns, bp, tol)
    res = verify_baxter(tau, Q, fns, seed=seed)
    bae = bethe_residuals(Q, fns, tol=tol)
    return BaxterReport(Q, det_c, res, bae, regime, s1)


def homogeneous_fit(tau: EvenTrigPoly, fns: SOVFunctions, M: int, seed: int = 1,
                    tol: Tolerances = DEFAULT_TOL) -> tuple[QPolynomial, float]:
    """Best degree-M solution of the homogeneous equation and its fresh-grid residual."""
    lead = fns.q_leading ** (M / fns.N) if fns.N else 1.0
    Q = collocation_solve_q(tau, fns, M, lead, None, seed, tol=tol)
    zero = EvenTrigPoly.constant(0.0, fns.basis)
    return Q, verify_baxter(tau, Q, fns, 4 * fns.N + 8, seed + 1000, zero)


def degree_scan(tau: EvenTrigPoly, fns: SOVFunctions, max_degree: int | None = None, seed: int = 1,
                tol: Tolerances = DEFAULT_TOL) -> tuple[int, QPolynomial, float] | None:
    """Smallest degree M whose homogeneous solution verifies below ``tol.accept``.

    Used when the inhomogeneous term vanishes identically (diagonal ``K_+``).
    """
    max_degree = fns.N if max_degree is None else max_degree
    for M in range(max_degree + 1):
        Q, res = homogeneous_fit(tau, fns, M, seed, tol)
        if res < tol.accept:
            return M, Q, res
    return None


@dataclass(frozen=True, eq=False)
class MClassification:
    route: str
    Q: QPolynomial | None
    homogeneous_residual: float
    inhomogeneous_residual: float | None
    ambiguous: bool


def classify_eigenvalue_M(tau: EvenTrigPoly, fns: SOVFunctions, bp: BoundaryParams, M: int,
                          seed: int = 1, tol: Tolerances = DEFAULT_TOL) -> MClassification:
    """Split an eigenvalue between the degree-M homogeneous and degree-N inhomogeneous routes.

    ``route`` is ``"homogeneous"`` when the degree-M homogeneous residual is
    below ``tol.accept``; otherwise the inhomogeneous degree-N solve is run
    and ``route`` is ``"inhomogeneous"`` if it verifies, ``"none"`` if not.
    Residuals inside ``[ambiguous_low, ambiguous_high]`` set ``ambiguous``.
    """
    if not bp.has_alpha_beta:
        raise ValueError("classification needs non-diagonal boundaries")
    Q, res = homogeneous_fit(tau, fns, M, seed, tol)
    ambiguous = tol.ambiguous_low <= res <= tol.ambiguous_high
    if res < tol.accept:
        return MClassification("homogeneous", Q, res, None, ambiguous)
    try:
        Qn, _ = solve_q(tau, fns, bp, tol)
        inh = verify_baxter(tau, Qn, fns, seed=seed)
    except (SingularC, IllConditioned):
        return MClassification("none", None, res, None, ambiguous)
    route = "inhomogeneous" if inh < tol.baxter else "none"
    return MClassification(route, Qn, res, inh, ambiguous)


@dataclass(frozen=True, eq=False)
class HomogeneousForms:
    """Closed forms of ``F`` and ``A`` at vanishing inhomogeneities."""

    F: EvenTrigPoly
    A: Callable[[complex], complex]
    F_reference: EvenTrigPoly | None = None


def homogeneous_limit_forms(fns: SOVFunctions) -> HomogeneousForms:
    """Closed-form ``F`` and ``A`` for a homogeneous chain.

    XXZ: ``F = F_0 (u^2 - cosh^2 eta)(u - cosh eta)^(2N)``.  XXX: see
    :func:`sovbaxter.xxx.homogeneous_forms`, which also supplies the
    published normalization of ``F`` as ``F_reference``.
    """
    if fns.model == "xxx":
        from .xxx import homogeneous_forms
        return homogeneous_forms(fns)
    c = np.cosh(fns.eta)
    N = fns.N
    F = EvenTrigPoly([-c * c, 0, 1.0]) * EvenTrigPoly.from_roots([c] * (2 * N), fns.F0, "cosh2")
    gpgm = fns.extras["g_plus_g_minus"]
    eta = fns.eta

    def A(lam):
        return ((-1) ** N * np.sinh(2 * lam + eta) / np.sinh(2 * lam) * gpgm(lam)
                * (np.sinh(lam + eta / 2) * np.sinh(-lam - eta / 2)) ** N)

    return HomogeneousForms(F, A)
