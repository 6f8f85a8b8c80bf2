"""Rational (XXX) specialization: diagonal ``K_-``, non-diagonal ``K_+``.

Even functions of ``lam`` are polynomials in ``w = lam**2``; the Baxter and
SOV routines of :mod:`sov` and :mod:`baxter` run unchanged on the
:class:`~sovbaxter.sov.SOVFunctions` built here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularBoundary
from .model6v import (SX, SY, SZ, BoundaryParams, ChainParams, TransferFamily, site_operator)
from .numerics import DEFAULT_TOL, EvenTrigPoly, Tolerances
from .sov import SOVFunctions, lagrange_g, nodes_separated


def xxx_r_matrix(lam: complex, eta: complex) -> np.ndarray:
    """Rational 6-vertex R-matrix ``lam + eta P``."""
    return np.array([[lam + eta, 0, 0, 0], [0, lam, eta, 0], [0, eta, lam, 0], [0, 0, 0, lam + eta]], dtype=complex)


def _identity(x):
    return x


@dataclass(frozen=True)
class XXXBoundary:
    """``p`` parametrizes ``K_-``; ``q`` and ``xi_b`` parametrize ``K_+``.

    ``sqrt_sign`` selects the branch of ``sqrt(1 + xi_b**2)`` (+1: principal).
    """

    p: complex
    q: complex
    xi_b: complex
    sqrt_sign: int = 1

    def __post_init__(self):
        for name in ("p", "q", "xi_b"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.sqrt_sign not in (1, -1):
            raise ValueError("sqrt_sign must be +1 or -1")

    @property
    def root(self) -> complex:
        return self.sqrt_sign * complex(np.sqrt(1 + self.xi_b ** 2))


class XXXTransferFamily(TransferFamily):
    """Double-row transfer matrix of the rational chain."""

    r_func = staticmethod(xxx_r_matrix)
    odd_fn = staticmethod(_identity)

    def __init__(self, chain: ChainParams, boundary: XXXBoundary, tol: Tolerances = DEFAULT_TOL):
        # the trigonometric boundary slot is unused; keep a harmless placeholder
        super().__init__(chain, BoundaryParams(1.0, 0, 0, 1.0, 0, 0), tol)
        self.xxx_boundary = boundary

    def k_minus(self, lam: complex) -> np.ndarray:
        p, eta = self.xxx_boundary.p, self.chain.eta
        return np.array([[lam - eta / 2 + p, 0], [0, p - lam + eta / 2]], dtype=complex)

    def k_plus(self, lam: complex) -> np.ndarray:
        b, eta = self.xxx_boundary, self.chain.eta
        m = lam + eta / 2
        return np.array([[m + b.q, b.xi_b * m], [b.xi_b * m, b.q - m]], dtype=complex)

    def a(self, lam: complex) -> complex:
        return complex(np.prod(lam - np.array(self.chain.xi) + self.chain.eta / 2))

    def g_minus(self, lam: complex) -> complex:
        return complex(lam - self.chain.eta / 2 + self.xxx_boundary.p)

    def g_plus(self, lam: complex) -> complex:
        return complex(self.xxx_boundary.root * (lam - self.chain.eta / 2) + self.xxx_boundary.q)

    def qdet_k_plus(self, lam: complex) -> complex:
        b = self.xxx_boundary
        return complex(-2 * (lam + self.chain.eta) * ((1 + b.xi_b ** 2) * lam ** 2 - b.q ** 2))


def xxx_transfer(lam: complex, fam: XXXTransferFamily) -> np.ndarray:
    return fam.transfer(lam)


def xxx_hamiltonian(chain: ChainParams, boundary: XXXBoundary) -> np.ndarray:
    """Open XXX Hamiltonian matching the derivative of the transfer matrix.

    The ``K_-`` field acts on site 1 and the ``K_+`` field on site N, both
    scaled by ``eta``.
    """
    N, eta = chain.N, chain.eta
    if not chain.is_homogeneous:
        raise ValueError("xxx_hamiltonian requires a homogeneous chain")
    if boundary.p == 0 or boundary.q == 0:
        raise SingularBoundary("p and q must be non-zero")
    D = 2 ** N
    H = np.zeros((D, D), dtype=complex)
    for i in range(1, N):
        for P in (SX, SY, SZ):
            H += site_operator(P, i, N) @ site_operator(P, i + 1, N)
    H += eta / boundary.p * site_operator(SZ, 1, N)
    H += eta / boundary.q * (site_operator(SZ, N, N) + boundary.xi_b * site_operator(SX, N, N))
    return H


def xxx_qdet_product(lam: complex, chain: ChainParams, boundary: XXXBoundary) -> complex:
    """Explicit product form of ``det_q K_+(lam) det_q U_-(lam)``."""
    eta, xi = chain.eta, np.array(chain.xi)
    b = boundary
    return complex(4 * (lam ** 2 - eta ** 2) * (lam ** 2 - b.p ** 2) * ((1 + b.xi_b ** 2) * lam ** 2 - b.q ** 2)
                   * np.prod((lam ** 2 - (xi + eta) ** 2) * (lam ** 2 - (xi - eta) ** 2)))


def build_xxx_functions(fam: XXXTransferFamily, tol: Tolerances = DEFAULT_TOL) -> SOVFunctions:
    chain, b = fam.chain, fam.xxx_boundary
    N, eta = chain.N, chain.eta
    xi = np.array(chain.xi)
    zeta0, zeta1 = xi - eta / 2, xi + eta / 2
    s = b.root

    def G(lam):
        return (lam - eta / 2 + b.p) * (s * (lam - eta / 2) + b.q) * np.prod((lam - zeta0) * (lam + zeta1))

    def prefactor(lam):
        return (2 * lam + eta) / (2 * lam)

    def A(lam):
        return prefactor(lam) * G(lam)

    w0, w1 = zeta0 ** 2, zeta1 ** 2
    e = eta * eta / 4
    g, f = (), None
    if nodes_separated(w0, [e], tol.node):
        g = lagrange_g(w0, [e], "square")
        prod0 = EvenTrigPoly.from_roots(list(w0), 1.0, "square")
        f = prod0 * (A(eta / 2) / np.prod(e - w0)) + EvenTrigPoly([-e, 1.0], "square") * prod0 * 2.0
    q = np.array([A(z) * A(-z + eta) for z in zeta1])
    q_qdet = np.array([xxx_qdet_product(x, chain, b) / (4 * x * x - eta * eta) for x in xi])
    F0 = 2 * (1 - s)
    F = EvenTrigPoly([-e, 1.0], "square") * EvenTrigPoly.from_roots(list(w0) + list(w1), F0, "square")
    return SOVFunctions(
        model="xxx", N=N, eta=eta, basis="square", zeta0=zeta0, zeta1=zeta1,
        G=G, prefactor=prefactor, pole_points=(0j,), pole_split=(1.0, eta),
        pole_distance=lambda lam: abs(lam), f=f, g=g, q=q, q_qdet=q_qdet, F=F, F0=complex(F0),
        q_leading=1.0, extras={"root": s},
    )


def xxx_big_A(lam: complex, fns: SOVFunctions) -> complex:
    from .sov import big_A
    return big_A(lam, fns)


def homogeneous_forms(fns: SOVFunctions):
    """Closed forms at ``xi = 0``.

    ``F = 2 (1 - sqrt(1+xi_b^2)) (lam^2 - eta^2/4)^(2N+1)`` is the limit of
    the inhomogeneous term used here.  ``F_reference`` is the same shape
    with the published prefactor ``8 (1 - sqrt(1+xi_b^2))``.
    """
    from .baxter import HomogeneousForms
    N, eta = fns.N, fns.eta
    s = fns.extras["root"]
    e = eta * eta / 4
    shape = EvenTrigPoly.from_roots([e] * (2 * N + 1), 1.0, "square")
    F = shape * (2 * (1 - s))
    F_ref = shape * (8 * (1 - s))

    def A(lam):
        return fns.prefactor(lam) * fns.G(lam)

    return HomogeneousForms(F, A, F_ref)


# pipeline wrappers mirroring the trigonometric names

def xxx_sov_residual(x, fns):
    from .sov import sov_residual
    return sov_residual(x, fns)


def xxx_tau_interpolate(x, fns):
    from .sov import tau_interpolate
    return tau_interpolate(x, fns)


def xxx_solve_q(tau, fns, tol: Tolerances = DEFAULT_TOL):
    from .baxter import solve_q
    return solve_q(tau, fns, None, tol)


def xxx_verify_baxter(tau, Q, fns, grid_size=None, seed=0):
    from .baxter import verify_baxter
    return verify_baxter(tau, Q, fns, grid_size, seed)
