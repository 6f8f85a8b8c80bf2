"""Trigonometric 6-vertex objects as explicit dense matrices.

The quantum space is ``H = C^2 (site 1) x ... x C^2 (site N)``; operators
acting on ``aux x H`` are ``2*2**N`` square matrices with the auxiliary
space as the most significant tensor factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularBoundary, StepFailure
from .numerics import DEFAULT_TOL, Tolerances, arcsinh_principal, near_zero_mod_2pi_i

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def site_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    """Embed a 2x2 operator on ``site`` (1-based) of an N-site chain."""
    out = np.ones((1, 1), dtype=complex)
    for n in range(1, N + 1):
        out = np.kron(out, op if n == site else I2)
    return out


def global_operator(op: np.ndarray, N: int) -> np.ndarray:
    """``op`` tensored onto every site."""
    out = np.ones((1, 1), dtype=complex)
    for _ in range(N):
        out = np.kron(out, op)
    return out


def r_matrix(lam: complex, eta: complex) -> np.ndarray:
    """Trigonometric 6-vertex R-matrix on ``C^2 x C^2``."""
    a = np.sinh(lam + eta)
    b = np.sinh(lam)
    c = np.sinh(eta)
    return np.array([[a, 0, 0, 0], [0, b, c, 0], [0, c, b, 0], [0, 0, 0, a]], dtype=complex)


def k_matrix(lam: complex, zeta: complex, kappa: complex, tau: complex, eta: complex,
             tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """General scalar solution of the reflection equation."""
    sz = np.sinh(zeta)
    if abs(sz) < tol.pivot ** 0.5:
        raise SingularBoundary(f"sinh(zeta) = {sz} vanishes")
    off = kappa * np.sinh(2 * lam - eta)
    return np.array([[np.sinh(lam - eta / 2 + zeta), off * np.exp(tau)],
                     [off * np.exp(-tau), np.sinh(zeta - lam + eta / 2)]], dtype=complex) / sz


def derive_alpha_beta(zeta: complex, kappa: complex) -> tuple[complex, complex]:
    """Principal-branch solution of ``sinh a cosh b = sinh z/2k``, ``cosh a sinh b = cosh z/2k``."""
    s = arcsinh_principal(np.exp(zeta) / (2 * kappa))
    d = arcsinh_principal(-np.exp(-zeta) / (2 * kappa))
    return (s + d) / 2, (s - d) / 2


def invert_alpha_beta(alpha: complex, beta: complex) -> tuple[complex, complex]:
    """Recover ``(zeta, kappa)`` from ``(alpha, beta)``.

    ``kappa`` is fixed up to sign; the sign is immaterial since
    ``(zeta + i pi, -kappa)`` gives the same K-matrix.
    """
    s = np.sinh(alpha) * np.cosh(beta)
    c = np.cosh(alpha) * np.sinh(beta)
    kappa = 1.0 / (2.0 * np.sqrt(complex(c * c - s * s)))
    zeta = complex(np.log(2 * kappa * (s + c)))
    return zeta, complex(kappa)


@dataclass(frozen=True)
class BoundaryParams:
    """Six boundary parameters and the derived ``alpha``/``beta`` pairs.

    ``alpha_*``/``beta_*`` are filled from the principal branch unless given
    explicitly; they stay ``None`` on a diagonal side (``kappa == 0``).
    """

    zeta_plus: complex
    kappa_plus: complex
    tau_plus: complex
    zeta_minus: complex
    kappa_minus: complex
    tau_minus: complex
    alpha_plus: complex | None = None
    beta_plus: complex | None = None
    alpha_minus: complex | None = None
    beta_minus: complex | None = None

    def __post_init__(self):
        for name in ("zeta_plus", "kappa_plus", "tau_plus", "zeta_minus", "kappa_minus", "tau_minus"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        for side in ("plus", "minus"):
            kappa = getattr(self, f"kappa_{side}")
            a, b = getattr(self, f"alpha_{side}"), getattr(self, f"beta_{side}")
            if kappa == 0:
                object.__setattr__(self, f"alpha_{side}", None)
                object.__setattr__(self, f"beta_{side}", None)
            elif a is None or b is None:
                a, b = derive_alpha_beta(getattr(self, f"zeta_{side}"), kappa)
                object.__setattr__(self, f"alpha_{side}", complex(a))
                object.__setattr__(self, f"beta_{side}", complex(b))
            else:
                object.__setattr__(self, f"alpha_{side}", complex(a))
                object.__setattr__(self, f"beta_{side}", complex(b))

    @classmethod
    def from_alpha_beta(cls, tau_plus, alpha_plus, beta_plus, tau_minus, alpha_minus, beta_minus):
        zp, kp = invert_alpha_beta(alpha_plus, beta_plus)
        zm, km = invert_alpha_beta(alpha_minus, beta_minus)
        return cls(zp, kp, tau_plus, zm, km, tau_minus, alpha_plus, beta_plus, alpha_minus, beta_minus)

    @property
    def diagonal_plus(self) -> bool:
        return self.kappa_plus == 0

    @property
    def diagonal_minus(self) -> bool:
        return self.kappa_minus == 0

    @property
    def has_alpha_beta(self) -> bool:
        return not (self.diagonal_plus or self.diagonal_minus)

    def alpha_beta_residual(self) -> float:
        """Max violation of the defining relations of ``alpha``/``beta``."""
        worst = 0.0
        for side in ("plus", "minus"):
            k = getattr(self, f"kappa_{side}")
            if k == 0:
                continue
            z = getattr(self, f"zeta_{side}")
            a, b = getattr(self, f"alpha_{side}"), getattr(self, f"beta_{side}")
            worst = max(worst,
                        abs(np.sinh(a) * np.cosh(b) - np.sinh(z) / (2 * k)),
                        abs(np.cosh(a) * np.sinh(b) - np.cosh(z) / (2 * k)))
        return worst

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class ChainParams:
    N: int
    eta: complex
    xi: tuple
    regime: str = "generic"

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        xi = tuple(complex(x) for x in self.xi)
        if len(xi) != self.N:
            raise ValueError(f"expected {self.N} inhomogeneities, got {len(xi)}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", complex(self.eta))
        if self.regime not in ("massless", "massive", "generic"):
            raise ValueError(f"unknown regime {self.regime!r}")

    @classmethod
    def homogeneous(cls, N: int, eta: complex, regime: str = "generic") -> "ChainParams":
        return cls(N, eta, (0j,) * N, regime)

    @property
    def is_homogeneous(self) -> bool:
        return all(x == 0 for x in self.xi)

    @property
    def zeta0(self) -> np.ndarray:
        return np.array(self.xi) - self.eta / 2

    @property
    def zeta1(self) -> np.ndarray:
        return np.array(self.xi) + self.eta / 2

    def genericity_violations(self, tol: float = DEFAULT_TOL.gen, period: complex = 2j * np.pi) -> list:
        """Pairs ``(a, b, sign, r)`` with ``xi_a = sign*xi_b + r*eta`` (mod ``period``)."""
        bad = []
        for a in range(self.N):
            for b in range(self.N):
                if a == b:
                    continue
                for sign in (1, -1):
                    for r in (-1, 0, 1):
                        z = self.xi[a] - sign * self.xi[b] - r * self.eta
                        hit = near_zero_mod_2pi_i(z, tol) if period else abs(z) < tol
                        if hit:
                            bad.append((a + 1, b + 1, sign, r))
        return bad

    def is_generic(self, tol: float = DEFAULT_TOL.gen) -> bool:
        return not self.genericity_violations(tol)


RFunc = Callable[[complex, complex], np.ndarray]


def _site_units(N: int) -> dict:
    """Dense embeddings of the matrix units ``E_{ij}`` on every site."""
    units = {}
    for n in range(1, N + 1):
        for i in range(2):
            for j in range(2):
                e = np.zeros((2, 2), dtype=complex)
                e[i, j] = 1.0
                units[n, i, j] = site_operator(e, n, N)
    return units


def embed_aux_site(R4: np.ndarray, site: int, units: dict) -> np.ndarray:
    """Embed a 4x4 matrix acting on ``aux x site`` into ``aux x H``."""
    R = R4.reshape(2, 2, 2, 2)  # (out_aux, out_site, in_aux, in_site)
    D = units[site, 0, 0].shape[0]
    out = np.zeros((2, D, 2, D), dtype=complex)
    for oa in range(2):
        for ia in range(2):
            for os_ in range(2):
                for is_ in range(2):
                    v = R[oa, os_, ia, is_]
                    if v != 0:
                        out[oa, :, ia, :] += v * units[site, os_, is_]
    return out.reshape(2 * D, 2 * D)


def aux_blocks(U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split an ``aux x H`` operator into its four ``H``-valued entries."""
    D = U.shape[0] // 2
    return U[:D, :D], U[:D, D:], U[D:, :D], U[D:, D:]


def aux_transpose(U: np.ndarray) -> np.ndarray:
    A, B, C, D_ = aux_blocks(U)
    return np.block([[A, C], [B, D_]])


def aux_trace(U: np.ndarray) -> np.ndarray:
    A, _, _, D_ = aux_blocks(U)
    return A + D_


def aux_scalar(K: np.ndarray, D: int) -> np.ndarray:
    return np.kron(K, np.eye(D, dtype=complex))


class TransferFamily:
    """Double-row transfer matrix ``T(lam) = tr_0 K_+ M K_- Mhat``.

    Immutable once built; evaluation at any ``lam`` is pure.
    """

    r_func: RFunc = staticmethod(r_matrix)
    # odd function playing the role of sinh in scalar prefactors
    odd_fn = staticmethod(np.sinh)

    def __init__(self, chain: ChainParams, boundary: BoundaryParams, tol: Tolerances = DEFAULT_TOL):
        for z in (boundary.zeta_plus, boundary.zeta_minus):
            if abs(np.sinh(z)) < tol.pivot ** 0.5:
                raise SingularBoundary(f"sinh(zeta) = {np.sinh(z)} vanishes")
        self.chain = chain
        self.boundary = boundary
        self.tol = tol
        self._units = _site_units(chain.N)
        self.dim = 2 ** chain.N

    def k_minus(self, lam: complex) -> np.ndarray:
        b = self.boundary
        return k_matrix(lam, b.zeta_minus, b.kappa_minus, b.tau_minus, self.chain.eta, self.tol)

    def k_plus(self, lam: complex) -> np.ndarray:
        b = self.boundary
        return k_matrix(lam + self.chain.eta, b.zeta_plus, b.kappa_plus, b.tau_plus, self.chain.eta, self.tol)

    def monodromy(self, lam: complex) -> np.ndarray:
        """``R_0N(lam - xi_N - eta/2) ... R_01(lam - xi_1 - eta/2)``."""
        eta = self.chain.eta
        M = np.eye(2 * self.dim, dtype=complex)
        for n in range(self.chain.N, 0, -1):
            M = M @ embed_aux_site(self.r_func(lam - self.chain.xi[n - 1] - eta / 2, eta), n, self._units)
        return M

    def monodromy_hat(self, lam: complex) -> np.ndarray:
        Sy = aux_scalar(SY, self.dim)
        return (-1) ** self.chain.N * Sy @ aux_transpose(self.monodromy(-lam)) @ Sy

    def u_minus(self, lam: complex) -> np.ndarray:
        return self.monodromy(lam) @ aux_scalar(self.k_minus(lam), self.dim) @ self.monodromy_hat(lam)

    def transfer(self, lam: complex) -> np.ndarray:
        return aux_trace(aux_scalar(self.k_plus(lam), self.dim) @ self.u_minus(lam))

    def __call__(self, lam: complex) -> np.ndarray:
        return self.transfer(lam)

    # scalar functions of the representation

    def a(self, lam: complex) -> complex:
        return complex(np.prod(np.sinh(lam - np.array(self.chain.xi) + self.chain.eta / 2)))

    def d(self, lam: complex) -> complex:
        return self.a(lam - self.chain.eta)

    def g_plus(self, lam: complex) -> complex:
        return _g(lam, self.boundary, self.chain.eta, +1)

    def g_minus(self, lam: complex) -> complex:
        return _g(lam, self.boundary, self.chain.eta, -1)

    def bulk_qdet(self, lam: complex) -> complex:
        """``det_q M(lam) = a(lam + eta/2) d(lam - eta/2)``."""
        eta = self.chain.eta
        return self.a(lam + eta / 2) * self.d(lam - eta / 2)

    def qdet_k_plus(self, lam: complex) -> complex:
        eta = self.chain.eta
        return -np.sinh(2 * lam + 2 * eta) * self.g_plus(lam + eta / 2) * self.g_plus(-lam + eta / 2)

    def qdet_k_minus(self, lam: complex) -> complex:
        eta = self.chain.eta
        return np.sinh(2 * lam - 2 * eta) * self.g_minus(lam + eta / 2) * self.g_minus(-lam + eta / 2)


def _g(lam: complex, bp: BoundaryParams, eta: complex, sign: int) -> complex:
    """``g_+`` (sign=+1) or ``g_-`` (sign=-1); diagonal sides use the kappa -> 0 limit."""
    side = "plus" if sign > 0 else "minus"
    alpha = getattr(bp, f"alpha_{side}")
    beta = getattr(bp, f"beta_{side}")
    if alpha is None:
        zeta = getattr(bp, f"zeta_{side}")
        # alpha -> zeta, beta -> infinity; the exponentials cancel in g_+ g_-
        return complex(np.sinh(lam + zeta - eta / 2) * np.exp(-sign * (lam - eta / 2)) / np.sinh(zeta))
    return complex(np.sinh(lam + alpha - eta / 2) * np.cosh(lam - sign * beta - eta / 2)
                   / (np.sinh(alpha) * np.cosh(beta)))


def monodromy(lam: complex, chain: ChainParams) -> np.ndarray:
    return TransferFamily(chain, BoundaryParams(1.0, 0, 0, 1.0, 0, 0)).monodromy(lam)


def monodromy_hat(lam: complex, chain: ChainParams) -> np.ndarray:
    return TransferFamily(chain, BoundaryParams(1.0, 0, 0, 1.0, 0, 0)).monodromy_hat(lam)


def transfer(lam: complex, fam: TransferFamily) -> np.ndarray:
    return fam.transfer(lam)


def yang_baxter_residual(lam: complex, mu: complex, eta: complex, r_func: RFunc = r_matrix) -> float:
    """``|| R12(l-m) R13(l) R23(m) - R23(m) R13(l) R12(l-m) ||`` on ``C^2 x C^2 x C^2``."""
    P23 = np.eye(8)[[0, 2, 1, 3, 4, 6, 5, 7]]
    R12 = np.kron(r_func(lam - mu, eta), I2)
    R23 = np.kron(I2, r_func(mu, eta))
    R13 = P23 @ np.kron(r_func(lam, eta), I2) @ P23
    return float(np.linalg.norm(R12 @ R13 @ R23 - R23 @ R13 @ R12))


def _swap_aux(D: int) -> np.ndarray:
    """Permutation exchanging the two auxiliary factors of ``C^2 x C^2 x H``."""
    P = np.zeros((4 * D, 4 * D))
    for i in range(2):
        for j in range(2):
            for k in range(D):
                P[(j * 2 + i) * D + k, (i * 2 + j) * D + k] = 1
    return P


def reflection_residual(U: Callable[[complex], np.ndarray], lam: complex, mu: complex,
                        eta: complex, r_func: RFunc = r_matrix) -> float:
    """Relative Frobenius residual of the reflection equation for ``U``.

    ``R12(l-m) U1(l) R21(l+m-eta) U2(m) = U2(m) R12(l+m-eta) U1(l) R21(l-m)``.
    """
    Ul, Um = U(lam), U(mu)
    D = Ul.shape[0] // 2
    P = _swap_aux(D)
    swap = np.eye(4)[[0, 2, 1, 3]]
    eyeD = np.eye(D)

    def R12(x):
        return np.kron(r_func(x, eta), eyeD)

    def R21(x):
        return np.kron(swap @ r_func(x, eta) @ swap, eyeD)

    # U1 acts on aux 1 and H: build it on (aux2 x aux1 x H), then swap the aux factors
    U1 = P @ np.kron(I2, Ul) @ P
    U2 = np.kron(I2, Um)
    lhs = R12(lam - mu) @ U1 @ R21(lam + mu - eta) @ U2
    rhs = U2 @ R12(lam + mu - eta) @ U1 @ R21(lam - mu)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))


def hamiltonian_explicit(chain: ChainParams, boundary: BoundaryParams) -> np.ndarray:
    """Open XXZ Hamiltonian with the most general integrable boundary terms."""
    N, eta = chain.N, chain.eta
    if not chain.is_homogeneous:
        raise ValueError("hamiltonian_explicit requires a homogeneous chain")
    b = boundary
    for z in (b.zeta_plus, b.zeta_minus):
        if abs(np.sinh(z)) < 1e-14:
            raise SingularBoundary("sinh(zeta) vanishes")
    D = 2 ** N
    H = np.zeros((D, D), dtype=complex)
    for i in range(1, N):
        H += site_operator(SX, i, N) @ site_operator(SX, i + 1, N)
        H += site_operator(SY, i, N) @ site_operator(SY, i + 1, N)
        H += np.cosh(eta) * site_operator(SZ, i, N) @ site_operator(SZ, i + 1, N)

    def boundary_term(site, zeta, kappa, tau):
        local = (SZ * np.cosh(zeta) + 2 * kappa * (SX * np.cosh(tau) + 1j * SY * np.sinh(tau)))
        return np.sinh(eta) / np.sinh(zeta) * site_operator(local, site, N)

    H += boundary_term(1, b.zeta_minus, b.kappa_minus, b.tau_minus)
    H += boundary_term(N, b.zeta_plus, b.kappa_plus, b.tau_plus)
    return H


def transfer_derivative(fam: TransferFamily, lam: complex, h: float = 1e-5) -> tuple[np.ndarray, float]:
    """Central difference with one Richardson step; returns ``(dT, disagreement)``."""
    def central(step):
        return (fam.transfer(lam + step) - fam.transfer(lam - step)) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    rich = (4 * d2 - d1) / 3
    disagreement = float(np.linalg.norm(rich - d2) / max(np.linalg.norm(rich), 1e-300))
    return rich, disagreement


def hamiltonian_from_transfer(fam: TransferFamily, h: float = 1e-5, max_disagreement: float = 1e-6) -> np.ndarray:
    """Hamiltonian from the logarithmic derivative of ``T`` at ``eta/2`` (up to a constant)."""
    if not fam.chain.is_homogeneous:
        raise ValueError("hamiltonian_from_transfer requires a homogeneous chain")
    eta, N = fam.chain.eta, fam.chain.N
    dT, dis = transfer_derivative(fam, eta / 2, h)
    if dis > max_disagreement:
        raise StepFailure(f"Richardson disagreement {dis:.3e}")
    pref = 2 * fam.odd_fn(eta) ** (1 - 2 * N) / (np.trace(fam.k_plus(eta / 2)) * np.trace(fam.k_minus(eta / 2)))
    return pref * dT


def quantum_det_U(lam: complex, fam: TransferFamily) -> complex:
    """``det_q U_-(lam) = sinh(2 lam - 2 eta) A_-(lam + eta/2) A_-(eta/2 - lam)``."""
    eta = fam.chain.eta

    def A_minus(x):
        return fam.g_minus(x) * fam.a(x) * fam.d(-x)

    return complex(fam.odd_fn(2 * lam - 2 * eta) * A_minus(lam + eta / 2) * A_minus(-lam + eta / 2))


def quantum_det_U_operator(lam: complex, fam: TransferFamily, eps: int = 1, entries: str = "AB") -> np.ndarray:
    """Operator form of ``det_q U_-`` built from the reflection-algebra generators.

    ``entries="AB"`` uses ``A(e l + eta/2) A(eta/2 - e l) + B(e l + eta/2) C(eta/2 - e l)``;
    ``entries="DC"`` uses the ``D D + C B`` combination.
    """
    eta = fam.chain.eta
    A1, B1, C1, D1 = aux_blocks(fam.u_minus(eps * lam + eta / 2))
    A2, B2, C2, D2 = aux_blocks(fam.u_minus(eta / 2 - eps * lam))
    if entries == "AB":
        core = A1 @ A2 + B1 @ C2
    else:
        core = D1 @ D2 + C1 @ B2
    return fam.odd_fn(2 * lam - 2 * eta) * core


@dataclass(frozen=True)
class CentralValues:
    asymptotic: complex
    at_eta_half: complex
    at_eta_half_ipi_half: complex


def central_values(fam: TransferFamily) -> CentralValues:
    """Scalars by which ``T`` is central at infinity, ``+-eta/2`` and ``+-(eta/2 - i pi/2)``."""
    b, N, eta = fam.boundary, fam.chain.N, fam.chain.eta
    asym = (2.0 ** (-(2 * N + 1)) * b.kappa_plus * b.kappa_minus * np.cosh(b.tau_plus - b.tau_minus)
            / (np.sinh(b.zeta_plus) * np.sinh(b.zeta_minus)))
    c1 = (-1) ** N * 2 * np.cosh(eta) * fam.bulk_qdet(0)
    c2 = (-2 * np.cosh(eta) / (np.tanh(b.zeta_minus) * np.tanh(b.zeta_plus)) * fam.bulk_qdet(1j * np.pi / 2))
    return CentralValues(complex(asym), complex(c1), complex(c2))


def commutator_residual(X: np.ndarray, Y: np.ndarray) -> float:
    """Relative Frobenius norm of ``[X, Y]``."""
    scale = max(np.linalg.norm(X) * np.linalg.norm(Y), 1e-300)
    return float(np.linalg.norm(X @ Y - Y @ X) / scale)
