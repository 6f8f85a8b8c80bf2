"""Discrete boundary-parameter symmetries of the transfer-matrix spectrum."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model6v import SY, SZ, BoundaryParams, TransferFamily, global_operator
from .errors import DegenerateSpectrum
from .numerics import DEFAULT_TOL, Tolerances
from .sov import SOVFunctions, build_sov_functions, inhom_conditions_hold, spectrum_extract


@dataclass(frozen=True)
class Z2Triple:
    eps_tau: int = 1
    eps_alpha: int = 1
    eps_beta: int = 1

    def __post_init__(self):
        if any(e not in (1, -1) for e in self.as_tuple()):
            raise ValueError("signs must be +1 or -1")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.eps_tau, self.eps_alpha, self.eps_beta)

    def __mul__(self, other: "Z2Triple") -> "Z2Triple":
        return Z2Triple(*(a * b for a, b in zip(self.as_tuple(), other.as_tuple())))

    @property
    def is_identity(self) -> bool:
        return self.as_tuple() == (1, 1, 1)

    def label(self) -> str:
        return "(" + ",".join("+" if e > 0 else "-" for e in self.as_tuple()) + ")"


# lexicographic over (eps_tau, eps_alpha, eps_beta) with + before -
ALL_TRIPLES = tuple(Z2Triple(*t) for t in itertools.product((1, -1), repeat=3))


def apply_z2(bp: BoundaryParams, eps: Z2Triple) -> BoundaryParams:
    """Flip ``(tau, alpha, beta)`` on both sides and recompute ``(zeta, kappa)``."""
    if not bp.has_alpha_beta:
        raise ValueError("the Z2 action needs alpha/beta (non-diagonal boundaries)")
    if eps.is_identity:
        return bp
    et, ea, eb = eps.as_tuple()
    return BoundaryParams.from_alpha_beta(et * bp.tau_plus, ea * bp.alpha_plus, eb * bp.beta_plus,
                                          et * bp.tau_minus, ea * bp.alpha_minus, eb * bp.beta_minus)


def _matched_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Relative distance between two multisets under the optimal matching."""
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]) / max(np.max(np.abs(a)), 1e-300))


def isospectral_check(fam: TransferFamily, fam_other: TransferFamily, anchor: complex | None = None) -> float:
    """Distance between the spectra of two transfer matrices.

    Compares the eigenvalue multisets at a shared anchor and, when both
    spectra can be extracted, the coefficient sets of the eigenvalue functions.
    """
    anchor = fam.chain.eta / 2 + 0.37 + 0.21j if anchor is None else anchor
    ev1 = np.linalg.eigvals(fam.transfer(anchor))
    ev2 = np.linalg.eigvals(fam_other.transfer(anchor))
    dist = _matched_distance(ev1, ev2)
    fns1, fns2 = build_sov_functions(fam), build_sov_functions(fam_other)
    if fns1.interpolable and fns2.interpolable:
        try:
            t1 = spectrum_extract(fam, fns1, anchor)
            t2 = spectrum_extract(fam_other, fns2, anchor)
        except DegenerateSpectrum:
            # coinciding eigenvalue functions: only the multisets can be compared
            return dist
        cost = np.array([[r1.tau.distance(r2.tau) for r2 in t2] for r1 in t1])
        rows, cols = linear_sum_assignment(cost)
        dist = max(dist, float(np.max(cost[rows, cols])))
    return dist


def gamma_y(N: int) -> np.ndarray:
    return global_operator(SY, N)


def gamma_z(N: int) -> np.ndarray:
    return global_operator(SZ, N)


def gamma_y_partner(bp: BoundaryParams) -> BoundaryParams:
    """Parameters ``(-tau, -zeta, kappa)`` conjugate to ``bp`` under ``Gamma_y``."""
    return BoundaryParams(-bp.zeta_plus, bp.kappa_plus, -bp.tau_plus, -bp.zeta_minus, bp.kappa_minus, -bp.tau_minus)


def gamma_z_partner(bp: BoundaryParams) -> BoundaryParams:
    """Parameters ``(tau, zeta, -kappa)`` conjugate to ``bp`` under ``Gamma_z``."""
    return BoundaryParams(bp.zeta_plus, -bp.kappa_plus, bp.tau_plus, bp.zeta_minus, -bp.kappa_minus, bp.tau_minus)


def conjugation_residual(fam: TransferFamily, which: str, lam: complex) -> float:
    """``|| T'(lam) - Gamma T(lam) Gamma ||`` relative, for ``which`` in ``{"y", "z"}``."""
    N = fam.chain.N
    if which == "y":
        G, partner = gamma_y(N), gamma_y_partner(fam.boundary)
    elif which == "z":
        G, partner = gamma_z(N), gamma_z_partner(fam.boundary)
    else:
        raise ValueError(which)
    T = fam.transfer(lam)
    T2 = TransferFamily(fam.chain, partner, fam.tol).transfer(lam)
    return float(np.linalg.norm(T2 - G @ T @ G) / np.linalg.norm(T))


def select_variant(bp: BoundaryParams, N: int, eta: complex, tol: float = DEFAULT_TOL.gen) -> Z2Triple | None:
    """First sign triple whose flipped parameters satisfy every ``Y^(i,2r) != 0``, ``r < N``."""
    if not bp.has_alpha_beta:
        return None
    for eps in ALL_TRIPLES:
        if inhom_conditions_hold(bp, N, eta, eps.as_tuple(), tol):
            return eps
    return None


def variant_baxter_functions(fam: TransferFamily, eps: Z2Triple,
                             tol: Tolerances = DEFAULT_TOL) -> tuple[SOVFunctions, TransferFamily]:
    """SOV/Baxter data of the flipped boundary; its ``A`` and ``F`` define the variant equation."""
    if eps.is_identity:
        return build_sov_functions(fam, tol), fam
    fam_v = TransferFamily(fam.chain, apply_z2(fam.boundary, eps), tol)
    return build_sov_functions(fam_v, tol), fam_v
