"""Complex-arithmetic substrate.

Even, ``i*pi``-periodic trigonometric polynomials are stored as ordinary
polynomials in ``u = cosh(2*lam)``; the rational (XXX) analogue uses
``w = lam**2``.  Evenness and periodicity therefore hold by construction.
Dense linear algebra is delegated to LAPACK through scipy.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateLeading, DuplicateNode, IllConditioned, NoConvergence, Singular

BASES = ("cosh2", "square")


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used across the package."""

    eps_lin: float = 1e-11
    eps_eig: float = 1e-9
    eps_root: float = 1e-9
    trim_rel: float = 1e-12
    node: float = 1e-10
    pivot: float = 1e-14
    gen: float = 1e-8
    sep: float = 1e-7
    comm: float = 1e-9
    accept: float = 1e-7
    ambiguous_low: float = 1e-9
    ambiguous_high: float = 1e-5
    baxter: float = 1e-8
    bethe: float = 1e-7
    sov: float = 1e-8

    def override(self, **kwargs: float) -> "Tolerances":
        unknown = set(kwargs) - set(self.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in kwargs.items()})


DEFAULT_TOL = Tolerances()


def variable(lam, basis: str = "cosh2"):
    """Map a spectral parameter to the polynomial variable of ``basis``."""
    if basis == "cosh2":
        return np.cosh(2 * np.asarray(lam, dtype=complex))
    if basis == "square":
        lam = np.asarray(lam, dtype=complex)
        return lam * lam
    raise ValueError(f"unknown basis {basis!r}")


def _trim(c: np.ndarray, rel: float) -> np.ndarray:
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    nz = np.nonzero(np.abs(c) > rel * scale)[0]
    return c[: nz[-1] + 1].copy()


@dataclass(frozen=True, eq=False)
class EvenTrigPoly:
    """Polynomial ``sum_k c_k v**k`` in the even variable ``v`` of ``basis``.

    Calling the object evaluates it at a spectral parameter ``lam``;
    :meth:`at` evaluates it at a value of the variable itself.
    Trailing coefficients below ``trim_rel * max|c_k|`` are dropped.
    """

    coeffs: np.ndarray
    basis: str = "cosh2"
    trim_rel: float = field(default=DEFAULT_TOL.trim_rel, repr=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        c = _trim(np.atleast_1d(np.asarray(self.coeffs, dtype=complex)), self.trim_rel)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value: complex, basis: str = "cosh2") -> "EvenTrigPoly":
        return cls(np.array([value], dtype=complex), basis)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: complex = 1.0,
                   basis: str = "cosh2") -> "EvenTrigPoly":
        c = np.polynomial.polynomial.polyfromroots(np.asarray(roots, dtype=complex)) if len(roots) else np.ones(1)
        return cls(leading * np.asarray(c, dtype=complex), basis)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def at(self, v):
        return np.polynomial.polynomial.polyval(v, self.coeffs)

    def __call__(self, lam):
        out = self.at(variable(lam, self.basis))
        return complex(out) if np.ndim(out) == 0 else out

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, EvenTrigPoly):
            if other.basis != self.basis:
                raise ValueError("cannot combine polynomials in different bases")
            return other.coeffs
        return np.array([complex(other)])

    def __add__(self, other):
        return EvenTrigPoly(np.polynomial.polynomial.polyadd(self.coeffs, self._coerce(other)), self.basis)

    __radd__ = __add__

    def __sub__(self, other):
        return EvenTrigPoly(np.polynomial.polynomial.polysub(self.coeffs, self._coerce(other)), self.basis)

    def __rsub__(self, other):
        return EvenTrigPoly(np.polynomial.polynomial.polysub(self._coerce(other), self.coeffs), self.basis)

    def __mul__(self, other):
        return EvenTrigPoly(np.polynomial.polynomial.polymul(self.coeffs, self._coerce(other)), self.basis)

    __rmul__ = __mul__

    def __neg__(self):
        return EvenTrigPoly(-self.coeffs, self.basis)

    def distance(self, other: "EvenTrigPoly") -> float:
        """Relative coefficient distance, ``||p - q|| / max(||p||, ||q||)``."""
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.pad(self.coeffs, (0, n - self.coeffs.size))
        b = np.pad(other.coeffs, (0, n - other.coeffs.size))
        scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
        return float(np.linalg.norm(a - b) / scale)

    def roots(self, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        return poly_roots(self, tol)

    def to_json(self) -> dict:
        return {"basis": self.basis, "coeffs": [[c.real, c.imag] for c in self.coeffs]}


def trig_interpolate(nodes: Iterable[tuple[complex, complex]], degree: int,
                     basis: str = "cosh2", tol: Tolerances = DEFAULT_TOL) -> EvenTrigPoly:
    """Lagrange interpolation in the even variable through ``degree + 1`` nodes.

    ``nodes`` holds pairs ``(v_k, p_k)`` where ``v_k`` is already a value of
    the polynomial variable (``cosh 2 lam`` or ``lam**2``).
    """
    nodes = list(nodes)
    if len(nodes) != degree + 1:
        raise ValueError(f"need {degree + 1} nodes for degree {degree}, got {len(nodes)}")
    v = np.array([complex(n[0]) for n in nodes])
    p = np.array([complex(n[1]) for n in nodes])
    for j in range(v.size):
        for k in range(j):
            if abs(v[j] - v[k]) < tol.node:
                raise DuplicateNode(f"nodes {k} and {j} coincide: {v[j]}")
    P = np.polynomial.polynomial
    coeffs = np.zeros(degree + 1, dtype=complex)
    for k in range(v.size):
        others = np.delete(v, k)
        basis_k = P.polyfromroots(others) if others.size else np.ones(1)
        coeffs[: basis_k.size] += p[k] * basis_k / np.prod(v[k] - others)
    resid = np.max(np.abs(P.polyval(v, coeffs) - p))
    if resid > tol.eps_lin * max(np.max(np.abs(p)), 1.0):
        raise IllConditioned(f"interpolation residual {resid:.3e} exceeds tolerance")
    return EvenTrigPoly(coeffs, basis, tol.trim_rel)


def root_backward_errors(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Normwise backward error ``|p(r)| / sum_k |c_k| |r|**k`` of each root."""
    P = np.polynomial.polynomial
    num = np.abs(P.polyval(roots, coeffs))
    den = P.polyval(np.abs(roots), np.abs(coeffs))
    return num / np.where(den == 0, 1.0, den)


def poly_roots(p: EvenTrigPoly, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """All roots of ``p`` in its variable, via a balanced companion matrix."""
    c = p.coeffs
    if c.size < 2:
        raise DegenerateLeading("polynomial has degree 0")
    if abs(c[-1]) <= tol.trim_rel * np.max(np.abs(c)):
        raise DegenerateLeading("leading coefficient vanishes")
    d = c.size - 1
    comp = np.zeros((d, d), dtype=complex)
    comp[1:, :-1] = np.eye(d - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    comp, _ = sla.matrix_balance(comp, permute=False)
    roots = sla.eigvals(comp, overwrite_a=True, check_finite=False)
    # Newton polish; keep the update only when it lowers the backward error
    P = np.polynomial.polynomial
    dc = P.polyder(c)
    for _ in range(2):
        step = P.polyval(roots, c) / np.where(P.polyval(roots, dc) == 0, 1.0, P.polyval(roots, dc))
        better = root_backward_errors(c, roots - step) < root_backward_errors(c, roots)
        roots = np.where(better, roots - step, roots)
    return roots


def solve_linear(A: np.ndarray, b: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Partial-pivoted LU solve with one step of iterative refinement."""
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    scale = np.max(np.abs(A)) if A.size else 0.0
    with warnings.catch_warnings():
        # exact zero pivots are reported through Singular below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or np.min(pivots) < tol.pivot * scale:
        raise Singular(f"pivot {np.min(pivots):.3e} below threshold")
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    x = x + sla.lu_solve((lu, piv), b - A @ x, check_finite=False)
    bn = np.linalg.norm(b)
    if bn > 0 and np.linalg.norm(A @ x - b) / bn > tol.eps_lin:
        raise IllConditioned("linear solve residual above tolerance")
    return x


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float
    left: np.ndarray | None = None


def eig_dense(A: np.ndarray, hermitian_hint: bool = False, *, left: bool = False,
              max_dim: int = 64) -> list[EigenPair]:
    """Full eigendecomposition of a dense complex matrix.

    With ``hermitian_hint`` the Hermitian solver is used and the eigenvalues
    are real.  Otherwise the general solver runs; ``left=True`` also returns
    left eigenvectors, normalised so that ``left.conj() @ vector == 1``.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n > max_dim:
        raise ValueError(f"matrix dimension {n} exceeds max_dim={max_dim}")
    try:
        if hermitian_hint:
            w, V = sla.eigh(A, check_finite=False)
            W = V if left else None
        elif left:
            w, W, V = sla.eig(A, left=True, right=True, check_finite=False)
        else:
            w, V = sla.eig(A, check_finite=False)
            W = None
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise NoConvergence(str(exc)) from exc
    pairs = []
    for k in range(n):
        v = V[:, k] / np.linalg.norm(V[:, k])
        res = float(np.linalg.norm(A @ v - w[k] * v))
        lv = None
        if W is not None:
            lv = W[:, k]
            lv = lv / np.conj(lv.conj() @ v)
        pairs.append(EigenPair(complex(w[k]), v, res, lv))
    return pairs


def arcsinh_principal(z: complex) -> complex:
    return complex(np.arcsinh(complex(z)))


def arccosh_principal(z: complex) -> complex:
    return complex(np.arccosh(complex(z)))


def near_zero_mod_2pi_i(z: complex, tol: float) -> bool:
    """True when ``z`` lies within ``tol`` of ``2*pi*i*k`` for some integer k."""
    z = complex(z)
    k = round(z.imag / (2 * np.pi))
    return abs(z - 2j * np.pi * k) < tol
