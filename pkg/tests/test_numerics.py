import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from sovbaxter.errors import DegenerateLeading, DuplicateNode, Singular
from sovbaxter.numerics import (EvenTrigPoly, arccosh_principal, arcsinh_principal, eig_dense,
                                near_zero_mod_2pi_i, poly_roots, solve_linear, trig_interpolate)

finite = st.floats(-2.0, 2.0, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_interpolate_constant():
    p = trig_interpolate([(1.0, 1.0)], 0)
    assert p.degree == 0
    assert p.coeffs[0] == 1.0


def test_interpolate_linear_through_origin():
    p = trig_interpolate([(0.0, 0.0), (1.0, 2.0)], 1)
    assert_allclose(p.coeffs, [0.0, 2.0], atol=1e-15)


def test_interpolate_refit_quadratic():
    u = np.array([-1.3, 0.2, 0.7 + 0.4j, 1.9, -0.5j])
    p = trig_interpolate(list(zip(u, u ** 2 + 3 * u - 1)), 4)
    assert p.degree == 2
    assert_allclose(p.coeffs, [-1, 3, 1], atol=1e-12)


def test_interpolate_duplicate_node():
    with pytest.raises(DuplicateNode):
        trig_interpolate([(0.5, 1.0), (0.5 + 1e-12, 2.0)], 1)


def test_interpolate_wrong_count():
    with pytest.raises(ValueError):
        trig_interpolate([(0.0, 1.0)], 2)


def test_arithmetic_and_trim():
    p = EvenTrigPoly([1, 2, 0, 1e-20])
    assert p.degree == 1
    q = EvenTrigPoly([0, 1])
    assert_allclose((p * q).coeffs, [0, 1, 2])
    assert_allclose((p - p).coeffs, [0])
    assert (p - p).is_zero()
    assert_allclose((1 + q).coeffs, [1, 1])
    assert_allclose((2 - q).coeffs, [2, -1])
    assert_allclose((-q).coeffs, [0, -1])
    assert p.distance(p) == 0.0


def test_mixed_basis_rejected():
    with pytest.raises(ValueError):
        EvenTrigPoly([1, 1]) + EvenTrigPoly([1, 1], "square")


@settings(max_examples=30, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=6), cplx)
def test_even_and_periodic(coeffs, lam):
    p = EvenTrigPoly(coeffs)
    assert p(lam) == p(-lam)
    assert abs(p(lam + 1j * np.pi) - p(lam)) <= 1e-13 * max(p.norm, 1.0) * max(abs(np.cosh(2 * lam)), 1) ** p.degree


def test_roots_examples():
    lam1 = 0.3 + 0.2j
    r = poly_roots(EvenTrigPoly([-np.cosh(2 * lam1), 1]))
    assert_allclose(r, [np.cosh(2 * lam1)], rtol=1e-14)
    r = np.sort_complex(poly_roots(EvenTrigPoly([-1, 0, 1])))
    assert_allclose(r, [-1, 1], atol=1e-14)


def test_roots_degenerate_leading():
    with pytest.raises(DegenerateLeading):
        poly_roots(EvenTrigPoly([3.0]))


def _matched(a, b):
    from scipy.optimize import linear_sum_assignment
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    i, j = linear_sum_assignment(cost)
    return cost[i, j].max()


def test_roots_planted_degree5():
    rng = np.random.default_rng(5)
    planted = rng.uniform(-1, 1, 5) + 1j * rng.uniform(-1, 1, 5)
    p = EvenTrigPoly.from_roots(planted, leading=2.5 - 1j)
    assert _matched(p.roots(), planted) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 31 - 1))
def test_roots_round_trip(deg, seed):
    rng = np.random.default_rng(seed)
    # well separated planted roots: a jittered grid on an annulus
    angles = 2 * np.pi * (np.arange(deg) + rng.uniform(0.1, 0.4, deg)) / deg
    planted = rng.uniform(0.6, 1.4, deg) * np.exp(1j * angles)
    p = EvenTrigPoly.from_roots(planted)
    assert _matched(p.roots(), planted) < 1e-9


def test_solve_linear_examples():
    b = np.array([1 + 2j, -3, 0.5j])
    assert_allclose(solve_linear(np.eye(3), b), b)
    assert_allclose(solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1, 1])


def test_solve_linear_random():
    rng = np.random.default_rng(8)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)) + 8 * np.eye(8)
    b = rng.normal(size=8) + 1j * rng.normal(size=8)
    x = solve_linear(A, b)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) < 1e-12


def test_solve_linear_singular():
    with pytest.raises(Singular):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))


def test_eig_examples():
    pairs = eig_dense(np.diag([1.0, 2.0, 3.0]), hermitian_hint=True)
    assert_allclose(sorted(p.value.real for p in pairs), [1, 2, 3])
    for p in pairs:
        assert_allclose(np.abs(p.vector).max(), 1.0)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    assert_allclose(sorted(p.value.real for p in eig_dense(sx)), [-1, 1], atol=1e-15)


def test_eig_hermitian_trace_moments():
    rng = np.random.default_rng(16)
    X = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    H = X + X.conj().T
    pairs = eig_dense(H, hermitian_hint=True)
    w = np.array([p.value for p in pairs])
    assert np.max(np.abs(w.imag)) == 0
    assert_allclose(w.sum(), np.trace(H), rtol=1e-10)
    assert_allclose((w ** 2).sum(), np.trace(H @ H), rtol=1e-10)
    V = np.stack([p.vector for p in pairs], 1)
    assert_allclose(V.conj().T @ V, np.eye(16), atol=1e-9)


def test_eig_general_left_vectors():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    for p in eig_dense(A, left=True):
        assert p.residual < 1e-12
        assert_allclose(p.left.conj() @ p.vector, 1.0, rtol=1e-12)
        assert np.linalg.norm(p.left.conj() @ A - p.value * p.left.conj()) < 1e-10 * np.linalg.norm(p.left)


def test_eig_commuting_pair():
    rng = np.random.default_rng(4)
    S = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    Si = np.linalg.inv(S)
    A = S @ np.diag(np.arange(1.0, 6.0)) @ Si
    B = S @ np.diag(rng.normal(size=5)) @ Si
    for p in eig_dense(A):
        Bv = B @ p.vector
        mu = p.vector.conj() @ Bv
        assert np.linalg.norm(Bv - mu * p.vector) < 1e-9


def test_eig_max_dim():
    with pytest.raises(ValueError):
        eig_dense(np.eye(4), max_dim=2)


def test_inverse_hyperbolic():
    assert arcsinh_principal(0) == 0
    assert arccosh_principal(1) == 0
    rng = np.random.default_rng(100)
    for z in rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100):
        assert abs(np.sinh(arcsinh_principal(z)) - z) < 1e-12 * max(1, abs(z))
        assert abs(np.cosh(arccosh_principal(z)) - z) < 1e-12 * max(1, abs(z))


def test_near_zero_mod_2pi_i():
    assert near_zero_mod_2pi_i(4j * np.pi + 1e-10, 1e-8)
    assert near_zero_mod_2pi_i(-2j * np.pi, 1e-8)
    assert not near_zero_mod_2pi_i(1j * np.pi, 1e-8)
    assert not near_zero_mod_2pi_i(1e-6, 1e-8)
