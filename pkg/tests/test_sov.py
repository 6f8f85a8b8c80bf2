import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import cplx, generic_xxz, oracle_family
from sovbaxter.baxter import f0
from sovbaxter.errors import DegenerateSpectrum, PoleAtZero
from sovbaxter.model6v import BoundaryParams, ChainParams, TransferFamily, central_values
from sovbaxter.sampling import construct_m_lattice, construct_y_zero, sample_boundary, sample_chain
from sovbaxter.sov import (big_A, build_sov_functions, classify_boundary, min_separation, sov_newton,
                           sov_residual, spectrum_extract, tau_interpolate)

PROBES = [0.23 + 0.41j, -0.57 + 0.12j, 0.8 - 0.3j, 0.05 + 0.66j]


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_f_and_g_structure(N):
    fam, fns = generic_xxz(N, 100 + N)
    eta = fns.eta
    assert fns.f.degree == N + 2
    for a, ga in enumerate(fns.g):
        assert ga.degree == N + 1
        vals = np.array([ga(z) for z in fns.zeta0])
        assert_allclose(vals, np.eye(N)[a], atol=1e-11)
        assert abs(ga(eta / 2)) < 1e-11 and abs(ga(eta / 2 + 0.5j * np.pi)) < 1e-11
    for lam in (eta / 2, eta / 2 + 0.5j * np.pi):
        assert abs(fns.f(lam) - fns.A(lam)) < 1e-10 * max(abs(fns.A(lam)), 1)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_q_two_ways(N):
    _, fns = generic_xxz(N, 110 + N)
    assert_allclose(fns.q, fns.q_qdet, rtol=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_big_A_asymptotics(N):
    fam, fns = generic_xxz(N, 120 + N)
    b, eta = fam.boundary, fns.eta
    for s in (1, -1):
        lam = 12.0 * s
        lhs = np.exp(-s * (2 * N + 4) * lam) * fns.A(lam)
        rhs = (2.0 ** (-2 * (N + 1)) * b.kappa_plus * b.kappa_minus
               * np.exp(s * (b.alpha_plus + b.alpha_minus - b.beta_plus + b.beta_minus + (N - 1) * eta))
               / (np.sinh(b.zeta_plus) * np.sinh(b.zeta_minus)))
        assert abs(lhs / rhs - 1) < 1e-6


def test_big_A_single_site_hand_expansion():
    chain = ChainParams(1, 0.35 + 0.15j, (0.12 + 0.05j,))
    bp = BoundaryParams(0.6 + 0.2j, 0.7 - 0.3j, 0.2, 0.4 - 0.1j, 0.5 + 0.2j, -0.3)
    fns = build_sov_functions(TransferFamily(chain, bp))
    lam, eta, xi = 0.27 - 0.33j, chain.eta, chain.xi[0]

    def g(x, a, b, s):
        return np.sinh(x + a - eta / 2) * np.cosh(x - s * b - eta / 2) / (np.sinh(a) * np.cosh(b))

    expected = (-np.sinh(2 * lam + eta) / np.sinh(2 * lam) * g(lam, bp.alpha_plus, bp.beta_plus, 1)
                * g(lam, bp.alpha_minus, bp.beta_minus, -1) * np.sinh(lam - xi + eta / 2)
                * np.sinh(-lam - xi - eta / 2))
    assert abs(big_A(lam, fns) - expected) < 1e-13 * abs(expected)


def test_big_A_pole():
    _, fns = generic_xxz(2, 1)
    with pytest.raises(PoleAtZero):
        big_A(0.0, fns)
    with pytest.raises(PoleAtZero):
        big_A(0.5j * np.pi, fns)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_sov_residual_from_eigenvalues(N):
    fam, fns = generic_xxz(N, 130 + N)
    recs = spectrum_extract(fam, fns)
    assert len(recs) == 2 ** N
    assert min_separation(recs) > 1e-7
    for r in recs:
        assert np.all(sov_residual(r.x, fns) < 1e-8 * np.abs(fns.q))


def test_sov_residual_zero_vector_and_perturbation(xxz3):
    fam, fns, recs = xxz3
    assert_allclose(sov_residual(np.zeros(3), fns), np.abs(fns.q))
    rng = np.random.default_rng(0)
    for k in range(100):
        x = recs[k % 8].x
        pert = x * (1 + 1e-2 * (rng.normal(size=3) + 1j * rng.normal(size=3)))
        assert np.max(sov_residual(pert, fns) / np.abs(fns.q)) > 1e3 * 1e-8


def test_sov_newton_fixed_point(xxz3):
    _, fns, recs = xxz3
    x = recs[0].x
    start = x * (1 + 1e-6)
    assert_allclose(sov_newton(start, fns), x, rtol=1e-10)


def test_tau_interpolate(xxz3):
    fam, fns, recs = xxz3
    eta = fns.eta
    assert tau_interpolate(np.zeros(3), fns).distance(fns.f) == 0.0
    x = np.array([0.3 + 1j, -2, 0.1j])
    assert abs(tau_interpolate(x, fns)(eta / 2) - fns.A(eta / 2)) < 1e-10 * abs(fns.A(eta / 2))
    assert_allclose([tau_interpolate(x, fns)(z) for z in fns.zeta0], x, atol=1e-11)
    # Rayleigh quotients at fresh points
    rng = np.random.default_rng(3)
    for r in recs:
        for lam in rng.uniform(-1, 1, 10) + 1j * rng.uniform(-1, 1, 10):
            val = (r.left.conj() @ fam.transfer(lam) @ r.vector) / (r.left.conj() @ r.vector)
            assert abs(r.tau(lam) - val) < 1e-8 * max(abs(val), 1)


def test_spectrum_trace_and_leading(xxz3):
    fam, fns, recs = xxz3
    N = 3
    for lam in PROBES:
        total = sum(r.tau(lam) for r in recs)
        tr = np.trace(fam.transfer(lam))
        assert abs(total - tr) < 1e-8 * abs(tr)
    lead = 2.0 ** (N + 2) * central_values(fam).asymptotic
    for r in recs:
        assert r.tau.degree == N + 2
        assert abs(r.tau.leading - lead) < 1e-8 * abs(lead)
        assert r.tau(0.3 + 0.1j) == r.tau(-0.3 - 0.1j)


def test_spectrum_single_site_diagonal():
    chain = ChainParams(1, 0.4 + 0.2j, (0.1 - 0.15j,))
    fam = TransferFamily(chain, BoundaryParams(0.5 + 0.1j, 0, 0.2, -0.3 + 0.4j, 0, 0.1))
    fns = build_sov_functions(fam)
    recs = spectrum_extract(fam, fns)
    for lam in PROBES:
        direct = np.sort_complex(np.linalg.eigvals(fam.transfer(lam)))
        assert_allclose(np.sort_complex([r.tau(lam) for r in recs]), direct, rtol=1e-10)


def test_classify_random_boundaries():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        chain = sample_chain(3, rng)
        bp = sample_boundary(3, chain.eta, rng)
        cls = classify_boundary(bp, 3, chain.eta)
        assert not cls.in_N_SOV and not cls.in_M_lattice
        assert cls.Y_zero == ()
        assert np.min(np.abs(cls.Y_table)) > 1e-8


def test_classify_constructed_y_zero():
    rng = np.random.default_rng(4)
    chain = sample_chain(3, rng)
    bp = construct_y_zero(3, chain.eta, 0, 3, rng)
    cls = classify_boundary(bp, 3, chain.eta)
    assert cls.Y_zero == ((0, 6),)
    assert abs(f0(bp, 3, chain.eta)) < 1e-12


def test_classify_m_lattice_origin():
    rng = np.random.default_rng(6)
    chain = sample_chain(3, rng)
    bp = construct_m_lattice(3, chain.eta, (0, 0, 0), rng)
    assert abs(bp.alpha_plus + bp.alpha_minus) < 1e-12
    assert abs(bp.beta_minus - bp.beta_plus) < 1e-12
    assert abs(bp.tau_minus - bp.tau_plus - 2 * chain.eta) < 1e-12
    cls = classify_boundary(bp, 3, chain.eta)
    assert cls.in_M_lattice and (0, 0, 0) in cls.M_triples


def test_classify_diagonal():
    cls = classify_boundary(BoundaryParams(0.5, 0, 0.1, 0.4, 0, 0.2), 2, 0.3)
    assert cls.diagonal and not cls.in_M_lattice and cls.Y_table is None


def test_degenerate_lattice_spectrum():
    # at this lattice point T has a two-dimensional eigenspace
    rng = np.random.default_rng(6)
    chain = sample_chain(2, rng)
    bp = construct_m_lattice(2, chain.eta, (0, 0, 0), rng)
    fam = TransferFamily(chain, bp)
    with pytest.raises(DegenerateSpectrum):
        spectrum_extract(fam, build_sov_functions(fam))


def test_frozen_oracle_spectrum(oracle_cases):
    for case in oracle_cases:
        fam, fns = oracle_family(case)
        recs = spectrum_extract(fam, fns, anchor=cplx(case["anchor"]))
        ours = np.array([r.anchor_value for r in recs])
        for ref in case["eigen"]:
            k = np.argmin(np.abs(ours - cplx(ref["anchor_value"])))
            tau_ref = np.array([cplx(c) for c in ref["tau_coeffs"]])
            coeffs = recs[k].tau.coeffs
            assert coeffs.size == tau_ref.size
            assert np.linalg.norm(coeffs - tau_ref) < 1e-11 * np.linalg.norm(tau_ref)
