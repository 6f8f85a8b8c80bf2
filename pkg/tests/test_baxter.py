import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import cplx, generic_xxz, oracle_family
from sovbaxter.baxter import (QPolynomial, baxter_pipeline, baxter_residuals, big_F, big_F_product, bethe_residuals,
                              c_matrix, classify_eigenvalue_M, construction_points, f0, homogeneous_fit, solve_q,
                              system1_residual, verify_baxter, z_q)
from sovbaxter.errors import RootOnPole, SingularC
from sovbaxter.model6v import BoundaryParams, TransferFamily
from sovbaxter.numerics import EvenTrigPoly, trig_interpolate
from sovbaxter.sampling import construct_diagonal, construct_y_zero, sample_chain
from sovbaxter.sov import build_sov_functions, spectrum_extract

PROBES = [0.23 + 0.41j, -0.57 + 0.12j, 0.8 - 0.3j, 0.05 + 0.66j, -0.31 - 0.72j]


def y_zero_family(N, i, M, seed):
    rng = np.random.default_rng(seed)
    chain = sample_chain(N, rng)
    bp = construct_y_zero(N, chain.eta, i, M, rng)
    fam = TransferFamily(chain, bp)
    fns = build_sov_functions(fam)
    return fam, fns, spectrum_extract(fam, fns)


@pytest.fixture(scope="module")
def solved3(xxz3):
    fam, fns, recs = xxz3
    return fam, fns, recs, [solve_q(r.tau, fns, fam.boundary)[0] for r in recs]


def test_f0_examples():
    rng = np.random.default_rng(2)
    chain = sample_chain(3, rng)
    bp = construct_y_zero(3, chain.eta, 0, 3, rng)
    assert abs(f0(bp, 3, chain.eta)) < 1e-12
    diag = BoundaryParams(0.4, 0, 0.1, 0.6 + 0.2j, 0.8, 0.3)
    assert f0(diag, 3, chain.eta) == 0


def test_f0_from_zeta_kappa_only():
    # eliminate alpha, beta: sinh(a+-b) = +-exp(+-zeta)/(2 kappa), cosh via the principal root
    for seed in range(20):
        fam, fns = generic_xxz(3, 300 + seed)
        b, eta, N = fam.boundary, fns.eta, 3
        sA = -np.exp(-b.zeta_plus) / (2 * b.kappa_plus)
        sB = np.exp(b.zeta_minus) / (2 * b.kappa_minus)
        cA, cB = np.sqrt(1 + sA * sA), np.sqrt(1 + sB * sB)
        ch, sh = cA * cB + sA * sB, sA * cB + cA * sB
        x = (N + 1) * eta
        cosh_shift = ch * np.cosh(x) - sh * np.sinh(x)
        ref = (2 * b.kappa_plus * b.kappa_minus * (np.cosh(b.tau_plus - b.tau_minus) - cosh_shift)
               / (np.sinh(b.zeta_plus) * np.sinh(b.zeta_minus)))
        assert abs(fns.F0 - ref) < 1e-12 * max(abs(ref), 1)


def test_big_F_forms(xxz3):
    fam, fns, _ = xxz3
    eta = fns.eta
    for z in [eta / 2, eta / 2 + 0.5j * np.pi, *fns.zeta0, *fns.zeta1, -fns.zeta0[0]]:
        # rounding scale of the monomial evaluation at z
        scale = np.polynomial.polynomial.polyval(abs(np.cosh(2 * z)), np.abs(fns.F.coeffs))
        assert abs(big_F(z, fns)) < 1e-13 * scale
    for lam in PROBES:
        prod = big_F_product(lam, fns, fam.a, fam.d)
        assert abs(big_F(lam, fns) - prod) < 1e-12 * max(abs(prod), 1)
    pts = np.array([0.05 + 0.1 * k + 1j * np.pi * k / 9 for k in range(2 * 3 + 3)])
    fit = trig_interpolate(list(zip(np.cosh(2 * pts), [big_F_product(p, fns, fam.a, fam.d) for p in pts])), 2 * 3 + 2)
    assert abs(fit.leading - fns.F0) < 1e-8 * abs(fns.F0)


def test_z_q_even_and_leading(solved3):
    fam, fns, recs, Qs = solved3
    b, eta, N = fam.boundary, fns.eta, 3
    zl = (2 * b.kappa_plus * b.kappa_minus
          * np.cosh(b.alpha_plus + b.alpha_minus - b.beta_plus + b.beta_minus - (N + 1) * eta)
          / (np.sinh(b.zeta_plus) * np.sinh(b.zeta_minus)))
    pts = np.array([0.1 + 0.2j + 0.13 * k * (1 + 0.3j) for k in range(2 * N + 3)])
    for r, Q in zip(recs, Qs):
        for lam in PROBES:
            assert abs(z_q(lam, Q, fns) - z_q(-lam, Q, fns)) < 1e-11 * abs(z_q(lam, Q, fns))
        Z = trig_interpolate(list(zip(np.cosh(2 * pts), [z_q(p, Q, fns) for p in pts])), 2 * N + 2)
        assert abs(Z.leading - zl) < 1e-8 * abs(zl)
        # asymptotic matching of tau Q against Z_Q + F
        lhs = (r.tau * Q.form).leading
        assert abs(lhs - (Z.leading + fns.F.leading)) < 1e-8 * abs(lhs)


def test_z_q_continuous_at_poles(solved3):
    _, fns, _, Qs = solved3
    eta = fns.eta
    Q = Qs[0]

    def direct(lam):
        return (fns.prefactor(lam) * fns.G(lam) * Q(lam - eta)
                + fns.prefactor(-lam) * fns.G(-lam) * Q(lam + eta))

    for pole in fns.pole_points:
        limit = z_q(pole, Q, fns)
        assert abs(direct(pole + 1e-6) - limit) < 1e-5 * abs(limit)
        assert abs(direct(pole + 1e-4j) - limit) < 1e-5 * abs(limit)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_pipeline_all_eigenvalues(N):
    fam, fns = generic_xxz(N, 200 + N)
    for k, r in enumerate(spectrum_extract(fam, fns)):
        rep = baxter_pipeline(r.tau, fns, fam.boundary, seed=k)
        assert abs(rep.det_c) > 0
        assert rep.Q.degree == N and rep.Q.form.leading == 2.0 ** N
        assert rep.baxter_residual < 1e-8
        assert np.all(rep.bae_residuals < 1e-7)
        assert rep.system1_residual < 1e-10
        assert rep.passed and rep.regime == "inhomogeneous"
        assert np.max(baxter_residuals(r.tau, rep.Q, fns, construction_points(fns))) < 1e-10


def test_single_site_closed_form():
    fam, fns = generic_xxz(1, 17)
    for r in spectrum_extract(fam, fns):
        Q, _ = solve_q(r.tau, fns, fam.boundary)
        z0, z1 = fns.zeta0[0], fns.zeta1[0]
        c = 1 - r.tau(z0) / fns.A(-z0)
        q0 = -2 * (np.cosh(2 * z1) - np.cosh(2 * z0)) / c
        assert abs(Q(z0) - q0) < 1e-12 * abs(q0)


def test_perturbed_tau_fails_system1(solved3):
    _, fns, recs, _ = solved3
    bad = recs[0].tau + EvenTrigPoly([1e-3, 0, 1e-3])
    assert np.max(system1_residual(bad, fns)) > 1e-6


def test_root_perturbation_sensitivity(solved3):
    _, fns, recs, Qs = solved3
    tau, Q = recs[1].tau, Qs[1]
    base = verify_baxter(tau, Q, fns)
    roots = Q.roots_u.copy()
    roots[0] += 1e-3
    moved = QPolynomial.from_poly(EvenTrigPoly.from_roots(roots, Q.form.leading))
    assert verify_baxter(tau, moved, fns) > 1e3 * base


def test_bethe_residuals(solved3):
    _, fns, _, Qs = solved3
    for Q in Qs:
        assert np.all(bethe_residuals(Q, fns) < 1e-7)
    shifted = QPolynomial(Qs[0].form, Qs[0].roots_u, Qs[0].roots_lambda + 0.2)
    assert np.min(bethe_residuals(shifted, fns)) > 1e-3


def test_root_on_pole(xxz3):
    _, fns, _ = xxz3
    Q = QPolynomial.from_poly(EvenTrigPoly.from_roots([-1.0, 2.0, 0.5j], 8.0))
    with pytest.raises(RootOnPole):
        bethe_residuals(Q, fns)
    with pytest.raises(RootOnPole):
        bethe_residuals(QPolynomial.from_poly(EvenTrigPoly.from_roots([1.0, 2.0, 0.5j], 8.0)), fns)


def test_uniqueness_under_perturbation(xxz3):
    fam, fns, recs = xxz3
    tau = recs[2].tau
    c = c_matrix(tau, fns)
    v0, v1 = np.cosh(2 * fns.zeta0), np.cosh(2 * fns.zeta1)
    rhs = np.array([-fns.q_leading * np.prod(v1[b] - v0) for b in range(3)])
    qn = np.linalg.solve(c.T, rhs)
    Q, _ = solve_q(tau, fns, fam.boundary)
    assert_allclose([Q(z) for z in fns.zeta0], qn, rtol=1e-10)
    rng = np.random.default_rng(0)
    delta = 1e-9 * np.linalg.norm(rhs) * (rng.normal(size=3) + 1j * rng.normal(size=3))
    qp = np.linalg.solve(c.T, rhs + delta)
    bound = np.linalg.cond(c) * np.linalg.norm(delta) / np.linalg.norm(rhs)
    assert np.linalg.norm(qp - qn) / np.linalg.norm(qn) <= 2 * bound


def test_frozen_oracle_q(oracle_cases):
    for case in oracle_cases:
        if case["model"] != "xxz":
            continue
        fam, fns = oracle_family(case)
        recs = spectrum_extract(fam, fns, anchor=cplx(case["anchor"]))
        ours = np.array([r.anchor_value for r in recs])
        for ref in case["eigen"]:
            assert abs(fns.F0 - cplx(ref["F0"])) < 1e-12 * abs(cplx(ref["F0"]))
            k = np.argmin(np.abs(ours - cplx(ref["anchor_value"])))
            Q, _ = solve_q(recs[k].tau, fns, fam.boundary)
            q_ref = np.array([cplx(c) for c in ref["Q_coeffs"]])
            assert np.linalg.norm(Q.form.coeffs - q_ref) < 1e-10 * np.linalg.norm(q_ref)


def test_singular_c_at_y_zero():
    fam, fns, recs = y_zero_family(3, 0, 0, 31)
    raised = []
    for r in recs:
        try:
            solve_q(r.tau, fns, fam.boundary)
        except SingularC as exc:
            raised.append(exc)
    assert raised
    assert all((0, 0) in exc.near_zero for exc in raised)


@pytest.mark.parametrize("M, expected", [(0, 1), (1, 4), (2, 7)])
def test_split_classification(M, expected):
    fam, fns, recs = y_zero_family(3, 0, M, 40 + M)
    routes = [classify_eigenvalue_M(r.tau, fns, fam.boundary, M) for r in recs]
    assert sum(c.route == "homogeneous" for c in routes) == expected
    assert sum(c.route == "inhomogeneous" for c in routes) == 8 - expected
    assert not any(c.ambiguous for c in routes)
    for c in routes:
        if c.route == "homogeneous":
            assert c.Q.degree == M and c.homogeneous_residual < 1e-9


def test_homogeneous_full_regime():
    N = 3
    fam, fns, recs = y_zero_family(N, 0, N, 51)
    assert fns.F0 == 0 or abs(fns.F0) < 1e-12
    bae_count = 0
    for k, r in enumerate(recs):
        rep = baxter_pipeline(r.tau, fns, fam.boundary, seed=k)
        assert rep.regime == "homogeneous_full" and rep.passed
        bae_count += bool(np.all(rep.bae_residuals < 1e-7))
        cls = classify_eigenvalue_M(r.tau, fns, fam.boundary, N)
        assert cls.route == "homogeneous" and cls.Q.degree == N
    assert bae_count == 2 ** N


@pytest.mark.parametrize("N", [1, 2, 3])
def test_no_homogeneous_solution_for_generic_boundaries(N):
    fam, fns = generic_xxz(N, 400 + N)
    for r in spectrum_extract(fam, fns):
        for M in range(N + 1):
            _, res = homogeneous_fit(r.tau, fns, M)
            assert res > 1e-3


def test_classification_guard_for_diagonal_boundaries():
    rng = np.random.default_rng(9)
    chain = sample_chain(2, rng)
    fam = TransferFamily(chain, construct_diagonal(rng))
    fns = build_sov_functions(fam)
    tau = spectrum_extract(fam, fns)[0].tau
    with pytest.raises(ValueError):
        classify_eigenvalue_M(tau, fns, fam.boundary, 1)
