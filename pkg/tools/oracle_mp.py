"""Independent high-precision oracle; writes tests/data/oracle_frozen.json.

Shares no code with the package.  The transfer matrix is assembled with
explicit tensor products in mpmath at 30 digits; eigenvalue functions come
from exact-count interpolation of Rayleigh quotients; Q and the constant
F0 of the inhomogeneous term are obtained together by collocation of the
Baxter equation (a different route from the package's node-based solve).

Run:  python3 tools/oracle_mp.py
"""
from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30
I = mp.mpc(0, 1)

CASES = [
    {"name": "xxz_N1", "model": "xxz", "N": 1, "eta": (0.37, 0.21), "xi": [(0.11, -0.07)],
     "boundary": {"zeta_plus": (0.8, 0.3), "kappa_plus": (0.6, -0.2), "tau_plus": (0.25, 0.4),
                  "zeta_minus": (-0.45, 0.55), "kappa_minus": (0.35, 0.5), "tau_minus": (-0.3, 0.15)}},
    {"name": "xxz_N2", "model": "xxz", "N": 2, "eta": (0.41, -0.17), "xi": [(0.12, 0.05), (-0.21, 0.16)],
     "boundary": {"zeta_plus": (0.7, -0.35), "kappa_plus": (0.55, 0.25), "tau_plus": (-0.2, 0.3),
                  "zeta_minus": (0.5, 0.6), "kappa_minus": (-0.4, 0.45), "tau_minus": (0.35, -0.1)}},
    {"name": "xxx_N1", "model": "xxx", "N": 1, "eta": (0.6, 0.25), "xi": [(0.15, -0.1)],
     "boundary": {"p": (0.7, 0.2), "q": (-0.5, 0.45), "xi_b": (0.4, -0.3)}},
    {"name": "xxx_N2", "model": "xxx", "N": 2, "eta": (0.55, -0.3), "xi": [(0.2, 0.1), (-0.15, 0.22)],
     "boundary": {"p": (0.65, -0.25), "q": (0.45, 0.5), "xi_b": (-0.35, 0.6)}},
]
ANCHOR = mp.mpc("0.52", "0.31")
PROBE = mp.mpc("0.3", "0.2")


def c(pair):
    return mp.mpc(mp.mpf(repr(pair[0])), mp.mpf(repr(pair[1])))


def kron(A, B):
    out = mp.zeros(A.rows * B.rows, A.cols * B.cols)
    for i in range(A.rows):
        for j in range(A.cols):
            for k in range(B.rows):
                for m in range(B.cols):
                    out[i * B.rows + k, j * B.cols + m] = A[i, j] * B[k, m]
    return out


def eye(n):
    return mp.eye(n)


def r_op(model, lam, eta, site, N):
    """R acting on (aux, site) inside aux x H, written as sum of e_ij (x) local ops."""
    if model == "xxz":
        a, b, cc = mp.sinh(lam + eta), mp.sinh(lam), mp.sinh(eta)
    else:
        a, b, cc = lam + eta, lam, eta
    # R = sum_{i,j,k,l} R[(i,k),(j,l)] e_ij(aux) e_kl(site)
    R = {(0, 0, 0, 0): a, (1, 1, 1, 1): a, (0, 0, 1, 1): b, (1, 1, 0, 0): b, (0, 1, 1, 0): cc, (1, 0, 0, 1): cc}
    D = 2 ** N
    out = mp.zeros(2 * D, 2 * D)
    for (i, j, k, l), val in R.items():
        eij = mp.zeros(2, 2)
        eij[i, j] = 1
        ekl = mp.zeros(2, 2)
        ekl[k, l] = 1
        local = eye(1)
        for s in range(1, N + 1):
            local = kron(local, ekl if s == site else eye(2))
        out += val * kron(eij, local)
    return out


def k_xxz(lam, zeta, kappa, tau, eta):
    off = kappa * mp.sinh(2 * lam - eta)
    return mp.matrix([[mp.sinh(lam - eta / 2 + zeta), off * mp.exp(tau)],
                      [off * mp.exp(-tau), mp.sinh(zeta - lam + eta / 2)]]) / mp.sinh(zeta)


def k_minus(case, lam, eta):
    b = case["b"]
    if case["model"] == "xxz":
        return k_xxz(lam, b["zeta_minus"], b["kappa_minus"], b["tau_minus"], eta)
    return mp.matrix([[lam - eta / 2 + b["p"], 0], [0, b["p"] - lam + eta / 2]])


def k_plus(case, lam, eta):
    b = case["b"]
    if case["model"] == "xxz":
        return k_xxz(lam + eta, b["zeta_plus"], b["kappa_plus"], b["tau_plus"], eta)
    m = lam + eta / 2
    return mp.matrix([[m + b["q"], b["xi_b"] * m], [b["xi_b"] * m, b["q"] - m]])


def transfer(case, lam):
    N, eta, xi = case["N"], case["eta"], case["xi"]
    D = 2 ** N
    M = eye(2 * D)
    for site in range(1, N + 1):
        M = r_op(case["model"], lam - xi[site - 1] - eta / 2, eta, site, N) * M
    Mm = eye(2 * D)
    for site in range(1, N + 1):
        Mm = r_op(case["model"], -lam - xi[site - 1] - eta / 2, eta, site, N) * Mm
    # aux transpose of M(-lam), then conjugate by sigma^y on the aux space
    Mt = mp.zeros(2 * D, 2 * D)
    for i in range(2):
        for j in range(2):
            for r in range(D):
                for s in range(D):
                    Mt[i * D + r, j * D + s] = Mm[j * D + r, i * D + s]
    sy = kron(mp.matrix([[0, -I], [I, 0]]), eye(D))
    Mhat = (-1) ** N * sy * Mt * sy
    U = kron(k_plus(case, lam, eta), eye(D)) * M * kron(k_minus(case, lam, eta), eye(D)) * Mhat
    T = mp.zeros(D, D)
    for r in range(D):
        for s in range(D):
            T[r, s] = U[r, s] + U[D + r, D + s]
    return T


def var(case, lam):
    return mp.cosh(2 * lam) if case["model"] == "xxz" else lam * lam


def big_A(case, lam):
    N, eta, xi, b = case["N"], case["eta"], case["xi"], case["b"]
    if case["model"] == "xxz":
        def g(x, side, sign):
            al, be = b[f"alpha_{side}"], b[f"beta_{side}"]
            return mp.sinh(x + al - eta / 2) * mp.cosh(x - sign * be - eta / 2) / (mp.sinh(al) * mp.cosh(be))
        a = mp.fprod(mp.sinh(lam - x + eta / 2) for x in xi)
        d_m = mp.fprod(mp.sinh(-lam - eta - x + eta / 2) for x in xi)
        return ((-1) ** N * mp.sinh(2 * lam + eta) / mp.sinh(2 * lam) * g(lam, "plus", 1) * g(lam, "minus", -1)
                * a * d_m)
    s = mp.sqrt(1 + b["xi_b"] ** 2)
    prod = mp.fprod((lam - (x - eta / 2)) * (lam + (x + eta / 2)) for x in xi)
    return (2 * lam + eta) / (2 * lam) * (lam - eta / 2 + b["p"]) * (s * (lam - eta / 2) + b["q"]) * prod


def alpha_beta(zeta, kappa):
    s = mp.asinh(mp.exp(zeta) / (2 * kappa))
    d = mp.asinh(-mp.exp(-zeta) / (2 * kappa))
    return (s + d) / 2, (s - d) / 2


def solve_exact(rows, rhs):
    return mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))


def run_case(spec):
    case = {"name": spec["name"], "model": spec["model"], "N": spec["N"], "eta": c(spec["eta"]),
            "xi": [c(x) for x in spec["xi"]], "b": {k: c(v) for k, v in spec["boundary"].items()}}
    if case["model"] == "xxz":
        for side in ("plus", "minus"):
            al, be = alpha_beta(case["b"][f"zeta_{side}"], case["b"][f"kappa_{side}"])
            case["b"][f"alpha_{side}"], case["b"][f"beta_{side}"] = al, be
    N, eta = case["N"], case["eta"]
    degree = N + 2 if case["model"] == "xxz" else N + 1
    T0 = transfer(case, ANCHOR)
    E, ER = mp.eig(T0)
    EL = mp.inverse(ER)  # rows are left eigenvectors
    pts = [mp.mpc("0.23", "0.11") + k * mp.mpc("0.071", "0.043") for k in range(degree + 1)]
    vals = []
    for p in pts:
        Tp = transfer(case, p)
        vals.append([(EL[j, :] * Tp * ER[:, j])[0] for j in range(len(E))])
    out = {"name": case["name"], "model": case["model"], "N": N, "eta": spec["eta"], "xi": spec["xi"],
           "boundary": spec["boundary"], "eigen": []}
    TP = transfer(case, PROBE)
    out["T_probe"] = {"lam": [float(PROBE.real), float(PROBE.imag)],
                      "entries": [[[float(TP[i, j].real), float(TP[i, j].imag)] for j in range(TP.cols)]
                                  for i in range(TP.rows)]}
    lead = mp.mpf(2) ** N if case["model"] == "xxz" else mp.mpf(1)
    e_edge = [mp.cosh(eta)] if case["model"] == "xxz" else [eta * eta / 4]
    for j in range(len(E)):
        rows = [[var(case, p) ** k for k in range(degree + 1)] for p in pts]
        coef = solve_exact(rows, [vals[i][j] for i in range(len(pts))])

        def tau(lam):
            v = var(case, lam)
            return mp.fsum(coef[k] * v ** k for k in range(degree + 1))

        def F_shape(lam):
            v = var(case, lam)
            base = (v * v - e_edge[0] ** 2) if case["model"] == "xxz" else (v - e_edge[0])
            return base * mp.fprod((v - var(case, x - eta / 2)) * (v - var(case, x + eta / 2)) for x in case["xi"])

        # unknowns: Q coefficients q_0..q_{N-1} (leading fixed) and F0
        cpts = [mp.mpc("0.17", "0.29") + k * mp.mpc("0.093", "-0.051") for k in range(N + 1)]
        rows, rhs = [], []
        for lam in cpts:
            v, vm, vp = var(case, lam), var(case, lam - eta), var(case, lam + eta)
            Ap, Am = big_A(case, lam), big_A(case, -lam)
            phi = [tau(lam) * v ** k - Ap * vm ** k - Am * vp ** k for k in range(N + 1)]
            rows.append(phi[:N] + [-F_shape(lam)])
            rhs.append(-lead * phi[N])
        sol = solve_exact(rows, rhs)
        qcoef = [sol[k] for k in range(N)] + [lead]
        F0 = sol[N]
        roots = mp.polyroots(list(reversed(qcoef)), maxsteps=200, extraprec=60) if N > 0 else []
        # check on fresh points
        worst = mp.mpf(0)
        for lam in [mp.mpc("-0.41", "0.37"), mp.mpc("0.61", "-0.23"), mp.mpc("0.05", "0.77")]:
            v, vm, vp = var(case, lam), var(case, lam - eta), var(case, lam + eta)
            Q = lambda w: mp.fsum(qcoef[k] * w ** k for k in range(N + 1))
            r = tau(lam) * Q(v) - big_A(case, lam) * Q(vm) - big_A(case, -lam) * Q(vp) - F0 * F_shape(lam)
            worst = max(worst, abs(r) / (1 + abs(tau(lam) * Q(v))))
        assert worst < mp.mpf("1e-20"), (case["name"], worst)
        out["eigen"].append({
            "anchor_value": [float(E[j].real), float(E[j].imag)],
            "tau_coeffs": [[float(x.real), float(x.imag)] for x in coef],
            "Q_coeffs": [[float(mp.re(x)), float(mp.im(x))] for x in qcoef],
            "Q_roots": sorted([[float(mp.re(x)), float(mp.im(x))] for x in roots]),
            "F0": [float(F0.real), float(F0.imag)],
        })
    out["anchor"] = [float(ANCHOR.real), float(ANCHOR.imag)]
    return out


def main():
    data = {"dps": mp.mp.dps, "cases": [run_case(s) for s in CASES]}
    path = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracle_frozen.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
