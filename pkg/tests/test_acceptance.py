"""Acceptance criteria: closed forms, oracle reproductions and property
checks at desk scale.  Each test prints one pass/fail line; tolerances are
pinned here, not deferred.

Heavy artifacts (the asymmetric baseline profile and its refinement) come
from session fixtures shared with the module tests, so the wall-clock cost
of this file stays well inside the stated budgets.
"""

import numpy as np

from perifront import front_solver as fs
from perifront import spectral
from perifront import steady_states as ss
from perifront import subsuper_verifier as sv
from perifront import wave_speeds as wsp
from perifront.discretization import LineGrid, PeriodicGrid


def report(num, label, ok, detail=""):
    print(f"[ACCEPT] criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {label}"
          + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num}: {label} {detail}"


def test_c01_constant_eigenvalues():
    g = PeriodicGrid(1.0, 64)
    worst = 0.0
    for d, a, q in ((1.0, 0.0, 0.5), (2.0, 3.0, -0.25), (0.5, -1.0, 1.5)):
        pair = spectral.principal_eigen(d, a, q, g)
        worst = max(worst, abs(pair.value - q))
    report(1, "constant-coefficient lambda0 = q", worst < 1e-10, f"worst error {worst:.2e}")


def test_c02_kpp_closed_form(grid64):
    worst = 0.0
    for d in (0.5, 1.0, 2.0):
        for q in (0.5, 1.0, 2.0):
            for a in (-1.0, 0.0, 1.0):
                res = wsp.minimal_speed(spectral.TiltedFamily(d, a, q, grid64), "rightward")
                worst = max(worst, abs(res.c_star - (a + 2.0 * np.sqrt(d * q))))
    report(2, "KPP closed form over 27-point sweep", worst < 1e-6, f"worst error {worst:.2e}")


def test_c03_cross_identity(periodic_trio):
    g = PeriodicGrid(1.0, 256)
    worst = 0.0
    for system in periodic_trio:
        result = ss.cross_identity_check(system, g)
        worst = max(worst, max(result["defect_a"]), max(result["defect_b"]))
    report(3, "cross identities on 3 periodic systems at N=256", worst < 1e-6,
           f"worst defect {worst:.2e}")


def test_c04_mu_convexity_and_symmetry(grid64):
    from perifront.periodic_coeffs import PeriodicFn
    q = PeriodicFn(1.0, 1.0, (0.5,))
    fam = spectral.TiltedFamily(1.0, 0.0, q, grid64)
    mus = np.linspace(-2.0, 2.0, 21)
    lams = np.array([fam(m) for m in mus])
    h = mus[1] - mus[0]
    second = (lams[:-2] - 2 * lams[1:-1] + lams[2:]) / h**2
    convex_ok = second.min() >= -1e-8

    d = PeriodicFn(1.0, 1.0, (0.3,))
    a = PeriodicFn(1.0, 0.0, (), (0.7,))
    sym_defect = 0.0
    for mu in (0.5, 1.0, 1.5):
        plus = spectral.lambda_of_mu(d, a, q, mu, grid64).value
        minus = spectral.lambda_of_mu(d, a, q, -mu, grid64).value
        sym_defect = max(sym_defect, abs(plus - minus))
    report(4, "lambda(mu) convexity and even symmetry",
           convex_ok and sym_defect < 1e-8,
           f"min 2nd divided diff {second.min():.2e}, symmetry defect {sym_defect:.2e}")


def test_c05_triangular_constants(coop_sym, grid64):
    pair = spectral.triangular_pair(coop_sym, "around_0", grid64)
    err_mu = abs(pair.value + 0.5)
    ratio = pair.phi2 / pair.phi1
    err_ratio = float(np.max(np.abs(ratio - 3.0)))
    report(5, "triangular eigenpair constants case", err_mu < 1e-8 and err_ratio < 1e-8,
           f"mu error {err_mu:.2e}, ratio error {err_ratio:.2e}")


def test_c06_audit_margins(sym_constants, grid64):
    rep = ss.audit_assumptions(sym_constants, grid64, n_seeds=16, seed=0)
    h1_ok = max(abs(rep.h1["values"][0] + 0.5), abs(rep.h1["values"][1] + 0.5)) < 1e-6
    b1_ok = max(abs(rep.b1["margins"][0] - 0.5), abs(rep.b1["margins"][1] - 0.5)) < 1e-6
    b2_ok = abs(rep.b2["sum"] - 4.0) < 1e-6
    report(6, "symmetric-constants audit margins",
           rep.verdict and h1_ok and b1_ok and b2_ok,
           f"H1 {rep.h1['values']}, B1 {rep.b1['margins']}, B2 sum {rep.b2['sum']:.9f}")


def test_c07_comparison_principle(coop_asym):
    grid = LineGrid(period=1.0, n_per_period=64, periods=16, x_min=-8.0)
    dt = 0.9 * fs.dt_max(coop_asym)
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(10):
        lo1 = rng.uniform(0.0, 0.7, grid.m)
        lo2 = rng.uniform(0.0, 0.7, grid.m)
        hi1 = np.clip(lo1 + rng.uniform(0.0, 0.3, grid.m), 0, 1)
        hi2 = np.clip(lo2 + rng.uniform(0.0, 0.3, grid.m), 0, 1)
        a = fs.CauchyState(grid, lo1, lo2, 0.0)
        b = fs.CauchyState(grid, hi1, hi2, 0.0)
        for _ in range(500):
            a = fs.step(a, coop_asym, dt)
            b = fs.step(b, coop_asym, dt)
        worst = max(worst, float(np.max(a.u1 - b.u1)), float(np.max(a.u2 - b.u2)))
    report(7, "discrete comparison principle 10x500", worst <= 1e-12,
           f"worst violation {worst:.2e}")


def test_c08_box_and_agreement(coop_asym):
    grid = LineGrid(period=1.0, n_per_period=64, periods=16, x_min=-8.0)
    rng = np.random.default_rng(11)
    u1 = rng.uniform(0, 1, grid.m)
    u2 = rng.uniform(0, 1, grid.m)
    a = fs.CauchyState(grid, u1.copy(), u2.copy(), 0.0)
    b = fs.CauchyState(grid, u1.copy(), u2.copy(), 0.0)
    dt = 0.9 * fs.dt_max(coop_asym, True)
    box_ok = True
    for _ in range(500):
        a = fs.step(a, coop_asym, dt, use_extended=False)
        b = fs.step(b, coop_asym, dt, use_extended=True)
        box_ok = box_ok and a.u1.min() >= -1e-12 and a.u1.max() <= 1 + 1e-12
        box_ok = box_ok and a.u2.min() >= -1e-12 and a.u2.max() <= 1 + 1e-12
    agree = max(float(np.max(np.abs(a.u1 - b.u1))), float(np.max(np.abs(a.u2 - b.u2))))
    report(8, "box invariance and extended/standard agreement",
           box_ok and agree <= 1e-12, f"agreement defect {agree:.2e}")


def test_c09_symmetric_speed(sym_periodic, line80_64):
    g = PeriodicGrid(1.0, 64)
    coop = ss.cooperative_from_competition(sym_periodic, g)
    est = fs.estimate_speed(coop, None, 40.0, line80_64)
    report(9, "symmetric system front speed", abs(est.c) < 1e-3, f"|c| = {abs(est.c):.2e}")


def test_c10_profile_quality(baseline_profile, refined_pipeline):
    p = baseline_profile
    _, _, fine = refined_pipeline
    ratio = p.residual / fine.residual
    ok = (p.monotone
          and p.periodicity_defect < 1e-8
          and p.limits["left"] < 1e-4 and p.limits["right"] < 1e-4
          and 2.8 < ratio < 6.0
          and abs(p.c - fine.c) < 1e-3)
    report(10, "front profile quality and refinement",
           ok,
           f"pdef {p.periodicity_defect:.1e}, limits ({p.limits['left']:.1e}, "
           f"{p.limits['right']:.1e}), residual ratio {ratio:.2f}, |dc| {abs(p.c - fine.c):.1e}")


def test_c11_subsupersolutions(baseline_pack, coop_asym, baseline_profile,
                               baseline_pairs, line80_64):
    ineq = sv.verify_inequalities(baseline_pack, coop_asym, n_t=64, n_x=256)
    buckets_ok = ineq.passed and len(ineq.buckets) == 6
    pair0, pair1 = baseline_pairs
    pack_s = sv.build_pack(baseline_profile, coop_asym, pair0, pair1,
                           z_plus=1.0, z_minus=-1.0)
    sw1 = sv.sandwich_experiment(pack_s, coop_asym, line80_64, 6.0,
                                 initial="front_shift", z0=0.0)
    sw2 = sv.sandwich_experiment(pack_s, coop_asym, line80_64, 6.0, initial="step")
    sandwich_worst = max(sw1.worst_low, sw1.worst_high, sw2.worst_low, sw2.worst_high)
    report(11, "Lemma-scale inequality verification and sandwich",
           buckets_ok and sandwich_worst <= 1e-10,
           f"eps_num {ineq.eps_num:.1e}, sandwich worst {sandwich_worst:.1e}")


def test_c12_global_stability(coop_asym, baseline_profile, line80_64):
    data = [baseline_profile.state_at(line80_64, t=0.0, shift=0.4),
            fs.front_like_initial(line80_64, width=1.2)]
    rep = sv.global_stability_experiment(coop_asym, baseline_profile, data, 40.0, line80_64)
    final = max(r["final_e"] for r in rep.runs)
    ok = (final < 1e-3 and rep.speed_agreement < 1e-3 and rep.profile_agreement < 1e-3)
    report(12, "global stability and uniqueness at desk scale", ok,
           f"final e {final:.1e}, |dc| {rep.speed_agreement:.1e}, "
           f"profile match {rep.profile_agreement:.1e}")


def test_c13_coexistence_instability(coop_sym, coop_asym, sym_periodic, grid64):
    coop_per = ss.cooperative_from_competition(sym_periodic, grid64)
    ok = True
    found = 0
    details = []
    for name, coop in (("sym", coop_sym), ("asym", coop_asym), ("periodic", coop_per)):
        states = ss.find_coexistence_states(coop, grid64, n_seeds=64, seed=0)
        found += len(states)
        for s in states:
            details.append(f"{name}: {s.classifying_eigenvalue:+.4f}")
            ok = ok and s.classifying_eigenvalue > 1e-7
    report(13, "coexistence states all unstable", ok and found >= 3,
           "; ".join(details))
