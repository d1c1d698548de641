"""Periodic steady states, coexistence search, and the assumption audit.

Steady states come from IMEX time marching (implicit linear part, explicit
reaction, adaptively doubled steps) followed by Newton polish; the audit
evaluates every standing hypothesis of the bistable setup - trivial-state
instability, (H1)/(A1) local stability, the (B1) eigenvalue gaps, the (B2)
counter-propagation sum, and the multistart (A2) instability heuristic.
"""

import concurrent.futures
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import cooperative_transform as ct
from . import discretization as dz
from . import spectral
from . import wave_speeds
from .errors import NonConvergenceError, PreconditionError
from .periodic_coeffs import validate_system

_MARGINAL_BAND = 1e-7  # |lambda| below this is reported as marginal, not a sign


@dataclass
class PeriodicSteadyState:
    """A periodic steady state with residual and stability classification."""

    samples: object  # ndarray (one species) or (u1, u2) tuple (coexistence)
    residual: float
    stability: str  # "stable" | "unstable" | "marginal"
    classifying_eigenvalue: float

    @property
    def is_pair(self):
        return isinstance(self.samples, tuple)


def _logistic_lipschitz(bv, cv, u_cap):
    return float(np.max(np.maximum(np.abs(bv), np.abs(2.0 * cv * u_cap - bv))))


def semitrivial_state(d, a, b, c, grid, step_tol=1e-12, residual_tol=1e-9, max_steps=200000):
    """Unique positive periodic solution of 0 = d u'' - a u' + u (b - c u).

    Requires lambda0(d, a, b) > 0; otherwise the trivial state is globally
    stable and no positive steady state exists.  Marches implicitly in the
    linear part from the scaled principal eigenfunction, then Newton-polishes.
    """
    lead = spectral.principal_eigen(d, a, b, grid)
    if lead.value <= 0:
        raise PreconditionError(
            f"lambda0(d,a,b) = {lead.value:.6g} <= 0: trivial state is globally "
            "stable, no positive steady state"
        )
    xs = grid.nodes()
    bv = dz._coefficient_samples(b, xs, grid.period)
    cv = dz._coefficient_samples(c, xs, grid.period)
    if cv.min() <= 0:
        raise PreconditionError("logistic saturation coefficient must be positive")

    ratio = bv / cv
    scale = float(ratio.min())
    if scale <= 0:
        scale = max(1e-3, 0.1 * float(ratio.max()))
    u = lead.eigenfunction * scale

    op = dz.assemble_periodic(d, a, 0.0, grid)
    u_cap = 1.5 * max(float(ratio.max()), float(u.max()))
    lip = _logistic_lipschitz(bv, cv, u_cap)
    dt = 0.1 * grid.h**2 / max(1e-300, float(dz._coefficient_samples(d, xs, grid.period).max()))
    dt_cap = 0.4 / max(lip, 1e-12)

    change_prev = np.inf
    for _ in range(max_steps):
        rhs = u / dt + u * (bv - cv * u)
        u_new = op.solve_shifted(1.0 / dt, rhs)
        change = float(np.max(np.abs(u_new - u)))
        u = u_new
        if change < step_tol:
            break
        if change <= change_prev and dt < dt_cap:
            dt = min(2.0 * dt, dt_cap)
        change_prev = change
    else:
        raise NonConvergenceError(f"steady-state marching stalled (last change {change:.3e})")

    # Newton polish on F(u) = T u + u (b - c u)
    t_mat = op.to_sparse()
    for _ in range(5):
        f_val = op.apply(u) + u * (bv - cv * u)
        res = float(np.max(np.abs(f_val)))
        if res < 1e-12 * max(1.0, float(np.max(np.abs(u)))):
            break
        jac = t_mat + sp.diags(bv - 2.0 * cv * u)
        u = u - spla.spsolve(jac.tocsc(), f_val)

    res = float(np.max(np.abs(op.apply(u) + u * (bv - cv * u))))
    if res > residual_tol:
        raise NonConvergenceError(f"steady-state residual {res:.3e} exceeds {residual_tol:g}")
    if u.min() <= 0:
        raise NonConvergenceError("steady state lost positivity")

    classify = spectral.principal_eigen(d, a, bv - 2.0 * cv * u, grid)
    stab = "stable" if classify.value < -_MARGINAL_BAND else (
        "unstable" if classify.value > _MARGINAL_BAND else "marginal")
    return PeriodicSteadyState(samples=u, residual=res, stability=stab,
                               classifying_eigenvalue=classify.value)


def cooperative_from_competition(system, grid, validated=False):
    """Compute both semitrivial states on `grid` and assemble the transform."""
    if not validated:
        validate_system(system)
    s1 = semitrivial_state(system.d1, system.a1, system.b1, system.a11, grid)
    s2 = semitrivial_state(system.d2, system.a2, system.b2, system.a22, grid)
    return ct.transform(system, s1.samples, s2.samples, grid)


# -- coexistence search -------------------------------------------------------


def _coupled_residual(sys, op1, op2, u1, u2):
    f1, f2 = ct.reaction(sys, slice(None), u1, u2)
    return op1.apply(u1) + f1, op2.apply(u2) + f2


def _newton_coexistence(sys, op1, op2, u1, u2, max_iter=60, tol=1e-12):
    t1 = op1.to_sparse()
    t2 = op2.to_sparse()
    for _ in range(max_iter):
        r1, r2 = _coupled_residual(sys, op1, op2, u1, u2)
        res = max(np.max(np.abs(r1)), np.max(np.abs(r2)))
        if not np.isfinite(res) or res > 1e8:
            return None
        if res < tol:
            return u1, u2, float(res)
        jac = ct.reaction_partials(sys, slice(None), u1, u2)
        big = sp.bmat([
            [t1 + sp.diags(jac[0, 0]), sp.diags(jac[0, 1])],
            [sp.diags(jac[1, 0]), t2 + sp.diags(jac[1, 1])],
        ], format="csc")
        try:
            delta = spla.spsolve(big, np.concatenate([r1, r2]))
        except RuntimeError:
            return None
        step = 1.0
        base = res
        for _ in range(8):  # damping on residual increase
            c1 = u1 - step * delta[: u1.size]
            c2 = u2 - step * delta[u1.size:]
            n1, n2 = _coupled_residual(sys, op1, op2, c1, c2)
            if max(np.max(np.abs(n1)), np.max(np.abs(n2))) < base:
                break
            step *= 0.5
        u1, u2 = c1, c2
    r1, r2 = _coupled_residual(sys, op1, op2, u1, u2)
    res = float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))
    return (u1, u2, res) if res < tol else None


def find_coexistence_states(sys, grid, n_seeds=64, seed=0, t_march=2.0,
                            residual_tol=1e-9, interior_margin=1e-4, workers=1):
    """Multistart search for periodic coexistence states inside (0,1)^2.

    Each seed is marched briefly (to smooth into the slow manifold) and then
    Newton-polished; limits strictly inside the open box are collected,
    deduplicated (L-inf below 1e-6) and classified by the Perron eigenvalue of
    the coexistence linearization.  An empty list is a legal outcome; the
    search is stochastic and incompleteness is disclosed by the caller.
    """
    if grid.n != sys.grid.n:
        raise ValueError("grid must match the CooperativeSystem sampling grid")
    rng = np.random.default_rng(seed)
    xs = grid.nodes()
    op1 = dz.assemble_periodic(sys.d1_samples, sys.a1_star, 0.0, grid)
    op2 = dz.assemble_periodic(sys.d2_samples, sys.a2_star, 0.0, grid)

    # reaction Lipschitz bound over [0,1]^2 via box corners
    corners = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    lip = 0.0
    for (w1, w2) in corners:
        jac = ct.reaction_partials(sys, slice(None), w1, w2)
        lip = max(lip, float(np.max(np.abs(jac[0, 0]) + np.abs(jac[0, 1]))),
                  float(np.max(np.abs(jac[1, 0]) + np.abs(jac[1, 1]))))
    dt = 0.4 / max(lip, 1e-12)
    n_march = max(1, int(np.ceil(t_march / dt)))

    seeds = []
    for _ in range(n_seeds):
        base1, base2 = rng.uniform(0.05, 0.95, size=2)
        amp1, amp2 = rng.uniform(0.0, 0.05, size=2)
        ph1, ph2 = rng.uniform(0.0, 2 * np.pi, size=2)
        u1 = np.clip(base1 + amp1 * np.sin(2 * np.pi * xs / grid.period + ph1), 0.01, 0.99)
        u2 = np.clip(base2 + amp2 * np.sin(2 * np.pi * xs / grid.period + ph2), 0.01, 0.99)
        seeds.append((u1, u2))

    def _run(seed_pair):
        u1, u2 = seed_pair
        for _ in range(n_march):
            f1, f2 = ct.reaction(sys, slice(None), u1, u2)
            u1 = op1.solve_shifted(1.0 / dt, u1 / dt + f1)
            u2 = op2.solve_shifted(1.0 / dt, u2 / dt + f2)
        polished = _newton_coexistence(sys, op1, op2, u1, u2)
        if polished is None:
            return None
        p1, p2, res = polished
        if (p1.min() < interior_margin or p2.min() < interior_margin
                or p1.max() > 1.0 - interior_margin or p2.max() > 1.0 - interior_margin):
            return None
        if res > residual_tol:
            return None
        return p1, p2, res

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run, seeds))
    else:
        raw = [_run(s) for s in seeds]

    found = [r for r in raw if r is not None]
    # deterministic merge: sort limits lexicographically, then deduplicate
    found.sort(key=lambda r: (float(np.mean(r[0])), float(np.mean(r[1])), tuple(r[0][:4])))
    distinct = []
    for cand in found:
        dup = any(
            max(np.max(np.abs(cand[0] - kept[0])), np.max(np.abs(cand[1] - kept[1]))) < 1e-6
            for kept in distinct
        )
        if not dup:
            distinct.append(cand)

    states = []
    for (u1, u2, res) in distinct:
        pair = spectral.coexistence_linearization_eigen(sys, (u1, u2), grid)
        if abs(pair.value) < _MARGINAL_BAND:
            stab = "marginal"
        else:
            stab = "stable" if pair.value < 0 else "unstable"
        states.append(PeriodicSteadyState(samples=(u1, u2), residual=res,
                                          stability=stab, classifying_eigenvalue=pair.value))
    return states


# -- cross identities and the audit -------------------------------------------


def _semitrivial_samples(system, grid):
    s1 = semitrivial_state(system.d1, system.a1, system.b1, system.a11, grid)
    s2 = semitrivial_state(system.d2, system.a2, system.b2, system.a22, grid)
    return s1.samples, s2.samples


def cross_identity_check(system, grid):
    """Defects of both eigenvalue identities linking the two coordinate systems.

    identity_a[i]: lambda(d_i, a_i, b_i - 2 a_ii u_i*) vs lambda(d_i, a_i*, -a_ii*)
    identity_b[i]: lambda(d_i, a_i*, a_ii* - a_ij*)   vs lambda(d_i, a_i, b_i - a_ij u_j*)
    All values are Richardson-extrapolated across (N, 2N) with the semitrivial
    states recomputed on each grid, so the defects reflect grid-converged data.
    """

    def both_grids(builder):
        vals = []
        for g in (grid, grid.refined(2)):
            u1s, u2s = _semitrivial_samples(system, g)
            coop = ct.transform(system, u1s, u2s, g)
            vals.append(builder(g, u1s, u2s, coop))
        return spectral.richardson(np.asarray(vals[0]), np.asarray(vals[1]))

    def builder(g, u1s, u2s, coop):
        xs = g.nodes()
        out = []
        for i, (dfn, afn, bfn, aii, u_self, u_other, aij) in enumerate((
            (system.d1, system.a1, system.b1, system.a11, u1s, u2s, system.a12),
            (system.d2, system.a2, system.b2, system.a22, u2s, u1s, system.a21),
        )):
            a_star = coop.a1_star if i == 0 else coop.a2_star
            aii_star = coop.a11_star if i == 0 else coop.a22_star
            aij_star = coop.a12_star if i == 0 else coop.a21_star
            lhs_a = spectral.principal_eigen(dfn, afn, bfn.eval(xs) - 2.0 * aii.eval(xs) * u_self, g).value
            rhs_a = spectral.principal_eigen(dfn, a_star, -aii_star, g).value
            lhs_b = spectral.principal_eigen(dfn, a_star, aii_star - aij_star, g).value
            rhs_b = spectral.principal_eigen(dfn, afn, bfn.eval(xs) - aij.eval(xs) * u_other, g).value
            out.extend([lhs_a, rhs_a, lhs_b, rhs_b])
        return out

    v = both_grids(builder)
    return {
        "identity_a": ((v[0], v[1]), (v[4], v[5])),
        "identity_b": ((v[2], v[3]), (v[6], v[7])),
        "defect_a": (abs(v[0] - v[1]), abs(v[4] - v[5])),
        "defect_b": (abs(v[2] - v[3]), abs(v[6] - v[7])),
    }


@dataclass
class AssumptionReport:
    """Outcome of the full bistability audit with margins per hypothesis."""

    lambda_00: tuple  # (lambda0(d1,a1,b1), lambda0(d2,a2,b2)), must be > 0
    h1: dict  # {"values": (l1, l2), "passed": bool}
    a1: dict  # transformed-coordinate twin of (H1), plus identity defects
    b1: dict  # {"margins": (m1, m2), "passed": bool}
    b2: dict  # {"c1_minus", "c2_plus", "sum", "passed", "mirror_sum", "mirror_passed"}
    a2_heuristic: dict  # {"states": [...], "violations": int, "caveat": str}
    remark_equal_operators: Optional[dict]  # sufficient condition when d1=d2, a1=a2
    verdict: bool

    def to_dict(self):
        return {
            "lambda_00": list(self.lambda_00),
            "h1": self.h1,
            "a1": self.a1,
            "b1": self.b1,
            "b2": self.b2,
            "a2_heuristic": self.a2_heuristic,
            "remark_equal_operators": self.remark_equal_operators,
            "verdict": self.verdict,
        }


def _refined_scalar(builder, grid):
    """Richardson-extrapolated scalar eigenvalue over (N, 2N) pipelines."""
    v1 = builder(grid)
    v2 = builder(grid.refined(2))
    return spectral.richardson(v1, v2)


def audit_assumptions(system, grid, n_seeds=64, seed=0, workers=1, margin_tol=1e-8):
    """Audit the trivial-state, (H1)/(A1), (B1), (B2) and (A2) hypotheses.

    Scalar eigenvalues are Richardson-extrapolated across grid and grid/2
    spacing with the semitrivial states recomputed per grid.  The verdict
    passes only when every individual check passes with margin >= margin_tol.
    """
    validate_system(system)

    def lam00(g):
        return np.array([
            spectral.principal_eigen(system.d1, system.a1, system.b1, g).value,
            spectral.principal_eigen(system.d2, system.a2, system.b2, g).value,
        ])

    lam0 = _refined_scalar(lam00, grid)
    if min(lam0) <= 0:
        raise PreconditionError(
            f"lambda0(d_i,a_i,b_i) = {tuple(lam0)} must both be positive; "
            "the trivial state is not linearly unstable"
        )

    def pipeline(g):
        u1s, u2s = _semitrivial_samples(system, g)
        coop = ct.transform(system, u1s, u2s, g)
        xs = g.nodes()
        h1_1 = spectral.principal_eigen(system.d1, system.a1,
                                        system.b1.eval(xs) - system.a12.eval(xs) * u2s, g).value
        h1_2 = spectral.principal_eigen(system.d2, system.a2,
                                        system.b2.eval(xs) - system.a21.eval(xs) * u1s, g).value
        a1_1 = spectral.principal_eigen(coop.d1_samples, coop.a1_star,
                                        coop.a11_star - coop.a12_star, g).value
        a1_2 = spectral.principal_eigen(coop.d2_samples, coop.a2_star,
                                        coop.a22_star - coop.a21_star, g).value
        b1_other1 = spectral.principal_eigen(coop.d2_samples, coop.a2_star, -coop.a22_star, g).value
        b1_other2 = spectral.principal_eigen(coop.d1_samples, coop.a1_star, -coop.a11_star, g).value
        return np.array([h1_1, h1_2, a1_1, a1_2, b1_other1, b1_other2])

    vals = _refined_scalar(pipeline, grid)
    h1_1, h1_2, a1_1, a1_2, b1_other1, b1_other2 = (float(v) for v in vals)

    h1 = {"values": (h1_1, h1_2), "passed": h1_1 < -margin_tol and h1_2 < -margin_tol}
    a1 = {
        "values": (a1_1, a1_2),
        "passed": a1_1 < -margin_tol and a1_2 < -margin_tol,
        "identity_defects": (abs(a1_1 - h1_1), abs(a1_2 - h1_2)),
    }
    b1_m1 = a1_1 - b1_other1
    b1_m2 = a1_2 - b1_other2
    b1 = {"margins": (b1_m1, b1_m2), "passed": b1_m1 > margin_tol and b1_m2 > margin_tol}

    coop = cooperative_from_competition(system, grid, validated=True)
    coop_fine = cooperative_from_competition(system, grid.refined(2), validated=True)
    b2_res = wave_speeds.check_B2(coop, grid, sys_fine=coop_fine)
    b2 = {
        "c1_minus": b2_res.c1_minus.c_star,
        "c2_plus": b2_res.c2_plus.c_star,
        "sum": b2_res.total,
        "passed": b2_res.passed,
        "mirror_sum": b2_res.mirror_total,
        "mirror_passed": b2_res.mirror_passed,
    }

    states = find_coexistence_states(coop, grid, n_seeds=n_seeds, seed=seed, workers=workers)
    a2_states = [
        {"mean": (float(np.mean(s.samples[0])), float(np.mean(s.samples[1]))),
         "lambda_hat": s.classifying_eigenvalue, "stability": s.stability}
        for s in states
    ]
    violations = sum(1 for s in states if s.stability == "stable")
    a2 = {
        "states": a2_states,
        "violations": violations,
        "caveat": "multistart evidence only; exhaustiveness is not certified",
    }

    remark = None
    xs = grid.nodes()
    same_ops = (np.max(np.abs(system.d1.eval(xs) - system.d2.eval(xs))) < 1e-14
                and np.max(np.abs(system.a1.eval(xs) - system.a2.eval(xs))) < 1e-14)
    if same_ops:
        u1s, u2s = coop.u1_star, coop.u2_star
        lower = (system.a21.eval(xs) - 2.0 * system.a11.eval(xs)) * u1s
        mid = system.b2.eval(xs) - system.b1.eval(xs)
        upper = (2.0 * system.a22.eval(xs) - system.a12.eval(xs)) * u2s
        holds = (np.all(lower <= mid + 1e-12) and np.any(lower < mid - 1e-12)
                 and np.all(mid <= upper + 1e-12) and np.any(mid < upper - 1e-12))
        remark = {"applicable": True, "holds": bool(holds)}

    verdict = bool(min(lam0) > margin_tol and h1["passed"] and a1["passed"]
                   and b1["passed"] and b2["passed"] and violations == 0)
    return AssumptionReport(
        lambda_00=(float(lam0[0]), float(lam0[1])),
        h1=h1, a1=a1, b1=b1, b2=b2, a2_heuristic=a2,
        remark_equal_operators=remark, verdict=verdict,
    )
