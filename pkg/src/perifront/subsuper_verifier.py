"""Explicit sub/supersolution envelopes and the stability experiments.

The envelope pair is

    u_i^+- (t,x) = U_i(x, xi) +- delta p_i(x, xi) e^{-beta0 t},
    xi = x + c t + z^+- +- sigma0 delta (1 - e^{-beta0 t}),

with p the cutoff blend of the two boundary eigenfunctions.  Every constant
of the construction (rho*, rho_*, xi_hat, C1, C2, C3, beta0, delta0, sigma0)
is computed numerically from the profile and the eigenpairs; the verifier
then checks the differential inequalities N[u^+] >= 0 >= N[u^-] on a lattice,
runs the comparison sandwich, and measures best-shift convergence of
front-like initial data (global stability and uniqueness at desk scale).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fourier
from . import cooperative_transform as ct
from . import front_solver as fs
from .errors import NonConvergenceError, PreconditionError


@dataclass(frozen=True)
class Cutoff:
    """Quintic smoothstep rescaled to [-2, 2]: C^2, chi' and |chi''| <= 1."""

    def chi(self, xi):
        t = np.clip((np.asarray(xi, dtype=float) + 2.0) / 4.0, 0.0, 1.0)
        return ((6.0 * t - 15.0) * t + 10.0) * t**3

    def d1(self, xi):
        t = np.clip((np.asarray(xi, dtype=float) + 2.0) / 4.0, 0.0, 1.0)
        return 30.0 * t**2 * (1.0 - t) ** 2 / 4.0

    def d2(self, xi):
        t = np.clip((np.asarray(xi, dtype=float) + 2.0) / 4.0, 0.0, 1.0)
        return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0) / 16.0

    @staticmethod
    def certificate(n_samples=10000):
        """Sampled and analytic extrema of chi', chi''."""
        xi = np.linspace(-2.5, 2.5, n_samples)
        c = Cutoff()
        d1max = float(np.max(c.d1(xi)))
        d2max = float(np.max(np.abs(c.d2(xi))))
        # analytic: max chi' = 30 (1/2)^2 (1/2)^2 / 4 at t = 1/2; max |chi''| at
        # the roots of 6t^2 - 6t + 1
        t_star = 0.5 - math.sqrt(3.0) / 6.0
        d2_analytic = abs(60.0 * t_star * (2 * t_star - 1) * (t_star - 1) / 16.0)
        return {
            "d1_sampled_max": d1max,
            "d1_analytic_max": 30.0 * 0.25 * 0.25 / 4.0,
            "d2_sampled_max": d2max,
            "d2_analytic_max": d2_analytic,
            "ok": d1max <= 1.0 and d2max <= 1.0,
        }


def build_cutoff():
    return Cutoff()


class _Blend:
    """p(x, xi) = (1 - chi(xi)) Phi0*(x) + chi(xi) Phi1*(x) and derivatives.

    Phase derivatives of the eigenfunctions come from trigonometric
    differentiation of their periodic samples.
    """

    def __init__(self, phi0, phi1, period, cutoff):
        self.cut = cutoff
        self.period = period
        self._ev = []
        for comp in range(2):
            lo, hi = phi0[comp], phi1[comp]
            self._ev.append({
                "lo": _fourier.evaluator(lo, period),
                "hi": _fourier.evaluator(hi, period),
                "lo_d1": _fourier.evaluator(_fourier.derivative(lo, period), period),
                "hi_d1": _fourier.evaluator(_fourier.derivative(hi, period), period),
                "lo_d2": _fourier.evaluator(_fourier.derivative(lo, period, 2), period),
                "hi_d2": _fourier.evaluator(_fourier.derivative(hi, period, 2), period),
            })

    def value(self, comp, x, xi, dx=0, dxi=0):
        ev = self._ev[comp]
        key = {0: ("lo", "hi"), 1: ("lo_d1", "hi_d1"), 2: ("lo_d2", "hi_d2")}[dx]
        lo = ev[key[0]](x)
        hi = ev[key[1]](x)
        if dxi == 0:
            chi = self.cut.chi(xi)
            return (1.0 - chi) * lo + chi * hi
        if dxi == 1:
            return self.cut.d1(xi) * (hi - lo)
        if dxi == 2:
            return self.cut.d2(xi) * (hi - lo)
        raise ValueError("dxi must be 0, 1 or 2")


@dataclass
class SubSuperPack:
    """All constants of the envelope construction plus the evaluators."""

    profile: object
    sys: object
    mu0: float
    mu1: float
    rho_star_upper: float
    rho_star_lower: float
    xi_hat: float
    delta1_gamma: float  # smallness constant of the far-field Gamma bounds
    delta1_initial: float  # min(delta0, 1/rho*_lower): the initial-data class
    C1: float
    C2: float
    C3: float
    d_bar: float
    a_star_bar: float
    D: float
    beta0: float
    delta0: float
    sigma0: float
    delta: float
    z_plus: float
    z_minus: float
    blend: _Blend = field(repr=False)
    cutoff: Cutoff = field(repr=False)

    def constants(self):
        return {k: getattr(self, k) for k in (
            "mu0", "mu1", "rho_star_upper", "rho_star_lower", "xi_hat",
            "delta1_gamma", "delta1_initial", "C1", "C2", "C3", "d_bar",
            "a_star_bar", "D", "beta0", "delta0", "sigma0", "delta",
            "z_plus", "z_minus")}


def _partials_at(sys_ev, x, u1, u2):
    """Reaction partials at arbitrary phases via the coefficient evaluators."""
    a11, a12, a21, a22 = (sys_ev[k](x) for k in ("a11", "a12", "a21", "a22"))
    return (a11 * (1 - 2 * u1) - a12 * (1 - u2),
            a12 * u1,
            a21 * (1 - u2),
            -(a22 + a21 * u1 - 2 * a22 * u2))


def _sys_evaluators(sys):
    return {
        "a11": _fourier.evaluator(sys.a11_star, sys.L),
        "a12": _fourier.evaluator(sys.a12_star, sys.L),
        "a21": _fourier.evaluator(sys.a21_star, sys.L),
        "a22": _fourier.evaluator(sys.a22_star, sys.L),
        "a1": _fourier.evaluator(sys.a1_star, sys.L),
        "a2": _fourier.evaluator(sys.a2_star, sys.L),
    }


def build_pack(profile, sys, pair0, pair1, delta=None, beta0=None,
               z_plus=0.0, z_minus=0.0, theta_lattice=(0.0, 0.25, 0.5, 0.75, 1.0),
               safety=1.05):
    """Compute every constant of the envelope construction numerically.

    pair0/pair1 are the coupled eigenpairs around 0 and 1 (values mu0-, mu1-
    negative).  xi_hat expands until the sampled far-field suprema of the
    Gamma differences satisfy their bounds; C3 is the minimum interface slope
    of the profile over the core |xi| <= xi_hat; sigma0 sits `safety` above
    its lower bound.  delta defaults to delta0/2 capped so the drifted
    envelope stays inside the tabulated z-window.
    """
    if profile.c == 0 or profile.monotone is None:
        raise PreconditionError("envelope construction needs a converged profile with c != 0")
    mu0, mu1 = pair0.value, pair1.value
    if mu0 >= 0 or mu1 >= 0:
        raise PreconditionError("boundary eigenvalues must be negative (stable 0 and 1)")
    L = sys.L
    phi0 = (pair0.phi1, pair0.phi2)
    phi1 = (pair1.phi1, pair1.phi2)
    rho_up = max(float(np.max(p)) for p in (*phi0, *phi1))
    rho_lo = min(float(np.min(p)) for p in (*phi0, *phi1))
    cutoff = build_cutoff()
    blend = _Blend(phi0, phi1, L, cutoff)
    sys_ev = _sys_evaluators(sys)
    xs = np.linspace(0.0, L, 128, endpoint=False)

    # Gamma bounds: far-field closeness of the reaction partials to their
    # values at the limit states
    bound0 = abs(mu0) * min(float(np.min(phi0[0])), float(np.min(phi0[1]))) / (
        2.0 * float(np.max(phi0[0] + phi0[1])))
    bound1 = abs(mu1) * min(float(np.min(phi1[0])), float(np.min(phi1[1]))) / (
        2.0 * float(np.max(phi1[0] + phi1[1])))

    z_lo, z_hi = profile.z_nodes[0], profile.z_nodes[-1]

    def gamma_sup(xi_hat, delta_try, far):
        """Sampled sup of Gamma_0 (far=0) or Gamma_1 (far=1), inflated 10%."""
        if far == 0:
            zs = np.linspace(z_lo, -xi_hat, 64)
        else:
            zs = np.linspace(xi_hat, z_hi, 64)
        xg, zg = np.meshgrid(xs, zs, indexing="ij")
        u1, u2 = profile.eval(xg.ravel(), zg.ravel())
        p1 = blend.value(0, xg.ravel(), zg.ravel())
        p2 = blend.value(1, xg.ravel(), zg.ravel())
        ref1, ref2 = (0.0, 0.0) if far == 0 else (1.0, 1.0)
        worst = 0.0
        for theta in theta_lattice:
            w1 = u1 + theta * delta_try * p1
            w2 = u2 + theta * delta_try * p2
            parts = _partials_at(sys_ev, xg.ravel(), w1, w2)
            base = _partials_at(sys_ev, xg.ravel(), ref1, ref2)
            gam = sum(np.abs(p - b) for p, b in zip(parts, base))
            worst = max(worst, float(np.max(gam)))
        return 1.1 * worst

    delta1 = 0.5
    xi_hat = None
    for _ in range(12):
        for trial in (4.0, 6.0, 8.0, 12.0, 16.0, 24.0):
            if -trial <= z_lo or trial >= z_hi:
                break
            if gamma_sup(trial, delta1, 0) <= bound0 and gamma_sup(trial, delta1, 1) <= bound1:
                xi_hat = trial
                break
        if xi_hat is not None:
            break
        delta1 *= 0.5
    if xi_hat is None:
        raise NonConvergenceError(
            f"no xi_hat <= window satisfies the far-field Gamma bounds "
            f"(bounds {bound0:.3g}/{bound1:.3g})"
        )

    # C1: sup over the blend and its first/second derivatives in both slots
    xi_dense = np.linspace(-3.0, 3.0, 241)
    xg, gg = np.meshgrid(xs, xi_dense, indexing="ij")
    c1 = 0.0
    for comp in range(2):
        for dx in (0, 1, 2):
            for dxi in (0, 1, 2):
                if dx + dxi > 2:
                    continue
                vals = blend.value(comp, xg.ravel(), gg.ravel(), dx=dx, dxi=dxi)
                c1 = max(c1, float(np.max(np.abs(vals))))
    C1 = c1

    # C2: sup over the box [-1,2]^2 of the summed partial magnitudes;
    # affine in each variable, so corners suffice
    c2 = 0.0
    for w1 in (-1.0, 2.0):
        for w2 in (-1.0, 2.0):
            parts = _partials_at(sys_ev, xs, w1, w2)
            c2 = max(c2, float(np.max(sum(np.abs(p) for p in parts))))
    C2 = c2

    # C3: minimal interface slope over the core band
    core = (profile.z_nodes >= -xi_hat) & (profile.z_nodes <= xi_hat)
    if not core.any():
        raise NonConvergenceError("profile window does not cover the core band")
    dz1 = np.gradient(profile.U1, profile.z_nodes, axis=1)[:, core]
    dz2 = np.gradient(profile.U2, profile.z_nodes, axis=1)[:, core]
    C3 = float(min(dz1.min(), dz2.min()))
    if C3 <= 0:
        raise NonConvergenceError(
            f"profile not strictly monotone on the core band (min slope {C3:.3g})"
        )

    d_bar = max(float(np.max(sys.d1_samples)), float(np.max(sys.d2_samples)))
    a_star_bar = max(float(np.max(np.abs(sys.a1_star))), float(np.max(np.abs(sys.a2_star))))
    D = max(sys.D1, sys.D2)

    if beta0 is None:
        beta0 = min(abs(mu0), abs(mu1)) / 8.0
    if beta0 >= min(abs(mu0), abs(mu1)) / 4.0:
        raise PreconditionError("beta0 must be below min(|mu0|, |mu1|)/4")

    delta0 = min(delta1, abs(mu0) / (4.0 * D * rho_up), abs(mu1) / (4.0 * D * rho_up),
                 C3 / (2.0 * C1))
    sigma0 = safety * 2.0 * C1 * (abs(profile.c) + beta0 + 4.0 * d_bar + 2.0 * a_star_bar
                                  + delta0 * C1 * D + C2) / (beta0 * C3)

    if delta is None:
        # the envelope shift sigma0*delta, the frame drift |c|/beta0 and the
        # core band xi_hat must all fit inside the tabulated z-window with
        # room to sample every xi regime
        budget = (min(abs(z_lo), abs(z_hi)) - xi_hat - abs(profile.c) / beta0
                  - max(abs(z_plus), abs(z_minus)) - 4.0)
        if budget <= 0:
            raise NonConvergenceError(
                f"profile window ({z_lo:.1f}, {z_hi:.1f}) too narrow for the envelope "
                f"construction (xi_hat {xi_hat:.1f}, drift {abs(profile.c) / beta0:.1f})"
            )
        delta = min(delta0 / 2.0, budget / sigma0, 1.0 / rho_up)
    if not 0.0 < delta <= delta0:
        raise PreconditionError(f"delta must lie in (0, delta0 = {delta0:g}]")

    return SubSuperPack(
        profile=profile, sys=sys, mu0=mu0, mu1=mu1,
        rho_star_upper=rho_up, rho_star_lower=rho_lo, xi_hat=xi_hat,
        delta1_gamma=delta1, delta1_initial=min(delta0, 1.0 / rho_lo),
        C1=C1, C2=C2, C3=C3, d_bar=d_bar, a_star_bar=a_star_bar, D=D,
        beta0=beta0, delta0=delta0, sigma0=sigma0, delta=delta,
        z_plus=z_plus, z_minus=z_minus, blend=blend, cutoff=cutoff,
    )


def _xi(pack, sign, t, x):
    z_shift = pack.z_plus if sign > 0 else pack.z_minus
    drift = pack.sigma0 * pack.delta * (1.0 - np.exp(-pack.beta0 * np.asarray(t, dtype=float)))
    return np.asarray(x, dtype=float) + pack.profile.c * np.asarray(t, dtype=float) + z_shift + sign * drift


def eval_subsuper(pack, sign, t, x, clamp_info=None):
    """Envelope values u^+ (sign=+1) or u^- (sign=-1) at (t, x)."""
    s = 1.0 if sign > 0 else -1.0
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    xi = _xi(pack, s, t, x)
    u1, u2 = pack.profile.eval(x, xi, clamp_info=clamp_info)
    decay = np.exp(-pack.beta0 * t)
    p1 = pack.blend.value(0, x, xi)
    p2 = pack.blend.value(1, x, xi)
    return u1 + s * pack.delta * p1 * decay, u2 + s * pack.delta * p2 * decay


def _envelope_residuals(pack, sign, t, x):
    """N_i[u^sign] = d_t u - d_i u_xx + a_i* u_x - F_i(x, u1, u2), componentwise."""
    s = 1.0 if sign > 0 else -1.0
    prof = pack.profile
    sys = pack.sys
    c = prof.c
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    xi = _xi(pack, s, t, x)
    decay = np.exp(-pack.beta0 * t)
    xi_t = c + s * pack.sigma0 * pack.delta * pack.beta0 * decay

    U1, U2 = prof.eval(x, xi)
    U1z, U2z = prof.eval(x, xi, dz=1)
    U1x, U2x = prof.eval(x, xi, dx=1)
    U1xx, U2xx = prof.eval(x, xi, dx=2)
    U1xz, U2xz = prof.eval(x, xi, dx=1, dz=1)
    U1zz, U2zz = prof.eval(x, xi, dz=2)

    out = []
    sys_ev = _sys_evaluators(sys)
    a11, a12 = sys_ev["a11"](x), sys_ev["a12"](x)
    a21, a22 = sys_ev["a21"](x), sys_ev["a22"](x)
    u1 = U1 + s * pack.delta * pack.blend.value(0, x, xi) * decay
    u2 = U2 + s * pack.delta * pack.blend.value(1, x, xi) * decay
    F1, F2 = ct.extended_terms(a11, a12, a21, a22, sys.D1, sys.D2, u1, u2)

    for comp, (U, Uz, Ux, Uxx, Uxz, Uzz, F) in enumerate((
        (U1, U1z, U1x, U1xx, U1xz, U1zz, F1),
        (U2, U2z, U2x, U2xx, U2xz, U2zz, F2),
    )):
        p = pack.blend.value(comp, x, xi)
        px = pack.blend.value(comp, x, xi, dx=1)
        pxi = pack.blend.value(comp, x, xi, dxi=1)
        pxx = pack.blend.value(comp, x, xi, dx=2)
        pxxi = pack.blend.value(comp, x, xi, dx=1, dxi=1)
        pxixi = pack.blend.value(comp, x, xi, dxi=2)

        u_t = Uz * xi_t + s * pack.delta * decay * (pxi * xi_t - pack.beta0 * p)
        u_x = Ux + Uz + s * pack.delta * decay * (px + pxi)
        u_xx = Uxx + 2.0 * Uxz + Uzz + s * pack.delta * decay * (pxx + 2.0 * pxxi + pxixi)

        dfn = sys.d1 if comp == 0 else sys.d2
        a_ev = sys_ev["a1"] if comp == 0 else sys_ev["a2"]
        phase = np.mod(x, sys.L)
        out.append(u_t - dfn.eval(phase) * u_xx + a_ev(phase) * u_x - F)
    return out[0], out[1]


@dataclass
class VerificationReport:
    eps_num: float
    buckets: dict  # name -> {"count", "min_plus", "max_minus", worst locations}
    passed: bool

    def to_dict(self):
        return {"eps_num": self.eps_num, "buckets": self.buckets, "passed": self.passed}


def verify_inequalities(pack, sys, n_t=64, n_x=256, t_max=None, eps_num=None):
    """Check N[u^+] >= -eps_num and N[u^-] <= eps_num on a (t, x) lattice.

    Results are bucketed by the proof's three regimes of the moving variable
    xi: core |xi| <= xi_hat and the two far fields.  eps_num defaults to ten
    times the profile residual (the interpolation-and-scheme noise floor).
    """
    if eps_num is None:
        eps_num = 10.0 * max(pack.profile.residual, 1e-12)
    if t_max is None:
        t_max = 1.0 / pack.beta0
    prof = pack.profile
    # keep the drifted xi inside the tabulated window for both envelopes and
    # every lattice time; the drift contributes sigma0*delta, the frame c*t
    margin = (pack.sigma0 * pack.delta + abs(prof.c) * t_max
              + max(abs(pack.z_plus), abs(pack.z_minus)) + 2.0)
    x_lo = prof.z_nodes[0] + margin
    x_hi = prof.z_nodes[-1] - margin
    if x_hi <= x_lo:
        raise PreconditionError("profile window too narrow for the envelope drift")
    if x_lo > -pack.xi_hat or x_hi < pack.xi_hat:
        raise PreconditionError("sampling window cannot reach all three xi regimes")
    ts = np.linspace(0.0, t_max, n_t)
    xs = np.linspace(x_lo, x_hi, n_x)
    tg, xg = np.meshgrid(ts, xs, indexing="ij")
    tg = tg.ravel()
    xg = xg.ravel()

    buckets = {}
    passed = True
    for sign, label in ((+1, "plus"), (-1, "minus")):
        n1, n2 = _envelope_residuals(pack, sign, tg, xg)
        xi = _xi(pack, 1.0 if sign > 0 else -1.0, tg, xg)
        regions = {
            "far_minus": xi <= -pack.xi_hat,
            "core": np.abs(xi) <= pack.xi_hat,
            "far_plus": xi >= pack.xi_hat,
        }
        for rname, mask in regions.items():
            if not mask.any():
                continue
            key = f"{label}:{rname}"
            vals = np.minimum(n1[mask], n2[mask]) if sign > 0 else np.maximum(n1[mask], n2[mask])
            if sign > 0:
                worst = float(np.min(vals))
                ok = worst >= -eps_num
            else:
                worst = float(np.max(vals))
                ok = worst <= eps_num
            j = int(np.argmin(vals)) if sign > 0 else int(np.argmax(vals))
            idx = np.flatnonzero(mask)[j]
            buckets[key] = {
                "count": int(mask.sum()),
                "worst": worst,
                "ok": bool(ok),
                "at": {"t": float(tg[idx]), "x": float(xg[idx]), "xi": float(xi[idx])},
            }
            passed = passed and ok
    return VerificationReport(eps_num=float(eps_num), buckets=buckets, passed=bool(passed))


@dataclass
class SandwichReport:
    worst_low: float  # max over time of max(u^- - u), must stay <= tol
    worst_high: float  # max over time of max(u - u^+)
    times: list
    passed: bool

    def to_dict(self):
        return {"worst_low": self.worst_low, "worst_high": self.worst_high,
                "times": self.times, "passed": self.passed}


def sandwich_experiment(pack, sys, grid, t_total, initial="front_shift", z0=0.0,
                        n_checks=16, dt=None, tol=1e-10):
    """Evolve data squeezed between the envelopes and verify it stays there.

    initial="front_shift" starts from the front shifted by z0 (which must lie
    between z_minus and z_plus); "step" starts from a sharp step clipped into
    the t=0 envelope.  The evolution uses the extended reaction, matching the
    comparison lemma for the auxiliary system.
    """
    xs = grid.nodes()
    lo1, lo2 = eval_subsuper(pack, -1, 0.0, xs)
    hi1, hi2 = eval_subsuper(pack, +1, 0.0, xs)
    if initial == "front_shift":
        if not (pack.z_minus < z0 < pack.z_plus):
            raise PreconditionError("front shift z0 must lie between z_minus and z_plus")
        st = pack.profile.state_at(grid, t=0.0, shift=z0)
        u1 = np.clip(st.u1, 0.0, 1.0)
        u2 = np.clip(st.u2, 0.0, 1.0)
    elif initial == "step":
        step = (xs > 0.5 * (grid.x_min + grid.x_max)).astype(float)
        u1 = np.clip(step, np.maximum(lo1, 0.0), np.minimum(hi1, 1.0))
        u2 = np.clip(step.copy(), np.maximum(lo2, 0.0), np.minimum(hi2, 1.0))
    else:
        raise ValueError(f"unknown initial {initial!r}")
    if np.any(u1 < lo1 - 1e-14) or np.any(u1 > hi1 + 1e-14):
        raise PreconditionError("initial data not between the envelopes")

    if dt is None:
        dt = min(0.9 * fs.dt_max(sys, True), 4.0 * grid.h**2 / pack.d_bar)
    state = fs.CauchyState(grid, u1, u2, 0.0)
    check_every = max(1, int(np.ceil(t_total / n_checks / dt)))
    worst_low = 0.0
    worst_high = 0.0
    times = []
    steps = int(np.ceil(t_total / dt))
    stepper = fs.LineStepper(sys, grid, dt, extended=True)
    for k in range(1, steps + 1):
        state = stepper.step(state)
        if k % check_every == 0 or k == steps:
            lo1, lo2 = eval_subsuper(pack, -1, state.t, xs)
            hi1, hi2 = eval_subsuper(pack, +1, state.t, xs)
            low = max(float(np.max(lo1 - state.u1)), float(np.max(lo2 - state.u2)))
            high = max(float(np.max(state.u1 - hi1)), float(np.max(state.u2 - hi2)))
            worst_low = max(worst_low, low)
            worst_high = max(worst_high, high)
            times.append({"t": state.t, "low": low, "high": high})
    passed = worst_low <= tol and worst_high <= tol
    return SandwichReport(worst_low=worst_low, worst_high=worst_high,
                          times=times, passed=bool(passed))


def best_shift_distance(profile, state, tau_window=4.0, tol=1e-10):
    """min over tau of ||u - U(., . + c t + tau)||_inf by golden section."""
    xs = state.grid.nodes()
    gold = (math.sqrt(5.0) - 1.0) / 2.0

    def dist(tau):
        z = xs + profile.c * state.t + tau
        u1, u2 = profile.eval(xs, z)
        return max(float(np.max(np.abs(u1 - state.u1))), float(np.max(np.abs(u2 - state.u2))))

    lo, hi = -tau_window, tau_window
    x1 = hi - gold * (hi - lo)
    x2 = lo + gold * (hi - lo)
    f1, f2 = dist(x1), dist(x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - gold * (hi - lo)
            f1 = dist(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + gold * (hi - lo)
            f2 = dist(x2)
    tau = 0.5 * (lo + hi)
    return dist(tau), tau


@dataclass
class StabilityReport:
    runs: list  # per datum: e(t) series, final distance, tau, c measured
    speed_agreement: float  # max |c_i - c_j| over pairs
    profile_agreement: float  # best-shift distance between final states
    passed: bool

    def to_dict(self):
        return {"runs": self.runs, "speed_agreement": self.speed_agreement,
                "profile_agreement": self.profile_agreement, "passed": self.passed}


def _pairwise_shift_distance(state_a, state_b, tau_window=4.0, tol=1e-8):
    """min over tau of ||u_a(. ) - u_b(. + tau)||_inf (cubic interpolation)."""
    from scipy.interpolate import CubicSpline

    xs = state_a.grid.nodes()
    inner = slice(8, -8)
    spl1 = CubicSpline(xs, state_b.u1)
    spl2 = CubicSpline(xs, state_b.u2)
    gold = (math.sqrt(5.0) - 1.0) / 2.0

    def dist(tau):
        x_in = xs[inner]
        return max(float(np.max(np.abs(spl1(x_in + tau) - state_a.u1[inner]))),
                   float(np.max(np.abs(spl2(x_in + tau) - state_a.u2[inner]))))

    lo, hi = -tau_window, tau_window
    x1 = hi - gold * (hi - lo)
    x2 = lo + gold * (hi - lo)
    f1, f2 = dist(x1), dist(x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - gold * (hi - lo)
            f1 = dist(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + gold * (hi - lo)
            f2 = dist(x2)
    return dist(0.5 * (lo + hi))


def check_initial_class(pack, state, window_fraction=0.15):
    """Truncated version of the front-like initial-data condition.

    Far-field values must sit below delta1 rho_* (left) and above
    1 - delta1 rho_* (right), with delta1 = min(delta0, 1/rho_*_lower).
    """
    bound = pack.delta1_initial * pack.rho_star_lower
    m = state.u1.size
    k = max(1, int(window_fraction * m))
    left_ok = max(float(np.max(state.u1[:k])), float(np.max(state.u2[:k]))) < bound
    right_ok = min(float(np.min(state.u1[-k:])), float(np.min(state.u2[-k:]))) > 1.0 - bound
    return left_ok and right_ok


def global_stability_experiment(sys, profile, initial_family, t_total, grid,
                                dt=None, n_checks=12, tol=1e-3, pack=None):
    """Best-shift convergence of front-like data to the pulsating front.

    Each datum evolves under the standard reaction; e(t) is the best-shift
    sup distance to the front, which must fall below `tol` by t_total.  Two
    or more data also instantiate uniqueness: their measured speeds and
    final profiles (after shifting) must agree.
    """
    if dt is None:
        dt = min(0.9 * fs.dt_max(sys, False), grid.h**2 / max(float(np.max(sys.d1_samples)), 1e-300))
    runs = []
    finals = []
    for datum in initial_family:
        if isinstance(datum, fs.CauchyState):
            state = datum.copy()
        else:
            state = fs.CauchyState(grid, np.asarray(datum[0], float).copy(),
                                   np.asarray(datum[1], float).copy(), 0.0)
        if pack is not None and not check_initial_class(pack, state):
            raise PreconditionError("initial datum violates the front-like far-field condition")
        stepper = fs.LineStepper(sys, grid, dt, extended=False)
        steps = int(np.ceil(t_total / dt))
        check_every = max(1, steps // n_checks)
        series = []
        positions = [(state.t, fs.interface_position(state))]
        for k in range(1, steps + 1):
            state = stepper.step(state)
            if k % check_every == 0 or k == steps:
                e, tau = best_shift_distance(profile, state)
                series.append({"t": state.t, "e": e, "tau": tau})
                positions.append((state.t, fs.interface_position(state)))
        t_arr = np.array([p[0] for p in positions])
        x_arr = np.array([p[1] for p in positions])
        half = t_arr.size // 2
        slope = np.polyfit(t_arr[half:], x_arr[half:], 1)[0]
        runs.append({
            "series": series,
            "final_e": series[-1]["e"],
            "tau": series[-1]["tau"],
            "c_measured": -float(slope),
        })
        finals.append(state)

    speed_dev = 0.0
    prof_dev = 0.0
    for i in range(len(finals)):
        for j in range(i + 1, len(finals)):
            speed_dev = max(speed_dev, abs(runs[i]["c_measured"] - runs[j]["c_measured"]))
            prof_dev = max(prof_dev, _pairwise_shift_distance(finals[i], finals[j]))
    passed = all(r["final_e"] < tol for r in runs)
    if len(finals) > 1:
        passed = passed and speed_dev < tol and prof_dev < tol
    return StabilityReport(runs=runs, speed_agreement=speed_dev,
                           profile_agreement=prof_dev, passed=bool(passed))
