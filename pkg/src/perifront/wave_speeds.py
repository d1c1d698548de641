"""Spreading/minimal speeds as infima of lambda(mu)/mu over mu > 0.

lambda(mu) is convex with lambda(0) > 0, so the ratio blows up at both ends
of (0, inf) and is quasi-convex in between; a golden-section search over an
auto-expanded bracket is therefore robust against eigenvalue-solver noise.
The lower cutoff 1e-4 avoids overflow near mu = 0 while provably excluding
the infimum (the ratio ~ lambda(0)/mu there).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import NonConvergenceError, PreconditionError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi ~ 0.618


@dataclass
class SpeedResult:
    """Infimum of lambda(mu)/mu with its minimizer and sampled dispersion curve."""

    c_star: float
    mu_star: float
    samples: list  # (mu, lambda, lambda/mu) in evaluation order
    bracket: tuple  # final golden-section interval
    orientation: str

    def to_dict(self):
        return {
            "c_star": self.c_star,
            "mu_star": self.mu_star,
            "bracket": list(self.bracket),
            "orientation": self.orientation,
            "n_evaluations": len(self.samples),
        }

    def samples_csv(self, path):
        data = np.array(self.samples)
        np.savetxt(path, data[np.argsort(data[:, 0])], delimiter=",",
                   header="mu,lambda,ratio", comments="", fmt="%.17g")


def _check_unimodal(samples, tol=1e-9):
    """Reject interior local maxima of the sampled ratio (solver noise)."""
    data = sorted(samples)
    for (m0, r0), (m1, r1), (m2, r2) in zip(data, data[1:], data[2:]):
        noise = tol * max(1.0, abs(r1))
        if r1 > r0 + noise and r1 > r2 + noise:
            raise NonConvergenceError(
                "ratio lambda(mu)/mu is not unimodal to tolerance at "
                f"mu = ({m0:.6g}, {m1:.6g}, {m2:.6g}) with ratios "
                f"({r0:.12g}, {r1:.12g}, {r2:.12g}); eigen-solver noise suspected"
            )


def minimal_speed(family, orientation="rightward", mu_lo=1e-4, mu_hi=1.0,
                  tol=1e-8, check_lambda0=True, max_expand=40):
    """Golden-section minimization of lambda(+/-mu)/mu over mu in [mu_lo, inf).

    `family` maps mu to the principal eigenvalue lambda(mu); the orientation
    picks the sign fed to the family.  The right end of the bracket doubles
    until the ratio is increasing there.
    """
    if orientation not in ("rightward", "leftward"):
        raise ValueError(f"orientation must be rightward or leftward, got {orientation!r}")
    sign = 1.0 if orientation == "rightward" else -1.0
    if check_lambda0:
        lam0 = family(0.0)
        if lam0 <= 0:
            raise PreconditionError(
                f"lambda(0) = {lam0:.6g} must be positive for a linearly determined speed"
            )

    samples = []

    def g(mu):
        lam = family(sign * mu)
        ratio = lam / mu
        samples.append((mu, lam, ratio))
        return ratio

    lo, hi = mu_lo, mu_hi
    g_half = g(hi / 2.0)
    g_hi = g(hi)
    expansions = 0
    while g_hi <= g_half:
        hi *= 2.0
        g_half = g_hi
        g_hi = g(hi)
        expansions += 1
        if expansions > max_expand:
            raise NonConvergenceError(
                f"ratio still decreasing at mu = {hi:.3g}; no interior minimizer found"
            )

    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = g(x1), g(x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = g(x2)

    _check_unimodal([(m, r) for (m, _, r) in samples])
    mu_star, _, c_star = min(samples, key=lambda s: s[2])
    if mu_star <= mu_lo * (1.0 + 1e-12):
        raise NonConvergenceError(f"minimizer clamped at the lower cutoff mu = {mu_lo:g}")
    return SpeedResult(c_star=float(c_star), mu_star=float(mu_star),
                       samples=samples, bracket=(lo, hi), orientation=orientation)


class _RefinedFamily:
    """Richardson-extrapolated lambda(mu) across two sampling grids."""

    def __init__(self, coarse, fine):
        self.coarse = coarse
        self.fine = fine

    def __call__(self, mu):
        return spectral.richardson(self.coarse(mu), self.fine(mu))


def scalar_family(d, a, q, grid, fine=None, warm_start=True):
    """mu -> lambda(mu) for the scalar tilted problem, optionally extrapolated.

    `fine` is a (d, a, q, grid) tuple on the doubled grid; sampled coefficient
    vectors must be rebuilt by the caller, which keeps the refinement honest.
    """
    fam = spectral.TiltedFamily(d, a, q, grid, warm_start=warm_start)
    if fine is None:
        return fam
    return _RefinedFamily(fam, spectral.TiltedFamily(*fine, warm_start=warm_start))


@dataclass
class B2Result:
    c1_minus: SpeedResult
    c2_plus: SpeedResult
    total: float
    passed: bool
    c1_plus: SpeedResult = None
    c2_minus: SpeedResult = None
    mirror_total: float = None
    mirror_passed: bool = None

    def to_dict(self):
        return {
            "c1_minus": self.c1_minus.to_dict(),
            "c2_plus": self.c2_plus.to_dict(),
            "sum": self.total,
            "passed": self.passed,
            "c1_plus": self.c1_plus.to_dict() if self.c1_plus else None,
            "c2_minus": self.c2_minus.to_dict() if self.c2_minus else None,
            "mirror_sum": self.mirror_total,
            "mirror_passed": self.mirror_passed,
        }


def check_B2(sys, grid, sys_fine=None, tol=1e-8, margin_tol=1e-8):
    """Evaluate the counter-propagation sum c1- + c2+ (and its mirror).

    c1- is the leftward speed of the logistic subdynamics with potential a11*,
    c2+ the rightward one with potential a22*.  The mirror pair (c1+, c2-)
    governs rightward fronts.  Passing requires the sum > margin_tol.
    """
    fine1 = fine2 = None
    if sys_fine is not None:
        gf = sys_fine.grid
        fine1 = (sys_fine.d1_samples, sys_fine.a1_star, sys_fine.a11_star, gf)
        fine2 = (sys_fine.d2_samples, sys_fine.a2_star, sys_fine.a22_star, gf)
    fam1 = scalar_family(sys.d1_samples, sys.a1_star, sys.a11_star, grid, fine=fine1)
    fam2 = scalar_family(sys.d2_samples, sys.a2_star, sys.a22_star, grid, fine=fine2)

    c1_minus = minimal_speed(fam1, "leftward", tol=tol)
    c2_plus = minimal_speed(fam2, "rightward", tol=tol, check_lambda0=False)
    c1_plus = minimal_speed(fam1, "rightward", tol=tol, check_lambda0=False)
    c2_minus = minimal_speed(fam2, "leftward", tol=tol, check_lambda0=False)
    total = c1_minus.c_star + c2_plus.c_star
    mirror_total = c1_plus.c_star + c2_minus.c_star
    return B2Result(
        c1_minus=c1_minus, c2_plus=c2_plus, total=total, passed=bool(total > margin_tol),
        c1_plus=c1_plus, c2_minus=c2_minus, mirror_total=mirror_total,
        mirror_passed=bool(mirror_total > margin_tol),
    )


@dataclass
class CounterPropagationResult:
    c_plus_lb: SpeedResult
    c_minus_lb: SpeedResult
    total: float
    convexity_bound: float
    passed: bool

    def to_dict(self):
        return {
            "c_plus_lb": self.c_plus_lb.to_dict(),
            "c_minus_lb": self.c_minus_lb.to_dict(),
            "sum": self.total,
            "convexity_bound": self.convexity_bound,
            "passed": self.passed,
        }


def counter_propagation(sys, u_hat, grid, tol=1e-8):
    """Lower bounds on the two spreading speeds around a coexistence state.

    Both infima come from the coupled tilted family lambda+(mu); their sum is
    checked against the convexity bound (mu1+mu2)/(mu1 mu2) * lambda+(0) > 0.
    """
    lam_hat = spectral.mu_family_coexistence(sys, u_hat, 0.0, grid).value
    if lam_hat <= 0:
        raise PreconditionError(
            f"lambda+(0) = {lam_hat:.6g} must be positive (unstable coexistence state)"
        )
    fam = spectral.CoexistenceFamily(sys, u_hat, grid)
    c_plus = minimal_speed(fam, "rightward", tol=tol, check_lambda0=False)
    c_minus = minimal_speed(fam, "leftward", tol=tol, check_lambda0=False)
    mu1, mu2 = c_plus.mu_star, c_minus.mu_star
    bound = (mu1 + mu2) / (mu1 * mu2) * lam_hat
    total = c_plus.c_star + c_minus.c_star
    return CounterPropagationResult(
        c_plus_lb=c_plus, c_minus_lb=c_minus, total=total,
        convexity_bound=bound, passed=bool(total > 0.0),
    )
