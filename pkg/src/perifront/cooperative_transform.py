"""Change of variables from the competition system to cooperative form.

With u1~ = u1/u1* and u2~ = (u2* - u2)/u2* the competition model becomes a
cooperative system on [0,1]^2 whose steady states 0 and 1 are exact at every
node.  Starred coefficients are kept as node samples (refitting to Fourier
would only add projection error); the drift correction uses trigonometric
differentiation of the sampled steady states so its error does not pollute
the eigenvalue cross-identities downstream.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _fourier
from . import discretization as dz
from .errors import PreconditionError
from .periodic_coeffs import CompetitionSystem, PeriodicFn


@dataclass(frozen=True)
class CooperativeSystem:
    """Transformed coefficients on a fixed periodic sampling grid."""

    L: float
    grid: dz.PeriodicGrid
    d1: PeriodicFn
    d2: PeriodicFn
    d1_samples: np.ndarray
    d2_samples: np.ndarray
    a1_star: np.ndarray
    a2_star: np.ndarray
    a11_star: np.ndarray
    a12_star: np.ndarray
    a21_star: np.ndarray
    a22_star: np.ndarray
    u1_star: np.ndarray
    u2_star: np.ndarray
    D1: float
    D2: float
    source: Optional[CompetitionSystem] = None

    def coefficient_evaluator(self, name):
        """Trig-interpolant evaluator for a sampled starred coefficient."""
        return _fourier.evaluator(getattr(self, name), self.L)

    def dump_csv(self, path):
        xs = self.grid.nodes()
        cols = {
            "x": xs,
            "a1_star": self.a1_star,
            "a2_star": self.a2_star,
            "a11_star": self.a11_star,
            "a12_star": self.a12_star,
            "a21_star": self.a21_star,
            "a22_star": self.a22_star,
            "u1_star": self.u1_star,
            "u2_star": self.u2_star,
        }
        header = ",".join(cols)
        data = np.column_stack(list(cols.values()))
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def _steady_residual(d, a, b, c, u, grid):
    """Residual of the discrete logistic steady-state equation at u."""
    op = dz.assemble_periodic(d, a, 0.0, grid)
    bv = dz._coefficient_samples(b, grid.nodes(), grid.period)
    cv = dz._coefficient_samples(c, grid.nodes(), grid.period)
    return float(np.max(np.abs(op.apply(u) + u * (bv - cv * u))))


def transform(system, u1_star, u2_star, grid, check_residual=True, residual_tol=1e-9):
    """Assemble the starred coefficient set from the semitrivial states."""
    u1_star = np.asarray(u1_star, dtype=float)
    u2_star = np.asarray(u2_star, dtype=float)
    if u1_star.min() <= 0 or u2_star.min() <= 0:
        raise PreconditionError("semitrivial states must be strictly positive for the transform")
    if check_residual:
        r1 = _steady_residual(system.d1, system.a1, system.b1, system.a11, u1_star, grid)
        r2 = _steady_residual(system.d2, system.a2, system.b2, system.a22, u2_star, grid)
        if max(r1, r2) > residual_tol:
            raise PreconditionError(
                f"semitrivial residuals ({r1:.3g}, {r2:.3g}) exceed {residual_tol:g}"
            )
    xs = grid.nodes()
    du1 = _fourier.derivative(u1_star, grid.period)
    du2 = _fourier.derivative(u2_star, grid.period)
    d1v = system.d1.eval(xs)
    d2v = system.d2.eval(xs)
    a1_star = system.a1.eval(xs) - 2.0 * d1v * du1 / u1_star
    a2_star = system.a2.eval(xs) - 2.0 * d2v * du2 / u2_star
    a11_star = system.a11.eval(xs) * u1_star
    a12_star = system.a12.eval(xs) * u2_star
    a21_star = system.a21.eval(xs) * u1_star
    a22_star = system.a22.eval(xs) * u2_star
    return CooperativeSystem(
        L=system.L,
        grid=grid,
        d1=system.d1,
        d2=system.d2,
        d1_samples=d1v,
        d2_samples=d2v,
        a1_star=a1_star,
        a2_star=a2_star,
        a11_star=a11_star,
        a12_star=a12_star,
        a21_star=a21_star,
        a22_star=a22_star,
        u1_star=u1_star,
        u2_star=u2_star,
        D1=float(a12_star.max()),
        D2=float(a21_star.max()),
        source=system,
    )


def reaction_terms(a11, a12, a21, a22, u1, u2):
    """The cooperative reaction formulas on explicit coefficient arrays."""
    f1 = u1 * (a11 * (1.0 - u1) - a12 * (1.0 - u2))
    f2 = (1.0 - u2) * (a21 * u1 - a22 * u2)
    return f1, f2


def extended_terms(a11, a12, a21, a22, D1, D2, u1, u2):
    """Auxiliary reaction with the negative-part corrections switched on."""
    f1, f2 = reaction_terms(a11, a12, a21, a22, u1, u2)
    f1 = f1 + D1 * np.maximum(-u1, 0.0) * u2
    f2 = f2 + D2 * np.maximum(u2 - 1.0, 0.0) * (u1 - 1.0)
    return f1, f2


def reaction(sys, j, u1, u2):
    """Cooperative reaction (f1, f2) at node selection j.

    j may be an integer node index, a slice, or an index array; u1, u2 must
    broadcast against the selected coefficient samples.
    """
    return reaction_terms(sys.a11_star[j], sys.a12_star[j], sys.a21_star[j], sys.a22_star[j], u1, u2)


def reaction_extended(sys, j, u1, u2):
    """Auxiliary reaction (F1, F2), cooperative on the whole box [-1, 2]^2.

    F1 = f1 + D1 {u1}^- u2 and F2 = f2 + D2 {1-u2}^- (u1 - 1), with
    {w}^- = max(-w, 0); the corrections vanish on [0,1]^2.
    """
    u1a = np.asarray(u1, dtype=float)
    u2a = np.asarray(u2, dtype=float)
    if np.any(u1a < -1.0) or np.any(u1a > 2.0) or np.any(u2a < -1.0) or np.any(u2a > 2.0):
        raise PreconditionError("extended reaction is only defined on the box [-1, 2]^2")
    return extended_terms(sys.a11_star[j], sys.a12_star[j], sys.a21_star[j], sys.a22_star[j],
                          sys.D1, sys.D2, u1a, u2a)


def reaction_partials(sys, j, u1, u2):
    """Analytic Jacobian of (f1, f2); shape (2, 2) plus input broadcast dims."""
    a11 = sys.a11_star[j]
    a12 = sys.a12_star[j]
    a21 = sys.a21_star[j]
    a22 = sys.a22_star[j]
    f1_u1 = a11 * (1.0 - 2.0 * np.asarray(u1)) - a12 * (1.0 - np.asarray(u2))
    f1_u2 = a12 * np.asarray(u1) + np.zeros_like(np.asarray(u2, dtype=float))
    f2_u1 = a21 * (1.0 - np.asarray(u2)) + np.zeros_like(np.asarray(u1, dtype=float))
    f2_u2 = -(a22 + a21 * np.asarray(u1) - 2.0 * a22 * np.asarray(u2))
    return np.array([[f1_u1, f1_u2], [f2_u1, f2_u2]])


def to_original(sys, u1_tilde, u2_tilde):
    """Inverse variable change: u1 = u1~ u1*, u2 = (1 - u2~) u2*."""
    return np.asarray(u1_tilde) * sys.u1_star, (1.0 - np.asarray(u2_tilde)) * sys.u2_star


def to_transformed(sys, u1, u2):
    """Forward variable change onto the cooperative coordinates."""
    return np.asarray(u1) / sys.u1_star, (sys.u2_star - np.asarray(u2)) / sys.u2_star
