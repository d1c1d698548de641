"""Principal eigenvalues of periodic elliptic operators and their couplings.

Everything here rides on one engine: inverse power iteration on the shifted
resolvent (sigma I - M)^{-1} of a Metzler matrix M.  With sigma above the
rightmost eigenvalue the resolvent is a positive operator, so the iterates
stay strictly positive and converge to the Perron pair.  The shift starts at
max row sum + 1 (the Perron root never exceeds the max row sum) and is pushed
up if a factorization reports singularity.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import discretization as dz
from .errors import GapError, NonConvergenceError, PreconditionError, SingularOperatorError
from .periodic_coeffs import PeriodicFn


@dataclass
class EigenPair:
    """Principal eigenvalue with strictly positive max-normalized eigenfunction."""

    value: float
    eigenfunction: np.ndarray
    residual: float
    grid_n: int
    iterations: int = 0
    value_refined: Optional[float] = None  # same computation at 2N
    extrapolated: Optional[float] = None  # Richardson-combined value

    @property
    def best(self):
        return self.extrapolated if self.extrapolated is not None else self.value

    def to_dict(self):
        return {
            "lambda": self.value,
            "residual": self.residual,
            "N": self.grid_n,
            "extrapolated": self.extrapolated,
        }


@dataclass
class CoupledEigenPair:
    """Perron value of a coupled two-component periodic problem."""

    value: float
    phi1: np.ndarray
    phi2: np.ndarray
    residual1: float
    residual2: float
    grid_n: int
    iterations: int = 0

    @property
    def residual(self):
        return max(self.residual1, self.residual2)


def _power_resolvent(apply_m, make_solver, sigma0, v0, tol_value=1e-12, tol_residual=1e-10,
                     max_iter=10000, op_scale=1.0):
    """Perron pair of M via inverse iteration on (sigma I - M)^{-1}.

    apply_m: v -> M v;  make_solver: sigma -> (rhs -> (sigma I - M)^{-1} rhs).
    Returns (value, vector normalized to max 1, residual, iterations).
    Rounding in a matrix-vector product floors the attainable residual near
    eps * ||M||, so both tolerances sit above that floor on fine grids.
    """
    sigma = sigma0
    solver = None
    for attempt in range(8):
        try:
            solver = make_solver(sigma)
            break
        except SingularOperatorError:
            sigma = 2.0 * sigma + 1.0  # push the shift further right
    if solver is None:
        raise SingularOperatorError(f"could not factorize resolvent up to sigma={sigma}")

    eps = np.finfo(float).eps
    floor_res = 100.0 * eps * max(op_scale, 1.0)
    floor_val = 10.0 * eps * max(op_scale, 1.0)
    v = v0 / np.max(np.abs(v0))
    lam_old = None
    history = []
    for it in range(1, max_iter + 1):
        w = solver(v)
        wmax = w.max()
        if wmax <= 0:
            raise NonConvergenceError("resolvent iterate lost positivity", history=history)
        w = w / wmax
        mw = apply_m(w)
        lam = float(w @ mw / (w @ w))
        res = float(np.max(np.abs(mw - lam * w)))  # max|w| == 1 after normalization
        history.append((lam, res))
        scale = max(1.0, abs(lam))
        if (lam_old is not None
                and abs(lam - lam_old) < max(tol_value * scale, floor_val)
                and res < max(tol_residual * scale, floor_res)):
            if w.min() <= 0:
                raise NonConvergenceError("converged eigenfunction not strictly positive", history=history)
            return lam, w, res, it
        lam_old = lam
        v = w
    raise NonConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (last residual {history[-1][1]:.3e})",
        history=history,
    )


def principal_eigen(d, a, q, grid, scheme="auto", v0=None, tol_value=1e-12, tol_residual=1e-10, max_iter=10000):
    """Rightmost eigenvalue of d u'' - a u' + q u with positive periodic u."""
    op = dz.assemble_periodic(d, a, q, grid, scheme=scheme)
    qv = dz._coefficient_samples(q, grid.nodes(), grid.period)
    sigma0 = float(qv.max()) + 1.0
    if v0 is None:
        v0 = np.ones(grid.n)

    def make_solver(sigma):
        return lambda rhs: op.solve_shifted(sigma, rhs)

    op_scale = float(np.max(np.abs(op.main)) + np.max(np.abs(op.sub)) + np.max(np.abs(op.sup)))
    lam, w, res, it = _power_resolvent(op.apply, make_solver, sigma0, v0, tol_value,
                                       tol_residual, max_iter, op_scale=op_scale)
    return EigenPair(value=lam, eigenfunction=w, residual=res, grid_n=grid.n, iterations=it)


def principal_eigen_refined(coeffs_at, grid, scheme="auto", **kw):
    """Eigenvalue at N cross-checked at 2N with Richardson extrapolation.

    coeffs_at maps a PeriodicGrid to the (d, a, q) triple on that grid, so the
    caller controls how sampled coefficients are rebuilt on the finer grid.
    """
    d, a, q = coeffs_at(grid)
    pair = principal_eigen(d, a, q, grid, scheme=scheme, **kw)
    fine = grid.refined(2)
    d2, a2, q2 = coeffs_at(fine)
    pair2 = principal_eigen(d2, a2, q2, fine, scheme=scheme, **kw)
    pair.value_refined = pair2.value
    pair.extrapolated = (4.0 * pair2.value - pair.value) / 3.0
    return pair


def _as_periodic_fn_triple(d, a, q):
    def factory(grid):
        return d, a, q

    return factory


def eigen_refined(d, a, q, grid, scheme="auto", **kw):
    """principal_eigen_refined for coefficients that evaluate on any grid."""
    return principal_eigen_refined(_as_periodic_fn_triple(d, a, q), grid, scheme=scheme, **kw)


def lambda_of_mu(d, a, q, mu, grid, scheme="auto", v0=None, **kw):
    """Principal eigenvalue of the mu-tilted operator.

    Tilting replaces the drift by (2 d mu + a) and the potential by
    (d mu^2 + a mu + q); mu = 0 recovers principal_eigen(d, a, q).
    """
    xs = grid.nodes()
    dv = dz._coefficient_samples(d, xs, grid.period)
    av = dz._coefficient_samples(a, xs, grid.period)
    qv = dz._coefficient_samples(q, xs, grid.period)
    drift = 2.0 * dv * mu + av
    potential = dv * mu**2 + av * mu + qv
    return principal_eigen(dv, drift, potential, grid, scheme=scheme, v0=v0, **kw)


class TiltedFamily:
    """mu -> lambda(mu) evaluator with eigenfunction warm starts.

    Reusing the previous mu's eigenfunction as the starting vector cuts the
    iteration count substantially across a sweep; disabling warm starts gives
    bitwise-identical eigenvalues to stated tolerances, just slower.
    """

    def __init__(self, d, a, q, grid, scheme="auto", warm_start=True):
        self.d, self.a, self.q = d, a, q
        self.grid = grid
        self.scheme = scheme
        self.warm_start = warm_start
        self._v0 = None
        self.evaluations = 0

    def __call__(self, mu):
        pair = lambda_of_mu(self.d, self.a, self.q, mu, self.grid, scheme=self.scheme,
                            v0=self._v0 if self.warm_start else None)
        if self.warm_start:
            self._v0 = pair.eigenfunction
        self.evaluations += 1
        return pair.value


# -- coupled problems ---------------------------------------------------------


def _coupled_matrix(sys, grid, diag1, diag2, coup12, coup21, drift1=None, drift2=None):
    """Sparse 2N x 2N Metzler block matrix for the cooperative couplings."""
    a1 = sys.a1_star if drift1 is None else drift1
    a2 = sys.a2_star if drift2 is None else drift2
    op1 = dz.assemble_periodic(sys.d1_samples, a1, diag1, grid)
    op2 = dz.assemble_periodic(sys.d2_samples, a2, diag2, grid)
    blocks = [
        [op1.to_sparse(), sp.diags(coup12)],
        [sp.diags(coup21), op2.to_sparse()],
    ]
    return sp.bmat(blocks, format="csc")


def _coupled_perron(mat, n, v0=None, tol_value=1e-12, tol_residual=1e-10, max_iter=10000):
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    sigma0 = float(row_sums.max()) + 1.0
    if v0 is None:
        v0 = np.ones(2 * n)

    def make_solver(sigma):
        try:
            lu = spla.splu((sigma * sp.identity(2 * n, format="csc")) - mat)
        except RuntimeError as exc:
            raise SingularOperatorError(str(exc)) from exc
        return lu.solve

    op_scale = float(np.max(np.abs(mat)))
    lam, w, res, it = _power_resolvent(lambda v: mat @ v, make_solver, sigma0, v0, tol_value,
                                       tol_residual, max_iter, op_scale=op_scale)
    return lam, w, res, it


def triangular_pair(sys, which, grid, tol_gap=1e-10):
    """Eigenpair of the triangular linearization around the 0 or 1 state.

    around_0: the principal value is mu0- = lambda0(d1, a1*, a11* - a12*) with
    scalar eigenfunction phi01 (max 1); phi02 solves the resolvent equation
    (mu0- I - M2) phi02 = a21* phi01 with M2 = d2 d^2 - a2* d - a22*.
    around_1 is the mirrored construction with phi12 max-normalized.
    Requires the corresponding (B1) inequality with a strict numerical gap.
    """
    if grid.n != sys.grid.n:
        raise ValueError("grid must match the CooperativeSystem sampling grid")
    if which == "around_0":
        lead = principal_eigen(sys.d1_samples, sys.a1_star, sys.a11_star - sys.a12_star, grid)
        other = principal_eigen(sys.d2_samples, sys.a2_star, -sys.a22_star, grid)
        gap = lead.value - other.value
        if gap < tol_gap:
            raise GapError(
                "(B1) first inequality fails: lambda0(d2,a2*,-a22*) = "
                f"{other.value:.12g} is not below lambda0(d1,a1*,a11*-a12*) = {lead.value:.12g}"
            )
        phi1 = lead.eigenfunction
        op2 = dz.assemble_periodic(sys.d2_samples, sys.a2_star, -sys.a22_star, grid)
        phi2 = op2.solve_shifted(lead.value, sys.a21_star * phi1)
        res2 = float(np.max(np.abs(op2.apply(phi2) + sys.a21_star * phi1 - lead.value * phi2)))
        return CoupledEigenPair(
            value=lead.value, phi1=phi1, phi2=phi2,
            residual1=lead.residual, residual2=res2, grid_n=grid.n, iterations=lead.iterations,
        )
    if which == "around_1":
        lead = principal_eigen(sys.d2_samples, sys.a2_star, sys.a22_star - sys.a21_star, grid)
        other = principal_eigen(sys.d1_samples, sys.a1_star, -sys.a11_star, grid)
        gap = lead.value - other.value
        if gap < tol_gap:
            raise GapError(
                "(B1) second inequality fails: lambda0(d1,a1*,-a11*) = "
                f"{other.value:.12g} is not below lambda0(d2,a2*,a22*-a21*) = {lead.value:.12g}"
            )
        phi2 = lead.eigenfunction
        op1 = dz.assemble_periodic(sys.d1_samples, sys.a1_star, -sys.a11_star, grid)
        phi1 = op1.solve_shifted(lead.value, sys.a12_star * phi2)
        res1 = float(np.max(np.abs(op1.apply(phi1) + sys.a12_star * phi2 - lead.value * phi1)))
        return CoupledEigenPair(
            value=lead.value, phi1=phi1, phi2=phi2,
            residual1=res1, residual2=lead.residual, grid_n=grid.n, iterations=lead.iterations,
        )
    raise ValueError(f"which must be 'around_0' or 'around_1', got {which!r}")


def _interior_or_raise(u_hat, tol=1e-12):
    u1, u2 = u_hat
    if u1.min() <= tol or u2.min() <= tol or u1.max() >= 1.0 - tol or u2.max() >= 1.0 - tol:
        raise PreconditionError(
            "coexistence state touches the boundary of (0,1)^2; the coupled "
            "linearization is not irreducible there"
        )
    return np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)


def _linearization_diagonals(sys, u1, u2):
    j11 = sys.a11_star * (1.0 - 2.0 * u1) - sys.a12_star * (1.0 - u2)
    j12 = sys.a12_star * u1
    j21 = sys.a21_star * (1.0 - u2)
    j22 = -(sys.a22_star + sys.a21_star * u1 - 2.0 * sys.a22_star * u2)
    return j11, j12, j21, j22


def coexistence_linearization_eigen(sys, u_hat, grid, v0=None, **kw):
    """Perron pair of the linearization at an interior coexistence state."""
    if grid.n != sys.grid.n:
        raise ValueError("grid must match the CooperativeSystem sampling grid")
    u1, u2 = _interior_or_raise(u_hat)
    j11, j12, j21, j22 = _linearization_diagonals(sys, u1, u2)
    mat = _coupled_matrix(sys, grid, j11, j22, j12, j21)
    lam, w, res, it = _coupled_perron(mat, grid.n, v0=v0, **kw)
    phi1, phi2 = w[: grid.n], w[grid.n:]
    return CoupledEigenPair(value=lam, phi1=phi1, phi2=phi2, residual1=res, residual2=res,
                            grid_n=grid.n, iterations=it)


def mu_family_coexistence(sys, u_hat, mu, grid, v0=None, **kw):
    """lambda+(mu): Perron value of the mu-tilted coexistence linearization."""
    if grid.n != sys.grid.n:
        raise ValueError("grid must match the CooperativeSystem sampling grid")
    u1, u2 = _interior_or_raise(u_hat)
    j11, j12, j21, j22 = _linearization_diagonals(sys, u1, u2)
    d1, d2 = sys.d1_samples, sys.d2_samples
    drift1 = 2.0 * d1 * mu + sys.a1_star
    drift2 = 2.0 * d2 * mu + sys.a2_star
    diag1 = j11 + d1 * mu**2 + sys.a1_star * mu
    diag2 = j22 + d2 * mu**2 + sys.a2_star * mu
    mat = _coupled_matrix(sys, grid, diag1, diag2, j12, j21, drift1=drift1, drift2=drift2)
    lam, w, res, it = _coupled_perron(mat, grid.n, v0=v0, **kw)
    phi1, phi2 = w[: grid.n], w[grid.n:]
    return CoupledEigenPair(value=lam, phi1=phi1, phi2=phi2, residual1=res, residual2=res,
                            grid_n=grid.n, iterations=it)


class CoexistenceFamily:
    """mu -> lambda+(mu) evaluator with warm starts, for speed infima."""

    def __init__(self, sys, u_hat, grid, warm_start=True):
        self.sys = sys
        self.u_hat = u_hat
        self.grid = grid
        self.warm_start = warm_start
        self._v0 = None

    def __call__(self, mu):
        pair = mu_family_coexistence(self.sys, self.u_hat, mu, self.grid,
                                     v0=self._v0 if self.warm_start else None)
        if self.warm_start:
            self._v0 = np.concatenate([pair.phi1, pair.phi2])
        return pair.value


def richardson(value_n, value_2n):
    """Extrapolate a second-order-accurate pair (N, 2N) of scalar results."""
    return (4.0 * value_2n - value_n) / 3.0
