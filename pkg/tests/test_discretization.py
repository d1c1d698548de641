"""Operator assembly, Metzler structure, resolvent solves, accuracy orders."""

import numpy as np
import pytest

from perifront.discretization import (
    LineGrid,
    PeriodicGrid,
    assemble_line,
    assemble_periodic,
)
from perifront.errors import MetzlerError
from perifront.periodic_coeffs import PeriodicFn


def dense_periodic(dfn, afn, qfn, N, L=1.0, scheme="centered"):
    """Independent dense assembly straight from the stencil definition."""
    h = L / N
    A = np.zeros((N, N))
    for j in range(N):
        x = j * h
        d, a, q = dfn(x), afn(x), qfn(x)
        if scheme == "centered":
            A[j, j] += -2 * d / h**2 + q
            A[j, (j - 1) % N] += d / h**2 + a / (2 * h)
            A[j, (j + 1) % N] += d / h**2 - a / (2 * h)
        else:
            A[j, j] += -2 * d / h**2 - abs(a) / h + q
            A[j, (j - 1) % N] += d / h**2 + max(a, 0) / h
            A[j, (j + 1) % N] += d / h**2 + max(-a, 0) / h
    return A


class TestAssemblePeriodic:
    def test_stencil_arithmetic(self):
        # smallest legal grid: N=16, h=1/16, 1/h^2 = 256
        g = PeriodicGrid(1.0, 16)
        op = assemble_periodic(1.0, 0.0, 0.0, g, scheme="centered")
        assert np.allclose(op.main, -512.0)
        assert np.allclose(op.sub, 256.0)
        assert np.allclose(op.sup, 256.0)
        assert op.wrap_lo == 256.0 and op.wrap_hi == 256.0

    def test_grid_minimum_size(self):
        with pytest.raises(ValueError):
            PeriodicGrid(1.0, 4)

    def test_constants_in_kernel(self):
        g = PeriodicGrid(1.0, 32)
        d = PeriodicFn(1.0, 1.0, (0.3,))
        a = PeriodicFn(1.0, 0.0, (), (0.5,))
        op = assemble_periodic(d, a, 0.0, g, scheme="centered")
        assert np.max(np.abs(op.apply(np.ones(32)))) < 1e-10

    def test_metzler_holds_for_moderate_advection(self):
        g = PeriodicGrid(1.0, 64)
        a = PeriodicFn(1.0, 0.0, (), (4.0,))
        op = assemble_periodic(1.0, a, 0.0, g, scheme="centered")
        assert op.min_offdiagonal >= 0.0  # h = 1/64 < 2/4

    def test_centered_rejected_when_metzler_fails(self):
        g = PeriodicGrid(1.0, 64)
        a = PeriodicFn(1.0, 0.0, (), (200.0,))
        with pytest.raises(MetzlerError):
            assemble_periodic(1.0, a, 0.0, g, scheme="centered")

    def test_auto_falls_back_to_upwind(self):
        g = PeriodicGrid(1.0, 64)
        a = PeriodicFn(1.0, 0.0, (), (200.0,))
        op = assemble_periodic(1.0, a, 0.0, g, scheme="auto")
        assert op.scheme == "upwind"
        assert op.min_offdiagonal >= 0.0

    def test_upwind_metzler_any_h(self):
        g = PeriodicGrid(1.0, 16)
        a = PeriodicFn(1.0, 0.0, (), (500.0,))
        op = assemble_periodic(1.0, a, 0.0, g, scheme="upwind")
        assert op.min_offdiagonal >= 0.0


class TestAssembleLine:
    def test_interior_matches_periodic_phase(self):
        g = PeriodicGrid(1.0, 32)
        line = LineGrid(period=1.0, n_per_period=32, periods=16, x_min=0.0)
        d = PeriodicFn(1.0, 1.0, (0.2,))
        a = PeriodicFn(1.0, 0.5)
        q = PeriodicFn(1.0, 0.3, (), (0.1,))
        po = assemble_periodic(d, a, q, g, scheme="centered")
        lo = assemble_line(d, a, q, line, scheme="centered")
        j = 5 * 32 + 7  # same phase as periodic node 7
        assert lo.main[j] == pytest.approx(po.main[7], rel=1e-14)
        assert lo.sub[j] == pytest.approx(po.sub[7], rel=1e-14)
        assert lo.sup[j] == pytest.approx(po.sup[7], rel=1e-14)

    def test_dirichlet_consistency(self):
        line = LineGrid(period=1.0, n_per_period=32, periods=16, x_min=0.0)
        op = assemble_line(1.0, 0.0, 0.0, line, clamp=(0.7, 0.7))
        u = np.full(line.m, 0.7)
        out = op.apply(u)
        assert abs(out[0]) < 1e-10 and abs(out[-1]) < 1e-10

    def test_dimension_and_bandwidth(self):
        line = LineGrid(period=1.0, n_per_period=64, periods=40, x_min=0.0)
        op = assemble_line(1.0, 0.0, 0.0, line)
        assert op.n == 2560
        assert not op.periodic  # tridiagonal: bandwidth 3, no wrap entries

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            LineGrid(period=1.0, n_per_period=16, periods=16, x_min=0.0)


class TestApply:
    def test_potential_only(self):
        g = PeriodicGrid(1.0, 32)
        q = PeriodicFn(1.0, 1.0, (0.5,))
        op = assemble_periodic(0.0, 0.0, q, g)
        u = np.linspace(0.5, 2.0, 32)
        assert np.allclose(op.apply(u), q.eval(g.nodes()) * u)

    def test_matches_dense_oracle(self):
        g = PeriodicGrid(1.0, 32)
        d = PeriodicFn(1.0, 1.0, (0.4,))
        a = PeriodicFn(1.0, 0.5, (), (0.3,))
        q = PeriodicFn(1.0, -0.2, (0.1,))
        op = assemble_periodic(d, a, q, g, scheme="centered")
        A = dense_periodic(d.eval, a.eval, q.eval, 32)
        rng = np.random.default_rng(1)
        u = rng.standard_normal(32)
        assert np.max(np.abs(op.apply(u) - A @ u)) < 1e-9

    def test_dimension_mismatch(self):
        g = PeriodicGrid(1.0, 32)
        op = assemble_periodic(1.0, 0.0, 0.0, g)
        with pytest.raises(ValueError):
            op.apply(np.ones(31))


class TestSolveShifted:
    def test_zero_operator(self):
        g = PeriodicGrid(1.0, 32)
        op = assemble_periodic(0.0, 0.0, 0.0, g)
        u = op.solve_shifted(2.0, np.ones(32))
        assert np.allclose(u, 0.5)

    def test_residual_random(self):
        g = PeriodicGrid(1.0, 64)
        d = PeriodicFn(1.0, 1.0, (0.3,))
        a = PeriodicFn(1.0, 0.0, (), (1.0,))
        q = PeriodicFn(1.0, 0.5)
        op = assemble_periodic(d, a, q, g)
        rng = np.random.default_rng(7)
        for _ in range(4):
            rhs = rng.standard_normal(64)
            u = op.solve_shifted(3.0, rhs)
            res = np.max(np.abs(3.0 * u - op.apply(u) - rhs))
            assert res < 1e-10 * max(1.0, np.max(np.abs(u)))

    def test_matches_dense_solve(self):
        g = PeriodicGrid(1.0, 32)
        op = assemble_periodic(1.0, 0.0, 0.5, g)
        A = dense_periodic(lambda x: 1.0, lambda x: 0.0, lambda x: 0.5, 32)
        rhs = np.sin(2 * np.pi * g.nodes())
        u = op.solve_shifted(2.0, rhs)
        u_dense = np.linalg.solve(2.0 * np.eye(32) - A, rhs)
        assert np.max(np.abs(u - u_dense)) < 1e-10

    def test_maximum_principle(self):
        # (sigma I - M) is an M-matrix: nonnegative rhs -> nonnegative solution
        g = PeriodicGrid(1.0, 64)
        rng = np.random.default_rng(3)
        d = PeriodicFn(1.0, 1.0, (0.4,))
        a = PeriodicFn(1.0, 0.0, (), (2.0,))
        q = PeriodicFn(1.0, -0.5, (0.2,))
        op = assemble_periodic(d, a, q, g)
        assert op.min_offdiagonal >= 0.0
        # rows sum to q_j, so sigma above max q makes (sigma I - M) an M-matrix
        sigma = float(np.max(q.eval(g.nodes()))) + 1.0
        for _ in range(5):
            rhs = rng.random(64)
            u = op.solve_shifted(sigma, rhs)
            assert u.min() >= -1e-13


class TestAccuracyOrder:
    def _exact_parts(self, x):
        u = 2.0 + np.sin(2 * np.pi * x)
        du = 2 * np.pi * np.cos(2 * np.pi * x)
        ddu = -(2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
        return u, du, ddu

    def _error(self, N, scheme):
        g = PeriodicGrid(1.0, N)
        d = PeriodicFn(1.0, 1.0, (0.3,))
        a = PeriodicFn(1.0, 0.5, (), (0.4,))
        q = PeriodicFn(1.0, 0.2)
        op = assemble_periodic(d, a, q, g, scheme=scheme)
        xs = g.nodes()
        u, du, ddu = self._exact_parts(xs)
        exact = d.eval(xs) * ddu - a.eval(xs) * du + q.eval(xs) * u
        return np.max(np.abs(op.apply(u) - exact))

    def test_centered_second_order(self):
        errs = [self._error(N, "centered") for N in (64, 128, 256)]
        assert errs[0] / errs[1] > 3.5
        assert errs[1] / errs[2] > 3.5

    def test_upwind_first_order(self):
        errs = [self._error(N, "upwind") for N in (64, 128, 256)]
        assert 1.7 < errs[0] / errs[1] < 2.5
        assert 1.7 < errs[1] / errs[2] < 2.5


def test_coordinate_dump():
    g = PeriodicGrid(1.0, 16)
    op = assemble_periodic(1.0, 0.0, 0.0, g)
    text = op.dump_coordinates()
    assert len(text.splitlines()) == 3 * 16  # tridiagonal + two wraps folded in
