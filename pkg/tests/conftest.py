"""Shared systems and session-scoped heavy artifacts for the test suite."""

import pytest

from perifront.discretization import LineGrid, PeriodicGrid
from perifront.periodic_coeffs import CompetitionSystem, PeriodicFn
from perifront import front_solver as fs
from perifront import spectral
from perifront import steady_states as ss


def pf(mean, cos=(), sin=(), L=1.0):
    return PeriodicFn(L, mean, cos, sin)


@pytest.fixture(scope="session")
def sym_constants():
    """Fully symmetric constants: b=1, a11=a22=1, a12=a21=1.5."""
    return CompetitionSystem.from_constants(
        L=1.0, d1=1, d2=1, a1=0, a2=0, b1=1, b2=1, a11=1, a12=1.5, a21=1.5, a22=1)


@pytest.fixture(scope="session")
def asym_constants():
    """The asymmetric constants baseline: a12=1.8, a21=1.3."""
    return CompetitionSystem.from_constants(
        L=1.0, d1=1, d2=1, a1=0, a2=0, b1=1, b2=1, a11=1, a12=1.8, a21=1.3, a22=1)


@pytest.fixture(scope="session")
def weak_constants():
    """Weak competition (a12=a21=0.5): (H1) fails, interior state stable."""
    return CompetitionSystem.from_constants(
        L=1.0, d1=1, d2=1, a1=0, a2=0, b1=1, b2=1, a11=1, a12=0.5, a21=0.5, a22=1)


@pytest.fixture(scope="session")
def sym_periodic():
    """Even-coefficient symmetric system with pulsed growth rates."""
    b = pf(1.0, (0.2,))
    one = pf(1.0)
    zero = pf(0.0)
    cross = pf(1.5)
    return CompetitionSystem(L=1.0, d1=one, d2=one, a1=zero, a2=zero,
                             b1=b, b2=b, a11=one, a12=cross, a21=cross, a22=one)


@pytest.fixture(scope="session")
def periodic_trio():
    """Three periodic systems exercising the eigenvalue cross-identities."""
    return (
        CompetitionSystem(L=1.0, d1=pf(1), d2=pf(1), a1=pf(0), a2=pf(0),
                          b1=pf(1, (0.3,)), b2=pf(1), a11=pf(1), a12=pf(1.5),
                          a21=pf(1.5), a22=pf(1)),
        CompetitionSystem(L=1.0, d1=pf(1, (0.5,)), d2=pf(1), a1=pf(0, (), (0.5,)), a2=pf(0),
                          b1=pf(1), b2=pf(1.1), a11=pf(1), a12=pf(1.8),
                          a21=pf(1.3), a22=pf(1)),
        CompetitionSystem(L=1.0, d1=pf(1), d2=pf(0.8, (0.3,)), a1=pf(0), a2=pf(0.2, (), (0.3,)),
                          b1=pf(1.2), b2=pf(0.9, (), (0.2,)), a11=pf(1, (0.4,)), a12=pf(1.4),
                          a21=pf(1.6), a22=pf(1)),
    )


@pytest.fixture(scope="session")
def grid64():
    return PeriodicGrid(1.0, 64)


@pytest.fixture(scope="session")
def coop_sym(sym_constants, grid64):
    return ss.cooperative_from_competition(sym_constants, grid64)


@pytest.fixture(scope="session")
def coop_asym(asym_constants, grid64):
    return ss.cooperative_from_competition(asym_constants, grid64)


@pytest.fixture(scope="session")
def line80_64():
    return LineGrid(period=1.0, n_per_period=64, periods=80, x_min=-40.0)


@pytest.fixture(scope="session")
def baseline_speed(coop_asym, line80_64):
    return fs.estimate_speed(coop_asym, None, 40.0, line80_64)


@pytest.fixture(scope="session")
def baseline_profile(coop_asym, line80_64, baseline_speed):
    return fs.extract_profile(coop_asym, baseline_speed.c, line80_64,
                              initial=baseline_speed.final_state)


@pytest.fixture(scope="session")
def baseline_pairs(coop_asym, grid64):
    pair0 = spectral.triangular_pair(coop_asym, "around_0", grid64)
    pair1 = spectral.triangular_pair(coop_asym, "around_1", grid64)
    return pair0, pair1


@pytest.fixture(scope="session")
def baseline_pack(baseline_profile, coop_asym, baseline_pairs):
    from perifront import subsuper_verifier as sv
    pair0, pair1 = baseline_pairs
    return sv.build_pack(baseline_profile, coop_asym, pair0, pair1)


@pytest.fixture(scope="session")
def refined_pipeline(asym_constants, baseline_profile):
    """(h/2, dt/2) rerun of the baseline profile, warm-started."""
    g2 = PeriodicGrid(1.0, 128)
    coop2 = ss.cooperative_from_competition(asym_constants, g2)
    grid2 = LineGrid(period=1.0, n_per_period=128, periods=80, x_min=-40.0)
    init2 = baseline_profile.state_at(grid2, t=0.0)
    prof2 = fs.extract_profile(coop2, baseline_profile.c, grid2, initial=init2,
                               dt_target=baseline_profile.meta["dt"] / 2)
    return coop2, grid2, prof2
