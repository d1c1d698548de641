"""Spreading speeds: closed forms, dense-scan oracles, (B2) and couplings."""

import numpy as np
import pytest

from perifront import spectral
from perifront import steady_states as ss
from perifront import wave_speeds as wsp
from perifront.errors import NonConvergenceError, PreconditionError
from perifront.periodic_coeffs import CompetitionSystem, PeriodicFn


class TestMinimalSpeed:
    def test_kpp_closed_form(self, grid64):
        fam = spectral.TiltedFamily(1.0, 0.0, 1.0, grid64)
        res = wsp.minimal_speed(fam, "rightward")
        assert res.c_star == pytest.approx(2.0, abs=1e-7)
        assert res.mu_star == pytest.approx(1.0, abs=1e-4)

    def test_drift_shifts(self, grid64):
        fam = spectral.TiltedFamily(1.0, 3.0, 1.0, grid64)
        assert wsp.minimal_speed(fam, "rightward").c_star == pytest.approx(5.0, abs=1e-7)
        assert wsp.minimal_speed(fam, "leftward").c_star == pytest.approx(-1.0, abs=1e-7)

    def test_periodic_dense_scan_oracle(self, grid64):
        q = PeriodicFn(1.0, 1.0, (0.5,))
        fam = spectral.TiltedFamily(1.0, 0.0, q, grid64)
        res = wsp.minimal_speed(fam, "rightward")
        assert res.c_star > 2.0  # nonconstant potential raises lambda0 above the mean
        # dense 1000-point mu scan as the oracle
        oracle_fam = spectral.TiltedFamily(1.0, 0.0, q, grid64)
        mus = np.linspace(0.3, 3.0, 1000)
        ratios = np.array([oracle_fam(m) / m for m in mus])
        assert res.c_star <= ratios.min() + 1e-10
        assert abs(res.c_star - ratios.min()) < 1e-5

    def test_envelope_property(self, grid64):
        q = PeriodicFn(1.0, 1.0, (0.5,))
        fam = spectral.TiltedFamily(1.0, 0.0, q, grid64)
        res = wsp.minimal_speed(fam, "rightward")
        for mu, lam, ratio in res.samples:
            assert res.c_star <= ratio + 1e-10
        rng = np.random.default_rng(0)
        for mu in rng.uniform(0.05, 5.0, 8):
            assert res.c_star <= fam(mu) / mu + 1e-10

    def test_shift_covariance_constants(self, grid64):
        # exact for constant coefficients: c*(a + delta) = c*(a) + delta
        base = wsp.minimal_speed(spectral.TiltedFamily(1.0, 0.0, 1.0, grid64), "rightward").c_star
        base_left = wsp.minimal_speed(spectral.TiltedFamily(1.0, 0.0, 1.0, grid64), "leftward").c_star
        for delta in (-1.0, 1.0):
            right = wsp.minimal_speed(spectral.TiltedFamily(1.0, delta, 1.0, grid64), "rightward").c_star
            left = wsp.minimal_speed(spectral.TiltedFamily(1.0, delta, 1.0, grid64), "leftward").c_star
            assert right == pytest.approx(base + delta, abs=1e-6)
            assert left == pytest.approx(base_left - delta, abs=1e-6)

    def test_shift_covariance_periodic_defect(self, grid64):
        # for x-dependent potentials the covariance is only approximate: the
        # co-moving frame makes the coefficients time-dependent.  The defect
        # is grid-independent and small but genuinely nonzero.
        q = PeriodicFn(1.0, 1.0, (0.3,))
        base = wsp.minimal_speed(spectral.TiltedFamily(1.0, 0.0, q, grid64), "rightward").c_star
        shifted = wsp.minimal_speed(spectral.TiltedFamily(1.0, 1.0, q, grid64), "rightward").c_star
        assert shifted - base == pytest.approx(1.0, abs=5e-3)

    def test_constant_sweep_closed_form(self, grid64):
        for d in (0.5, 1.0, 2.0):
            for q in (0.5, 1.0, 2.0):
                for a in (-1.0, 0.0, 1.0):
                    res = wsp.minimal_speed(spectral.TiltedFamily(d, a, q, grid64), "rightward")
                    assert res.c_star == pytest.approx(a + 2 * np.sqrt(d * q), abs=1e-6)

    def test_lambda0_precondition(self, grid64):
        fam = spectral.TiltedFamily(1.0, 0.0, -0.5, grid64)
        with pytest.raises(PreconditionError):
            wsp.minimal_speed(fam, "rightward")

    def test_non_unimodal_detected(self):
        # synthetic family whose ratio 2 + sin(5 mu) has interior maxima
        def family(mu):
            return mu * (2.0 + np.sin(5.0 * mu))

        with pytest.raises(NonConvergenceError, match="unimodal"):
            wsp.minimal_speed(family, "rightward", check_lambda0=False)


class TestCheckB2:
    def test_symmetric_constants(self, coop_sym, grid64):
        res = wsp.check_B2(coop_sym, grid64)
        assert res.c1_minus.c_star == pytest.approx(2.0, abs=1e-6)
        assert res.c2_plus.c_star == pytest.approx(2.0, abs=1e-6)
        assert res.total == pytest.approx(4.0, abs=1e-6)
        assert res.passed
        assert res.mirror_total == pytest.approx(4.0, abs=1e-6)
        assert res.mirror_passed

    def test_opposite_drifts_fail(self, grid64):
        # a1* = +6, a2* = -6 push both speeds down:
        # sum = -a1* + 2 sqrt(d1 a11*) + a2* + 2 sqrt(d2 a22*) = -8 < 0
        system = CompetitionSystem.from_constants(
            L=1.0, d1=1, d2=1, a1=6.0, a2=-6.0, b1=1, b2=1,
            a11=1, a12=1.5, a21=1.5, a22=1)
        coop = ss.cooperative_from_competition(system, grid64)
        res = wsp.check_B2(coop, grid64)
        assert res.c1_minus.c_star == pytest.approx(-6.0 + 2.0, abs=1e-6)
        assert res.c2_plus.c_star == pytest.approx(-6.0 + 2.0, abs=1e-6)
        assert res.total == pytest.approx(-8.0, abs=1e-6)
        assert not res.passed

    def test_even_odd_coefficients_positive_speeds(self, sym_periodic, grid64):
        # even d, even a_ii*, odd a_i*: lambda even => both speeds positive
        coop = ss.cooperative_from_competition(sym_periodic, grid64)
        res = wsp.check_B2(coop, grid64)
        assert res.c1_minus.c_star > 0
        assert res.c2_plus.c_star > 0
        assert res.passed


class TestCounterPropagation:
    def test_symmetric_equal_infima(self, coop_sym, grid64):
        u_hat = (np.full(64, 0.4), np.full(64, 0.6))
        res = wsp.counter_propagation(coop_sym, u_hat, grid64)
        assert res.passed
        assert res.c_plus_lb.c_star == pytest.approx(res.c_minus_lb.c_star, abs=1e-6)
        assert res.total == pytest.approx(2.0 * res.c_plus_lb.c_star, abs=1e-6)
        # constants: lambda+(mu) = mu^2 + 0.2, infimum 2 sqrt(0.2)
        assert res.c_plus_lb.c_star == pytest.approx(2.0 * np.sqrt(0.2), abs=1e-6)

    def test_convexity_bound(self, coop_sym, grid64):
        u_hat = (np.full(64, 0.4), np.full(64, 0.6))
        res = wsp.counter_propagation(coop_sym, u_hat, grid64)
        assert res.total >= res.convexity_bound - 1e-8
        assert res.convexity_bound > 0

    def test_structural_positivity(self, coop_asym, grid64):
        # lambda+(0) > 0 forces a positive sum (the proof's convexity argument)
        u1 = 0.8 / 1.34
        u_hat = (np.full(64, u1), np.full(64, 1.3 * u1))
        res = wsp.counter_propagation(coop_asym, u_hat, grid64)
        assert res.total > 0
