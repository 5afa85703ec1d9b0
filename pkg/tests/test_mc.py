import json
import math

import numpy as np
import pytest

from jacobi_diffusion.errors import CensoringWarning, ConfigError, RegimeError
from jacobi_diffusion.hitting import hit_prob_d
from jacobi_diffusion.mc import (
    McEstimate,
    calibrate_horizon,
    conservativity_check,
    ergodic_average,
    estimate_hit_prob,
    occupation_batch,
    occupation_integral,
    semigroup_mc_check,
)
from jacobi_diffusion.model import JacobiCoeffs
from jacobi_diffusion.sde import BoundaryHit, SdeField
from jacobi_diffusion.spectral import jacobi_Q_table

ONE = JacobiCoeffs.from_shape(1.0, 1.0)
# short horizons leave paths unresolved on purpose in a few tests
quiet_censoring = pytest.mark.filterwarnings("ignore::jacobi_diffusion.errors.CensoringWarning")


class TestEstimate:
    def test_from_samples(self):
        x = np.array([0.0, 1.0, 1.0, 0.0, 1.0])
        est = McEstimate.from_samples(x, 1e-3)
        assert est.mean == pytest.approx(0.6)
        assert est.stderr == pytest.approx(np.std(x, ddof=1) / math.sqrt(5))
        assert est.ci95 == pytest.approx((0.6 - 1.96 * est.stderr, 0.6 + 1.96 * est.stderr))

    def test_record(self):
        est = McEstimate.from_samples(np.array([0.0, 1.0]), 1e-3, {"T": 2.0})
        rec = json.loads(est.to_json("hit", {"x0": 0.5}, 42))
        assert set(rec) >= {"estimator", "params", "seed", "n_paths", "dt", "mean", "stderr", "ci95", "diagnostics"}

    def test_censoring_widens_upper_side(self):
        est = McEstimate(0.5, 0.01, 100, 1e-3, (0.48, 0.52), {"censored_fraction": 0.05})
        assert est.brackets(0.54)
        assert not est.brackets(0.46)


class TestHitting:
    C = JacobiCoeffs.from_shape(-0.5, -1.5)

    def test_no_paths(self):
        with pytest.raises(ConfigError):
            estimate_hit_prob(SdeField(self.C), 0.5, BoundaryHit.D, T=1.0, n_paths=0)

    @quiet_censoring
    def test_pilot_scale(self):
        exact = hit_prob_d(self.C, 0.5).probability
        est = estimate_hit_prob(SdeField(self.C), 0.5, BoundaryHit.D, dt=1e-3, n_paths=4000, seed=5)
        # calibrated on a 10% pilot, so the main run sees the tail tolerance up to noise
        assert est.diagnostics["censored_fraction"] <= 3e-3
        assert est.brackets(exact, margin=0.02)

    def test_censoring_warning(self):
        with pytest.warns(CensoringWarning):
            estimate_hit_prob(SdeField(self.C), 0.5, BoundaryHit.D, T=0.05, dt=1e-3, n_paths=200)

    @quiet_censoring
    def test_near_boundary_start(self):
        c = JacobiCoeffs.from_shape(-0.5, 0.5)
        est = estimate_hit_prob(SdeField(c), 1 - 1e-3, BoundaryHit.D, T=2.0, dt=1e-4, n_paths=500, seed=3)
        assert est.mean >= 0.9

    def test_unreachable_boundary_vanishes(self):
        f = SdeField(JacobiCoeffs.from_shape(0.5, 0.5))
        means = []
        for dt in (4e-3, 2e-3, 1e-3):
            with pytest.warns(CensoringWarning):
                means.append(estimate_hit_prob(f, 0.5, BoundaryHit.D, T=1.0, dt=dt, n_paths=4000, seed=8).mean)
        assert means[0] > means[1] > means[2]

    @quiet_censoring
    def test_worker_count_irrelevant(self):
        f = SdeField(self.C)
        args = dict(T=1.0, dt=1e-3, n_paths=700, seed=9)
        a = estimate_hit_prob(f, 0.5, BoundaryHit.ZERO, workers=1, **args)
        b = estimate_hit_prob(f, 0.5, BoundaryHit.ZERO, workers=8, **args)
        rec = lambda e: e.to_json("hit", {}, 9)
        assert rec(a) == rec(b)

    def test_calibration_deterministic(self):
        f = SdeField(self.C)
        assert calibrate_horizon(f, 0.5, 1e-3, 4, 300, BoundaryHit.D) == calibrate_horizon(
            f, 0.5, 1e-3, 4, 300, BoundaryHit.D
        )


class TestConservativity:
    def test_regular(self):
        f = SdeField(ONE)
        a = conservativity_check(f, 0.5, T=1.0, dt=1e-3, n_paths=1000)
        b = conservativity_check(f, 0.5, T=1.0, dt=5e-4, n_paths=1000)
        assert a.mean < 0.01 and b.mean <= a.mean

    def test_exit_regime(self):
        c = JacobiCoeffs.from_shape(-1.5, 1.0)
        est = conservativity_check(SdeField(c), 0.9, dt=1e-3, n_paths=500, seed=2)
        assert est.mean > 0.2

    def test_no_paths(self):
        with pytest.raises(ConfigError):
            conservativity_check(SdeField(ONE), 0.5, T=1.0, n_paths=0)


class TestErgodic:
    def test_constant(self):
        assert ergodic_average(SdeField(ONE), 0.3, lambda x: np.ones_like(x), T=5.0) == 1.0

    def test_two_seeds(self):
        f = SdeField(ONE)
        a = ergodic_average(f, 0.3, lambda x: x, T=200.0, seed=1)
        b = ergodic_average(f, 0.3, lambda x: x, T=200.0, seed=2)
        assert abs(a - b) <= 0.1 * max(a, b)

    def test_regime(self):
        with pytest.raises(RegimeError):
            ergodic_average(SdeField(JacobiCoeffs.from_shape(-1.5, 1.0)), 0.3, lambda x: x, T=1.0)


class TestOccupation:
    def test_immediate_death(self):
        f = SdeField(JacobiCoeffs(-20.0, 0.0, 1.0, 1.0))
        value, stable = occupation_integral(f, 1e-3, 0.0, 0.0, 1.0, require_admissible=False)
        assert value < 1e-3 and stable

    def test_absorbing_regime_stabilizes(self):
        f = SdeField(JacobiCoeffs.from_shape(0.0, -1.5))
        T, _ = calibrate_horizon(f, 0.5, 1e-3, 42, 500, None)
        values, stable = occupation_batch(f, 0.5, 0.0, 0.0, T, n_paths=500)
        assert np.mean(stable) >= 0.95
        assert np.all(np.isfinite(values))
        assert occupation_integral(f, 0.5, 0.0, 0.0, T, path_id=7) == (values[7], bool(stable[7]))

    def test_conservative_grows(self):
        value, stable = occupation_integral(SdeField(ONE), 0.5, 0.0, 0.0, 5.0, require_admissible=False)
        assert value == pytest.approx(5.0, rel=1e-12)
        assert not stable

    def test_inadmissible(self):
        with pytest.raises(RegimeError):
            occupation_integral(SdeField(ONE), 0.5, 0.0, 0.0, 1.0)


class TestSemigroup:
    def test_constant(self):
        est, exact = semigroup_mc_check(SdeField(ONE), 0.3, lambda x: np.ones_like(x), 0.5, n_paths=100)
        assert est.mean == 1.0 and exact == pytest.approx(1.0, abs=1e-12)

    def test_time_zero(self):
        est, exact = semigroup_mc_check(SdeField(ONE), 0.3, lambda x: x**2, 0.0)
        assert est.mean == 0.09 and est.stderr == 0.0 and exact == 0.09

    def test_first_mode(self):
        q1 = lambda x: jacobi_Q_table(ONE, 1, x)[1]
        est, exact = semigroup_mc_check(SdeField(ONE), 0.3, q1, 1.0, dt=1e-3, n_paths=10_000, seed=4)
        assert exact == pytest.approx(math.exp(-2) * q1(0.3), rel=1e-12)
        assert est.brackets(exact, margin=0.01)
