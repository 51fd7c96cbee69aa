"""Haar-random device ensembles, finite-shot sampling, bootstrap errors."""

import math

import numpy as np
import pytest

from indistinguo.errors import EstimatorError, InputDataError
from indistinguo.interference import output_distribution
from indistinguo.matrices import permanent
from indistinguo.montecarlo import (
    EstimateWithError,
    bootstrap,
    run_haar_ensemble,
    sample_counts,
    variance_statistic,
)
from indistinguo.noise import NoiseParameters
from indistinguo.states import gram_from_overlaps

ONES3 = np.ones((3, 3), dtype=complex)
MODES3 = (0, 1, 2)


def scenario_a():
    return gram_from_overlaps(0.875, 0.874, 0.848)


class TestHaarEnsemble:
    def test_identical_photons_ratio_is_factorial(self):
        result = run_haar_ensemble(3, ONES3, draws=100, seed=1)
        assert np.abs(result.r_fb - 6.0).max() < 1e-9
        assert np.std(result.r_fb) < 1e-9

    def test_ratio_equals_gram_permanent_every_draw(self):
        s = scenario_a()
        expected = float(np.real(permanent(s)))
        result = run_haar_ensemble(3, s, draws=100, seed=1)
        assert np.abs(result.r_fb - expected).max() < 1e-6

    def test_bunching_probability_support(self):
        result = run_haar_ensemble(3, ONES3, draws=200, seed=2)
        cap = math.factorial(3) / 3**3
        assert result.p_fb.min() > 0.0
        assert result.p_fb.max() <= cap + 1e-12

    def test_sigma_bracketed_by_distinguishable_and_ceiling(self):
        result = run_haar_ensemble(3, scenario_a(), draws=200, seed=3)
        assert np.all(result.sigma >= result.sigma_d - 1e-12)
        assert result.sigma.max() <= 2.0 - 2.0 / 3.0 + 1e-9

    def test_deterministic_and_chunk_invariant(self):
        a = run_haar_ensemble(3, scenario_a(), draws=50, seed=7)
        b = run_haar_ensemble(3, scenario_a(), draws=50, seed=7)
        assert np.array_equal(a.p_fb, b.p_fb)
        # the first draws of a longer run reproduce a shorter run exactly
        longer = run_haar_ensemble(3, scenario_a(), draws=80, seed=7)
        assert np.array_equal(longer.p_fb[:50], a.p_fb)
        assert np.array_equal(longer.sigma[:50], a.sigma)

    def test_seed_changes_draws(self):
        a = run_haar_ensemble(3, scenario_a(), draws=50, seed=7)
        b = run_haar_ensemble(3, scenario_a(), draws=50, seed=8)
        assert not np.allclose(a.p_fb, b.p_fb)

    def test_more_modes_than_photons(self):
        result = run_haar_ensemble(5, scenario_a(), draws=20, seed=4)
        assert result.n_modes == 5
        assert result.photons == 3
        assert np.all(result.p_fb > 0.0)

    def test_noisy_path_agrees_with_ideal_at_zero_noise(self):
        quiet = NoiseParameters.from_g2_brightness(0.0, 1.0, eta0=1.0)
        noisy = run_haar_ensemble(3, scenario_a(), draws=5, seed=5, noise=quiet)
        ideal = run_haar_ensemble(3, scenario_a(), draws=5, seed=5)
        assert noisy.noisy and not ideal.noisy
        assert np.allclose(noisy.r_fb, ideal.r_fb, atol=1e-9)
        assert np.allclose(noisy.sigma, ideal.sigma, atol=1e-9)

    def test_summary_shape(self):
        result = run_haar_ensemble(3, scenario_a(), draws=50, seed=6)
        out = result.summary()
        assert out["draws"] == 50
        assert 0.0 <= out["nontrivial_lb_fraction"] <= 1.0
        assert set(out["sigma"]) == {"mean", "std", "quantiles"}

    def test_input_validation(self):
        with pytest.raises(InputDataError):
            run_haar_ensemble(3, scenario_a(), draws=0)
        with pytest.raises(InputDataError):
            run_haar_ensemble(2, scenario_a(), draws=10)


class TestSampleCounts:
    def test_zero_shots(self, tritter):
        d = output_distribution(tritter, ONES3, MODES3)
        counts = sample_counts(d, 0)
        assert set(counts) == set(d.configs)
        assert all(v == 0 for v in counts.values())

    def test_point_mass(self):
        d = output_distribution(np.eye(3, dtype=complex), ONES3, MODES3)
        counts = sample_counts(d, 1000, seed=1)
        assert counts[(1, 1, 1)] == 1000
        assert sum(counts.values()) == 1000

    def test_concentration_at_large_shots(self, tritter):
        d = output_distribution(tritter, ONES3, MODES3)
        shots = 10**6
        counts = sample_counts(d, shots, seed=2)
        se = math.sqrt((2.0 / 9.0) * (7.0 / 9.0) / shots)
        assert counts[(3, 0, 0)] / shots == pytest.approx(2.0 / 9.0, abs=3 * se)

    def test_deterministic_per_seed(self, tritter):
        d = output_distribution(tritter, ONES3, MODES3)
        assert sample_counts(d, 500, seed=3) == sample_counts(d, 500, seed=3)
        assert sample_counts(d, 500, seed=3) != sample_counts(d, 500, seed=4)

    def test_negative_shots_rejected(self, tritter):
        d = output_distribution(tritter, ONES3, MODES3)
        with pytest.raises(InputDataError):
            sample_counts(d, -1)


class TestBootstrap:
    def test_constant_estimator_has_zero_error(self):
        est = bootstrap(lambda c: 1.25, {(1, 1, 1): 100}, resamples=200)
        assert isinstance(est, EstimateWithError)
        assert est.mean == pytest.approx(1.25)
        assert est.std < 1e-12
        assert est.failures == 0

    def test_poisson_mean_relative_error(self):
        est = bootstrap(
            lambda c: float(c[(1, 1, 1)]), {(1, 1, 1): 100}, resamples=2000, seed=1
        )
        # Poisson(100) resampling: mean near 100, spread near 10
        assert est.mean == pytest.approx(100.0, abs=1.0)
        assert est.std == pytest.approx(10.0, rel=0.15)

    def test_unstable_estimator_reported(self):
        def fragile(c):
            # dies whenever the Poisson replay moves the count at all
            if c[(1, 1, 1)] != 4:
                raise ValueError("moved")
            return 1.0

        with pytest.raises(EstimatorError, match="unstable"):
            bootstrap(fragile, {(1, 1, 1): 4}, resamples=200, seed=2)

    def test_occasional_failures_tolerated(self):
        def flaky(c):
            if c[(1, 1, 1)] > 130:  # ~ +3 sigma: rare
                raise ValueError("outlier")
            return float(c[(1, 1, 1)])

        est = bootstrap(flaky, {(1, 1, 1): 100}, resamples=500, seed=3)
        assert est.failures < 50

    def test_resample_floor_enforced(self):
        with pytest.raises(InputDataError):
            bootstrap(lambda c: 1.0, {(1, 1, 1): 10}, resamples=50)

    def test_negative_counts_rejected(self):
        with pytest.raises(InputDataError):
            bootstrap(lambda c: 1.0, {(1, 1, 1): -3}, resamples=200)


class TestVarianceStatistic:
    def test_mean_is_plug_in_estimate(self, tritter):
        d = output_distribution(tritter, ONES3, MODES3)
        counts = sample_counts(d, 10**5, seed=4)
        est = variance_statistic(counts, 3, 3, resamples=200)
        from indistinguo.interference import (
            distribution_from_counts,
            variance_from_distribution,
        )

        plug_in = variance_from_distribution(distribution_from_counts(counts, 3, 3))
        assert est.mean == pytest.approx(plug_in, abs=0.0)
        assert est.mean == pytest.approx(4.0 / 3.0, abs=0.02)
        assert 0.0 < est.std < 0.02
