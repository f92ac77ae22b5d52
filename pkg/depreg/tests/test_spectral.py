import math

import numpy as np
import pytest
from scipy import integrate

from depreg.exceptions import ValidationError
from depreg.regression.enums import AcfSource, LrvMethod
from depreg.regression.spectral import (
	acf_values,
	autocov,
	autocovariances,
	check_bandwidth,
	default_bandwidth,
	kernel_K,
	kernel_weights,
	lrv,
	lrv_from_acf,
	spectral_density,
	spectral_grid,
)
from depreg.simulation.processes import simulate_ar1_nonmixing
from depreg.tests.test_base import TestBase


def brute_force_autocov(series, k):
	n = len(series)
	return sum(series[j] * series[j + k] for j in range(n - k)) / n


class TestAutocovariance(TestBase):
	def test_matches_brute_force_at_every_lag(self):
		for n, seed in [(7, 0), (64, 1), (150, 2), (200, 3)]:
			series = self.create_gaussian_series(n, seed=seed)
			expected = np.array([brute_force_autocov(series, k) for k in range(n)])
			values = acf_values(series, n - 1)
			assert np.max(np.abs(values - expected)) < 1e-12 * (1 + abs(expected[0]))

	def test_single_lag_is_symmetric(self):
		series = self.create_gaussian_series(30, seed=5)
		assert autocov(series, -4) == autocov(series, 4)
		assert autocov(series, 4) == pytest.approx(brute_force_autocov(series, 4), rel=1e-12)

	def test_no_mean_centering(self):
		assert autocov(np.full(10, 2.0), 0) == 4.0

	def test_lag_out_of_range(self):
		with pytest.raises(ValidationError):
			autocov(np.ones(5), 5)

	def test_batch_matches_rows(self):
		batch = np.random.default_rng(8).standard_normal((4, 120))
		values = acf_values(batch, 80)
		for r in range(4):
			self.assert_close(values[r], acf_values(batch[r], 80), rel=1e-12, abs_tol=1e-14)

	def test_estimate_ratios(self):
		estimate = autocovariances(self.create_gaussian_series(100), 5, AcfSource.RAW_SERIES)
		assert estimate.max_lag == 5
		assert estimate.source is AcfSource.RAW_SERIES
		assert estimate.ratios()[0] == 1.0

	def test_ratios_of_zero_series(self):
		estimate = autocovariances(np.zeros(10), 3)
		assert np.all(np.isnan(estimate.ratios()))


class TestKernel(TestBase):
	def test_three_branches(self):
		for x in np.linspace(-3.0, 3.0, 20):
			if abs(x) <= 1:
				expected = 1.0
			elif abs(x) <= 2:
				expected = 2.0 - abs(x)
			else:
				expected = 0.0
			assert kernel_K(x) == expected

	def test_weights_end_at_zero(self):
		weights = kernel_weights(4)
		assert weights.shape == (9,)
		assert np.all(weights[:5] == 1.0)
		assert weights[-1] == 0.0


class TestBandwidth(TestBase):
	def test_default_under_four_moments(self):
		assert default_bandwidth(100_000) == 177
		assert default_bandwidth(4) == 1

	def test_smaller_delta_gives_smaller_bandwidth(self):
		assert default_bandwidth(10_000, delta=0.5) < default_bandwidth(10_000, delta=2.0)

	def test_delta_out_of_range(self):
		with pytest.raises(ValidationError):
			default_bandwidth(100, delta=0)

	def test_bandwidth_too_large(self):
		assert check_bandwidth(2, 5) == 2
		with pytest.raises(ValidationError):
			check_bandwidth(3, 6)

	def test_growth(self):
		sizes = [10**e for e in range(2, 8)]
		bandwidths = [default_bandwidth(n) for n in sizes]
		assert bandwidths == [7, 22, 63, 177, 501, 1412]
		shares = [c**2 / n for c, n in zip(bandwidths, sizes)]
		assert all(later < earlier for earlier, later in zip(shares, shares[1:]))
		assert shares[-1] < 0.2


class TestSpectralDensity(TestBase):
	def test_integrates_to_variance(self):
		residuals = self.create_gaussian_series(300, seed=11)
		lambdas = np.linspace(-math.pi, math.pi, 4097)
		area = integrate.trapezoid(spectral_density(residuals, 5, lambdas), lambdas)
		assert area == pytest.approx(autocov(residuals, 0), rel=1e-6)

	def test_even_in_frequency(self):
		residuals = self.create_gaussian_series(100, seed=12)
		assert spectral_density(residuals, 4, 0.7) == pytest.approx(spectral_density(residuals, 4, -0.7))

	def test_frequency_out_of_range(self):
		with pytest.raises(ValidationError):
			spectral_density(np.ones(20), 2, 4.0)

	def test_grid(self):
		lambdas, density = spectral_grid(self.create_gaussian_series(100), 3, points=65)
		assert lambdas.shape == density.shape == (65,)
		assert lambdas[0] == -math.pi

	def test_single_spike_is_flat(self):
		spike = np.zeros(10)
		spike[0] = 1.0
		lambdas = np.linspace(-math.pi, math.pi, 33)
		self.assert_close(spectral_density(spike, 2, lambdas), np.full(33, 1 / (20 * math.pi)), rel=1e-12)
		assert lrv(spike, LrvMethod.KERNEL_F0, 2).value == pytest.approx(0.1, rel=1e-12)


class TestLongRunVariance(TestBase):
	def test_kernel_estimate_of_nonmixing_ar1(self):
		n = 100_000
		estimates = [lrv(simulate_ar1_nonmixing(n, seed)).value for seed in range(8)]
		assert np.mean(estimates) == pytest.approx(0.25, rel=0.15)
		for estimate in estimates:
			assert estimate == pytest.approx(0.25, rel=0.4)

	def test_kernel_estimate_scales_quadratically(self):
		series = simulate_ar1_nonmixing(100_000, 3)
		unit = lrv(series)
		scaled = lrv(10 * series)
		assert unit.bandwidth == 177
		assert scaled.value == pytest.approx(100 * unit.value, rel=1e-10)

	def test_kernel_equals_two_pi_density_at_zero(self):
		residuals = self.create_gaussian_series(500, seed=13)
		estimate = lrv(residuals, LrvMethod.KERNEL_F0, 6)
		assert estimate.value == pytest.approx(2 * math.pi * spectral_density(residuals, 6, 0.0), rel=1e-12)

	def test_truncated_conventions(self):
		residuals = self.create_gaussian_series(200, seed=14)
		gamma = acf_values(residuals, 3)
		symmetrized = lrv(residuals, LrvMethod.TRUNCATED, 3)
		one_sided = lrv(residuals, LrvMethod.TRUNCATED, 3, symmetrized=False)
		assert symmetrized.value == pytest.approx(gamma[0] + 2 * gamma[1:].sum())
		assert one_sided.value == pytest.approx(gamma[0] + gamma[1:].sum())
		assert one_sided.symmetrized is False

	def test_truncation_zero_is_variance(self):
		residuals = self.create_gaussian_series(50, seed=15)
		assert lrv(residuals, LrvMethod.TRUNCATED, 0).value == pytest.approx(autocov(residuals, 0))

	def test_nonpositive_estimate_is_flagged(self):
		alternating = (-1.0) ** np.arange(20)
		estimate = lrv(alternating, LrvMethod.KERNEL_F0, 1)
		assert estimate.nonpositive
		assert estimate.to_dict()["nonpositive"]

	def test_batched_lrv_from_acf(self):
		batch = np.random.default_rng(16).standard_normal((5, 100))
		gamma = acf_values(batch, 8)
		values = lrv_from_acf(gamma, LrvMethod.KERNEL_F0, 4)
		for r in range(5):
			assert values[r] == pytest.approx(lrv(batch[r], LrvMethod.KERNEL_F0, 4).value)
