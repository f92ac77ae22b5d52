"""
Residual autocovariances, the lag-window spectral density estimator and long-run variance.

Autocovariances use the divisor n at every lag and no mean-centering:

	gamma*_k = (1/n) sum_{j=1..n-|k|} e_j e_{j+|k|}

The spectral estimator weights them with the flat-top trapezoidal kernel K at lag k / c_n:

	f*_n(lambda) = (1/2pi) [gamma*_0 + 2 sum_{k>=1} K(k/c_n) gamma*_k cos(k lambda)]

so that 2pi f*_n(0) estimates the long-run variance sum_{k in Z} gamma(k).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft

from depreg import config
from depreg.regression.enums import AcfSource, LrvMethod
from depreg.regression.validations import as_series, as_vector, check_lag, throw

logger = logging.getLogger(__name__)

# Above this many lags the FFT route is cheaper than one dot product per lag
DIRECT_LAG_LIMIT = 64


@dataclass(frozen=True)
class AcfEstimate:
	values: np.ndarray
	n: int
	source: AcfSource = AcfSource.RESIDUALS

	@property
	def max_lag(self):
		return self.values.shape[-1] - 1

	def ratios(self):
		"""
		gamma*_k / gamma*_0, NaN when gamma*_0 is zero
		"""
		gamma0 = self.values[0]
		if gamma0 == 0:
			return np.full_like(self.values, np.nan)
		return self.values / gamma0


@dataclass(frozen=True)
class LrvEstimate:
	value: float
	method: LrvMethod
	bandwidth: int
	n: int
	symmetrized: bool | None = None

	@property
	def nonpositive(self):
		return not self.value > 0

	def to_dict(self):
		return {
			"value": self.value,
			"method": self.method.value,
			"bandwidth": self.bandwidth,
			"symmetrized": self.symmetrized,
			"n": self.n,
			"nonpositive": self.nonpositive,
		}


def kernel_K(x):
	"""
	1 on |x| <= 1, 2 - |x| on 1 <= |x| <= 2, 0 beyond.
	"""
	weights = np.clip(2.0 - np.abs(np.asarray(x, dtype=float)), 0.0, 1.0)
	return float(weights) if weights.ndim == 0 else weights


def autocov(series, k):
	s = as_vector(series, "series")
	n = s.shape[0]
	k = check_lag(k, n)
	return float(np.dot(s[: n - k], s[k:]) / n)


def acf_values(series, max_lag):
	"""
	gamma*_0..gamma*_max_lag along the last axis of one series or a stack of series.
	"""
	s = as_series(series)
	n = s.shape[-1]
	max_lag = check_lag(max_lag, n)

	if max_lag < DIRECT_LAG_LIMIT:
		values = np.stack([np.sum(s[..., : n - k] * s[..., k:], axis=-1) for k in range(max_lag + 1)], axis=-1)
		return values / n

	size = fft.next_fast_len(2 * n - 1, real=True)
	spectrum = fft.rfft(s, size, axis=-1)
	circular = fft.irfft(spectrum * np.conj(spectrum), size, axis=-1)
	return circular[..., : max_lag + 1] / n


def autocovariances(series, max_lag=None, source=AcfSource.RESIDUALS):
	s = as_vector(series, "series")
	max_lag = s.shape[0] - 1 if max_lag is None else max_lag
	return AcfEstimate(values=acf_values(s, max_lag), n=s.shape[0], source=AcfSource(source))


def check_bandwidth(c_n, n):
	if int(c_n) != c_n or c_n < 1:
		throw(f"Bandwidth c_n must be a positive integer, got {c_n}")
	if 2 * c_n > n - 1:
		throw(f"Bandwidth c_n={c_n} is too large for n={n}: 2 c_n must not exceed n - 1")
	return int(c_n)


def kernel_weights(c_n):
	"""
	Weights K(k/c_n) for k = 0..2c_n.
	"""
	return kernel_K(np.arange(2 * c_n + 1) / c_n)


def spectral_density(residuals, c_n, lam):
	e = as_vector(residuals, "residuals")
	c_n = check_bandwidth(c_n, e.shape[0])

	lam = np.asarray(lam, dtype=float)
	if np.any(np.abs(lam) > math.pi):
		throw("Frequencies must lie in [-pi, pi]")

	gamma = acf_values(e, 2 * c_n)
	weights = kernel_weights(c_n)
	k = np.arange(1, 2 * c_n + 1)

	cosines = np.cos(np.multiply.outer(lam, k))
	density = (gamma[0] + 2 * cosines @ (weights[1:] * gamma[1:])) / (2 * math.pi)
	return float(density) if density.ndim == 0 else density


def spectral_grid(residuals, c_n, points=513):
	"""
	f*_n over an evenly spaced grid of [-pi, pi], for plotting.
	Returns: (lambdas, densities)
	"""
	if points < 2:
		throw(f"A grid needs at least two points, got {points}")
	lambdas = np.linspace(-math.pi, math.pi, int(points))
	return lambdas, spectral_density(residuals, c_n, lambdas)


def default_bandwidth(n, delta=config.DEFAULT_DELTA):
	"""
	c_n = floor(n^{0.9 delta / (delta + 2)}), at least 1 and at most (n - 1) / 2.

	With a moment of order 2 + delta this keeps c_n^{1 + delta/2} / n^{delta/2} -> 0,
	e.g. c_n = floor(n^0.45) under four moments.
	"""
	if n < 4:
		throw(f"Sample size must be at least 4 to pick a bandwidth, got {n}")
	if not 0 < delta <= 2:
		throw(f"Moment margin delta must lie in (0, 2], got {delta}")

	exponent = config.BANDWIDTH_EXPONENT_FACTOR * delta / (delta + 2)
	c_n = math.floor(n**exponent)
	return max(1, min(c_n, (n - 1) // 2))


def lrv_from_acf(gamma, method, bandwidth, symmetrized=True):
	"""
	Long-run variance from autocovariances gamma*_0..gamma*_K on the last axis.

	KERNEL_F0 needs K >= 2 bandwidth, TRUNCATED needs K >= bandwidth.
	"""
	gamma = np.asarray(gamma, dtype=float)
	method = LrvMethod(method)

	match method:
		case LrvMethod.KERNEL_F0:
			weights = kernel_weights(bandwidth)
			return gamma[..., 0] + 2 * gamma[..., 1 : 2 * bandwidth + 1] @ weights[1:]
		case LrvMethod.TRUNCATED:
			factor = 2.0 if symmetrized else 1.0
			return gamma[..., 0] + factor * np.sum(gamma[..., 1 : bandwidth + 1], axis=-1)


def resolve_bandwidth(method, n, bandwidth=None, delta=config.DEFAULT_DELTA):
	method = LrvMethod(method)
	match method:
		case LrvMethod.KERNEL_F0:
			c_n = default_bandwidth(n, delta) if bandwidth is None else bandwidth
			return check_bandwidth(c_n, n)
		case LrvMethod.TRUNCATED:
			a_n = 0 if bandwidth is None else bandwidth
			if int(a_n) != a_n or a_n < 0:
				throw(f"Truncation lag a_n must be a non-negative integer, got {a_n}")
			return check_lag(a_n, n)


def required_lags(method, bandwidth):
	return 2 * bandwidth if LrvMethod(method) is LrvMethod.KERNEL_F0 else bandwidth


def lrv(residuals, method=LrvMethod.KERNEL_F0, bandwidth=None, symmetrized=True, delta=config.DEFAULT_DELTA):
	"""
	Estimate sum_{k in Z} gamma(k) from residuals.

	KERNEL_F0 returns 2pi f*_n(0) with bandwidth c_n (default_bandwidth when omitted).
	TRUNCATED returns gamma*_0 + 2 sum_{k=1..a_n} gamma*_k, or the one-sided
	gamma*_0 + sum_{k=1..a_n} gamma*_k when `symmetrized` is False.
	A zero or negative value is returned flagged `nonpositive`, not raised.
	"""
	e = as_vector(residuals, "residuals")
	n = e.shape[0]
	method = LrvMethod(method)
	bandwidth = resolve_bandwidth(method, n, bandwidth, delta)

	gamma = acf_values(e, required_lags(method, bandwidth))
	estimate = LrvEstimate(
		value=float(lrv_from_acf(gamma, method, bandwidth, symmetrized)),
		method=method,
		bandwidth=bandwidth,
		n=n,
		symmetrized=symmetrized if method is LrvMethod.TRUNCATED else None,
	)
	if estimate.nonpositive:
		logger.warning(
			"Long-run variance estimate %.6g is not positive (%s, bandwidth %d)",
			estimate.value,
			method.value,
			bandwidth,
		)
	return estimate
