import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special, stats

from depreg import config
from depreg.exceptions import DegenerateFitError, NonPositiveLrvError, NotPositiveDefiniteError
from depreg.regression.enums import LrvMethod, Reference, StatisticMethod
from depreg.regression.spectral import LrvEstimate
from depreg.regression.validations import as_vector, throw

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TestResult:
	__test__ = False

	statistic: float
	numerator_dof: int
	method: StatisticMethod
	p_value: float
	reference: Reference
	denominator_dof: int | None = None
	lrv: LrvEstimate | None = None

	def rejects(self, alpha=config.DEFAULT_ALPHA):
		return self.p_value < alpha

	def to_dict(self):
		return {
			"statistic": self.statistic,
			"numerator_dof": self.numerator_dof,
			"denominator_dof": self.denominator_dof,
			"method": self.method.value,
			"reference": self.reference.value,
			"p_value": self.p_value,
			"lrv": self.lrv.to_dict() if self.lrv else None,
		}


def chi2_sf(x, k):
	"""
	Upper tail of the chi-square law with k degrees of freedom, Q(k/2, x/2).
	"""
	if int(k) != k or k < 1:
		throw(f"Degrees of freedom must be a positive integer, got {k}")
	x = np.asarray(x, dtype=float)
	if np.any(x < 0):
		throw("Chi-square argument must be non-negative")
	tail = special.gammaincc(k / 2, x / 2)
	return float(tail) if tail.ndim == 0 else tail


def chi2_over_dof_pvalue(statistic, dof):
	"""
	P(chi2(dof) / dof >= statistic)
	"""
	return chi2_sf(np.multiply(dof, statistic), dof)


def nested_difference(rss0, rss):
	"""
	RSS_0 - RSS, with round-off violations down to -NESTING_SLACK * RSS_0 clamped to 0.
	"""
	rss0 = np.asarray(rss0, dtype=float)
	rss = np.asarray(rss, dtype=float)
	difference = rss0 - rss
	if np.any(difference < -config.NESTING_SLACK * rss0):
		throw(f"RSS_0 ({rss0}) is smaller than RSS ({rss}); the models are not nested")
	difference = np.maximum(difference, 0.0)
	return float(difference) if difference.ndim == 0 else difference


def _check_dimensions(p, p0, n=None):
	if not (int(p) == p and int(p0) == p0):
		throw(f"Model dimensions must be integers, got p={p}, p0={p0}")
	if not p > p0 >= 0:
		throw(f"Model dimensions must satisfy p > p0 >= 0, got p={p}, p0={p0}")
	if n is not None and not n > p:
		throw(f"Sample size n={n} must exceed the model dimension p={p}")
	return int(p) - int(p0)


def fisher_classic(rss0, rss, n, p, p0, reference=Reference.CHI2_OVER_DOF, total=None):
	"""
	F = (RSS_0 - RSS) / ((p - p0) RSS / (n - p)).

	The fit counts as noiseless when RSS <= DEGENERATE_RSS_RATIO * total, where `total` is a
	reference sum of squares (||Y||^2 when known, RSS_0 otherwise).

	The p-value comes from chi2(p - p0) / (p - p0) by default, or from the exact
	Fisher(p - p0, n - p) law for i.i.d. Gaussian errors.
	"""
	dof = _check_dimensions(p, p0, n)
	reference = Reference(reference)
	if rss < 0:
		throw(f"RSS must be non-negative, got {rss}")
	total = rss0 if total is None else total
	if rss == 0 or rss <= config.DEGENERATE_RSS_RATIO * total:
		throw(
			f"RSS is {rss:.3g}: the fit is noiseless and the variance cannot be estimated",
			exc=DegenerateFitError,
		)

	statistic = nested_difference(rss0, rss) / (dof * rss / (n - p))

	match reference:
		case Reference.CHI2_OVER_DOF:
			p_value = chi2_over_dof_pvalue(statistic, dof)
		case Reference.FISHER:
			p_value = float(stats.f.sf(statistic, dof, n - p))

	return TestResult(
		statistic=statistic,
		numerator_dof=dof,
		denominator_dof=int(n - p),
		method=StatisticMethod.CLASSIC_F,
		p_value=p_value,
		reference=reference,
	)


def fisher_corrected(rss0, rss, lrv, p, p0):
	"""
	(RSS_0 - RSS) / ((p - p0) * lrv.value), referred to chi2(p - p0) / (p - p0).

	With a kernel estimate this is the 2pi f*_n(0) correction; with a truncated one it is
	the finite-lag correction.
	"""
	dof = _check_dimensions(p, p0)
	if lrv.nonpositive:
		throw(
			f"Long-run variance estimate {lrv.value:.6g} is not positive; "
			f"choose a different bandwidth than {lrv.bandwidth}",
			exc=NonPositiveLrvError,
		)

	statistic = nested_difference(rss0, rss) / (dof * lrv.value)
	method = (
		StatisticMethod.CORRECTED_KERNEL
		if lrv.method is LrvMethod.KERNEL_F0
		else StatisticMethod.CORRECTED_TRUNCATED
	)
	return TestResult(
		statistic=statistic,
		numerator_dof=dof,
		method=method,
		p_value=chi2_over_dof_pvalue(statistic, dof),
		reference=Reference.CHI2_OVER_DOF,
		lrv=lrv,
	)


def symmetric_sqrt(matrix):
	"""
	Symmetric square root through eigh, eigenvalues floored at EIGEN_FLOOR * largest.
	Raises NotPositiveDefiniteError when the smallest eigenvalue fails the PD_RATIO test.
	"""
	matrix = np.asarray(matrix, dtype=float)
	if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
		throw(f"Expected a square matrix, got shape {matrix.shape}")
	if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
		throw("R(0) must be symmetric", exc=NotPositiveDefiniteError)

	eigenvalues, vectors = linalg.eigh((matrix + matrix.T) / 2)
	largest = eigenvalues[-1]
	if not (largest > 0 and eigenvalues[0] > config.PD_RATIO * largest):
		throw(f"R(0) is not positive definite (eigenvalues {eigenvalues})", exc=NotPositiveDefiniteError)

	roots = np.sqrt(np.maximum(eigenvalues, config.EIGEN_FLOOR * largest))
	return (vectors * roots) @ vectors.T


def studentize(fit, r0, lrv, beta0):
	"""
	R(0)^{1/2} D(n) (beta_hat - beta0) / sqrt(lrv), asymptotically N(0, I_p) under the model.
	"""
	beta0 = as_vector(beta0, "beta0")
	if beta0.shape != fit.beta_hat.shape:
		throw(f"beta0 has {beta0.shape[0]} entries but the fit has {fit.p} coefficients")
	if lrv.nonpositive:
		throw(f"Long-run variance estimate {lrv.value:.6g} is not positive", exc=NonPositiveLrvError)

	root = symmetric_sqrt(r0)
	if root.shape[0] != fit.p:
		throw(f"R(0) is {root.shape[0]}x{root.shape[0]} but the fit has {fit.p} coefficients")

	return root @ (fit.col_norms * (fit.beta_hat - beta0)) / math.sqrt(lrv.value)
