"""
Fixed designs and the regularity conditions on them.

For a design X (n x p) the column norms d_j(n) = ||X_{.,j}||_2 form the diagonal of D(n),
and the normalised lag-k cross products

	rho_hat(k)[j, l] = sum_{m=1..n-k} x_{m,j} x_{m+k,l} / (d_j(n) d_l(n))

approximate the limits rho_{j,l}(k). A design is regular when those limits do not depend
on k; the asymptotic covariance of D(n)(beta_hat - beta) then reduces to
(sum_k gamma(k)) R(0)^{-1} with R(0) = rho(0).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from depreg import config
from depreg.regression.validations import check_lag, throw

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignMatrix:
	values: np.ndarray
	names: tuple = ()

	def __post_init__(self):
		values = np.array(self.values, dtype=float)
		if values.ndim == 1:
			values = values[:, np.newaxis]
		if values.ndim != 2:
			throw(f"Design must be two-dimensional, got shape {values.shape}")

		n, p = values.shape
		if p < 1 or n < p:
			throw(f"Design must satisfy n >= p >= 1, got n={n}, p={p}")
		if not np.all(np.isfinite(values)):
			throw("Design contains non-finite entries")

		names = tuple(self.names) or tuple(f"x{j + 1}" for j in range(p))
		if len(names) != p:
			throw(f"Design has {p} columns but {len(names)} names")

		zero = np.flatnonzero(~values.any(axis=0))
		if zero.size:
			j = int(zero[0])
			throw(f"Design column {j + 1} ({names[j]}) is identically zero, so d_{j + 1}(n) = 0")

		values.setflags(write=False)
		object.__setattr__(self, "values", values)
		object.__setattr__(self, "names", names)

	@property
	def n(self):
		return self.values.shape[0]

	@property
	def p(self):
		return self.values.shape[1]

	def select(self, columns):
		columns = list(columns)
		return DesignMatrix(self.values[:, columns], tuple(self.names[j] for j in columns))


def as_design(X):
	if isinstance(X, DesignMatrix):
		return X
	return DesignMatrix(X)


@dataclass(frozen=True)
class DesignDiagnostics:
	col_norms: np.ndarray
	lindeberg: np.ndarray
	rho_hat: dict = field(default_factory=dict)

	@property
	def r0_hat(self):
		return self.rho_hat[0]


@dataclass(frozen=True)
class RegularityReport:
	tol: float
	lags: tuple
	deviations: dict
	entry_flags: dict
	regular: bool
	lindeberg: np.ndarray
	eigenvalues: np.ndarray
	positive_definite: bool

	@property
	def min_eigenvalue(self):
		return float(self.eigenvalues[0])

	def to_dict(self):
		return {
			"tol": self.tol,
			"lags": list(self.lags),
			"deviations": {str(k): v for k, v in self.deviations.items()},
			"entry_flags": {str(k): flags.tolist() for k, flags in self.entry_flags.items()},
			"regular": self.regular,
			"lindeberg": self.lindeberg.tolist(),
			"min_eigenvalue": self.min_eigenvalue,
			"eigenvalues": self.eigenvalues.tolist(),
			"positive_definite": self.positive_definite,
		}


@dataclass(frozen=True)
class ClosedFormR0:
	matrix: np.ndarray
	eigenvalues: np.ndarray
	positive_definite: bool


def column_norms(X):
	"""
	d_j(n) = sqrt(sum_i x_{i,j}^2) for every column.
	"""
	X = as_design(X)
	return np.linalg.norm(X.values, axis=0)


def lindeberg_ratios(X):
	"""
	max_i |x_{i,j}| / d_j(n); values near 1 mean one row dominates the column.
	"""
	X = as_design(X)
	return np.max(np.abs(X.values), axis=0) / column_norms(X)


def empirical_rho(X, k):
	X = as_design(X)
	if k < 0:
		throw(f"Lag must be non-negative, got {k}")
	k = check_lag(k, X.n)

	d = column_norms(X)
	cross = X.values[: X.n - k].T @ X.values[k:]
	return cross / np.outer(d, d)


def symmetric_eigenvalues(matrix, ratio=config.PD_RATIO):
	"""
	Ascending eigenvalues of a symmetric matrix and whether the smallest one clears
	`ratio` times the largest.
	"""
	matrix = np.asarray(matrix, dtype=float)
	eigenvalues = linalg.eigh((matrix + matrix.T) / 2, eigvals_only=True)
	largest = eigenvalues[-1]
	return eigenvalues, bool(largest > 0 and eigenvalues[0] > ratio * largest)


def diagnostics(X, lags=(0,)):
	X = as_design(X)
	lags = sorted({0, *(check_lag(k, X.n) for k in lags)})
	return DesignDiagnostics(
		col_norms=column_norms(X),
		lindeberg=lindeberg_ratios(X),
		rho_hat={k: empirical_rho(X, k) for k in lags},
	)


def regularity_report(X, lags=range(6), tol=config.REGULARITY_TOL):
	"""
	Finite-n regularity check: how far rho_hat(k) drifts from rho_hat(0) on each lag,
	along with the Lindeberg ratios and the spectrum of rho_hat(0).
	"""
	X = as_design(X)
	diag = diagnostics(X, lags)
	r0 = diag.r0_hat

	deviations = {}
	entry_flags = {}
	for k, rho in diag.rho_hat.items():
		gap = np.abs(rho - r0)
		deviations[k] = float(gap.max())
		entry_flags[k] = gap <= tol

	eigenvalues, positive_definite = symmetric_eigenvalues(r0)
	if not positive_definite:
		logger.warning("rho_hat(0) is not positive definite (eigenvalues %s)", eigenvalues)

	return RegularityReport(
		tol=float(tol),
		lags=tuple(diag.rho_hat),
		deviations=deviations,
		entry_flags=entry_flags,
		regular=all(flags.all() for flags in entry_flags.values()),
		lindeberg=diag.lindeberg,
		eigenvalues=eigenvalues,
		positive_definite=positive_definite,
	)


def rho_regularly_varying(alpha_j, alpha_l):
	"""
	Limit of rho_{j,l}(k) for columns i^alpha_j and i^alpha_l, identical for every lag k.
	"""
	for alpha in (alpha_j, alpha_l):
		if not alpha > -0.5:
			throw(f"Exponent {alpha} must exceed -1/2 for the column norm to diverge")
	if alpha_j == alpha_l:
		return 1.0
	return float(np.sqrt(2 * alpha_j + 1) * np.sqrt(2 * alpha_l + 1) / (alpha_j + alpha_l + 1))


def r0_from_alphas(alphas):
	alphas = [float(a) for a in alphas]
	if not alphas:
		throw("At least one exponent is required")

	p = len(alphas)
	matrix = np.empty((p, p))
	for j in range(p):
		for l in range(j, p):
			matrix[j, l] = matrix[l, j] = 1.0 if j == l else rho_regularly_varying(alphas[j], alphas[l])

	eigenvalues, positive_definite = symmetric_eigenvalues(matrix)
	if not positive_definite:
		logger.warning("Closed-form R(0) for exponents %s is singular", alphas)
	return ClosedFormR0(matrix=matrix, eigenvalues=eigenvalues, positive_definite=positive_definite)
