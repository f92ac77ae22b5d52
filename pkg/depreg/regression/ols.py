import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from depreg import config
from depreg.exceptions import RankDeficiencyError
from depreg.regression.design import as_design, column_norms
from depreg.regression.validations import as_series, check_response, throw

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitResult:
	beta_hat: np.ndarray
	residuals: np.ndarray
	rss: float
	col_norms: np.ndarray

	@property
	def n(self):
		return self.residuals.shape[0]

	@property
	def p(self):
		return self.beta_hat.shape[0]

	def to_dict(self):
		return {
			"n": self.n,
			"p": self.p,
			"beta_hat": self.beta_hat.tolist(),
			"rss": self.rss,
			"col_norms": self.col_norms.tolist(),
			"residuals": self.residuals.tolist(),
		}


class NestedRss(NamedTuple):
	rss_full: float
	rss_null: float


class LeastSquaresProjector:
	"""
	QR factorisation of a design, computed once and applied to any number of responses.

	Columns are divided by d_j(n) before factorising, so the rank check compares the
	pivoted diagonal of R on a scale-free design: column j is declared dependent when
	|R_jj| <= RANK_THRESHOLD * |R_00|.
	"""

	def __init__(self, X, threshold=config.RANK_THRESHOLD):
		self.design = as_design(X)
		self.col_norms = column_norms(self.design)

		scaled = self.design.values / self.col_norms
		q, r, pivot = linalg.qr(scaled, mode="economic", pivoting=True)

		magnitude = np.abs(np.diag(r))
		dependent = pivot[magnitude <= threshold * magnitude[0]]
		if dependent.size:
			names = ", ".join(f"{j + 1} ({self.design.names[j]})" for j in sorted(dependent))
			throw(
				f"Design is rank deficient: column(s) {names} are linear combinations of the others",
				exc=RankDeficiencyError,
			)

		self._q = q
		self._r = r
		self._pivot = pivot

	@property
	def n(self):
		return self.design.n

	@property
	def p(self):
		return self.design.p

	def _check(self, Y):
		Y = as_series(Y, "Y")
		if Y.shape[-1] != self.n:
			throw(f"Y has {Y.shape[-1]} observations but the design has {self.n} rows")
		return Y

	def coefficients(self, Y):
		Y = self._check(Y)
		z = linalg.solve_triangular(self._r, (np.atleast_2d(Y) @ self._q).T)
		scaled = np.empty_like(z)
		scaled[self._pivot] = z
		beta = (scaled / self.col_norms[:, np.newaxis]).T
		return beta[0] if Y.ndim == 1 else beta

	def fitted(self, Y):
		Y = self._check(Y)
		return (Y @ self._q) @ self._q.T

	def residuals(self, Y):
		Y = self._check(Y)
		return Y - self.fitted(Y)

	def rss(self, Y):
		return np.sum(self.residuals(Y) ** 2, axis=-1)


def fit(X, Y):
	"""
	Ordinary least squares.
	Returns: FitResult with beta_hat, residuals Y - X beta_hat and their sum of squares
	"""
	projector = LeastSquaresProjector(X)
	y = check_response(Y, projector.n)

	beta_hat = projector.coefficients(y)
	residuals = y - projector.design.values @ beta_hat

	return FitResult(
		beta_hat=beta_hat,
		residuals=residuals,
		rss=float(np.sum(residuals**2)),
		col_norms=projector.col_norms.copy(),
	)


def kept_columns(p, null_cols, allow_zero_model=False):
	"""
	Columns of the null model: every column not in the tested set `null_cols` (0-based).
	"""
	tested = [int(j) for j in null_cols]
	if not tested:
		throw("The tested set of columns is empty")
	if len(set(tested)) != len(tested):
		throw(f"Tested columns contain duplicates: {tested}")
	outside = [j for j in tested if not 0 <= j < p]
	if outside:
		throw(f"Tested columns {outside} are outside 0..{p - 1}")

	kept = [j for j in range(p) if j not in tested]
	if not kept and not allow_zero_model:
		throw("Every column is tested, so the null model is empty; opt into the zero model explicitly")
	return kept


def nested_rss(X, null_cols, Y, allow_zero_model=False):
	X = as_design(X)
	y = check_response(Y, X.n)
	kept = kept_columns(X.p, null_cols, allow_zero_model)

	rss_full = fit(X, y).rss
	if kept:
		rss_null = fit(X.select(kept), y).rss
	else:
		logger.warning("Null model is empty, RSS_0 = ||Y||^2")
		rss_null = float(np.sum(y**2))

	return NestedRss(rss_full=rss_full, rss_null=rss_null)
