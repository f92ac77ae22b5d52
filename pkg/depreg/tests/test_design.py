import math

import numpy as np
import pytest

from depreg.exceptions import ValidationError
from depreg.regression.design import (
	DesignMatrix,
	column_norms,
	diagnostics,
	empirical_rho,
	lindeberg_ratios,
	r0_from_alphas,
	regularity_report,
	rho_regularly_varying,
)
from depreg.tests.test_base import TestBase


class TestDesignMatrix(TestBase):
	def test_vector_becomes_single_column(self):
		X = DesignMatrix(np.arange(1.0, 6.0))
		assert X.n == 5
		assert X.p == 1
		assert X.names == ("x1",)

	def test_zero_column_is_named(self):
		values = np.column_stack([np.ones(10), np.zeros(10)])
		with pytest.raises(ValidationError, match="column 2 \\(slope\\)"):
			DesignMatrix(values, ("intercept", "slope"))

	def test_more_columns_than_rows(self):
		with pytest.raises(ValidationError):
			DesignMatrix(np.ones((2, 3)))

	def test_non_finite_entries(self):
		values = np.ones((5, 1))
		values[2, 0] = np.nan
		with pytest.raises(ValidationError):
			DesignMatrix(values)

	def test_values_are_read_only(self):
		with pytest.raises(ValueError):
			self.linear_design.values[0, 0] = 2.0

	def test_select_keeps_names(self):
		X = DesignMatrix(np.column_stack([np.ones(4), np.arange(4.0) + 1]), ("1", "i"))
		assert X.select([1]).names == ("i",)
		assert X.select([1]).p == 1


class TestColumnStatistics(TestBase):
	def test_column_norms(self):
		n = 50
		expected = [math.sqrt(n), math.sqrt(n * (n + 1) * (2 * n + 1) / 6)]
		self.assert_close(column_norms(self.linear_design), expected)

	def test_lindeberg_ratio_of_intercept(self):
		ratios = lindeberg_ratios(self.linear_design)
		assert ratios[0] == pytest.approx(1 / math.sqrt(50))
		assert 0 < ratios[1] < 1

	def test_rho_at_lag_zero_has_unit_diagonal(self):
		rho = empirical_rho(self.quadratic_design, 0)
		self.assert_close(np.diag(rho), np.ones(3))
		self.assert_close(rho, rho.T)

	def test_rho_converges_for_intercept_and_trend(self):
		X = self.create_polynomial_design(100_000, degree=1)
		limit = np.array([[1.0, math.sqrt(3) / 2], [math.sqrt(3) / 2, 1.0]])
		for k in range(6):
			assert np.max(np.abs(empirical_rho(X, k) - limit)) < 1e-2

	def test_negative_lag_is_rejected(self):
		with pytest.raises(ValidationError):
			empirical_rho(self.linear_design, -1)

	def test_lag_beyond_sample_is_rejected(self):
		with pytest.raises(ValidationError):
			empirical_rho(self.linear_design, 50)

	def test_diagnostics_always_include_lag_zero(self):
		diag = diagnostics(self.linear_design, lags=[2, 1])
		assert sorted(diag.rho_hat) == [0, 1, 2]
		self.assert_close(diag.r0_hat, empirical_rho(self.linear_design, 0))


class TestRegularity(TestBase):
	def test_polynomial_design_is_regular(self):
		report = regularity_report(self.create_polynomial_design(2000, degree=1))
		assert report.regular
		assert report.positive_definite
		assert report.lags == (0, 1, 2, 3, 4, 5)
		assert max(report.deviations.values()) < 0.01

	def test_alternating_column_is_not_regular(self):
		n = 2000
		alternating = (-1.0) ** np.arange(n)
		X = DesignMatrix(np.column_stack([np.ones(n), alternating]))
		report = regularity_report(X, lags=[0, 1])
		assert not report.regular
		assert report.deviations[1] == pytest.approx(2.0, abs=1e-2)
		assert not report.entry_flags[1][1, 1]

	def test_report_serialises(self):
		doc = regularity_report(self.linear_design, lags=[0, 1]).to_dict()
		assert doc["lags"] == [0, 1]
		assert set(doc["deviations"]) == {"0", "1"}
		assert doc["min_eigenvalue"] == doc["eigenvalues"][0]


class TestClosedFormRho(TestBase):
	def test_intercept_and_trend(self):
		assert rho_regularly_varying(0, 1) == pytest.approx(math.sqrt(3) / 2, rel=1e-15)

	def test_equal_exponents_give_one(self):
		assert rho_regularly_varying(0.3, 0.3) == 1.0

	def test_exponent_must_exceed_minus_half(self):
		with pytest.raises(ValidationError):
			rho_regularly_varying(-0.5, 1)

	def test_r0_from_alphas(self):
		r0 = r0_from_alphas([0, 1])
		assert r0.positive_definite
		self.assert_close(r0.eigenvalues, [1 - math.sqrt(3) / 2, 1 + math.sqrt(3) / 2])

	def test_repeated_exponent_is_singular(self):
		r0 = r0_from_alphas([0, 0])
		assert not r0.positive_definite

	def test_closed_form_matches_empirical_rho(self):
		n = 100_000
		i = np.arange(1, n + 1, dtype=float)
		alphas = [0, 0.5, 1, 2]
		X = DesignMatrix(np.column_stack([i**alpha for alpha in alphas]))
		limit = r0_from_alphas(alphas).matrix
		for k in range(6):
			assert np.max(np.abs(empirical_rho(X, k) - limit)) < 1e-2
