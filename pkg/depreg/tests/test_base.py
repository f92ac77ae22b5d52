import unittest

import numpy as np

from depreg.regression.design import DesignMatrix
from depreg.simulation.montecarlo import ExperimentSpec
from depreg.simulation.processes import ProcessConfig


class TestBase(unittest.TestCase):
	@classmethod
	def setUpClass(cls):
		"""Shared designs reused by every suite"""
		super().setUpClass()
		cls.linear_design = cls.create_polynomial_design(50, degree=1)
		cls.quadratic_design = cls.create_polynomial_design(50, degree=2)

	@classmethod
	def create_polynomial_design(cls, n, degree=1):
		"""Columns 1, i, ..., i^degree for i = 1..n"""
		i = np.arange(1, n + 1, dtype=float)
		return DesignMatrix(np.column_stack([i**d for d in range(degree + 1)]))

	@classmethod
	def create_random_design(cls, n, p, seed=0):
		"""Intercept plus p - 1 standard normal columns"""
		rng = np.random.default_rng(seed)
		return DesignMatrix(np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))]))

	@classmethod
	def create_gaussian_series(cls, n, seed=0, scale=1.0):
		return scale * np.random.default_rng(seed).standard_normal(n)

	@classmethod
	def create_experiment(cls, **fields):
		"""Small AR(1) experiment on (1, i) testing the slope; fields override the defaults"""
		defaults = {
			"name": "unit",
			"n_values": (100, 200),
			"replications": 200,
			"a_n": 3,
			"master_seed": 7,
			"process": ProcessConfig(scale=10.0),
		}
		defaults.update(fields)
		return ExperimentSpec(**defaults)

	def assert_close(self, actual, expected, rel=1e-10, abs_tol=0.0):
		np.testing.assert_allclose(actual, expected, rtol=rel, atol=abs_tol)
