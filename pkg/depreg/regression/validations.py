import numpy as np

from depreg.exceptions import ValidationError


def throw(message, exc=ValidationError):
	"""
	Raise `exc` with `message`; every user-facing check goes through here
	"""
	raise exc(message)


def as_vector(values, name="vector"):
	array = np.asarray(values, dtype=float)
	if array.ndim != 1:
		throw(f"{name} must be one-dimensional, got shape {array.shape}")
	if not np.all(np.isfinite(array)):
		throw(f"{name} contains non-finite entries")
	return array


def as_series(values, name="series"):
	"""
	Accept a single series (n,) or a stack of series (reps, n); time runs along the last axis.
	"""
	array = np.asarray(values, dtype=float)
	if array.ndim not in (1, 2):
		throw(f"{name} must be one- or two-dimensional, got shape {array.shape}")
	if array.shape[-1] == 0:
		throw(f"{name} is empty")
	if not np.all(np.isfinite(array)):
		throw(f"{name} contains non-finite entries")
	return array


def check_lag(k, n, upper=None):
	upper = n - 1 if upper is None else upper
	if int(k) != k:
		throw(f"Lag must be an integer, got {k}")
	if abs(k) > upper:
		throw(f"Lag {k} is out of range for a sample of size {n} (|k| <= {upper})")
	return abs(int(k))


def check_response(Y, n):
	y = as_vector(Y, "Y")
	if y.shape[0] != n:
		throw(f"Y has {y.shape[0]} entries but the design has {n} rows")
	return y


def check_probability(value, name):
	if not 0 < value < 1:
		throw(f"{name} must lie in (0, 1), got {value}")
	return float(value)
