class DepregError(Exception):
	"""Base class for every error raised by depreg."""


class ValidationError(DepregError, ValueError):
	"""A precondition on the inputs does not hold."""


class ConfigError(ValidationError):
	"""A configuration document or override is malformed."""


class NumericalError(DepregError, ArithmeticError):
	"""The inputs are well formed but the computation is numerically degenerate."""


class RankDeficiencyError(NumericalError):
	pass


class DegenerateFitError(NumericalError):
	"""Residual sum of squares is zero, so no variance can be estimated."""


class NonPositiveLrvError(NumericalError):
	"""The long-run variance estimate is zero or negative."""


class NotPositiveDefiniteError(NumericalError):
	pass
