from enum import Enum


class AcfSource(Enum):
	RAW_SERIES = "raw_series"
	RESIDUALS = "residuals"


class LrvMethod(Enum):
	KERNEL_F0 = "kernel_f0"
	TRUNCATED = "truncated"


class StatisticMethod(Enum):
	CLASSIC_F = "classic_F"
	CORRECTED_KERNEL = "corrected_kernel"
	CORRECTED_TRUNCATED = "corrected_truncated"


class Reference(Enum):
	CHI2_OVER_DOF = "chi2_over_dof"
	FISHER = "fisher"
