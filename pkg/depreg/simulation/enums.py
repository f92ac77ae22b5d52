from enum import Enum


class ProcessKind(Enum):
	AR1_NONMIXING = "ar1_nonmixing"
	INTERMITTENT = "intermittent"
	LINEAR_PROCESS = "linear_process"
	IID_GAUSSIAN = "iid_gaussian"


class Innovation(Enum):
	GAUSSIAN = "gaussian"
	RADEMACHER = "rademacher"
	UNIFORM = "uniform"


class PostMap(Enum):
	IDENTITY = "identity"
	ABS = "abs"
	SQUARED = "squared"


class DesignKind(Enum):
	INTERCEPT_LINEAR = "intercept_linear"
	INTERCEPT_QUADRATIC = "intercept_quadratic"
	INTERCEPT_SQRT_LOG = "intercept_sqrt_log"
