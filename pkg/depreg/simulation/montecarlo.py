"""
Monte Carlo estimation of the level and power of the Fisher tests.

For every sample size n an experiment builds the design, then for each replication r
simulates errors with the generator seeded by SeedSequence(master_seed, spawn_key=(n, r)),
forms Y = X beta + scale * eps, fits the full and null models and applies the configured
test. Replications are processed in chunks (optionally on several threads); since each
one owns its seed, the table does not depend on chunking or scheduling.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from depreg import __version__, config
from depreg.exceptions import ConfigError
from depreg.regression.design import DesignMatrix
from depreg.regression.enums import AcfSource, LrvMethod, Reference, StatisticMethod
from depreg.regression.inference import chi2_over_dof_pvalue, nested_difference
from depreg.regression.ols import LeastSquaresProjector, fit, kept_columns
from depreg.regression.spectral import (
	acf_values,
	autocovariances,
	lrv_from_acf,
	required_lags,
	resolve_bandwidth,
)
from depreg.regression.validations import as_vector, check_lag, check_probability, throw
from depreg.simulation.enums import DesignKind
from depreg.simulation.processes import ProcessConfig, simulate_batch

logger = logging.getLogger(__name__)

DESIGN_DIMENSIONS = {
	DesignKind.INTERCEPT_LINEAR: 2,
	DesignKind.INTERCEPT_QUADRATIC: 3,
	DesignKind.INTERCEPT_SQRT_LOG: 3,
}


def build_design(kind, n):
	"""
	Columns 1, i (and i^2, or sqrt(i), log(i)) for i = 1..n.
	"""
	if n < 3:
		throw(f"Sample size must be at least 3, got {n}")
	i = np.arange(1, n + 1, dtype=float)
	ones = np.ones(n)

	match DesignKind(kind):
		case DesignKind.INTERCEPT_LINEAR:
			return DesignMatrix(np.column_stack([ones, i]), ("1", "i"))
		case DesignKind.INTERCEPT_QUADRATIC:
			return DesignMatrix(np.column_stack([ones, i, i**2]), ("1", "i", "i^2"))
		case DesignKind.INTERCEPT_SQRT_LOG:
			return DesignMatrix(np.column_stack([ones, np.sqrt(i), np.log(i)]), ("1", "sqrt(i)", "log(i)"))


@dataclass(frozen=True)
class ExperimentSpec:
	name: str = "experiment"
	description: str = ""
	design_kind: DesignKind = DesignKind.INTERCEPT_LINEAR
	beta: tuple = (3.0, 0.0)
	process: ProcessConfig = field(default_factory=lambda: ProcessConfig(scale=10.0))
	n_values: tuple = (200, 400, 600, 800, 1000)
	method: StatisticMethod = StatisticMethod.CORRECTED_TRUNCATED
	a_n: int = 0
	bandwidth: int | None = None
	delta: float = config.DEFAULT_DELTA
	symmetrized: bool = True
	compare_conventions: bool = False
	reference: Reference = Reference.CHI2_OVER_DOF
	null_cols: tuple = (1,)
	allow_zero_model: bool = False
	replications: int = config.DEFAULT_REPLICATIONS
	alpha: float = config.DEFAULT_ALPHA
	master_seed: int = config.DEFAULT_MASTER_SEED
	printed: dict = field(default_factory=dict)

	def __post_init__(self):
		object.__setattr__(self, "design_kind", DesignKind(self.design_kind))
		object.__setattr__(self, "method", StatisticMethod(self.method))
		object.__setattr__(self, "reference", Reference(self.reference))
		object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
		object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
		object.__setattr__(self, "null_cols", tuple(int(j) for j in self.null_cols))
		object.__setattr__(self, "printed", {int(n): float(v) for n, v in self.printed.items()})
		if isinstance(self.process, dict):
			object.__setattr__(self, "process", ProcessConfig.from_dict(self.process))

		p = DESIGN_DIMENSIONS[self.design_kind]
		if len(self.beta) != p:
			throw(f"beta has {len(self.beta)} entries but {self.design_kind.value} has {p} columns")
		if int(self.replications) != self.replications or self.replications < 1:
			throw(f"Replications must be a positive integer, got {self.replications}")
		check_probability(self.alpha, "alpha")
		if not self.n_values:
			throw("At least one sample size is required")
		if min(self.n_values) < max(3, p + 1):
			throw(f"Sample sizes must exceed the model dimension {p} (and be at least 3)")
		if int(self.a_n) != self.a_n or self.a_n < 0:
			throw(f"Truncation lag a_n must be a non-negative integer, got {self.a_n}")
		if int(self.master_seed) != self.master_seed or self.master_seed < 0:
			throw(f"Master seed must be a non-negative integer, got {self.master_seed}")
		for name in ("replications", "a_n", "master_seed"):
			object.__setattr__(self, name, int(getattr(self, name)))
		kept_columns(p, self.null_cols, self.allow_zero_model)

	@property
	def p(self):
		return DESIGN_DIMENSIONS[self.design_kind]

	@property
	def p0(self):
		return self.p - len(self.null_cols)

	@property
	def lrv_method(self):
		match self.method:
			case StatisticMethod.CORRECTED_KERNEL:
				return LrvMethod.KERNEL_F0
			case StatisticMethod.CORRECTED_TRUNCATED:
				return LrvMethod.TRUNCATED
		return None

	def lrv_bandwidth(self, n):
		match self.lrv_method:
			case LrvMethod.KERNEL_F0:
				return resolve_bandwidth(LrvMethod.KERNEL_F0, n, self.bandwidth, self.delta)
			case LrvMethod.TRUNCATED:
				return resolve_bandwidth(LrvMethod.TRUNCATED, n, self.a_n)
		return None

	def to_dict(self):
		return {
			"name": self.name,
			"description": self.description,
			"design_kind": self.design_kind.value,
			"beta": list(self.beta),
			"process": self.process.to_dict(),
			"n_values": list(self.n_values),
			"method": self.method.value,
			"a_n": self.a_n,
			"bandwidth": self.bandwidth,
			"delta": self.delta,
			"symmetrized": self.symmetrized,
			"compare_conventions": self.compare_conventions,
			"reference": self.reference.value,
			"null_cols": list(self.null_cols),
			"allow_zero_model": self.allow_zero_model,
			"replications": self.replications,
			"alpha": self.alpha,
			"master_seed": self.master_seed,
			"printed": {str(n): v for n, v in self.printed.items()},
		}

	@classmethod
	def from_dict(cls, doc):
		unknown = set(doc) - set(cls.__dataclass_fields__)
		if unknown:
			throw(f"Unknown experiment fields: {sorted(unknown)}", exc=ConfigError)
		return cls(**doc)

	@classmethod
	def template(cls):
		"""
		Document with every field at its default, used to validate dotted overrides.
		"""
		return cls().to_dict()


@dataclass(frozen=True)
class TableRow:
	n: int
	rejection_frequency: float
	mean_statistic: float
	nonpositive_lrv_count: int
	alt_rejection_frequency: float | None = None
	printed: float | None = None


@dataclass(frozen=True)
class TableResult:
	rows: tuple
	spec: ExperimentSpec

	def to_frame(self):
		frame = pd.DataFrame(
			{
				"n": [row.n for row in self.rows],
				"freq": [row.rejection_frequency for row in self.rows],
				"mean_stat": [row.mean_statistic for row in self.rows],
				"nonpos_lrv": [row.nonpositive_lrv_count for row in self.rows],
			}
		)
		if any(row.alt_rejection_frequency is not None for row in self.rows):
			frame["freq_alt"] = [row.alt_rejection_frequency for row in self.rows]
		if any(row.printed is not None for row in self.rows):
			frame["printed"] = [row.printed for row in self.rows]
		return frame

	def metadata(self):
		spec = self.spec
		meta = {"depreg": __version__, "spec": spec.to_dict()}
		if spec.lrv_method is LrvMethod.TRUNCATED:
			meta["convention"] = "symmetrized" if spec.symmetrized else "one-sided"
			if spec.compare_conventions:
				meta["freq_alt_convention"] = "one-sided" if spec.symmetrized else "symmetrized"
		return meta

	def to_csv(self, handle):
		write_csv(handle, self.to_frame(), self.metadata())


def write_csv(handle, frame, metadata):
	"""
	'#'-prefixed JSON metadata lines, then a comma-separated table at full precision.
	"""
	for key, value in metadata.items():
		handle.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
	frame.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")


def replication_seed(master_seed, n, r):
	return np.random.SeedSequence(master_seed, spawn_key=(int(n), int(r)))


def simulate_responses(spec, X, n, replications):
	seeds = [replication_seed(spec.master_seed, n, r) for r in replications]
	errors = simulate_batch(spec.process, n, seeds)
	return X.values @ np.asarray(spec.beta) + spec.process.scale * errors


@dataclass
class _Tally:
	rejections: int = 0
	alt_rejections: int = 0
	statistic_sum: float = 0.0
	valid: int = 0
	nonpositive: int = 0

	def add(self, other):
		self.rejections += other.rejections
		self.alt_rejections += other.alt_rejections
		self.statistic_sum += other.statistic_sum
		self.valid += other.valid
		self.nonpositive += other.nonpositive


def _corrected_tally(spec, n, difference, residuals, dof):
	method = spec.lrv_method
	bandwidth = spec.lrv_bandwidth(n)
	gamma = acf_values(residuals, required_lags(method, bandwidth))

	def rejections(lrv_values):
		valid = lrv_values > 0
		statistic = np.where(valid, difference / (dof * np.where(valid, lrv_values, 1.0)), 0.0)
		p_values = chi2_over_dof_pvalue(statistic, dof)
		return valid, statistic, int(np.sum(valid & (p_values < spec.alpha)))

	valid, statistic, rejected = rejections(lrv_from_acf(gamma, method, bandwidth, spec.symmetrized))
	tally = _Tally(
		rejections=rejected,
		statistic_sum=float(np.sum(statistic[valid])),
		valid=int(np.sum(valid)),
		nonpositive=int(np.sum(~valid)),
	)
	if spec.compare_conventions and method is LrvMethod.TRUNCATED:
		_, _, tally.alt_rejections = rejections(lrv_from_acf(gamma, method, bandwidth, not spec.symmetrized))
	return tally


def _classic_tally(spec, n, difference, rss, dof):
	statistic = difference / (dof * rss / (n - spec.p))
	match spec.reference:
		case Reference.CHI2_OVER_DOF:
			p_values = chi2_over_dof_pvalue(statistic, dof)
		case Reference.FISHER:
			p_values = stats.f.sf(statistic, dof, n - spec.p)
	return _Tally(
		rejections=int(np.sum(p_values < spec.alpha)),
		statistic_sum=float(np.sum(statistic)),
		valid=statistic.shape[0],
	)


def _run_chunk(spec, n, X, full, null, replications):
	Y = simulate_responses(spec, X, n, replications)
	residuals = full.residuals(Y)
	rss = np.sum(residuals**2, axis=1)
	rss0 = null.rss(Y) if null is not None else np.sum(Y**2, axis=1)
	difference = nested_difference(rss0, rss)
	dof = spec.p - spec.p0

	if spec.method is StatisticMethod.CLASSIC_F:
		return _classic_tally(spec, n, difference, rss, dof)
	return _corrected_tally(spec, n, difference, residuals, dof)


def _run_size(spec, n, threads):
	X = build_design(spec.design_kind, n)
	full = LeastSquaresProjector(X)
	kept = kept_columns(spec.p, spec.null_cols, spec.allow_zero_model)
	null = LeastSquaresProjector(X.select(kept)) if kept else None
	if not kept:
		logger.warning("%s: every column is tested, the null model is the zero model", spec.name)
	# validates the bandwidth against n before any simulation
	spec.lrv_bandwidth(n)

	step = config.REPLICATION_CHUNK
	chunks = [range(start, min(start + step, spec.replications)) for start in range(0, spec.replications, step)]

	def work(chunk):
		return _run_chunk(spec, n, X, full, null, chunk)

	if threads > 1:
		with ThreadPoolExecutor(max_workers=threads) as pool:
			tallies = list(pool.map(work, chunks))
	else:
		tallies = [work(chunk) for chunk in chunks]

	total = _Tally()
	for tally in tallies:
		total.add(tally)

	if total.nonpositive:
		logger.warning(
			"n=%d: %d replication(s) had a nonpositive long-run variance and count as non-rejections",
			n,
			total.nonpositive,
		)

	row = TableRow(
		n=n,
		rejection_frequency=total.rejections / spec.replications,
		mean_statistic=total.statistic_sum / total.valid if total.valid else float("nan"),
		nonpositive_lrv_count=total.nonpositive,
		alt_rejection_frequency=(
			total.alt_rejections / spec.replications
			if spec.compare_conventions and spec.lrv_method is LrvMethod.TRUNCATED
			else None
		),
		printed=spec.printed.get(n),
	)
	logger.info("%s n=%d: rejection frequency %.4f", spec.name, n, row.rejection_frequency)
	return row


def run_experiment(spec, threads=None):
	"""
	Rejection frequency of the configured test for every size in spec.n_values.
	Returns: TableResult, identical for identical specs whatever the thread count
	"""
	threads = config.thread_count() if threads is None else int(threads)
	if threads < 1:
		throw(f"Thread count must be positive, got {threads}")

	logger.info(
		"Running %s: %d replications, master seed %d, sizes %s",
		spec.name,
		spec.replications,
		spec.master_seed,
		list(spec.n_values),
	)
	rows = tuple(_run_size(spec, n, threads) for n in spec.n_values)
	return TableResult(rows=rows, spec=spec)


def simulate_fit_data(spec, n=None, replication=0):
	"""
	Design and one simulated response of an experiment.
	Returns: (DesignMatrix, Y)
	"""
	n = spec.n_values[0] if n is None else int(n)
	X = build_design(spec.design_kind, n)
	return X, simulate_responses(spec, X, n, [replication])[0]


def experiment_residuals(spec, n=None, replication=0):
	X, Y = simulate_fit_data(spec, n, replication)
	return fit(X, Y).residuals


def acf_report(source, max_lag, n=None, replication=0):
	"""
	Autocovariances gamma*_0..gamma*_max_lag of a series, or of the full-model residuals of
	one simulated replication when `source` is an ExperimentSpec.
	"""
	if isinstance(source, ExperimentSpec):
		series = experiment_residuals(source, n, replication)
		kind = AcfSource.RESIDUALS
	else:
		series = as_vector(source, "series")
		kind = AcfSource.RAW_SERIES

	check_lag(max_lag, series.shape[0])
	return autocovariances(series, max_lag, kind)


def acf_frame(estimate):
	return pd.DataFrame(
		{
			"lag": np.arange(estimate.max_lag + 1),
			"value": estimate.values,
			"ratio": estimate.ratios(),
		}
	)
