"""
Seeded simulators for stationary error processes.

Every draw goes through numpy's PCG64 generator, created with
`numpy.random.default_rng(seed)` where `seed` is an integer or a SeedSequence. A batch of
replications gets one generator per replication, so a series depends only on its own seed
and not on which batch it was simulated in.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal

from depreg import config
from depreg.regression.validations import as_vector, throw
from depreg.simulation.enums import Innovation, PostMap, ProcessKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProcessConfig:
	kind: ProcessKind = ProcessKind.AR1_NONMIXING
	gamma: float = 0.25
	coeffs: tuple = field(default_factory=tuple)
	innovation: Innovation = Innovation.GAUSSIAN
	post_map: PostMap = PostMap.IDENTITY
	scale: float = 1.0
	burn_in: int = config.DEFAULT_BURN_IN
	seed: int = 0

	def __post_init__(self):
		object.__setattr__(self, "kind", ProcessKind(self.kind))
		object.__setattr__(self, "innovation", Innovation(self.innovation))
		object.__setattr__(self, "post_map", PostMap(self.post_map))
		object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))

		if not self.scale > 0:
			throw(f"Process scale must be positive, got {self.scale}")
		if int(self.burn_in) != self.burn_in or self.burn_in < 0:
			throw(f"Burn-in must be a non-negative integer, got {self.burn_in}")
		if self.kind is ProcessKind.INTERMITTENT:
			check_short_range(self.gamma)
		if self.kind is ProcessKind.LINEAR_PROCESS and not self.coeffs:
			throw("A linear process needs at least one coefficient")

	def to_dict(self):
		doc = asdict(self)
		doc["kind"] = self.kind.value
		doc["innovation"] = self.innovation.value
		doc["post_map"] = self.post_map.value
		doc["coeffs"] = list(self.coeffs)
		return doc

	@classmethod
	def from_dict(cls, doc):
		known = {key: value for key, value in doc.items() if key in cls.__dataclass_fields__}
		unknown = set(doc) - set(known)
		if unknown:
			throw(f"Unknown process fields: {sorted(unknown)}")
		return cls(**known)


def check_short_range(gamma):
	if not 0 < gamma < 0.5:
		throw(
			f"Intermittent map exponent gamma={gamma} must lie in (0, 1/2); "
			"from 1/2 on the orbit is long-range dependent and the corrected tests do not apply"
		)
	return float(gamma)


def geometric_coefficients(ratio=0.5, length=config.DEFAULT_TRUNCATION):
	"""
	(1, ratio, ratio^2, ...) truncated to `length` terms.
	"""
	if not abs(ratio) < 1:
		throw(f"Geometric ratio must satisfy |ratio| < 1, got {ratio}")
	return tuple(ratio ** np.arange(length))


def _generators(seeds):
	return [np.random.default_rng(seed) for seed in seeds]


def _ar1_batch(n, seeds):
	rngs = _generators(seeds)
	start = np.array([rng.uniform(-0.5, 0.5) for rng in rngs])
	if n == 1:
		return start[:, np.newaxis]
	shocks = np.stack([rng.integers(0, 2, size=n - 1) - 0.5 for rng in rngs])

	chain, _ = signal.lfilter([0.5], [1.0, -0.5], shocks, axis=1, zi=0.5 * start[:, np.newaxis])
	return np.concatenate([start[:, np.newaxis], chain], axis=1)


def simulate_ar1_nonmixing(n, seed):
	"""
	eps_1 ~ U[-1/2, 1/2], eps_{k+1} = (eps_k + eta_{k+1}) / 2 with eta = +-1/2 equiprobable.

	The uniform law is invariant, so the chain is stationary from the first draw with
	gamma(k) = 2^{-|k|} / 12 and long-run variance 1/4.
	"""
	if n < 1:
		throw(f"Series length must be at least 1, got {n}")
	return _ar1_batch(n, [seed])[0]


def theta_gamma(x, gamma):
	"""
	x (1 + 2^gamma x^gamma) on [0, 1/2), 2x - 1 on [1/2, 1].
	"""
	if not 0 < gamma < 1:
		throw(f"Map exponent gamma must lie in (0, 1), got {gamma}")
	x = np.asarray(x, dtype=float)
	if np.any((x < 0) | (x > 1)):
		throw("The intermittent map is defined on [0, 1]")

	image = _theta_step(x, gamma)
	return float(image) if image.ndim == 0 else image


def _theta_step(x, gamma):
	return np.where(x < 0.5, x * (1.0 + (2.0 * x) ** gamma), 2.0 * x - 1.0)


def _intermittent_batch(n, gamma, burn_in, starts):
	x = np.asarray(starts, dtype=float)
	for _ in range(burn_in):
		x = _theta_step(x, gamma)

	orbit = np.empty((n, x.shape[0]))
	for i in range(n):
		x = _theta_step(x, gamma)
		orbit[i] = x
	return np.ascontiguousarray(orbit.T)


def simulate_intermittent(n, gamma, burn_in=config.DEFAULT_BURN_IN, seed=0, x0=None):
	"""
	Orbit theta^1(x0), ..., theta^n(x0) after `burn_in` discarded iterations.

	x0 is drawn from U[0, 1] unless given; 0 is an absorbing fixed point, so a random
	start avoids the degenerate orbit.
	"""
	gamma = check_short_range(gamma)
	if n < 1:
		throw(f"Series length must be at least 1, got {n}")
	if x0 is None:
		x0 = np.random.default_rng(seed).uniform(0.0, 1.0)
	elif not 0 <= x0 <= 1:
		throw(f"Starting point must lie in [0, 1], got {x0}")
	return _intermittent_batch(n, gamma, burn_in, [x0])[0]


def _innovations(rng, innovation, size):
	match Innovation(innovation):
		case Innovation.GAUSSIAN:
			return rng.standard_normal(size)
		case Innovation.RADEMACHER:
			return 2.0 * rng.integers(0, 2, size=size) - 1.0
		case Innovation.UNIFORM:
			# unit variance
			return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=size)


def _post_map(values, post_map):
	match PostMap(post_map):
		case PostMap.IDENTITY:
			return values
		case PostMap.ABS:
			return np.abs(values)
		case PostMap.SQUARED:
			return values**2


def _linear_batch(n, coeffs, innovation, post_map, seeds):
	a = as_vector(coeffs, "coeffs")
	if a.size == 0:
		throw("A linear process needs at least one coefficient")
	m = a.size - 1

	shocks = np.stack([_innovations(rng, innovation, n + m) for rng in _generators(seeds)])
	# drop the first m outputs, which see fewer than m + 1 innovations
	linear = signal.lfilter(a, [1.0], shocks, axis=1)[:, m:]
	values = _post_map(linear, post_map)
	return values - values.mean(axis=1, keepdims=True)


def simulate_linear_process(n, coeffs, innovation=Innovation.GAUSSIAN, post_map=PostMap.IDENTITY, seed=0):
	"""
	f(sum_i a_i eta_{k-i}) centred by its sample mean over the emitted window.
	"""
	if n < 1:
		throw(f"Series length must be at least 1, got {n}")
	return _linear_batch(n, coeffs, innovation, post_map, [seed])[0]


def _iid_gaussian_batch(n, seeds):
	return np.stack([rng.standard_normal(n) for rng in _generators(seeds)])


def simulate_batch(process, n, seeds):
	"""
	Unscaled series for every seed, shape (len(seeds), n).
	"""
	if n < 1:
		throw(f"Series length must be at least 1, got {n}")
	seeds = list(seeds)

	match process.kind:
		case ProcessKind.AR1_NONMIXING:
			return _ar1_batch(n, seeds)
		case ProcessKind.INTERMITTENT:
			starts = [rng.uniform(0.0, 1.0) for rng in _generators(seeds)]
			return _intermittent_batch(n, process.gamma, process.burn_in, starts)
		case ProcessKind.LINEAR_PROCESS:
			return _linear_batch(n, process.coeffs, process.innovation, process.post_map, seeds)
		case ProcessKind.IID_GAUSSIAN:
			return _iid_gaussian_batch(n, seeds)


def simulate(process, n, seed=None, scaled=True):
	"""
	One series of length n from `process`, using `process.seed` unless `seed` is given.
	"""
	seed = process.seed if seed is None else seed
	series = simulate_batch(process, n, [seed])[0]
	return process.scale * series if scaled else series
