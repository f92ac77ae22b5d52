import json
import logging
import os
from pathlib import Path

from depreg.exceptions import ConfigError
from depreg.regression.validations import throw

logger = logging.getLogger(__name__)

# Numerical defaults
# ------------------

REGULARITY_TOL = 0.01
PD_RATIO = 1e-10
RANK_THRESHOLD = 1e-10
EIGEN_FLOOR = 1e-12
NESTING_SLACK = 1e-9
DEGENERATE_RSS_RATIO = 1e-20
DEFAULT_DELTA = 2.0
BANDWIDTH_EXPONENT_FACTOR = 0.9

# Simulation defaults
# -------------------

DEFAULT_BURN_IN = 10_000
DEFAULT_TRUNCATION = 64
DEFAULT_REPLICATIONS = 2000
DEFAULT_ALPHA = 0.05
DEFAULT_MASTER_SEED = 20_240_601
REPLICATION_CHUNK = 250

# Environment
# -----------

THREADS_ENV = "DEPREG_THREADS"


def thread_count():
	"""
	Worker threads for Monte Carlo tables, from DEPREG_THREADS (default 1)
	"""
	raw = os.environ.get(THREADS_ENV)
	if not raw:
		return 1
	try:
		value = int(raw)
	except ValueError:
		throw(f"{THREADS_ENV} must be a positive integer, got {raw!r}", exc=ConfigError)
	if value < 1:
		throw(f"{THREADS_ENV} must be a positive integer, got {raw!r}", exc=ConfigError)
	return value


def load_config(path):
	"""
	Read a JSON experiment document.
	Returns: dict
	"""
	path = Path(path)
	try:
		with path.open(encoding="utf-8") as handle:
			doc = json.load(handle)
	except FileNotFoundError:
		throw(f"Config file not found: {path}", exc=ConfigError)
	except json.JSONDecodeError as e:
		throw(f"Config file {path} is not valid JSON: {e}", exc=ConfigError)

	if not isinstance(doc, dict):
		throw(f"Config file {path} must hold a JSON object", exc=ConfigError)

	logger.debug("Loaded config %s", path)
	return doc


def parse_override_value(raw):
	try:
		return json.loads(raw)
	except json.JSONDecodeError:
		return raw


def has_field(reference, dotted):
	node = reference
	for part in dotted.split("."):
		if not isinstance(node, dict) or part not in node:
			return False
		node = node[part]
	return True


def apply_overrides(doc, overrides, template=None):
	"""
	Apply `dotted.name -> value` overrides on a copy of `doc`.

	Leaf names are checked against `template` (or `doc` itself) so a typo fails loudly
	instead of being silently ignored. String values are parsed as JSON when possible.
	"""
	result = json.loads(json.dumps(doc))
	reference = template if template is not None else result

	for dotted, raw in overrides.items():
		if not has_field(reference, dotted):
			throw(f"Unknown config field: {dotted}", exc=ConfigError)

		parts = dotted.split(".")
		value = parse_override_value(raw) if isinstance(raw, str) else raw
		target = result
		for part in parts[:-1]:
			target = target.setdefault(part, {})
		target[parts[-1]] = value
		logger.debug("Override %s = %r", dotted, value)

	return result
