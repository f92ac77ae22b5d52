import json
import logging
from importlib import resources

from depreg.exceptions import ConfigError
from depreg.regression.validations import throw
from depreg.simulation.montecarlo import ExperimentSpec

logger = logging.getLogger(__name__)

FIXTURES_PACKAGE = "depreg.fixtures"


def _fixtures():
	return resources.files(FIXTURES_PACKAGE)


def list_presets():
	"""
	Names of the bundled experiment documents, sorted
	"""
	names = (entry.name for entry in _fixtures().iterdir())
	return sorted(name.removesuffix(".json") for name in names if name.endswith(".json"))


def preset_document(name):
	entry = _fixtures() / f"{name}.json"
	if not entry.is_file():
		throw(f"Unknown preset {name!r}; available: {', '.join(list_presets())}", exc=ConfigError)
	return json.loads(entry.read_text(encoding="utf-8"))


def load_preset(name):
	logger.debug("Loading preset %s", name)
	return ExperimentSpec.from_dict(preset_document(name))
