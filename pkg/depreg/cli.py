"""
Command-line entry point: `depreg {simulate,fit,test,table,acf,diagnose}`.

Every command that needs an experiment reads it from a JSON document (`--config PATH`) or a
bundled preset (`--preset NAME`), then applies dotted overrides such as `--a_n 3` or
`--process.gamma 0.2`; explicit flags win over both. CSV output starts with '#' metadata
lines holding the resolved configuration, JSON output carries it under "config".

Exit codes: 0 on success, 1 on usage, validation or configuration errors, 2 on numerical
failures (rank deficiency, noiseless fit, nonpositive long-run variance).
"""

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from depreg import __version__, config
from depreg.exceptions import ConfigError, DepregError, NumericalError
from depreg.regression.design import DesignMatrix, regularity_report
from depreg.regression.enums import LrvMethod, StatisticMethod
from depreg.regression.inference import fisher_classic, fisher_corrected
from depreg.regression.ols import fit, nested_rss
from depreg.regression.spectral import lrv
from depreg.regression.validations import throw
from depreg.simulation.enums import Innovation, PostMap, ProcessKind
from depreg.simulation.montecarlo import (
	ExperimentSpec,
	acf_frame,
	acf_report,
	build_design,
	run_experiment,
	simulate_fit_data,
	write_csv,
)
from depreg.simulation.presets import list_presets, preset_document
from depreg.simulation.processes import ProcessConfig, geometric_coefficients, simulate

logger = logging.getLogger(__name__)

KIND_ALIASES = {
	"ar1": ProcessKind.AR1_NONMIXING,
	"linear": ProcessKind.LINEAR_PROCESS,
	**{kind.value: kind for kind in ProcessKind},
}

RESPONSE_COLUMN = "y"


class Parser(argparse.ArgumentParser):
	def __init__(self, *args, **kwargs):
		kwargs.setdefault("allow_abbrev", False)
		super().__init__(*args, **kwargs)

	def error(self, message):
		self.print_usage(sys.stderr)
		throw(message, exc=ConfigError)


def _add_experiment_arguments(parser, sample_size=True):
	source = parser.add_mutually_exclusive_group()
	source.add_argument("--config", help="JSON experiment document")
	source.add_argument("--preset", help="bundled experiment document, see `table --list-presets`")
	if sample_size:
		parser.add_argument("--n", type=int, help="sample size (default: first of n_values)")
		parser.add_argument("--replication", type=int, default=0, help="replication index to simulate")
	parser.add_argument("-o", "--output", help="output file (default: stdout)")


def _add_data_argument(parser):
	parser.add_argument(
		"--data",
		help=f"CSV with a '{RESPONSE_COLUMN}' column and optional design columns, instead of simulating",
	)


def build_parser():
	parser = Parser(prog="depreg", description="OLS inference with stationary dependent errors")
	parser.add_argument("--version", action="version", version=f"depreg {__version__}")
	verbosity = parser.add_mutually_exclusive_group()
	verbosity.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
	verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")

	commands = parser.add_subparsers(dest="command", required=True)

	simulate_parser = commands.add_parser("simulate", help="simulate an error process to CSV")
	_add_experiment_arguments(simulate_parser, sample_size=False)
	simulate_parser.add_argument("--kind", choices=sorted(KIND_ALIASES))
	simulate_parser.add_argument("--n", type=int, required=True)
	simulate_parser.add_argument("--seed", type=int)
	simulate_parser.add_argument("--gamma", type=float)
	coefficients = simulate_parser.add_mutually_exclusive_group()
	coefficients.add_argument("--coeffs", help="comma-separated linear-process coefficients a_0,a_1,...")
	coefficients.add_argument("--geometric", type=float, help="coefficients ratio^i, i < 64")
	simulate_parser.add_argument("--innovation", choices=[i.value for i in Innovation])
	simulate_parser.add_argument("--post-map", choices=[m.value for m in PostMap])
	simulate_parser.add_argument("--scale", type=float)
	simulate_parser.add_argument("--burn-in", type=int)

	fit_parser = commands.add_parser("fit", help="least-squares fit to JSON")
	_add_experiment_arguments(fit_parser)
	_add_data_argument(fit_parser)

	test_parser = commands.add_parser("test", help="classic and corrected Fisher tests to JSON")
	_add_experiment_arguments(test_parser)
	_add_data_argument(test_parser)

	table_parser = commands.add_parser("table", help="Monte Carlo level/power table to CSV")
	_add_experiment_arguments(table_parser, sample_size=False)
	table_parser.add_argument(
		"--threads", type=int, help=f"worker threads (default: ${config.THREADS_ENV} or 1)"
	)
	table_parser.add_argument("--list-presets", action="store_true", help="print bundled preset names and exit")

	acf_parser = commands.add_parser("acf", help="sample autocovariances to CSV")
	_add_experiment_arguments(acf_parser)
	_add_data_argument(acf_parser)
	acf_parser.add_argument("--max-lag", type=int, required=True)

	diagnose_parser = commands.add_parser("diagnose", help="design regularity report to JSON")
	_add_experiment_arguments(diagnose_parser)
	_add_data_argument(diagnose_parser)
	diagnose_parser.add_argument("--lags", default="0,1,2,3,4,5", help="comma-separated lags")
	diagnose_parser.add_argument("--tol", type=float, default=config.REGULARITY_TOL)

	return parser


def parse_overrides(tokens, parser):
	"""
	Turn leftover `--dotted.name value` / `--dotted.name=value` tokens into a dict.

	Names must exist in the experiment template; anything else is an unrecognized flag.
	"""
	template = ExperimentSpec.template()
	overrides = {}
	tokens = list(tokens)
	while tokens:
		token = tokens.pop(0)
		if not token.startswith("--") or len(token) == 2:
			parser.error(f"unrecognized argument: {token}")
		name, separator, value = token[2:].partition("=")
		name = name.replace("-", "_")
		if not config.has_field(template, name):
			parser.error(f"unrecognized argument: --{name}")
		if not separator:
			if not tokens:
				parser.error(f"argument --{name} expects a value")
			value = tokens.pop(0)
		overrides[name] = value
	return overrides


def read_document(path):
	"""
	JSON experiment document from disk, or the bundled preset of the same name.
	"""
	path = Path(path)
	if not path.exists() and path.stem in list_presets():
		logger.debug("%s not found on disk, using the bundled preset", path)
		return preset_document(path.stem)
	return config.load_config(path)


def from_document(cls, doc):
	try:
		return cls.from_dict(doc)
	except DepregError:
		raise
	except (TypeError, ValueError) as e:
		throw(f"Malformed {cls.__name__} document: {e}", exc=ConfigError)


def resolve_experiment(args, overrides):
	if args.config:
		doc = read_document(args.config)
	elif args.preset:
		doc = preset_document(args.preset)
	else:
		doc = ExperimentSpec.template()

	doc = config.apply_overrides(doc, overrides, template=ExperimentSpec.template())
	spec = from_document(ExperimentSpec, doc)

	logger.info("Resolved experiment: %s", json.dumps(spec.to_dict(), sort_keys=True))
	return spec


def read_data(path, spec):
	"""
	Design and response from a CSV; the design is built from the experiment when the file
	holds the response only.
	"""
	try:
		frame = pd.read_csv(path, comment="#")
	except FileNotFoundError:
		throw(f"Data file not found: {path}", exc=ConfigError)
	except pd.errors.EmptyDataError:
		throw(f"Data file {path} is empty", exc=ConfigError)
	if RESPONSE_COLUMN not in frame.columns:
		throw(f"Data file {path} has no '{RESPONSE_COLUMN}' column", exc=ConfigError)

	names = [column for column in frame.columns if column != RESPONSE_COLUMN]
	try:
		y = frame[RESPONSE_COLUMN].to_numpy(dtype=float)
		values = frame[names].to_numpy(dtype=float)
	except ValueError as e:
		throw(f"Data file {path} holds non-numeric values: {e}", exc=ConfigError)

	if names:
		X = DesignMatrix(values, tuple(names))
	else:
		X = build_design(spec.design_kind, y.shape[0])
	logger.info("Read %d observations and %d design column(s) from %s", X.n, X.p, path)
	return X, y


def _fit_data(args, spec):
	if getattr(args, "data", None):
		return read_data(args.data, spec)
	return simulate_fit_data(spec, args.n, args.replication)


@contextlib.contextmanager
def open_output(path):
	if path in (None, "-"):
		yield sys.stdout
		return
	with open(path, "w", encoding="utf-8", newline="") as handle:
		yield handle
	logger.info("Wrote %s", path)


def write_json(path, doc):
	with open_output(path) as handle:
		json.dump(doc, handle, indent=2)
		handle.write("\n")


def _split_floats(raw):
	try:
		return [float(part) for part in raw.split(",") if part.strip()]
	except ValueError:
		throw(f"Expected comma-separated numbers, got {raw!r}", exc=ConfigError)


def simulation_process(args, overrides):
	"""
	Process from --config/--preset (or the unit-scale defaults), then `--process.*` overrides,
	then explicit flags.
	"""
	if args.config or args.preset:
		doc = resolve_experiment(args, overrides).process.to_dict()
	else:
		template = ProcessConfig().to_dict()
		nested = {}
		for name, value in overrides.items():
			field, _, leaf = name.partition(".")
			if field != "process" or not leaf:
				throw(f"simulate only accepts process.* overrides, got --{name}", exc=ConfigError)
			nested[leaf] = value
		doc = config.apply_overrides(template, nested, template=template)
		if args.kind is None and "kind" not in nested:
			throw("simulate needs --kind, --config or --preset", exc=ConfigError)

	flags = {
		"kind": KIND_ALIASES[args.kind].value if args.kind else None,
		"gamma": args.gamma,
		"innovation": args.innovation,
		"post_map": args.post_map,
		"scale": args.scale,
		"burn_in": args.burn_in,
		"seed": args.seed,
	}
	if args.coeffs:
		flags["coeffs"] = _split_floats(args.coeffs)
	elif args.geometric is not None:
		flags["coeffs"] = list(geometric_coefficients(args.geometric))
	doc.update({key: value for key, value in flags.items() if value is not None})
	return from_document(ProcessConfig, doc)


def command_simulate(args, overrides):
	process = simulation_process(args, overrides)
	logger.info("Simulating %d values of %s", args.n, json.dumps(process.to_dict(), sort_keys=True))
	series = simulate(process, args.n)

	frame = pd.DataFrame({"i": np.arange(1, args.n + 1), "value": series})
	with open_output(args.output) as handle:
		write_csv(handle, frame, {"depreg": __version__, "process": process.to_dict(), "n": args.n})
	return 0


def command_fit(args, overrides):
	spec = resolve_experiment(args, overrides)
	X, y = _fit_data(args, spec)
	result = fit(X, y)
	write_json(args.output, {**result.to_dict(), "names": list(X.names), "config": spec.to_dict()})
	return 0


def command_test(args, overrides):
	spec = resolve_experiment(args, overrides)
	X, y = _fit_data(args, spec)
	p0 = X.p - len(spec.null_cols)
	rss = nested_rss(X, spec.null_cols, y, spec.allow_zero_model)

	classic = fisher_classic(
		rss.rss_null, rss.rss_full, X.n, X.p, p0, spec.reference, total=float(np.sum(y**2))
	)
	residuals = fit(X, y).residuals
	if spec.method is StatisticMethod.CORRECTED_KERNEL:
		estimate = lrv(residuals, LrvMethod.KERNEL_F0, spec.bandwidth, delta=spec.delta)
	else:
		estimate = lrv(residuals, LrvMethod.TRUNCATED, spec.a_n, spec.symmetrized)
	corrected = fisher_corrected(rss.rss_null, rss.rss_full, estimate, X.p, p0)

	write_json(
		args.output,
		{
			"n": X.n,
			"p": X.p,
			"p0": p0,
			"null_cols": list(spec.null_cols),
			"rss": rss.rss_full,
			"rss0": rss.rss_null,
			"classic": classic.to_dict(),
			"corrected": corrected.to_dict(),
			"config": spec.to_dict(),
		},
	)
	return 0


def command_table(args, overrides):
	if args.list_presets:
		for name in list_presets():
			print(name)
		return 0

	spec = resolve_experiment(args, overrides)
	table = run_experiment(spec, threads=args.threads)
	with open_output(args.output) as handle:
		table.to_csv(handle)
	return 0


def command_acf(args, overrides):
	spec = resolve_experiment(args, overrides)
	if args.data:
		_, y = read_data(args.data, spec)
		estimate = acf_report(y, args.max_lag)
	else:
		estimate = acf_report(spec, args.max_lag, args.n, args.replication)

	metadata = {"depreg": __version__, "source": estimate.source.value, "n": estimate.n}
	if not args.data:
		metadata.update(replication=args.replication, spec=spec.to_dict())
	with open_output(args.output) as handle:
		write_csv(handle, acf_frame(estimate), metadata)
	return 0


def command_diagnose(args, overrides):
	spec = resolve_experiment(args, overrides)
	if args.data:
		X, _ = read_data(args.data, spec)
	else:
		X = build_design(spec.design_kind, spec.n_values[-1] if args.n is None else args.n)

	try:
		lags = [int(lag) for lag in args.lags.split(",") if lag.strip()]
	except ValueError:
		throw(f"Expected comma-separated lags, got {args.lags!r}", exc=ConfigError)

	report = regularity_report(X, lags, args.tol)
	write_json(args.output, {**report.to_dict(), "n": X.n, "names": list(X.names), "config": spec.to_dict()})
	return 0


COMMANDS = {
	"simulate": command_simulate,
	"fit": command_fit,
	"test": command_test,
	"table": command_table,
	"acf": command_acf,
	"diagnose": command_diagnose,
}


def configure_logging(verbose=False, quiet=False):
	level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
	logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
	logging.getLogger().setLevel(level)


def main(argv=None):
	parser = build_parser()
	try:
		args, extra = parser.parse_known_args(argv)
		configure_logging(args.verbose, args.quiet)
		overrides = parse_overrides(extra, parser)
		return COMMANDS[args.command](args, overrides)
	except SystemExit as e:
		return e.code
	except NumericalError as e:
		print(f"depreg: numerical error: {e}", file=sys.stderr)
		return 2
	except DepregError as e:
		print(f"depreg: error: {e}", file=sys.stderr)
		return 1


if __name__ == "__main__":
	sys.exit(main())
