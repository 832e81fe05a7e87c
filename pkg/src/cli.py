"""
Command Line Interface for the simplifying-assumption test toolkit

    svct simulate | test | power | penalty-probe | cache
"""

import argparse
import logging
import os
import sys
import traceback
from typing import Callable, Dict, List, Optional, Tuple, Union

from . import __version__
from .cache import get_cache
from .ccc.statistic import CovMode
from .config import get_config
from .constants import (
    DEFAULT_LAMBDA_GRID, DEFAULT_TAU, FUNCTIONAL_SUM, STUDY_PENALTY, VALID_COV_MODES, VALID_EXAMPLES,
    VALID_FUNCTIONALS, VALID_STUDIES
)
from .dvine.fit import stepwise_fit
from .dvine.model import build_example_spec
from .dvine.sample import PseudoSample
from .dvine.simulate import simulate
from .exceptions import (
    DomainError, NumericError, SVCTError, UsageError, ValidationError,
    format_error_for_logging, format_error_for_user
)
from .harness.studies import StudyConfig, run_penalty_probe, run_power_study
from .harness.writers import dumps, write_csv, write_json
from .hier import HierConfig, hierarchical_test, test_edge
from .init import initialize
from .utils import (
    config_to_argv, configure_logging, load_key_value_file, parse_edge, parse_float_list,
    parse_int_list, parse_penalty_grid, parse_str_list
)

logger = logging.getLogger("SVCT.CLI")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_INTERRUPTED = 130

BOOLEAN_FLAGS = ["already-uniform", "hierarchical", "full-scale", "cache"]
GLOBAL_FLAGS = ["log-level", "log-file"]
STRUCTURED_CONFIG_EXTENSIONS = (".yaml", ".yml", ".json")

class CLIParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems as :class:`UsageError`"""

    def error(self, message: str):
        raise UsageError(message, usage=self.format_usage())

    def option_names(self) -> List[str]:
        return [name.lstrip("-") for action in self._actions for name in action.option_strings]

def _add_test_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="Test level (family-wise for the hierarchical test)")
    parser.add_argument("--cov-mode", choices=VALID_COV_MODES, help="Covariance estimator")
    parser.add_argument("--bootstrap-reps", type=int, help="Bootstrap replicates for --cov-mode bootstrap")
    parser.add_argument("--j-max", type=int, help="Maximum depth of the partition tree")
    parser.add_argument("--min-leaf", type=int, help="Minimum observations per leaf")
    parser.add_argument("--penalty-c", type=float, help="Penalty constant c in c * n^(-beta)")
    parser.add_argument("--penalty-beta", type=float, help="Penalty exponent beta in c * n^(-beta)")

def _add_study_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", dest="ns", required=True, help="Sample sizes, comma separated")
    parser.add_argument("--reps", type=int, help="Replications per cell")
    parser.add_argument("--seed", type=int, help="Base random seed")
    parser.add_argument("--out", required=True, help="Output CSV file")
    parser.add_argument("--json", dest="json_out", help="Also write the result as JSON")
    parser.add_argument("--taus", help="Kendall's tau values of the first tree, comma separated")
    parser.add_argument("--full-scale", action="store_true", default=None,
                        help="Use the full-scale replication count")
    parser.add_argument("--workers", type=int, help="Parallel workers (capped by SVCT_THREADS)")
    parser.add_argument("--cache", action="store_true", default=None, help="Reuse cached cell results")
    parser.add_argument("--cache-dir", help="Cache directory")
    _add_test_options(parser)

def build_parser() -> CLIParser:
    """Build the argument parser with all subcommands"""
    parser = CLIParser(prog="svct", description="Tests of the simplifying assumption in D-vine copulas")
    parser.add_argument("--version", action="version", version=f"svct v{__version__}")
    parser.add_argument("--config", help="Configuration file (YAML, JSON or flat key=value)")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="Logging level")
    parser.add_argument("--log-file", help="Log file path")

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    sim = subparsers.add_parser("simulate", help="Simulate a sample from an example D-vine")
    sim.add_argument("--example", required=True, choices=VALID_EXAMPLES, help="Example design")
    sim.add_argument("--d", type=int, help="Dimension (ex5.1 only)")
    sim.add_argument("--tau", type=float, default=DEFAULT_TAU, help="Kendall's tau of the first tree")
    sim.add_argument("--lambda", dest="lam", type=float, default=0.0, help="Strength of the violation in [0, 1]")
    sim.add_argument("--functional", choices=VALID_FUNCTIONALS, default=FUNCTIONAL_SUM,
                     help="Parameter functional of the conditional edge")
    sim.add_argument("--n", type=int, required=True, help="Number of observations")
    sim.add_argument("--seed", type=int, help="Random seed")
    sim.add_argument("--replication", type=int, default=0, help="Replication index (selects the substream)")
    sim.add_argument("--out", required=True, help="Output CSV file")

    test = subparsers.add_parser("test", help="Test one edge or run the hierarchical procedure")
    test.add_argument("--data", required=True, help="CSV file with a header row")
    test.add_argument("--already-uniform", action="store_true", default=None,
                      help="Data are pseudo-observations already; skip the rank transform")
    test.add_argument("--families", required=True,
                      help="One family for every edge or a comma list with one family per tree")
    test.add_argument("--edge", help="Edge i,j to test; omit for the hierarchical procedure")
    test.add_argument("--format", choices=["json", "table"], default="json", help="Output format")
    test.add_argument("--out", help="Also write the JSON document to this file")
    test.add_argument("--seed", type=int, help="Seed of the bootstrap covariance")
    _add_test_options(test)

    power = subparsers.add_parser("power", help="Run a size/power study")
    power.add_argument("--study", required=True, choices=[s for s in VALID_STUDIES if s != STUDY_PENALTY],
                       help="Study design")
    power.add_argument("--lambdas", help="Violation strengths, comma separated")
    power.add_argument("--d", dest="ds", help="Dimensions for ex5.1, comma separated")
    power.add_argument("--functionals", help="Parameter functionals, comma separated")
    power.add_argument("--fit-families", help="Families fitted to the lower trees, comma separated")
    power.add_argument("--hierarchical", action="store_true", default=None,
                       help="Run the hierarchical procedure instead of testing the top edge")
    _add_study_options(power)

    probe = subparsers.add_parser("penalty-probe", help="Compare penalty lower bounds with candidate penalties")
    probe.add_argument("--lambda", dest="lam", type=float, default=0.0, help="Violation strength of the design")
    probe.add_argument("--penalty-grid", help="Candidate penalties as c:beta pairs, comma separated")
    _add_study_options(probe)

    cache = subparsers.add_parser("cache", help="Cache management")
    cache_commands = cache.add_subparsers(dest="cache_command", help="Cache command")
    cache_commands.add_parser("stats", help="Show cache statistics")
    cache_commands.add_parser("clear", help="Remove all cache entries")
    cleanup = cache_commands.add_parser("cleanup", help="Remove expired cache entries")
    cleanup.add_argument("--max-age", type=int, help="Maximum age in seconds")

    return parser

def _config_path(argv: List[str]) -> Optional[str]:
    for index, token in enumerate(argv):
        if token == "--config" and index + 1 < len(argv):
            return argv[index + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None

def _subparser(parser: CLIParser, command: str) -> Optional[CLIParser]:
    for action in parser._subparsers._group_actions if parser._subparsers else []:
        choices = getattr(action, "choices", None) or {}
        if command in choices:
            return choices[command]
    return None

def _command_position(parser: CLIParser, argv: List[str]) -> Optional[int]:
    """Index of the subcommand in argv, skipping values of global options"""
    skip = False
    for index, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token in ("--config", "--log-level", "--log-file"):
            skip = True
            continue
        if not token.startswith("-"):
            return index if _subparser(parser, token) is not None else None
    return None

def inject_config(parser: CLIParser, argv: List[str]) -> Tuple[List[str], Optional[str]]:
    """Insert flags from a flat ``key=value`` config file ahead of the user's flags.

    Returns the new argv and the path of a structured (YAML/JSON) config file,
    which is loaded into :class:`src.config.Config` instead.
    """
    path = _config_path(argv)
    if path is None:
        return argv, None
    if path.lower().endswith(STRUCTURED_CONFIG_EXTENSIONS):
        return argv, path
    if not os.path.exists(path):
        raise ValidationError(f"Configuration file not found: {path}", field_name="config")

    values = load_key_value_file(path)
    position = _command_position(parser, argv)
    if position is None:
        return argv, None
    command = argv[position]
    known = set(_subparser(parser, command).option_names())

    global_values = {k: v for k, v in values.items() if k.lstrip("-").replace("_", "-") in GLOBAL_FLAGS}
    command_values = {}
    for key, value in values.items():
        name = key.lstrip("-").replace("_", "-")
        if name in known:
            command_values[key] = value
        elif key not in global_values:
            logger.debug(f"Ignoring config key '{key}' not understood by '{command}'")

    return (argv[:position] + config_to_argv(global_values) + [command]
            + config_to_argv(command_values, BOOLEAN_FLAGS) + argv[position + 1:]), None

def _families(text: str) -> Union[str, List[str]]:
    names = parse_str_list(text)
    if not names:
        raise ValidationError("at least one family is required", field_name="families")
    return names[0] if len(names) == 1 else names

def _hier_config(args: argparse.Namespace, families) -> HierConfig:
    config = get_config()
    test_config = dict(config.get_test_config())
    test_config["bootstrap_seed"] = args.seed if getattr(args, "seed", None) is not None \
        else config.get("study", "seed", 1)
    return HierConfig.from_config(test_config, families)

def cmd_simulate(args: argparse.Namespace) -> int:
    """Simulate an example design and write it as CSV"""
    seed = args.seed if args.seed is not None else get_config().get("study", "seed", 1)
    spec = build_example_spec(args.example, args.tau, args.lam, args.functional, args.d)
    sample = simulate(spec, args.n, seed, args.replication)
    sample.to_csv(args.out)
    print(f"Wrote {sample.n} observations of {sample.d} variables to {args.out}")
    return EXIT_OK

def cmd_test(args: argparse.Namespace) -> int:
    """Test one edge, or all edges hierarchically"""
    if not os.path.exists(args.data):
        raise ValidationError(f"Data file not found: {args.data}", field_name="data")
    sample = PseudoSample.from_csv(args.data, already_uniform=bool(args.already_uniform))
    families = _families(args.families)
    hier_config = _hier_config(args, families)

    if args.edge:
        i, j = parse_edge(args.edge)
        if not (2 <= j <= sample.d - 1 and 1 <= i <= sample.d - j):
            raise DomainError(f"edge ({i},{j}) is not a testable edge of a {sample.d}-dimensional D-vine",
                              parameter="edge", value=(i, j))
        fit = stepwise_fit(sample, families, up_to_tree=j - 1)
        result = test_edge(fit, (i, j), hier_config)
        document = result.to_dict()
        if args.format == "table":
            outcome = result.penalized
            print(f"Edge ({i},{j}) with {outcome.df + 1} leaves, covariance {outcome.mode}")
            print(f"  Theta_n: {outcome.statistic:.4f} (p-value {outcome.p_value:.4g})")
            print(f"  T(Gamma_0): {result.fixed.statistic:.4f} (p-value {result.fixed.p_value:.4g})")
            print(f"  Penalty n*lambda_n: {outcome.penalty.n_lambda:.4f}, b_n: {outcome.penalty.b_n:.4f}")
            print(f"  Decision at {hier_config.alpha}: "
                  f"{'reject' if outcome.rejects(hier_config.alpha) else 'keep'} the simplifying assumption")
        else:
            print(dumps(document))
    else:
        outcome = hierarchical_test(sample, hier_config)
        document = outcome.to_dict()
        print(outcome.render_table() if args.format == "table" else dumps(document))

    if args.out:
        write_json(document, args.out)
    return EXIT_OK

def _study_config(args: argparse.Namespace, study: str, lambdas: Tuple[float, ...]) -> StudyConfig:
    config = get_config()
    test_config = config.get_test_config()
    study_config = config.get_study_config()
    seed = int(study_config.get("seed", 1))
    options = dict(
        study=study,
        ns=tuple(parse_int_list(args.ns, "n")),
        lambdas=lambdas,
        reps=int(study_config.get("reps")),
        seed=seed,
        taus=tuple(parse_float_list(args.taus, "taus")) if args.taus else (),
        full_scale=bool(args.full_scale),
        alpha=float(test_config["alpha"]),
        j_max=int(test_config["j_max"]),
        min_leaf=int(test_config["min_leaf"]),
        penalty_c=float(test_config["penalty_c"]),
        penalty_beta=float(test_config["penalty_beta"]),
        cov=CovMode(test_config["cov_mode"], int(test_config["bootstrap_reps"]), seed),
        workers=int(args.workers or 0),
        use_cache=bool(config.get("cache", "enabled", False)),
    )
    if study != STUDY_PENALTY:
        options.update(
            ds=tuple(parse_int_list(args.ds, "d")) if args.ds else (),
            functionals=tuple(parse_str_list(args.functionals)) if args.functionals else (),
            fit_families=tuple(parse_str_list(args.fit_families)) if args.fit_families else (),
            hierarchical=bool(args.hierarchical),
        )
    elif args.penalty_grid:
        options["penalty_grid"] = tuple(parse_penalty_grid(args.penalty_grid))
    return StudyConfig(**options)

def _finish_study(args: argparse.Namespace, result) -> int:
    write_csv(result, args.out)
    if args.json_out:
        write_json(result.to_dict(), args.json_out)
    print(f"Wrote {len(result.cells)} rows to {args.out}")
    return EXIT_OK

def cmd_power(args: argparse.Namespace) -> int:
    """Run a size/power study"""
    lambdas = tuple(parse_float_list(args.lambdas, "lambdas")) if args.lambdas else tuple(DEFAULT_LAMBDA_GRID)
    return _finish_study(args, run_power_study(_study_config(args, args.study, lambdas)))

def cmd_penalty_probe(args: argparse.Namespace) -> int:
    """Run the penalty lower-bound probe"""
    return _finish_study(args, run_penalty_probe(_study_config(args, STUDY_PENALTY, (args.lam,))))

def cmd_cache(args: argparse.Namespace) -> int:
    """Cache management"""
    cache = get_cache(force=True)

    if args.cache_command == "stats":
        stats = cache.get_stats()
        print("\nCache Statistics:")
        print(f"  Directory: {stats['cache_dir']}")
        print(f"  TTL: {stats['ttl']} seconds")
        print(f"  Compression: {'enabled' if stats.get('compression', False) else 'disabled'}")
        print(f"  Entries: {stats['entry_count']}")
        print(f"  Size: {stats.get('size_human', '0 bytes')}")
        if stats['entry_count'] > 0:
            print(f"  Oldest entry: {stats.get('oldest_entry', 'Unknown')}")
            print(f"  Newest entry: {stats.get('newest_entry', 'Unknown')}")

    elif args.cache_command == "clear":
        print(f"Cleared {cache.clear()} cache entries")

    elif args.cache_command == "cleanup":
        print(f"Cleaned up {cache.cleanup(args.max_age)} expired cache entries")

    else:
        raise UsageError("No cache command specified (stats, clear or cleanup)")

    return EXIT_OK

COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "simulate": cmd_simulate,
    "test": cmd_test,
    "power": cmd_power,
    "penalty-probe": cmd_penalty_probe,
    "cache": cmd_cache,
}

def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point

    Returns:
        int: Exit code (0 success, 1 usage or domain error, 2 numeric failure)
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        configure_logging(logging.INFO)
        argv, structured_config = inject_config(parser, argv)
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("No command specified", usage=parser.format_usage())

        initialize(structured_config)
        config = get_config()
        config.load_from_args(args)
        config.setup_logging()

        return COMMANDS[args.command](args)

    except SystemExit as e:
        return int(e.code or 0) if not isinstance(e.code, str) else EXIT_USAGE

    except KeyboardInterrupt:
        print("\nOperation canceled by user.", file=sys.stderr)
        return EXIT_INTERRUPTED

    except NumericError as e:
        logger.error(f"Numeric failure: {format_error_for_logging(e)}")
        print(f"Error: {format_error_for_user(e)}", file=sys.stderr)
        return EXIT_NUMERIC

    except SVCTError as e:
        logger.error(f"Error: {format_error_for_logging(e)}")
        print(f"Error: {format_error_for_user(e)}", file=sys.stderr)
        return EXIT_USAGE

    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        logger.debug(f"Traceback: {traceback.format_exc()}")
        print(f"An unexpected error occurred: {e}", file=sys.stderr)
        print("This is likely a bug. Please report it with the details from the log.", file=sys.stderr)
        return EXIT_NUMERIC

if __name__ == "__main__":
    sys.exit(main())
