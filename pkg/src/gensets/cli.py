"""
Command-line front end.
Usage: python run.py <command> [--config PATH] [--seed U64] [--out PATH] [--format csv|json]
Commands: cross, nodes, approx, wce, bound, search, convergence, verify.
Exit codes: 0 success, 1 runtime failure, 2 config error, 3 infeasible at every grid point.
"""

import argparse
import sys
from typing import List, Optional

from .errors import ConfigError, GensetsError
from .experiment_config import MODES, ExperimentConfig, from_dict, load
from .harness import COMMANDS, render
from .logging_system import log_warning, set_log_file, set_quiet

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gensets", description="Least-squares approximation on generated sets")
    parser.add_argument("command", choices=MODES, help="Experiment to run")
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--seed", type=int, help="Override the config seed (unsigned 64-bit)")
    parser.add_argument("--out", help="Write the artifact here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), help="Artifact format")
    parser.add_argument("--log-file", help="Also append log lines to this file")
    parser.add_argument("--quiet", action="store_true", help="No log lines on stderr")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults), then the command and flag overrides, validated once more."""
    conf = load(args.config) if args.config else from_dict({})
    conf.mode = args.command
    if args.seed is not None:
        conf.seed = args.seed
    if args.out is not None:
        conf.out = args.out
    if args.format is not None:
        conf.format = args.format
    conf.validate()
    return conf


def write_artifact(text: str, out: Optional[str] = None):
    data = text.encode("utf-8")
    if out:
        with open(out, "wb") as f:
            f.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        set_quiet(True)
    if args.log_file:
        set_log_file(args.log_file)
    try:
        conf = resolve_config(args)
        result = COMMANDS[conf.mode](conf)
        write_artifact(render(result, conf.format), conf.out)
    except ConfigError as e:
        print("config error: {}".format(e), file=sys.stderr)
        return EXIT_CONFIG
    except (GensetsError, OSError) as e:
        print("error: {}".format(e), file=sys.stderr)
        return EXIT_FAILURE
    if not result.feasible_any:
        log_warning("no feasible grid point", {"command": conf.mode})
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
