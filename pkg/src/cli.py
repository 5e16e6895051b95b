"""
Command-line entry point: loctrig <experiment> --config <path.json> [options].
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from src.config import ensure_output_folder, resolve_threads
from src.data_utils import load_config_file
from src.exceptions import ExperimentError, InvalidArgumentError, LoctrigError
from src.experiments import EXPERIMENTS, ExperimentConfig, run_experiment

# Configure logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loctrig", description="Run a localized-kernel experiment")
    parser.add_argument("experiment", choices=EXPERIMENTS, help="Experiment to run")
    parser.add_argument("--config", help="JSON file whose keys mirror the experiment configuration")
    parser.add_argument("--seed", type=int, help="Random seed (overrides the config file)")
    parser.add_argument("--out", help="Path of the JSON report")
    parser.add_argument("--threads", type=int, help="Worker thread cap (default: LOCTRIG_THREADS)")
    parser.add_argument("--csv-out", dest="csv_out", help="Export percent-point curves to this CSV file")
    return parser


def load_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    Merge the config file with command-line overrides.

    Args:
        args: Parsed command-line arguments

    Returns:
        The validated ExperimentConfig

    Raises:
        ExperimentError: If the file is unreadable or the merged config is invalid
    """
    data: Dict[str, Any] = load_config_file(args.config) if args.config else {}
    if data.get("name", args.experiment) != args.experiment:
        raise ExperimentError(f"config is for '{data['name']}', not '{args.experiment}'")
    data["name"] = args.experiment
    for key in ("seed", "out", "csv_out"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    try:
        data["threads"] = resolve_threads(args.threads if args.threads is not None else data.get("threads"))
    except ValueError as e:
        raise InvalidArgumentError(str(e)) from e
    if not data.get("out") and data.get("seed") is not None:
        data["out"] = os.path.join(ensure_output_folder(), f"{args.experiment}_seed{data['seed']}.json")
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as e:
        raise ExperimentError(f"bad config: {e}") from e


def main(argv: Optional[List[str]] = None) -> int:
    """Run one experiment; returns the process exit status."""
    args = build_parser().parse_args(argv)
    try:
        cfg = load_experiment_config(args)
    except (ExperimentError, InvalidArgumentError) as e:
        print(f"loctrig: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = run_experiment(cfg)
    except LoctrigError as e:
        logger.error(f"Experiment '{cfg.name}' failed: {e}")
        print(f"loctrig: {cfg.name} failed: {e}", file=sys.stderr)
        return EXIT_FAILURE

    print(f"{cfg.name}: finished in {report.seconds:.2f}s, report at {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
