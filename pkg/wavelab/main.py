"""Main entry point for the wave laboratory workflow."""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Type

import colorlog
from dotenv import load_dotenv

from .config import SUBCOMMANDS, RunConfig, build_config, load_config, parse_text
from .core.errors import ConfigError, WaveLabError
from .experiments import (
    BaseExperiment,
    ContinuationExperiment,
    ExponentChecker,
    NormSurvey,
    PicardExperiment,
    ProbeExperiment,
    RunManifest,
    SimulationExperiment,
    SweepExperiment,
    make_run_dir,
    record_run,
)

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

LOG_FORMAT = "%(log_color)s%(levelname)s%(reset)s:%(name)s:%(message)s"

EXPERIMENTS: Dict[str, Type[BaseExperiment]] = {
    "check-exponents": ExponentChecker,
    "simulate": SimulationExperiment,
    "picard": PicardExperiment,
    "continue": ContinuationExperiment,
    "norms": NormSurvey,
    "probe": ProbeExperiment,
    "sweep": SweepExperiment,
}

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def configure_logging(level: Optional[str] = None) -> int:
    """Root logger with the colour formatter; returns the numeric level."""
    name = (level or os.getenv("WAVELAB_LOG_LEVEL") or "INFO").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigError([f"unknown log level {name!r}"])
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(numeric)
    return numeric


class WaveLabWorkflow:
    """Runs one subcommand into a fresh timestamped run directory."""

    def __init__(self, config: RunConfig, subcommand: str, out: Optional[Path] = None, progress: bool = True):
        if subcommand not in EXPERIMENTS:
            raise ConfigError([f"unknown subcommand {subcommand!r}; expected one of {', '.join(SUBCOMMANDS)}"])
        self.config = config
        self.subcommand = subcommand
        self.output_root = Path(out) if out is not None else config.output_dir()
        self.progress = progress
        logger.info(f"Initializing WaveLabWorkflow for {subcommand}")

    def run(self) -> RunManifest:
        try:
            run_dir = make_run_dir(self.output_root, self.subcommand)
            logger.info(f"Writing run to {run_dir}")
            experiment = EXPERIMENTS[self.subcommand](self.config, run_dir, progress=self.progress)
            manifest, _ = record_run(experiment, self.subcommand)
            logger.info(f"Workflow completed: {'success' if manifest.success else 'failure'}")
            return manifest
        except Exception as e:
            logger.error(f"Error in workflow: {str(e)}")
            raise


def build_parser() -> argparse.ArgumentParser:
    """One subparser per subcommand; check-exponents also takes the exponents as flags."""
    parser = argparse.ArgumentParser(prog="wavelab", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "check-exponents", help="run configuration file")
        p.add_argument("--out", type=Path, help="output root (default: output.dir, $WAVELAB_OUTPUT_DIR or data/runs)")
        p.add_argument("--seed", type=int, help="probe seed (overrides probes.seed)")
        p.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: $WAVELAB_LOG_LEVEL or INFO)")
        if name == "check-exponents":
            p.add_argument("--alpha", help="nonlinearity power, exact rational such as 1/2")
            p.add_argument("--b", help="weight exponent, exact rational")
            p.add_argument("--s", help="Sobolev index for the Ḣ^s regime")
            p.add_argument("--gamma", help="Lebesgue exponent in (2, 3/b)")
            p.add_argument("--theorem", choices=["t1.1", "t1.2", "t1.3"])
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Validated config for the parsed arguments.

    check-exponents may run without a file; its flags override the eq section.
    """
    if args.subcommand != "check-exponents":
        return load_config(args.config, args.subcommand, args.seed)
    tree: Dict[str, Dict[str, str]] = {}
    lines: Dict[str, int] = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError([f"cannot read config {args.config}: {e}"]) from e
        tree, lines = parse_text(text)
    for key in ("alpha", "b", "s", "gamma", "theorem"):
        value = getattr(args, key)
        if value is not None:
            tree.setdefault("eq", {})[key] = value
            lines.pop(f"eq.{key}", None)
    return build_config(tree, lines, args.subcommand, args.seed)


def _violations(error: ConfigError) -> List[str]:
    prefix = f"line {error.line}: " if error.line is not None else ""
    return [prefix + v for v in error.violations]


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the workflow and map the outcome to an exit code."""
    args = build_parser().parse_args(argv)
    try:
        level = configure_logging(args.log_level)
        config = load_run_config(args)
    except ConfigError as e:
        for violation in _violations(e):
            logger.error(f"Error in config: {violation}")
        return EXIT_CONFIG

    try:
        workflow = WaveLabWorkflow(config, args.subcommand, args.out, progress=level <= logging.INFO)
        manifest = workflow.run()
    except ConfigError as e:
        for violation in _violations(e):
            logger.error(f"Error in config: {violation}")
        return EXIT_CONFIG
    except WaveLabError:
        return EXIT_FAILURE

    print("\nKey Statistics:")
    print(f"- Subcommand: {manifest.subcommand}")
    print(f"- Status: {'success' if manifest.success else 'failure'}")
    for key in ("theta1", "theta2"):
        if key in manifest.derived:
            print(f"- {key}: {manifest.derived[key]}")
    print(f"- Artifacts: {len(manifest.artifacts)}")
    if manifest.warnings:
        print(f"- Warnings: {len(manifest.warnings)}")
    return EXIT_OK if manifest.success else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
