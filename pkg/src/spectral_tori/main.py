"""spectral-tori command line.

spectral-tori <subcommand> [--config path] [--out dir] [--override key=value ...]

Precedence of experiment settings: builtin defaults < config file < overrides.
Exit codes: 0 ok, 1 config error, 2 numerical failure, 3 check failure.
"""
import argparse
import json
import sys

from .commands import run_subcommand
from .config import get_settings
from .errors import SpectralToriError
from .logging import configure_logging, set_run_id
from .models.schemas import SUBCOMMANDS, ExperimentConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-tori",
        description="Spinors, Dirac potentials and Floquet spectra of tori in R3 and S3.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None, help="JSON experiment configuration")
    parser.add_argument("--out", default=None, help="Output directory (default: output.directory)")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Dotted config key with a JSON value, e.g. grid.n1=128; may be repeated",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger = configure_logging()
    run_id = set_run_id()
    settings = get_settings()
    logger.info("spectral_tori_starting", subcommand=args.subcommand, run_id=run_id, threads=settings.threads)

    try:
        config = ExperimentConfig.load(args.config, args.override)
        report = run_subcommand(args.subcommand, config, args.out)
    except SpectralToriError as exc:
        logger.error("subcommand_failed", code=exc.code, exit_code=exc.exit_code, message=exc.message)
        print(json.dumps({"error": exc.to_dict()}, sort_keys=True))
        return exc.exit_code

    print(json.dumps({"subcommand": report.subcommand, "checks": len(report.checks), "failed": report.failed}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
