# app/main.py

import argparse
import logging
import sys
from typing import List, Optional

from app.core.errors import ConfigError, ExitCode, FemtonetError, OracleCapExceeded
from app.core.logging import configure_logging
from app.tasks.experiment import run_experiment, run_oracle
from app.utils.config_file import apply_overrides, config_hash, load_config

logger = logging.getLogger("app.main")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML scenario file; omitted keys keep their defaults")
    common.add_argument("--seed", type=int, help="master seed (overrides the file)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the file)")
    common.add_argument("--m-max", type=int, dest="m_max", help="largest FBS density in the sweep")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on stderr")

    parser = argparse.ArgumentParser(
        prog="femtonet",
        description="Cooperative Q-learning power allocation for dense femtocell networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="individual + cooperative density sweep")
    sub.add_parser("oracle", parents=[common], help="exhaustive search on the m_max layout")
    sub.add_parser("validate-config", parents=[common], help="load, validate and print the effective config hash")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(quiet=args.quiet)

    try:
        config = apply_overrides(load_config(args.config), seed=args.seed, out_dir=args.out, m_max=args.m_max)
    except ConfigError as exc:
        logger.error("Config error: %s", exc)
        return ExitCode.CONFIG_ERROR

    try:
        if args.command == "validate-config":
            print(config_hash(config))
        elif args.command == "run":
            manifest = run_experiment(config)
            if not args.quiet:
                print(manifest.model_dump_json(indent=2))
        elif args.command == "oracle":
            result, gap = run_oracle(config)
            if not args.quiet:
                print(result.model_dump_json(indent=2))
                if gap is not None:
                    print(f"optimality gap: {gap:.6f}")
    except OracleCapExceeded as exc:
        logger.error("Oracle refused: %s", exc)
        return ExitCode.ORACLE_CAP_EXCEEDED
    except (FemtonetError, OSError) as exc:
        logger.error("Run failed: %s", exc)
        return ExitCode.RUNTIME_ERROR

    return ExitCode.OK


if __name__ == "__main__":
    sys.exit(main())
