"""
sorkinlab - command-line front end

    python main.py <command> [--config FILE] [--seed N] [--out DIR]
                   [--oracle none|fock] [--tolerance X] [--set key=value ...]

Commands: sprinkle, propagator, scenario, chi-scan, verdict, rt, sample,
deco, oscillator. Each run writes its resolved config and artifacts under
<out>/<command>/ and prints a JSON summary on stdout. Errors print one JSON
record on stderr and exit with status 2; failed numerical checks exit 1.
"""

import argparse
import json
import logging
import sys
import uuid
from typing import Dict, List, Optional

from pydantic import ValidationError

from config import ensure_directories
from services.experiments import ExperimentRunner
from services.persistence import config_from_text, read_config
from utils.errors import LiteralParseError, SorkinLabError
from utils.logger import clear_run_id, set_run_id, to_jsonable
from utils.metrics import metrics_collector
from utils.validators import COMMANDS

logger = logging.getLogger(__name__)

EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sorkinlab", description="Sorkin-scenario experiments on causal sets and continua")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", help="key=value experiment file")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--out", help="Output directory")
        sub.add_argument("--oracle", choices=["none", "fock"])
        sub.add_argument("--tolerance", type=float)
        sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Override one config key")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, str]:
    values = {}
    for item in args.set:
        if "=" not in item:
            raise LiteralParseError(f"--set expects key=value, got '{item}'")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    for flag in ("seed", "out", "oracle", "tolerance"):
        value = getattr(args, flag)
        if value is not None:
            values[flag] = str(value)
    return values


def _error_record(e: Exception) -> Dict:
    if isinstance(e, SorkinLabError):
        return e.to_record()
    return {
        "error": type(e).__name__,
        "message": str(e),
        "errors": [{"loc": list(err["loc"]), "msg": err["msg"]} for err in e.errors()],
    }


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    run_id = f"run_{uuid.uuid4().hex[:12]}"
    set_run_id(run_id)
    try:
        overrides = _overrides(args)
        config = read_config(args.config, overrides) if args.config else config_from_text("", overrides)
        ensure_directories()
        summary = ExperimentRunner(config, run_id).run(args.command)
    except (SorkinLabError, ValidationError) as e:
        record = _error_record(e)
        logger.error(f"{args.command} failed: {record['message']}")
        print(json.dumps(to_jsonable(record), default=str), file=sys.stderr)
        return EXIT_ERROR
    finally:
        logger.info("Metrics snapshot", extra={"extra": metrics_collector.get_metrics()})
        clear_run_id()

    print(json.dumps(to_jsonable(summary.model_dump()), default=str))
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
