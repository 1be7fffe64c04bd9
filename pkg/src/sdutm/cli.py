"""Command-line front end: ``sdutm {solve,converge,bench,validate}``.

Exit status 0 on success, 1 on numerical failure, 2 on configuration errors.
Errors are printed to stderr as a JSON object ``{"error": {"code", "message"}}``.
"""
from __future__ import annotations

import argparse
import json
import sys

from pydantic import ValidationError

from . import harness
from .errors import (
    AccuracyFailure,
    NumericalFailure,
    ResourceLimit,
    SdutmError,
)
from .models import RunConfig

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2
_NUMERICAL = (AccuracyFailure, NumericalFailure, ResourceLimit)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdutm", description="Exact-in-time solvers for semidiscretized IBVPs.")
    p.add_argument("command", choices=sorted(harness.COMMANDS))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--problem", help="registered problem name (overrides the config)")
    p.add_argument("--solver", help="solver name (overrides the config)")
    p.add_argument("--out", help="CSV output path; a .json summary is written beside it")
    p.add_argument("--tol", type=float, help="quadrature tolerance (overrides the config)")
    return p


def _config(args) -> RunConfig:
    data = {}
    if args.config:
        data = harness.load_config(args.config).model_dump(exclude_unset=True)
    if args.problem is not None:
        data["problem"] = args.problem
        data.pop("inline", None)
    for key in ("solver", "out", "tol"):
        if getattr(args, key) is not None:
            data[key] = getattr(args, key)
    return RunConfig.model_validate(data)


def _fail(code: str, message: str, status: int) -> int:
    print(json.dumps({"error": {"code": code, "message": message}}), file=sys.stderr)
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config(args)
        columns, rows, summary = harness.run(args.command, config)
        text = harness.write_outputs(config.out, columns, rows, summary)
    except ValidationError as exc:
        return _fail("config-error", str(exc), EXIT_CONFIG)
    except _NUMERICAL as exc:
        return _fail(exc.code, str(exc), EXIT_NUMERICAL)
    except SdutmError as exc:
        return _fail(exc.code, str(exc), EXIT_CONFIG)
    except FloatingPointError as exc:
        return _fail("numerical-failure", str(exc), EXIT_NUMERICAL)
    if config.out is None:
        sys.stdout.write(text)
    if args.command == "validate" and not summary.get("accepted", True):
        return _fail(summary["reason"], summary["message"] or summary["reason"], EXIT_CONFIG)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
