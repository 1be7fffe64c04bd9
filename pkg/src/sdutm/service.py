"""HTTP service exposing the same commands as the CLI.

Run with ``uvicorn sdutm.service:app``.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import harness
from .errors import AccuracyFailure, NumericalFailure, ResourceLimit, SdutmError
from .models import RunConfig, RunResult
from .registry import REGISTRY

app = FastAPI(title="sdutm")


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/problems")
def problems():
    return [{"name": p.name, "description": p.description, "T": p.T, "h_sweep": list(p.h_sweep),
             "solvers": list(p.solvers)} for p in REGISTRY.values()]


def _run(command: str, config: RunConfig) -> RunResult:
    try:
        columns, rows, summary = harness.run(command, config)
    except (AccuracyFailure, NumericalFailure, ResourceLimit) as exc:
        raise HTTPException(status_code=422, detail=exc.to_dict())
    except SdutmError as exc:
        raise HTTPException(status_code=400, detail=exc.to_dict())
    return RunResult(command=command, summary=harness.jsonable(summary), columns=columns,
                     rows=harness.jsonable(rows))


@app.post("/solve", response_model=RunResult)
def solve(config: RunConfig):
    return _run("solve", config)


@app.post("/converge", response_model=RunResult)
def converge(config: RunConfig):
    return _run("converge", config)


@app.post("/bench", response_model=RunResult)
def bench(config: RunConfig):
    return _run("bench", config)


@app.post("/validate", response_model=RunResult)
def validate(config: RunConfig):
    return _run("validate", config)
