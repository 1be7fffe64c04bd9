"""Experiment runners behind the CLI and the service: solve, converge, bench.

Each runner returns ``(columns, rows, summary)``; writing files is left to
:func:`write_outputs` so the service can return the same data as JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import contour, fd, oracles, series
from .dispersion import validate_discretization
from .errors import ConfigError, NumericalFailure, SdutmError, UnsupportedOracle
from .models import InlineProblem, RunConfig
from .problem import (
    AdvectionLeft,
    AdvectionRight,
    Heat,
    LinearSchrodinger,
    ProblemSpec,
    SolutionField,
    StencilKind,
    TimeFunction,
    dirichlet,
    grid_from_h,
    make_grid,
    neumann,
)
from .registry import RegisteredProblem, get_problem

FD_METHODS = ("fe", "rk4", "be", "tr")


# ---------------------------------------------------------------------------
# problem and solver resolution


@dataclass(frozen=True)
class Resolved:
    """A problem family plus defaults, whether named or inline."""

    name: str
    build: Callable
    exact: Optional[Callable]
    L: float
    T: float
    h_sweep: Sequence[float]

    def spec(self, N=None, h=None) -> ProblemSpec:
        if N is not None:
            grid = make_grid(self.L, N)
        else:
            grid = grid_from_h(self.L, h if h is not None else self.h_sweep[0])
        return self.build(grid)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError("complex numbers are written [re, im]")
        return complex(v[0], v[1])
    return complex(v)


_EQUATIONS = {
    "advection-right": lambda c: AdvectionRight(c),
    "advection-left": lambda c: AdvectionLeft(c),
    "heat": lambda c: Heat(),
    "schrodinger": lambda c: LinearSchrodinger(),
}


def _inline(p: InlineProblem) -> Resolved:
    stencil = StencilKind(p.stencil)

    def build(grid):
        # a two-element list is one complex constant; grids have >= 3 nodes
        if isinstance(p.phi, list) and len(p.phi) != 2:
            vals = np.array([_complex(v) for v in p.phi])
            if vals.size != grid.N + 2:
                raise ConfigError(f"inline phi has {vals.size} values, grid needs {grid.N + 2}")
        else:
            vals = np.full(grid.N + 2, _complex(p.phi))
        bcs = []
        for side, b in (("left", p.left), ("right", p.right)):
            if b is None:
                continue
            data = TimeFunction.constant(_complex(b.value))
            bcs.append(dirichlet(side, data) if b.kind == "dirichlet" else neumann(side, data))
        return ProblemSpec(_EQUATIONS[p.equation](p.c), stencil, grid, vals, bcs)

    return Resolved("inline", build, None, p.L, 0.01, (0.01,))


def resolve(config: RunConfig) -> Resolved:
    if config.inline is not None:
        return _inline(config.inline)
    reg: RegisteredProblem = get_problem(config.problem)
    return Resolved(reg.name, reg.build, reg.exact_solution, reg.L, reg.T, reg.h_sweep)


def run_solver(spec: ProblemSpec, solver: str, T: float, dt: Optional[float] = None,
               tol: float = 1e-10, closure: str = "default") -> SolutionField:
    """Solve ``spec`` to time ``T`` with the named solver."""
    if solver == "sdutm-series":
        opts = {}
        if spec.stencil in (StencilKind.FORWARD_O2, StencilKind.BACKWARD_O2) and closure != "default":
            opts["closure"] = closure
        return series.solve_series(spec, T, **opts)
    if solver == "sdutm-integral":
        return contour.solve_integral(spec, T, tol=tol)
    if solver in FD_METHODS:
        if dt is None:
            raise ConfigError(f"solver {solver!r} needs a time step 'dt'")
        return fd.fd_solve(spec, T, solver, dt, closure)
    if solver == "oracle":
        return SolutionField(spec.grid, T, oracles.ode_oracle(spec, T, closure), {"solver": "oracle"})
    raise ConfigError(f"unknown solver {solver!r}", code="unknown-solver")


def max_error(sol: SolutionField, exact) -> float:
    err = np.max(np.abs(sol.values - exact(sol.x, sol.T)))
    if not math.isfinite(err):
        raise NumericalFailure("solution is not finite")
    return float(err)


def fit_slope(hs, errors):
    """Least-squares line through ``(log10 h, log10 error)``.

    Returns ``(slope, intercept, residual)`` with the RMS residual in decades.
    """
    x = np.log10(np.asarray(hs, dtype=float))
    y = np.log10(np.asarray(errors, dtype=float))
    if x.size < 2:
        return float("nan"), float("nan"), float("nan")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, icept]) - y) ** 2)))
    return float(slope), float(icept), resid


def _times(config: RunConfig, res: Resolved) -> List[float]:
    return list(config.T) if config.T else [res.T]


def _map(func, items, workers):
    if workers <= 1:
        return [func(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# commands


def cmd_solve(config: RunConfig):
    """Nodal solution at each requested time: ``T, n, x, re, im, abs2``."""
    res = resolve(config)
    spec = res.spec(config.N, config.h)
    rows = []
    for T in _times(config, res):
        sol = run_solver(spec, config.solver, T, config.dt, config.tol, config.closure)
        for n, (x, q) in enumerate(zip(sol.x, sol.values)):
            rows.append([T, n, x, q.real, q.imag, abs(q) ** 2])
    summary = {
        "command": "solve", "problem": res.name, "solver": config.solver,
        "N": spec.grid.N, "h": spec.grid.h, "T": _times(config, res), "rows": len(rows),
    }
    return ["T", "n", "x", "re", "im", "abs2"], rows, summary


def cmd_converge(config: RunConfig):
    """Max-norm error against the continuum solution over an ``h`` sweep."""
    res = resolve(config)
    if res.exact is None:
        raise UnsupportedOracle(f"problem {res.name!r} has no reference solution")
    exact = res.exact()
    solvers = config.solvers or [config.solver]
    hs = list(config.h_sweep or res.h_sweep)
    T = _times(config, res)[0]
    points = [(s, h) for s in solvers for h in hs]

    def one(point):
        s, h = point
        sol = run_solver(res.spec(h=h), s, T, config.dt, config.tol, config.closure)
        return max_error(sol, exact)

    errors = _map(one, points, config.workers)
    rows = [[s, h, res.spec(h=h).grid.N, T, e] for (s, h), e in zip(points, errors)]
    slopes = {}
    for s in solvers:
        e = [r[4] for r in rows if r[0] == s]
        slope, icept, resid = fit_slope(hs, e)
        slopes[s] = {"slope": slope, "intercept": icept, "residual": resid}
    summary = {"command": "converge", "problem": res.name, "T": T, "h": hs, "fits": slopes}
    return ["solver", "h", "N", "T", "error"], rows, summary


class _Timeout(Exception):
    pass


def _search(evaluate, start: int, limit: int, target: float, band: float, deadline: float):
    """Smallest count ``n`` whose error is within target.

    Doubles from ``start`` until ``error <= target``, then bisects down until
    ``|error - target| <= band`` or the bracket closes. Returns
    ``(n, error, lower_bound)``; ``n`` is ``None`` when ``limit`` is hit.
    """
    lo, n, err = None, start, None
    while True:
        if time.perf_counter() > deadline:
            raise _Timeout(n)
        err = evaluate(n)
        if err <= target:
            break
        lo = n
        if n >= limit:
            return None, err, n
        n = min(2 * n, limit)
    hi, hi_err = n, err
    lo = lo if lo is not None else 0
    while hi - lo > 1 and abs(hi_err - target) > band:
        if time.perf_counter() > deadline:
            raise _Timeout(hi)
        mid = (lo + hi) // 2
        e = evaluate(mid) if mid > 0 else math.inf
        if e <= target:
            hi, hi_err = mid, e
        else:
            lo = mid
    return hi, hi_err, lo


def _timed(func, runs: int, cutoff: float):
    total = 0.0
    for r in range(runs):
        t0 = time.perf_counter()
        func()
        total += time.perf_counter() - t0
        if total > cutoff:
            raise _Timeout(None)
    return total / runs


def _watchdog(deadline: float, steps):
    """Step callback raising :class:`_Timeout` once ``deadline`` passes."""

    def check(m, t, Q):
        if m % 256 == 0 and time.perf_counter() > deadline:
            raise _Timeout(steps)

    return check


def _safe_error(func):
    try:
        with np.errstate(all="ignore"):
            return func()
    except (NumericalFailure, FloatingPointError, OverflowError):
        return math.inf


def cmd_bench(config: RunConfig):
    """Wall-clock time to reach a target accuracy, per final time and method.

    For each ``T`` the SD-UTM series grid ``N_x`` is found first; each finite
    difference method then searches its step count ``N_t`` on that grid.
    Methods exceeding the cutoff are reported with ``status=timeout``.
    """
    res = resolve(config)
    if res.exact is None:
        raise UnsupportedOracle(f"problem {res.name!r} has no reference solution")
    exact = res.exact()
    b = config.bench
    rows = []
    for T in _times(config, res):
        deadline = time.perf_counter() + b.cutoff

        def sd_error(N):
            return _safe_error(lambda: max_error(run_solver(res.spec(N=N), "sdutm-series", T), exact))

        try:
            Nx, err, _ = _search(sd_error, b.start_N, b.max_N, b.target, b.band, deadline)
        except _Timeout:
            rows.append([T, "sdutm-series", "", "", "", "", "timeout"])
            continue
        if Nx is None:
            rows.append([T, "sdutm-series", b.max_N, 0, err, "", "unreached"])
            continue
        spec = res.spec(N=Nx)
        try:
            tc = _timed(lambda: run_solver(spec, "sdutm-series", T), b.runs, b.cutoff)
            rows.append([T, "sdutm-series", Nx, 0, err, tc, "ok"])
        except _Timeout:
            rows.append([T, "sdutm-series", Nx, 0, err, "", "timeout"])
        system = fd.assemble_system(spec, config.closure)
        Q0 = system.initial_state(spec.ic)
        for method in b.methods:
            deadline = time.perf_counter() + b.cutoff

            def fd_error(M, method=method, deadline=deadline):
                stepper = fd.Stepper(method, T / M)
                return _safe_error(lambda: max_error(
                    fd.integrate(system, stepper, Q0, T, spec.grid, _watchdog(deadline, M)), exact))

            target = max(b.target, err) + b.band
            try:
                Nt, e, lower = _search(fd_error, 1, b.max_steps, target, b.band, deadline)
            except _Timeout as t:
                rows.append([T, method, Nx, t.args[0], "", "", "timeout"])
                continue
            if Nt is None:
                rows.append([T, method, Nx, lower, e, "", "unreached"])
                continue
            stepper = fd.Stepper(method, T / Nt)
            try:
                tc = _timed(lambda: fd.integrate(system, stepper, Q0, T, spec.grid, _watchdog(deadline, Nt)), b.runs,
                            max(0.0, deadline - time.perf_counter()))
                rows.append([T, method, Nx, Nt, e, tc, "ok"])
            except _Timeout:
                rows.append([T, method, Nx, Nt, e, "", "timeout"])
    summary = {"command": "bench", "problem": res.name, "target": b.target, "T": _times(config, res),
               "runs": b.runs, "cutoff": b.cutoff}
    return ["T", "method", "N_x", "N_t", "error", "seconds", "status"], rows, summary


def cmd_validate(config: RunConfig):
    """Resolve the problem and report whether its discretization is admissible."""
    res = resolve(config)
    spec = res.spec(config.N, config.h)
    rep = validate_discretization(spec)
    summary = {"command": "validate", "problem": res.name, "N": spec.grid.N, "h": spec.grid.h,
               **rep.to_dict()}
    return ["accepted", "reason", "message"], [[rep.accepted, rep.reason, rep.message]], summary


COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "bench": cmd_bench, "validate": cmd_validate}


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if not math.isfinite(v) else f"{float(v):.17g}"
    return str(v)


def to_csv(columns, rows) -> str:
    """CSV text with a header and 17 significant digits for floats."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def jsonable(obj):
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_outputs(out: Optional[str], columns, rows, summary):
    """Write ``out`` as CSV and a sibling ``.json`` summary; return the CSV text."""
    text = to_csv(columns, rows)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        path.with_suffix(".json").write_text(json.dumps(jsonable(summary), indent=2) + "\n")
    return text


def load_config(path: str) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    return RunConfig.model_validate(data)


def run(command: str, config: RunConfig):
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    return COMMANDS[command](config)


__all__ = [
    "COMMANDS", "Resolved", "SdutmError", "cmd_bench", "cmd_converge", "cmd_solve", "cmd_validate",
    "fit_slope", "jsonable", "load_config", "max_error", "resolve", "run", "run_solver", "to_csv", "write_outputs",
]
