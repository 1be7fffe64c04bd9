"""Pydantic schemas shared by the CLI and the HTTP service."""
from __future__ import annotations

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SOLVERS = ("sdutm-series", "sdutm-integral", "fe", "rk4", "be", "tr", "oracle")
Number = Union[float, List[float]]  # real, or [re, im]


class BoundarySpec(BaseModel):
    """Constant boundary data on one side."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["dirichlet", "neumann"] = "dirichlet"
    value: Number = 0.0


class InlineProblem(BaseModel):
    """Problem given directly instead of by registry name.

    ``phi`` is either one constant or the full list of ``N + 2`` nodal values.
    """

    model_config = ConfigDict(extra="forbid")

    equation: Literal["advection-right", "advection-left", "heat", "schrodinger"]
    stencil: Literal["forward-o1", "forward-o2", "backward-o1", "backward-o2", "centered-o2", "centered-o4"]
    c: float = 1.0
    L: float = 1.0
    phi: Union[Number, List[Number]] = 0.0
    left: Optional[BoundarySpec] = None
    right: Optional[BoundarySpec] = None


class BenchSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    target: float = Field(1e-2, gt=0, description="target max-norm error E")
    band: float = Field(1e-4, gt=0, description="accepted |error - E|")
    runs: int = Field(10, ge=1, description="timing repetitions")
    cutoff: float = Field(1e3, gt=0, description="abandon a method beyond this many seconds")
    start_N: int = Field(8, ge=1)
    max_N: int = Field(1 << 16, ge=1)
    max_steps: int = Field(1 << 24, ge=1)
    methods: List[str] = Field(default_factory=lambda: ["fe", "rk4", "be", "tr"])


class RunConfig(BaseModel):
    """One experiment: a problem, solvers, grid and time parameters, outputs."""

    model_config = ConfigDict(extra="forbid")

    problem: Optional[str] = None
    inline: Optional[InlineProblem] = None
    solver: str = "sdutm-series"
    solvers: Optional[List[str]] = None
    N: Optional[int] = Field(None, ge=1)
    h: Optional[float] = Field(None, gt=0)
    T: Optional[List[float]] = None
    h_sweep: Optional[List[float]] = None
    dt: Optional[float] = Field(None, gt=0)
    tol: float = Field(1e-10, gt=0)
    closure: str = "default"
    workers: int = Field(1, ge=1)
    out: Optional[str] = None
    bench: BenchSettings = Field(default_factory=BenchSettings)

    @field_validator("T", "h_sweep", "solvers")
    @classmethod
    def _nonempty(cls, v):
        if v is not None and len(v) == 0:
            raise ValueError("sweep lists must be nonempty")
        return v

    @field_validator("T")
    @classmethod
    def _times(cls, v):
        if v is not None and any(t < 0 for t in v):
            raise ValueError("times must be nonnegative")
        return v

    @field_validator("h_sweep")
    @classmethod
    def _spacings(cls, v):
        if v is not None and any(h <= 0 for h in v):
            raise ValueError("mesh widths must be positive")
        return v

    @field_validator("solver")
    @classmethod
    def _solver(cls, v):
        if v not in SOLVERS:
            raise ValueError(f"unknown solver {v!r}; choose from {', '.join(SOLVERS)}")
        return v

    @field_validator("solvers")
    @classmethod
    def _solver_list(cls, v):
        for s in v or ():
            cls._solver(s)
        return v

    @model_validator(mode="after")
    def _one_problem(self):
        if (self.problem is None) == (self.inline is None):
            raise ValueError("give exactly one of 'problem' or 'inline'")
        if self.N is not None and self.h is not None:
            raise ValueError("give at most one of 'N' or 'h'")
        return self


class ErrorInfo(BaseModel):
    code: str
    message: str


class RunResult(BaseModel):
    """Summary plus tabular rows, as returned by the service."""

    command: str
    summary: dict
    columns: List[str]
    rows: List[list]
