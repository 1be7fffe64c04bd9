"""Problem definitions: grids, equations, boundary and initial data, solutions.

Every nodal quantity is stored as complex, even for real equations, so that a
single code path serves all solvers. For real problems the imaginary part is a
free consistency check.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidArgument, InvalidProblem


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on ``[0, L]`` with ``N`` interior nodes.

    Node ``n`` sits at ``x_n = n h`` for ``n = 0..N+1`` where ``h = L/(N+1)``.
    """

    L: float
    N: int

    @property
    def h(self) -> float:
        return self.L / (self.N + 1)

    @property
    def x(self) -> np.ndarray:
        """Node coordinates, length ``N+2``."""
        return np.arange(self.N + 2) * self.h

    def coordinate(self, n):
        return np.asarray(n) * self.h

    def index(self, x):
        """Nearest node index for coordinate ``x``."""
        return np.rint(np.asarray(x) / self.h).astype(int)


def make_grid(L: float, N: int) -> Grid:
    """Build a :class:`Grid`, rejecting nonpositive length or ``N < 1``."""
    if not (L > 0) or not math.isfinite(L):
        raise InvalidArgument(f"interval length must be positive, got {L!r}")
    if int(N) != N or N < 1:
        raise InvalidArgument(f"interior node count must be an integer >= 1, got {N!r}")
    return Grid(float(L), int(N))


def grid_from_h(L: float, h: float) -> Grid:
    """Grid whose spacing is ``h`` (``L/h - 1`` must be a positive integer)."""
    N = int(round(L / h)) - 1
    if N < 1 or abs((N + 1) * h - L) > 1e-9 * L:
        raise InvalidArgument(f"h={h!r} does not divide L={L!r} into >= 2 cells")
    return make_grid(L, N)


# ---------------------------------------------------------------------------
# equations and stencils


@dataclass(frozen=True)
class AdvectionRight:
    """``q_t = c q_x`` with ``c > 0`` (information enters at ``x = L``)."""

    c: float = 1.0

    def __post_init__(self):
        if not (self.c > 0):
            raise InvalidArgument("advection speed must be strictly positive")

    name = "advection-right"


@dataclass(frozen=True)
class AdvectionLeft:
    """``q_t = -c q_x`` with ``c > 0`` (information enters at ``x = 0``)."""

    c: float = 1.0

    def __post_init__(self):
        if not (self.c > 0):
            raise InvalidArgument("advection speed must be strictly positive")

    name = "advection-left"


@dataclass(frozen=True)
class Heat:
    """``q_t = q_xx``."""

    name = "heat"


@dataclass(frozen=True)
class LinearSchrodinger:
    """``q_t = (i/2) q_xx``."""

    name = "ls"


EquationKind = Union[AdvectionRight, AdvectionLeft, Heat, LinearSchrodinger]


def diffusion_factor(eq) -> complex:
    """Coefficient in front of ``q_xx``: 1 for heat, ``i/2`` for Schrodinger."""
    if isinstance(eq, Heat):
        return 1.0 + 0j
    if isinstance(eq, LinearSchrodinger):
        return 0.5j
    raise InvalidArgument(f"{eq!r} is not a second-order equation")


class StencilKind(enum.Enum):
    FORWARD_O1 = "forward-o1"
    FORWARD_O2 = "forward-o2"
    BACKWARD_O1 = "backward-o1"
    BACKWARD_O2 = "backward-o2"
    CENTERED_O2 = "centered-o2"
    CENTERED_O4 = "centered-o4"


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class BCKind(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


# ---------------------------------------------------------------------------
# time-dependent data


# one closed-form term: coef * t**power * exp(rate * t)
Term = Tuple[complex, int, complex]


def _eval_terms(terms, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for coef, p, rate in terms:
        out = out + coef * t**p * np.exp(rate * t)
    return out


def _diff_terms(terms):
    out = []
    for coef, p, rate in terms:
        if rate != 0:
            out.append((coef * rate, p, rate))
        if p > 0:
            out.append((coef * p, p - 1, rate))
    return tuple(out)


@dataclass(frozen=True)
class TimeFunction:
    """Boundary data ``t -> complex``.

    Either a closed-form sum of ``coef * t**p * exp(rate*t)`` terms (which
    admits exact time transforms and derivatives) or an arbitrary callable
    with optional first and second derivative callables.
    """

    func: Optional[Callable] = None
    derivs: Tuple[Callable, ...] = ()
    terms: Optional[Tuple[Term, ...]] = None

    @classmethod
    def constant(cls, value) -> "TimeFunction":
        value = complex(value)
        return cls(terms=((value, 0, 0j),) if value != 0 else ())

    @classmethod
    def zero(cls) -> "TimeFunction":
        return cls(terms=())

    @classmethod
    def exp_poly(cls, terms: Sequence[Term]) -> "TimeFunction":
        """Closed-form sum of ``coef * t**p * exp(rate*t)`` terms."""
        return cls(terms=tuple((complex(a), int(p), complex(r)) for a, p, r in terms))

    @classmethod
    def sinusoid(cls, amplitude, omega, phase=0.0) -> "TimeFunction":
        """``amplitude * sin(omega t + phase)`` as two exponentials."""
        a = complex(amplitude) / 2j
        e = np.exp(1j * phase)
        return cls(terms=((a * e, 0, 1j * omega), (-a / e, 0, -1j * omega)))

    @classmethod
    def from_callable(cls, func, first=None, second=None) -> "TimeFunction":
        derivs = tuple(d for d in (first, second) if d is not None)
        if second is not None and first is None:
            raise InvalidArgument("second derivative given without first")
        return cls(func=func, derivs=derivs)

    @property
    def is_closed_form(self) -> bool:
        return self.terms is not None

    @property
    def is_constant(self) -> bool:
        return self.terms is not None and all(p == 0 and r == 0 for _, p, r in self.terms)

    @property
    def constant_value(self) -> complex:
        return complex(sum(a for a, _, _ in self.terms)) if self.terms else 0j

    @property
    def is_zero(self) -> bool:
        return self.terms is not None and all(a == 0 for a, _, _ in self.terms)

    def __call__(self, t):
        if self.terms is not None:
            return _eval_terms(self.terms, t)
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=complex) + 0j

    def derivative(self, order: int = 1) -> "TimeFunction":
        """Time derivative; raises ``invalid-problem`` if unavailable."""
        if order == 0:
            return self
        if self.terms is not None:
            terms = self.terms
            for _ in range(order):
                terms = _diff_terms(terms)
            return TimeFunction(terms=terms)
        if order > len(self.derivs):
            raise InvalidProblem(
                "boundary data lacks the time derivatives this solver needs",
                code="derivatives-required",
            )
        rest = self.derivs[order:]
        return TimeFunction(func=self.derivs[order - 1], derivs=rest)

    def has_derivatives(self, order: int) -> bool:
        return self.terms is not None or len(self.derivs) >= order


# ---------------------------------------------------------------------------
# boundary / initial data, problem, solution


@dataclass(frozen=True)
class BoundaryCondition:
    side: Side
    kind: BCKind
    data: TimeFunction = field(default_factory=TimeFunction.zero)


def dirichlet(side, data=0.0) -> BoundaryCondition:
    side = Side(side)
    if not isinstance(data, TimeFunction):
        data = TimeFunction.constant(data)
    return BoundaryCondition(side, BCKind.DIRICHLET, data)


def neumann(side, data=0.0) -> BoundaryCondition:
    side = Side(side)
    if not isinstance(data, TimeFunction):
        data = TimeFunction.constant(data)
    return BoundaryCondition(side, BCKind.NEUMANN, data)


@dataclass(frozen=True)
class InitialCondition:
    """Initial samples ``phi_n``, ``n = 0..N+1``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


def sample_initial(phi: Callable, grid: Grid) -> InitialCondition:
    """Sample ``phi`` at every node of ``grid``."""
    x = grid.x
    vals = phi(x)
    vals = np.broadcast_to(np.asarray(vals, dtype=complex), x.shape)
    return InitialCondition(vals)


@dataclass(frozen=True)
class ProblemSpec:
    equation: EquationKind
    stencil: StencilKind
    grid: Grid
    ic: InitialCondition
    bcs: Tuple[BoundaryCondition, ...]

    def __post_init__(self):
        object.__setattr__(self, "bcs", tuple(self.bcs))
        if not isinstance(self.ic, InitialCondition):
            object.__setattr__(self, "ic", InitialCondition(self.ic))
        if len(self.ic) != self.grid.N + 2:
            raise InvalidArgument(
                f"initial data has {len(self.ic)} samples, grid needs {self.grid.N + 2}"
            )

    def bc(self, side) -> Optional[BoundaryCondition]:
        side = Side(side)
        for b in self.bcs:
            if b.side is side:
                return b
        return None

    def with_ic(self, ic) -> "ProblemSpec":
        if not isinstance(ic, InitialCondition):
            ic = InitialCondition(ic)
        return ProblemSpec(self.equation, self.stencil, self.grid, ic, self.bcs)

    def with_bcs(self, bcs) -> "ProblemSpec":
        return ProblemSpec(self.equation, self.stencil, self.grid, self.ic, tuple(bcs))


def compatibility_warnings(spec: ProblemSpec, tol: float = 1e-8):
    """Corner-compatibility diagnostics (Dirichlet data vs initial samples).

    Mismatches are reported through :mod:`warnings` and returned as strings;
    they never block a solve.
    """
    msgs = []
    phi = spec.ic.values
    for b, idx in ((spec.bc(Side.LEFT), 0), (spec.bc(Side.RIGHT), -1)):
        if b is None or b.kind is not BCKind.DIRICHLET:
            continue
        d = abs(complex(b.data(0.0)) - phi[idx])
        if d > tol * (1 + abs(phi[idx])):
            msgs.append(f"{b.side.value} corner mismatch {d:.3e}")
    for m in msgs:
        warnings.warn(m, stacklevel=2)
    return msgs


@dataclass(frozen=True)
class SolutionField:
    """Nodal solution ``q_n(T)`` for ``n = 0..N+1``."""

    grid: Grid
    T: float
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self):
        return self.grid.x
