"""Method-of-lines finite-difference baselines with banded storage."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Tuple

import numpy as np
import scipy.sparse
from scipy.linalg import lapack

from .dispersion import require_valid
from .errors import InvalidArgument, NumericalFailure, UnsupportedDiscretization
from .problem import (
    AdvectionLeft,
    AdvectionRight,
    BCKind,
    Heat,
    LinearSchrodinger,
    ProblemSpec,
    Side,
    SolutionField,
    StencilKind as S,
    TimeFunction,
    diffusion_factor,
)

# forcing entry: (row, weight, data); contributes weight * data(t) to row
ForcingTerm = Tuple[int, complex, TimeFunction]


@dataclass(frozen=True)
class OdeSystem:
    """``dQ/dt = A Q + forcing(t)`` over the unknown nodes.

    ``bands`` holds ``A`` in LAPACK general-band layout: ``bands[u + i - j, j]
    = A[i, j]`` with ``lower``/``upper`` bandwidths.
    """

    bands: np.ndarray
    lower: int
    upper: int
    forcing_terms: Tuple[ForcingTerm, ...]
    unknowns: np.ndarray
    boundary: Tuple[Tuple[int, TimeFunction], ...]
    n_nodes: int

    @property
    def dim(self) -> int:
        return self.bands.shape[1]

    def dense(self) -> np.ndarray:
        n, u = self.dim, self.upper
        A = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(max(0, i - self.lower), min(n, i + u + 1)):
                A[i, j] = self.bands[u + i - j, j]
        return A

    @cached_property
    def sparse(self) -> scipy.sparse.csr_matrix:
        n, u = self.dim, self.upper
        offsets = list(range(-self.lower, u + 1))
        # diagonal d holds A[i, i + d] = bands[u - d, i + d]
        diags = [self.bands[u - d, max(d, 0) : n + min(d, 0)] for d in offsets]
        return scipy.sparse.diags(diags, offsets, shape=(n, n), format="csr", dtype=complex)

    def matvec(self, Q) -> np.ndarray:
        return self.sparse @ np.asarray(Q, dtype=complex)

    @cached_property
    def _constant_forcing(self):
        if not self.forcing_is_constant:
            return None
        g = self._assemble_forcing(0.0)
        g.setflags(write=False)
        return g

    def _assemble_forcing(self, t: float) -> np.ndarray:
        g = np.zeros(self.dim, dtype=complex)
        for row, weight, data in self.forcing_terms:
            g[row] += weight * complex(data(t))
        return g

    def forcing(self, t: float) -> np.ndarray:
        const = self._constant_forcing
        return const if const is not None else self._assemble_forcing(t)

    @property
    def forcing_is_constant(self) -> bool:
        return all(d.is_constant for _, _, d in self.forcing_terms)

    def rhs(self, Q, t) -> np.ndarray:
        return self.matvec(Q) + self.forcing(t)

    def initial_state(self, ic) -> np.ndarray:
        values = np.asarray(getattr(ic, "values", ic), dtype=complex)
        return values[self.unknowns].copy()

    def full(self, Q, t: float) -> np.ndarray:
        """Nodal vector ``n = 0..N+1`` with Dirichlet values reattached."""
        out = np.zeros(self.n_nodes, dtype=complex)
        out[self.unknowns] = Q
        for node, data in self.boundary:
            out[node] = complex(data(t))
        return out


class _Builder:
    """Collects rows of a banded operator expressed through node references."""

    def __init__(self, unknowns, n_nodes):
        self.unknowns = np.asarray(unknowns)
        self.pos = {int(j): i for i, j in enumerate(self.unknowns)}
        self.n_nodes = n_nodes
        self.entries: Dict[Tuple[int, int], complex] = {}
        self.forcing: List[ForcingTerm] = []
        # node -> list of (unknown node or None, weight, data or None)
        self.closure: Dict[int, list] = {}

    def define(self, node, parts):
        """Express ``q_node`` as ``sum weight * q_other + sum weight * data(t)``."""
        self.closure[node] = parts

    def add(self, row_node, node, weight):
        row = self.pos[row_node]
        if node in self.pos:
            key = (row, self.pos[node])
            self.entries[key] = self.entries.get(key, 0) + weight
            return
        if node not in self.closure:
            raise UnsupportedDiscretization(f"node {node} has no closure")
        for ref, w, data in self.closure[node]:
            if ref is not None:
                self.add(row_node, ref, weight * w)
            else:
                self.forcing.append((row, weight * w, data))

    def build(self, boundary) -> OdeSystem:
        n = len(self.unknowns)
        lower = max([i - j for (i, j) in self.entries] + [0])
        upper = max([j - i for (i, j) in self.entries] + [0])
        bands = np.zeros((lower + upper + 1, n), dtype=complex)
        for (i, j), w in self.entries.items():
            bands[upper + i - j, j] += w
        merged = [(r, complex(w), d) for r, w, d in self.forcing if w != 0 and not d.is_zero]
        return OdeSystem(bands, lower, upper, tuple(merged), self.unknowns, tuple(boundary), self.n_nodes)


def _ghost_heat4(node_bc, inner1, inner2, data, derivs, h, variant):
    """Ghost values beyond a Dirichlet end for the fourth-order closure.

    Solving the two second-derivative relations gives the odd reflections
    ``q_-1 = 2u - q_1 + h^2 u' + h^4 u''/12`` and
    ``q_-2 = 2u - q_2 + 4 h^2 u' + 4 h^4 u''/3``.
    """
    ud, udd = derivs
    first = [(None, 2.0, data), (inner1, -1.0, None), (None, h**2, ud)]
    second = [(None, 2.0, data), (inner2, -1.0, None), (None, 4 * h**2, ud)]
    if variant == "fourth-order":
        first.append((None, h**4 / 12, udd))
        second.append((None, 4 * h**4 / 3, udd))
    return first, second


def assemble_system(spec: ProblemSpec, closure: str = "default") -> OdeSystem:
    """Banded ODE system for an accepted spec.

    Advection: unknowns ``0..N``. Dirichlet heat/LS: ``1..N``. Neumann:
    ``0..N+1`` with first-order ghost elimination. Fourth-order heat uses the
    ghost closure from the second and fourth derivative boundary relations.
    """
    require_valid(spec)
    eq, st, grid = spec.equation, spec.stencil, spec.grid
    N, h = grid.N, grid.h
    n_nodes = N + 2

    if isinstance(eq, (AdvectionRight, AdvectionLeft)):
        c = eq.c
        right = isinstance(eq, AdvectionRight)
        inflow_node = N + 1 if right else 0
        data = spec.bc(Side.RIGHT if right else Side.LEFT).data
        sgn = 1 if right else -1
        unknowns = np.arange(0, N + 1) if right else np.arange(1, N + 2)
        b = _Builder(unknowns, n_nodes)
        b.define(inflow_node, [(None, 1.0, data)])
        if st in (S.FORWARD_O1, S.BACKWARD_O1):
            for n in unknowns:
                b.add(n, n, -c / h)
                b.add(n, n + sgn, c / h)
        else:
            variant = "first-order" if closure == "first-order" else "second-order"
            vd = data.derivative(1)
            ghost = [(None, 1.0, data), (None, h / c, vd)]
            if variant == "second-order":
                ghost.append((None, h**2 / (2 * c**2), data.derivative(2)))
            b.define(inflow_node + sgn, ghost)
            for n in unknowns:
                b.add(n, n, -3 * c / (2 * h))
                b.add(n, n + sgn, 4 * c / (2 * h))
                b.add(n, n + 2 * sgn, -c / (2 * h))
        return b.build([(inflow_node, data)])

    if isinstance(eq, (Heat, LinearSchrodinger)):
        alpha = diffusion_factor(eq)
        left, right = spec.bc(Side.LEFT), spec.bc(Side.RIGHT)
        if st is S.CENTERED_O2 and left.kind is BCKind.DIRICHLET:
            b = _Builder(np.arange(1, N + 1), n_nodes)
            b.define(0, [(None, 1.0, left.data)])
            b.define(N + 1, [(None, 1.0, right.data)])
            for n in range(1, N + 1):
                for d, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
                    b.add(n, n + d, alpha * w / h**2)
            return b.build([(0, left.data), (N + 1, right.data)])
        if st is S.CENTERED_O2 and left.kind is BCKind.NEUMANN:
            b = _Builder(np.arange(0, N + 2), n_nodes)
            # (q_0 - q_-1)/h = u1 and (q_{N+2} - q_{N+1})/h = v1
            b.define(-1, [(0, 1.0, None), (None, -h, left.data)])
            b.define(N + 2, [(N + 1, 1.0, None), (None, h, right.data)])
            for n in range(0, N + 2):
                for d, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
                    b.add(n, n + d, alpha * w / h**2)
            return b.build([])
        if st is S.CENTERED_O4 and left.kind is BCKind.DIRICHLET:
            variant = "second-order" if closure == "second-order" else "fourth-order"
            u, v = left.data, right.data
            uds = (u.derivative(1), u.derivative(2) if variant == "fourth-order" else None)
            vds = (v.derivative(1), v.derivative(2) if variant == "fourth-order" else None)
            b = _Builder(np.arange(1, N + 1), n_nodes)
            b.define(0, [(None, 1.0, u)])
            b.define(N + 1, [(None, 1.0, v)])
            g1, g2 = _ghost_heat4(0, 1, 2, u, uds, h, variant)
            b.define(-1, g1)
            b.define(-2, g2)
            g1, g2 = _ghost_heat4(N + 1, N, N - 1, v, vds, h, variant)
            b.define(N + 2, g1)
            b.define(N + 3, g2)
            stencil = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))
            for n in range(1, N + 1):
                for d, w in stencil:
                    b.add(n, n + d, w / (12 * h**2))
            return b.build([(0, u), (N + 1, v)])
    raise UnsupportedDiscretization(
        f"no finite-difference system for {eq.name} with {st.value} and these boundary conditions"
    )


# ---------------------------------------------------------------------------
# banded linear algebra


def band_factor(system: OdeSystem, shift: complex = 1.0, scale: complex = -1.0):
    """LU factors of ``shift*I + scale*A`` via LAPACK ``zgbtrf``."""
    kl, ku, n = system.lower, system.upper, system.dim
    ab = np.zeros((2 * kl + ku + 1, n), dtype=complex)
    ab[kl:, :] = scale * system.bands
    ab[kl + ku, :] += shift
    lu, piv, info = lapack.zgbtrf(ab, kl, ku)
    if info != 0:
        raise NumericalFailure("singular banded system", info=int(info))
    return lu, piv, kl, ku


def band_solve(factors, rhs) -> np.ndarray:
    lu, piv, kl, ku = factors
    x, info = lapack.zgbtrs(lu, kl, ku, np.asarray(rhs, dtype=complex), piv)
    if info != 0:
        raise NumericalFailure("banded back-substitution failed", info=int(info))
    return x


# ---------------------------------------------------------------------------
# steppers

_KINDS = ("fe", "rk4", "be", "tr")


@dataclass(frozen=True)
class Stepper:
    kind: str
    dt: float
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", self.kind.lower())
        if self.kind not in _KINDS:
            raise InvalidArgument(f"unknown stepper {self.kind!r}")
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise InvalidArgument("time step must be positive")

    def factors(self, system: OdeSystem):
        key = id(system)
        if key not in self._cache:
            theta = 1.0 if self.kind == "be" else 0.5
            self._cache[key] = (system, band_factor(system, 1.0, -theta * self.dt))
        return self._cache[key][1]


def step(system: OdeSystem, stepper: Stepper, Q, t: float) -> np.ndarray:
    """Advance ``Q`` from ``t`` to ``t + dt``."""
    dt = stepper.dt
    if stepper.kind == "fe":
        return Q + dt * system.rhs(Q, t)
    if stepper.kind == "rk4":
        k1 = system.rhs(Q, t)
        k2 = system.rhs(Q + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = system.rhs(Q + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = system.rhs(Q + dt * k3, t + dt)
        return Q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    fac = stepper.factors(system)
    if stepper.kind == "be":
        return band_solve(fac, Q + dt * system.forcing(t + dt))
    rhs = Q + 0.5 * dt * system.matvec(Q) + 0.5 * dt * (system.forcing(t) + system.forcing(t + dt))
    return band_solve(fac, rhs)


def integrate(system: OdeSystem, stepper: Stepper, Q0, T: float, grid=None, callback=None) -> SolutionField:
    """Step from 0 to ``T``; a shorter final step closes any remainder."""
    if T < 0:
        raise InvalidArgument("final time must be nonnegative")
    M = int(math.floor(T / stepper.dt * (1 + 1e-12)))
    rem = T - M * stepper.dt
    Q = np.array(Q0, dtype=complex)
    t = 0.0
    for m in range(M):
        Q = step(system, stepper, Q, t)
        t = (m + 1) * stepper.dt
        if callback is not None:
            callback(m + 1, t, Q)
    partial = rem > 1e-12 * max(T, 1.0)
    if partial:
        Q = step(system, Stepper(stepper.kind, rem), Q, t)
        t = T
    if not np.all(np.isfinite(Q)):
        raise NumericalFailure("time stepping produced non-finite values", stepper=stepper.kind)
    if grid is None:
        from .problem import Grid

        grid = Grid(1.0, system.n_nodes - 2)
    meta = {"solver": stepper.kind, "dt": stepper.dt, "steps": M, "partial_step": rem if partial else 0.0}
    return SolutionField(grid, T, system.full(Q, T), meta)


def fd_solve(spec: ProblemSpec, T: float, method: str, dt: float, closure: str = "default") -> SolutionField:
    system = assemble_system(spec, closure)
    return integrate(system, Stepper(method, dt), system.initial_state(spec.ic), T, spec.grid)
