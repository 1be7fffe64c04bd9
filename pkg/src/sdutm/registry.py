"""Named example problems with their continuum reference solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from . import oracles
from .errors import ConfigError
from .problem import (
    AdvectionRight,
    Grid,
    Heat,
    LinearSchrodinger,
    ProblemSpec,
    StencilKind as S,
    TimeFunction,
    dirichlet,
    grid_from_h,
    make_grid,
    neumann,
    sample_initial,
)


@dataclass(frozen=True)
class RegisteredProblem:
    """Problem family parameterized by the grid.

    ``exact`` builds the continuum solution lazily (series oracles are costly).
    """

    name: str
    description: str
    build: Callable[[Grid], ProblemSpec]
    exact: Callable[[], oracles.ExactSolution]
    L: float = 1.0
    T: float = 0.01
    h_sweep: Tuple[float, ...] = (1 / 50, 1 / 100, 1 / 200, 1 / 400)
    solvers: Tuple[str, ...] = ("sdutm-series",)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def spec(self, N: Optional[int] = None, h: Optional[float] = None) -> ProblemSpec:
        if (N is None) == (h is None):
            raise ConfigError("give exactly one of N or h")
        grid = make_grid(self.L, N) if N is not None else grid_from_h(self.L, h)
        return self.build(grid)

    def exact_solution(self) -> oracles.ExactSolution:
        if "exact" not in self._cache:
            self._cache["exact"] = self.exact()
        return self._cache["exact"]


def _sech(z):
    return 1.0 / np.cosh(z)


def _sech_pulse(x):
    return _sech(200 * (x - 0.925)) + _sech(40 * (x - 0.425))


def _sech_pulse_d1(x):
    # d/dz sech(z) = -sech(z) tanh(z)
    out = 0.0
    for a, x0 in ((200, 0.925), (40, 0.425)):
        z = a * (np.asarray(x) - x0)
        out = out - a * _sech(z) * np.tanh(z)
    return out


def _sech_pulse_d2(x):
    # d2/dz2 sech(z) = sech(z) (tanh(z)^2 - sech(z)^2)
    out = 0.0
    for a, x0 in ((200, 0.925), (40, 0.425)):
        z = a * (np.asarray(x) - x0)
        out = out + a * a * _sech(z) * (np.tanh(z) ** 2 - _sech(z) ** 2)
    return out


def _advec_sech(grid):
    # boundary data continues the pulse from beyond x = L
    v = TimeFunction.from_callable(
        lambda t: _sech_pulse(1 + t), lambda t: _sech_pulse_d1(1 + t), lambda t: _sech_pulse_d2(1 + t)
    )
    return ProblemSpec(AdvectionRight(1.0), S.FORWARD_O1, grid, sample_initial(_sech_pulse, grid),
                       [dirichlet("right", v)])


def _sin2(x):
    return np.sin(np.pi * np.asarray(x)) ** 2


def _advec_smooth(grid):
    # sin^2(pi (1 + t)) = (1 - cos(2 pi t)) / 2
    w = 2 * math.pi
    v = TimeFunction.exp_poly([(0.5, 0, 0), (-0.25, 0, 1j * w), (-0.25, 0, -1j * w)])
    return ProblemSpec(AdvectionRight(1.0), S.FORWARD_O2, grid, sample_initial(_sin2, grid),
                       [dirichlet("right", v)])


def _heat_dirichlet(grid):
    phi = lambda x: 2 * x + np.sin(5 * np.pi * x)
    return ProblemSpec(Heat(), S.CENTERED_O2, grid, sample_initial(phi, grid),
                       [dirichlet("left", 0.0), dirichlet("right", 2.0)])


def _heat_neumann_phi(x):
    return 12 * x - 10 * x**2 + 0.5 * np.sin(20 * np.pi * x**3)


def _heat_neumann(grid):
    return ProblemSpec(Heat(), S.CENTERED_O2, grid, sample_initial(_heat_neumann_phi, grid),
                       [neumann("left", 12.0), neumann("right", 30 * math.pi - 8)])


def _ls_dirichlet_phi(x):
    return 2 * (6 + 5j) * x - 10 * (1 + 1j) * x**2 + 0.5 * np.sin(4 * np.pi * x**3)


def _ls_dirichlet(grid):
    return ProblemSpec(LinearSchrodinger(), S.CENTERED_O2, grid, sample_initial(_ls_dirichlet_phi, grid),
                       [dirichlet("left", 0.0), dirichlet("right", 2.0)])


def _ls_neumann_phi(x):
    return 12 * x - 10 * x**2 + 0.5 * np.sin(4 * np.pi * x**3)


def _ls_neumann(grid):
    return ProblemSpec(LinearSchrodinger(), S.CENTERED_O2, grid, sample_initial(_ls_neumann_phi, grid),
                       [neumann("left", 12.0), neumann("right", 6 * math.pi - 8)])


def _heat4_sine(grid):
    phi = lambda x: np.sin(np.pi * x)
    return ProblemSpec(Heat(), S.CENTERED_O4, grid, sample_initial(phi, grid),
                       [dirichlet("left", 0.0), dirichlet("right", 0.0)])


def _decaying_sine():
    return oracles.ExactSolution(lambda x, t: np.exp(-np.pi**2 * t) * np.sin(np.pi * x),
                                 "heat on [0, 1], zero Dirichlet data")


REGISTRY: Dict[str, RegisteredProblem] = {
    p.name: p
    for p in (
        RegisteredProblem(
            "advec-sech", "q_t = q_x, two sech pulses, pulse continued through x = 1",
            _advec_sech, lambda: oracles.advection_traveling_wave(_sech_pulse, lambda t: _sech_pulse(1 + t), 1.0, 1.0),
            T=0.25, h_sweep=tuple(1 / (100 * 2**j) for j in range(11)),
            solvers=("sdutm-series", "fe", "rk4", "be", "tr"),
        ),
        RegisteredProblem(
            "advec-smooth", "q_t = q_x, sin^2 profile, second-order one-sided stencil",
            _advec_smooth, lambda: oracles.advection_traveling_wave(_sin2, lambda t: _sin2(1 + t), 1.0, 1.0),
            T=0.25,
        ),
        RegisteredProblem(
            "heat-dirichlet", "q_t = q_xx, phi = 2x + sin(5 pi x), q(0) = 0, q(1) = 2",
            _heat_dirichlet, oracles.heat_dirichlet_example, T=0.01,
            solvers=("sdutm-series", "sdutm-integral", "fe", "rk4", "be", "tr"),
        ),
        RegisteredProblem(
            "heat-neumann", "q_t = q_xx, flux 12 at x = 0 and 30 pi - 8 at x = 1",
            _heat_neumann,
            lambda: oracles.separation_series(Heat(), _heat_neumann_phi, "neumann", 12.0, 30 * math.pi - 8, 1.0, 400),
            T=0.005,
        ),
        RegisteredProblem(
            "ls-dirichlet", "q_t = (i/2) q_xx, complex polynomial plus sin(4 pi x^3), q(0) = 0, q(1) = 2",
            _ls_dirichlet,
            lambda: oracles.separation_series(LinearSchrodinger(), _ls_dirichlet_phi, "dirichlet", 0.0, 2.0, 1.0, 2048, 1 << 13),
            T=0.1, solvers=("sdutm-series", "sdutm-integral", "fe", "rk4", "be", "tr"),
        ),
        RegisteredProblem(
            "ls-neumann", "q_t = (i/2) q_xx, flux 12 at x = 0 and 6 pi - 8 at x = 1",
            _ls_neumann,
            lambda: oracles.separation_series(LinearSchrodinger(), _ls_neumann_phi, "neumann", 12.0, 6 * math.pi - 8, 1.0, 2048, 1 << 13),
            T=0.1,
        ),
        RegisteredProblem(
            "heat4-sine", "q_t = q_xx, phi = sin(pi x), zero data, fourth-order stencil",
            _heat4_sine, _decaying_sine, T=0.01, h_sweep=(1 / 10, 1 / 20, 1 / 40),
            solvers=("sdutm-integral",),
        ),
    )
}


def get_problem(name: str) -> RegisteredProblem:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown problem {name!r}; known: {', '.join(sorted(REGISTRY))}",
                          code="unknown-problem") from None
