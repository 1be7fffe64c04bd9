"""Small-time-increment expansion of first-order one-sided advection.

Over a short step ``tau`` starting at ``t0`` the initial-condition part is kept
exact (Poisson weights) while the boundary part is expanded as a polynomial
``sum_l K_l(n) tau^l`` whose coefficients need no quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dispersion import require_valid
from .errors import InvalidArgument, UnsupportedDiscretization
from .problem import AdvectionRight, Grid, ProblemSpec, Side, SolutionField, StencilKind as S
from .series import _correlate, poisson_weights

MAX_ORDER = 3


class SmallTimeWarning(UserWarning):
    """Step is outside the regime ``tau c / h <= 1`` where the expansion is accurate."""


@dataclass(frozen=True)
class SmallTimeExpansion:
    """Correction coefficients ``K[l-1, n]`` for ``l = 1..order`` and ``n = 0..N``."""

    order: int
    K: np.ndarray
    t0: float

    def correction(self, tau: float) -> np.ndarray:
        powers = tau ** np.arange(1, self.order + 1)
        return powers @ self.K


def moment_integral(m: int, n: int, grid: Grid, c: float) -> float:
    """``integral_{-pi/h}^{pi/h} exp(i k (n - N) h) W(k)^m dk`` in closed form.

    Nonzero only when ``m + n >= N``.
    """
    N, h = grid.N, grid.h
    if m < 0 or not (0 <= n <= N):
        raise InvalidArgument("need m >= 0 and 0 <= n <= N")
    d = N - n
    if m < d:
        return 0.0
    return 2 * math.pi * (-1) ** d / h * (c / h) ** m * math.comb(m, d)


def _check(spec: ProblemSpec):
    if not (isinstance(spec.equation, AdvectionRight) and spec.stencil is S.FORWARD_O1):
        raise UnsupportedDiscretization("small-time expansion covers forward first-order advection only")
    require_valid(spec)


def smalltime_coefficients(spec: ProblemSpec, t0: float, order: int = MAX_ORDER) -> SmallTimeExpansion:
    """``K_l(n) = (c / (2 pi l!)) sum_j (-1)^(l-1-j) I_{l-1-j}(n) v^(j)(t0)``.

    The alternating factor comes from expanding
    ``integral_0^tau exp(-W s) v(t0 + tau - s) ds`` in powers of ``tau``.
    """
    _check(spec)
    if not (1 <= order <= MAX_ORDER):
        raise InvalidArgument(f"order must be between 1 and {MAX_ORDER}")
    v = spec.bc(Side.RIGHT).data
    derivs = [complex(v.derivative(j)(t0)) for j in range(order)]
    grid, c = spec.grid, spec.equation.c
    N = grid.N
    K = np.zeros((order, N + 1), dtype=complex)
    for ell in range(1, order + 1):
        # only n >= N - (l - 1) can be reached
        for n in range(max(0, N - ell + 1), N + 1):
            acc = 0j
            for j in range(ell):
                m = ell - 1 - j
                acc += (-1) ** m * moment_integral(m, n, grid, c) * derivs[j]
            K[ell - 1, n] = c / (2 * math.pi * math.factorial(ell)) * acc
    return SmallTimeExpansion(order, K, float(t0))


def smalltime_solve(spec: ProblemSpec, t0: float, tau: float, order: int = MAX_ORDER) -> SolutionField:
    """Approximate ``q_n(t0 + tau)`` from nodal data ``spec.ic`` given at ``t0``.

    Boundary data is read at absolute times. Warns when ``tau c / h > 1``.
    """
    if tau < 0:
        raise InvalidArgument("step tau must be nonnegative")
    exp = smalltime_coefficients(spec, t0, order)
    grid, c = spec.grid, spec.equation.c
    N, h = grid.N, grid.h
    a = c * tau / h
    if a > 1:
        warnings.warn(f"tau c / h = {a:.3g} exceeds 1; expansion may be inaccurate", SmallTimeWarning)
    phi = np.asarray(spec.ic.values)
    out = np.empty(N + 2, dtype=complex)
    out[: N + 1] = _correlate(poisson_weights(a, N + 1), phi[: N + 1]) + exp.correction(tau)
    out[N + 1] = spec.bc(Side.RIGHT).data(t0 + tau)
    return SolutionField(grid, t0 + tau, out, {"solver": "smalltime", "order": order, "t0": t0, "tau": tau})
