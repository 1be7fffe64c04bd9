"""Discrete Fourier sums, time transforms of boundary data, spectral coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft

from . import quadrature
from .errors import InvalidArgument
from .problem import Grid, InitialCondition, TimeFunction

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class TimeTransformValue:
    """``value = integral_0^T exp(W t) v(t) dt`` (``W`` and ``value`` may be arrays)."""

    W: object
    T: float
    value: object


@dataclass(frozen=True)
class SpectralData:
    """Mode data feeding a series solver; arrays are indexed by ``ells``."""

    ells: np.ndarray
    k: np.ndarray
    W: np.ndarray
    b: np.ndarray
    H: Optional[np.ndarray] = None


def forward_fourier_sum(values, k, h: float, start: int = 0, stop: Optional[int] = None):
    """``h * sum_{n=start}^{stop} exp(-i k n h) values[n]`` (inclusive ``stop``).

    ``k`` may be an array; the result has its shape.
    """
    values = np.asarray(values, dtype=complex)
    if stop is None:
        stop = len(values) - 1
    if start < 0 or stop >= len(values):
        raise InvalidArgument("summation range outside the node range")
    k = np.asarray(k, dtype=complex)
    n = np.arange(start, stop + 1)
    if n.size == 0:
        return np.zeros(k.shape, dtype=complex)
    phase = np.exp(-1j * np.multiply.outer(k, n) * h)
    return h * (phase @ values[start : stop + 1])


# ---------------------------------------------------------------------------
# time transforms


def _damped_power_integral(j: int, mu, T: float):
    """``I_j(mu) = integral_0^T (T-s)^j exp(-mu s) ds`` for an array of ``mu``."""
    mu = np.asarray(mu, dtype=complex)
    z = mu * T
    small = np.abs(z) <= 1.0
    out = np.empty(mu.shape, dtype=complex)
    if small.any():
        zs = z[small]
        acc = np.zeros(zs.shape, dtype=complex)
        term = np.ones(zs.shape, dtype=complex) / math.factorial(j + 1)
        for m in range(60):
            acc += term
            term = term * (-zs) / (j + m + 2)
            if np.all(np.abs(term) <= 1e-18 * np.abs(acc)):
                break
        out[small] = math.factorial(j) * T ** (j + 1) * acc
    big = ~small
    if big.any():
        mb = mu[big]
        val = -np.expm1(-mb * T) / mb
        for i in range(1, j + 1):
            val = (T**i - i * val) / mb
        out[big] = val
    return out


def _fused_closed_form(terms, W, T):
    out = np.zeros(np.shape(W), dtype=complex)
    for coef, p, rate in terms:
        if coef == 0:
            continue
        mu = W + rate
        out += coef * np.exp(rate * T) * _damped_power_integral(p, mu, T)
    return out


def _time_breaks(W, T, max_panels=100_000):
    # oscillation panels so |Im W| * width <= pi, plus grading toward t = T
    # where exp(-W (T - t)) is concentrated for large Re W
    W = np.atleast_1d(W)
    osc = float(np.max(np.abs(W.imag))) if W.size else 0.0
    n_osc = int(min(max_panels, max(1, math.ceil(osc * T / math.pi))))
    pts = list(np.linspace(0.0, T, n_osc + 1))
    decay = float(np.max(np.abs(W.real))) if W.size else 0.0
    if decay * T > 1:
        w = T
        while w * decay > 0.25:
            w *= 0.5
            pts.append(T - w)
    return np.unique(np.clip(pts, 0.0, T))


def fused_transform(v: TimeFunction, W, T: float, tol: float = DEFAULT_TOL):
    """``integral_0^T exp(-W (T - t)) v(t) dt`` for an array of rates ``W``.

    This is ``exp(-W T)`` times the time transform, computed without forming
    either factor, so it stays finite when ``Re W T`` is large.
    """
    W = np.asarray(W, dtype=complex)
    if T < 0:
        raise InvalidArgument("final time must be nonnegative")
    if T == 0:
        return np.zeros(W.shape, dtype=complex)
    if v.is_closed_form:
        return _fused_closed_form(v.terms, W, T)
    flat = W.ravel()

    def f(t):
        return np.exp(-np.multiply.outer(T - t, flat)) * v(t)[:, None]

    tol = _attainable_tol(v, -flat, T, tol)
    val, _, _ = quadrature.integrate(f, _time_breaks(flat, T), tol=tol, rtol=tol)
    return val.reshape(W.shape)


def _attainable_tol(v: TimeFunction, rates, T: float, tol: float) -> float:
    """Raise ``tol`` to the rounding level of ``integral_0^T exp(rates t) v(t) dt``.

    Rounding in ``rates * t`` perturbs the phase by about ``eps |rates| T``, so
    no quadrature can resolve the integral below that times the integrand size.
    """
    if rates.size == 0:
        return tol
    size = math.exp(max(0.0, float(np.max(rates.real)) * T))
    size *= float(np.max(np.abs(v(np.linspace(0.0, T, 65)))))
    floor = 10 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(rates))) * T) * size * T
    return max(tol, floor)


def time_transform(v: TimeFunction, W, T: float, tol: float = DEFAULT_TOL) -> TimeTransformValue:
    """``integral_0^T exp(W t) v(t) dt``.

    Closed form for registered exponential-polynomial data, adaptive
    Gauss-Kronrod otherwise. Raises ``accuracy-failure`` on non-convergence.
    """
    if T < 0:
        raise InvalidArgument("final time must be nonnegative")
    Wa = np.asarray(W, dtype=complex)
    if v.is_closed_form:
        # integral of t^p exp((W + r) t) = fused form with rate -(W + r), reversed
        val = np.zeros(Wa.shape, dtype=complex)
        for coef, p, rate in v.terms:
            mu = -(Wa + rate)
            # integral_0^T t^p exp(-mu t) dt, via s = T - t symmetry of I_j
            val += coef * _power_exp_integral(p, mu, T)
    else:
        flat = Wa.ravel()

        def f(t):
            return np.exp(np.multiply.outer(t, flat)) * v(t)[:, None]

        breaks = _time_breaks(-flat, T)
        tol = _attainable_tol(v, flat, T, tol)
        val, _, _ = quadrature.integrate(f, breaks, tol=tol, rtol=tol)
        val = val.reshape(Wa.shape)
    if np.ndim(W) == 0:
        val = complex(val)
    return TimeTransformValue(W, T, val)


def _power_exp_integral(p: int, mu, T: float):
    """``integral_0^T t^p exp(-mu t) dt``."""
    # expand t^p = (T - s)^... is unnecessary: substitute t -> T - s gives
    # exp(-mu T) * integral_0^T (T - s)^p exp(mu s) ds = exp(-mu T) I_p(-mu)
    mu = np.asarray(mu, dtype=complex)
    return np.exp(-mu * T) * _damped_power_integral(p, -mu, T)


# ---------------------------------------------------------------------------
# spectral coefficients


def sine_coefficients(ic: InitialCondition, grid: Grid) -> np.ndarray:
    """``b_l = (2h/L) sum_{m=1}^N sin(pi l m h / L) phi_m``, indexed ``l = 0..N+1``.

    ``b_0 = b_{N+1} = 0``.
    """
    phi = np.asarray(ic.values if isinstance(ic, InitialCondition) else ic, dtype=complex)
    N, h, L = grid.N, grid.h, grid.L
    b = np.zeros(N + 2, dtype=complex)
    b[1 : N + 1] = (h / L) * scipy.fft.dst(phi[1 : N + 1], type=1)
    return b


def cosine_coefficients(ic: InitialCondition, grid: Grid) -> np.ndarray:
    """``b_l = (2h/L) sum_{m=0}^{N+1} cos(pi l (m + 1/2) h / (L + h)) phi_m``, ``l = 0..N+1``."""
    phi = np.asarray(ic.values if isinstance(ic, InitialCondition) else ic, dtype=complex)
    return (grid.h / grid.L) * scipy.fft.dct(phi, type=2)


def boundary_combination(left, right, ells=None) -> np.ndarray:
    """``H_l = left_l + (-1)^(l+1) right_l``."""
    left = np.asarray(getattr(left, "value", left), dtype=complex)
    right = np.asarray(getattr(right, "value", right), dtype=complex)
    if left.shape != right.shape:
        raise InvalidArgument("left and right transforms are not aligned")
    ells = np.arange(left.size).reshape(left.shape) if ells is None else np.asarray(ells)
    if ells.shape != left.shape:
        raise InvalidArgument("mode indices do not match the transform arrays")
    sign = np.where(ells % 2 == 1, 1.0, -1.0)
    return left + sign * right
