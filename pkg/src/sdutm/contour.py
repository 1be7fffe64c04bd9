"""Contour-integral evaluation of the semidiscrete solutions.

Each solution is written as a real-line initial-condition integral plus
integrals over paths in the upper and lower half-planes that avoid the real
poles ``k_l = pi l / L`` of ``1/(exp(2ikL) - 1)``. The integrands are
``2 pi / h``-periodic, so every path runs from ``Re k = -pi/h`` to
``Re k = +pi/h`` at matching heights and the vertical closing segments cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np
import scipy.fft

from . import quadrature
from . import transforms as tr
from .dispersion import DispersionModel, make_dispersion, require_valid
from .errors import InvalidArgument, UnsupportedDiscretization
from .problem import BCKind, Heat, LinearSchrodinger, ProblemSpec, Side, SolutionField, StencilKind as S

# allowed growth exponent max(Re(-W) T) along Schrodinger paths
GROWTH_BUDGET = 3.0
# the lower path contributes with this sign when both paths run left to right
LOWER_SIGN = -1.0


@dataclass(frozen=True)
class PathSegment:
    """Smooth map ``s in [0, 1] -> k(s)`` with derivative ``dk(s)``."""

    k: Callable
    dk: Callable


def _line(a: complex, b: complex) -> PathSegment:
    return PathSegment(lambda s: a + (b - a) * np.asarray(s), lambda s: (b - a) * np.ones_like(s, dtype=complex))


def _decay_curve(x0, x1, y_start, y_floor, rate, h) -> PathSegment:
    """``x + i (y_floor + (y_start - y_floor) exp(-rate (x - x0) h))`` for ``x`` from ``x0`` to ``x1``."""
    span = x1 - x0

    def k(s):
        x = x0 + span * np.asarray(s)
        return x + 1j * (y_floor + (y_start - y_floor) * np.exp(-rate * (x - x0) * h))

    def dk(s):
        x = x0 + span * np.asarray(s)
        return span * (1 - 1j * rate * h * (y_start - y_floor) * np.exp(-rate * (x - x0) * h))

    return PathSegment(k, dk)


def _reflect(seg: PathSegment) -> PathSegment:
    """``k -> -k`` with the orientation reversed, so left-to-right is preserved."""
    return PathSegment(lambda s: -seg.k(1 - np.asarray(s)), lambda s: seg.dk(1 - np.asarray(s)))


def _conjugate(seg: PathSegment) -> PathSegment:
    return PathSegment(lambda s: np.conj(seg.k(s)), lambda s: np.conj(seg.dk(s)))


@dataclass(frozen=True)
class ContourPath:
    """Piecewise-smooth path from ``Re k = -pi/h`` to ``Re k = pi/h``."""

    segments: Tuple[PathSegment, ...]
    halfplane: str
    delta: float
    h: float
    meta: dict = field(default_factory=dict, compare=False)

    def sample(self, per_segment: int = 200) -> np.ndarray:
        s = np.linspace(0.0, 1.0, per_segment)
        return np.concatenate([np.asarray(seg.k(s), dtype=complex) for seg in self.segments])

    @property
    def endpoints(self):
        return complex(self.segments[0].k(0.0)), complex(self.segments[-1].k(1.0))

    def min_distance(self, points) -> float:
        pts = self.sample(2000)
        return float(np.min(np.abs(pts[:, None] - np.asarray(points)[None, :])))


def default_delta(L: float) -> float:
    """Offset ``pi/(4L)``: keeps ``|1/(exp(2ikL) - 1)| <= 1.26`` on the offset line."""
    return math.pi / (4 * L)


def build_contour(model: DispersionModel, halfplane: str = "upper", delta: float = None,
                  height: float = None, L: float = 1.0, T: float = 1.0) -> ContourPath:
    """Path in the upper or lower half-plane for ``model``.

    Heat (both stencils): a polygon ``-pi/h + i delta -> -pi/(2h) + i Y -> i delta
    -> pi/(2h) + i Y -> pi/h + i delta`` that climbs into the region where
    ``exp(-W T)`` decays. Schrodinger: a line from ``-pi/h`` up to ``i Y``
    through the decaying quadrant, down the imaginary axis to ``i delta``, then
    a curve decaying toward the real axis across the growing quadrant. Lower
    paths are mirror images.
    """
    h = model.h
    if halfplane not in ("upper", "lower"):
        raise InvalidArgument("halfplane must be 'upper' or 'lower'")
    if delta is None:
        delta = default_delta(L)
    if not (0 < delta < math.pi / (4 * h)):
        raise InvalidArgument(f"offset delta={delta!r} must lie in (0, pi/(4h))")
    xe = math.pi / h
    if isinstance(model.equation, Heat):
        Y = height if height is not None else delta + math.tan(math.pi / 8) * math.pi / (2 * h)
        if Y <= delta:
            raise InvalidArgument("path height must exceed the offset")
        verts = [-xe + 1j * delta, -xe / 2 + 1j * Y, 1j * delta, xe / 2 + 1j * Y, xe + 1j * delta]
        segs = tuple(_line(a, b) for a, b in zip(verts[:-1], verts[1:]))
        meta = {"apex": Y}
        if halfplane == "lower":
            segs = tuple(_conjugate(s) for s in segs)
        return ContourPath(segs, halfplane, delta, h, meta)
    if isinstance(model.equation, LinearSchrodinger):
        # growth on the curve: sin(xh) sinh(yh) T / h^2 <= budget
        floor = min(delta / 2, GROWTH_BUDGET * h / max(T, 1e-300))
        rate = max(3.0, delta * T / (math.e * h * GROWTH_BUDGET))
        y_end = floor + (delta - floor) * math.exp(-rate * math.pi)
        if height is None:
            Y = min(math.asinh(40 * h * h / max(T, 1e-300)) / h, math.pi / h)
            Y = max(Y, 2 * delta)
        else:
            Y = height
        if Y <= delta:
            raise InvalidArgument("path height must exceed the offset")
        segs = (
            _line(-xe + 1j * y_end, 1j * Y),
            _line(1j * Y, 1j * delta),
            _decay_curve(0.0, xe, delta, floor, rate, h),
        )
        meta = {"apex": Y, "floor": floor, "rate": rate, "junction": delta}
        if halfplane == "lower":
            segs = tuple(_reflect(s) for s in reversed(segs))
        return ContourPath(segs, halfplane, delta, h, meta)
    raise UnsupportedDiscretization("contour paths exist only for heat and Schrodinger models")


# ---------------------------------------------------------------------------
# integrand pieces


def _powers(z, N):
    """``z[:, None] ** n`` for ``n = 1..N`` by running products; ``|z| <= 1`` keeps it stable."""
    return np.cumprod(np.broadcast_to(z[:, None], (z.size, N)), axis=1)


def _real_line_kernel(model: DispersionModel, T: float, span: int, tol: float) -> np.ndarray:
    """``(h/2pi) int_{-pi/h}^{pi/h} exp(i k j h) exp(-W T) dk`` for ``j = -span..span``.

    Periodic trapezoid rule (exponentially convergent), doubled until stable.
    """
    h = model.h
    K = 1 << max(6, (4 * (span + 1)).bit_length())
    prev = None
    while K <= 1 << 24:
        kk = -math.pi / h + 2 * math.pi * np.arange(K) / (K * h)
        vals = np.exp(-model(kk) * T)
        # sum_p exp(i k_p j h) vals_p / K with k_p h = -pi + 2 pi p / K
        coef = scipy.fft.ifft(vals)  # (1/K) sum_p vals_p exp(2 pi i p j / K)
        j = np.arange(-span, span + 1)
        cur = coef[j % K] * np.exp(-1j * math.pi * j)
        if prev is not None and np.max(np.abs(cur - prev)) <= tol:
            return cur
        prev = cur
        K *= 2
    raise InvalidArgument("real-line kernel did not converge")


@dataclass
class _Problem:
    spec: ProblemSpec
    model: DispersionModel
    T: float
    tol: float
    beta: Callable
    extra: bool = False


def _boundary_data(spec):
    return spec.bc(Side.LEFT).data, spec.bc(Side.RIGHT).data


def _integrand_factory(prob: _Problem, lower: bool):
    spec, model, T, tol = prob.spec, prob.model, prob.T, prob.tol
    grid = spec.grid
    N, h, L = grid.N, grid.h, grid.L
    phi = np.asarray(spec.ic.values)[1 : N + 1]
    n = np.arange(1, N + 1)
    x = n * h
    u, v = _boundary_data(spec)
    if prob.extra:
        ud, udd = u.derivative(1), u.derivative(2)
        vd, vdd = v.derivative(1), v.derivative(2)
    chunk = max(1, 2_000_000 // max(1, N))

    def f(k):
        k = np.asarray(k, dtype=complex)
        if np.any(k.imag >= 0) if lower else np.any(k.imag <= 0):
            raise InvalidArgument("path point on the wrong side of the real axis")
        out = np.empty((k.size, N), dtype=complex)
        for s in range(0, k.size, chunk):
            kk = k[s : s + chunk]
            W = model(kk)
            damp = np.exp(-W * T)
            # L - x_n = x_{N+1-n}, so every nodal factor is the bounded table
            # P = e^{ikx_n} (upper) or e^{ik(x_n-L)} (lower) times a scalar in k
            if lower:
                F = _powers(np.exp(-1j * kk * h), N)
                P = F[:, ::-1]
                eL = np.exp(-1j * kk * L)
                denom = -np.expm1(-2j * kk * L)
                ic = h * (P @ phi - eL * (F @ phi))
                wl, wr = eL, 1.0
            else:
                P = _powers(np.exp(1j * kk * h), N)
                eL = np.exp(1j * kk * L)
                denom = np.expm1(2j * kk * L)
                ic = h * (P @ phi - eL * (P[:, ::-1] @ phi))
                wl, wr = 1.0, eL
            fu = tr.fused_transform(u, W, T, tol)
            fv = tr.fused_transform(v, W, T, tol)
            bnd = prob.beta(kk) * (fu * wl - fv * wr)
            if prob.extra:
                gam = (np.exp(1j * kk * h) - np.exp(-1j * kk * h)) / 12
                du = h * tr.fused_transform(ud, W, T, tol) + h**3 / 12 * tr.fused_transform(udd, W, T, tol)
                dv = h * tr.fused_transform(vd, W, T, tol) + h**3 / 12 * tr.fused_transform(vdd, W, T, tol)
                bnd = bnd - gam * du * wl + gam * dv * wr
            # fused transforms already carry exp(-W T)
            out[s : s + chunk] = ((damp * ic + bnd) / denom)[:, None] * P
        return out

    return f


def _path_integral(f, path: ContourPath, tol: float, panels: int):
    total = 0
    for seg in path.segments:
        g = lambda s, seg=seg: f(seg.k(s)) * np.asarray(seg.dk(s))[:, None]
        val, _, _ = quadrature.integrate(g, np.linspace(0.0, 1.0, panels + 1), tol=tol)
        total = total + val
    return total


def _initial_panels(spec, T):
    N, h = spec.grid.N, spec.grid.h
    return int(max(8, N + 1, min(4096, 2 * T / (math.pi * h * h))))


def _solve(prob: _Problem, path_up: ContourPath = None, path_down: ContourPath = None, meta=None):
    spec, model, T, tol = prob.spec, prob.model, prob.T, prob.tol
    grid = spec.grid
    N, L = grid.N, grid.L
    u, v = _boundary_data(spec)
    if path_up is None:
        path_up = build_contour(model, "upper", L=L, T=T)
    if path_down is None:
        path_down = build_contour(model, "lower", L=L, T=T)
    out = np.empty(N + 2, dtype=complex)
    out[0], out[N + 1] = u(T), v(T)
    if T == 0:
        out[1 : N + 1] = spec.ic.values[1 : N + 1]
        return SolutionField(grid, T, out, {"solver": "sdutm-integral"})
    phi = np.asarray(spec.ic.values)[1 : N + 1]
    kern = _real_line_kernel(model, T, N, 0.1 * tol)
    # initial-condition integral: sum_m phi_m kern[n - m]
    n = np.arange(1, N + 1)
    idx = (n[:, None] - n[None, :]) + N
    ic_real = kern[idx] @ phi
    panels = _initial_panels(spec, T)
    qtol = 2 * math.pi * tol
    up = _path_integral(_integrand_factory(prob, lower=False), path_up, qtol, panels)
    down = _path_integral(_integrand_factory(prob, lower=True), path_down, qtol, panels)
    out[1 : N + 1] = ic_real + (up + LOWER_SIGN * down) / (2 * math.pi)
    info = {"solver": "sdutm-integral", "delta": path_up.delta}
    info.update(meta or {})
    return SolutionField(grid, T, out, info)


def _check(spec, eq_type, stencil):
    if not isinstance(spec.equation, eq_type) or spec.stencil is not stencil:
        raise UnsupportedDiscretization("spec does not match this integral solver")
    require_valid(spec)
    if spec.bc(Side.LEFT).kind is not BCKind.DIRICHLET:
        raise UnsupportedDiscretization("integral solvers cover Dirichlet problems only")


def heat_dirichlet_integral(spec: ProblemSpec, T: float, path_up=None, path_down=None,
                            tol: float = 1e-10) -> SolutionField:
    """Heat equation, centered second-order stencil, Dirichlet data."""
    _check(spec, Heat, S.CENTERED_O2)
    h = spec.grid.h
    model = make_dispersion(spec.equation, spec.stencil, h)
    beta = lambda k: 2j * np.sin(k * h) / h
    return _solve(_Problem(spec, model, T, tol, beta), path_up, path_down)


def ls_dirichlet_integral(spec: ProblemSpec, T: float, path_up=None, path_down=None,
                          tol: float = 1e-10) -> SolutionField:
    """Linear Schrodinger equation, centered second-order stencil, Dirichlet data."""
    _check(spec, LinearSchrodinger, S.CENTERED_O2)
    h = spec.grid.h
    model = make_dispersion(spec.equation, spec.stencil, h)
    beta = lambda k: -np.sin(k * h) / h
    return _solve(_Problem(spec, model, T, tol, beta), path_up, path_down)


def heat4_dirichlet_integral(spec: ProblemSpec, T: float, path_up=None, path_down=None,
                             tol: float = 1e-10) -> SolutionField:
    """Heat equation, centered fourth-order stencil, Dirichlet data.

    Needs first and second time derivatives of both boundary data.
    """
    _check(spec, Heat, S.CENTERED_O4)
    u, v = _boundary_data(spec)
    for d in (u, v):
        d.derivative(2)
    h = spec.grid.h
    model = make_dispersion(spec.equation, spec.stencil, h)

    def beta(k):
        z = np.exp(1j * k * h)
        return (1 / z**2 - 14 / z + 14 * z - z**2) / (12 * h)

    return _solve(_Problem(spec, model, T, tol, beta, extra=True), path_up, path_down)


def solve_integral(spec: ProblemSpec, T: float, **options) -> SolutionField:
    require_valid(spec)
    eq, st = spec.equation, spec.stencil
    if isinstance(eq, Heat) and st is S.CENTERED_O2:
        return heat_dirichlet_integral(spec, T, **options)
    if isinstance(eq, LinearSchrodinger) and st is S.CENTERED_O2:
        return ls_dirichlet_integral(spec, T, **options)
    if isinstance(eq, Heat) and st is S.CENTERED_O4:
        return heat4_dirichlet_integral(spec, T, **options)
    raise UnsupportedDiscretization(f"no integral representation for {eq.name} with {st.value}")
