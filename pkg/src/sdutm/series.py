"""Quadrature-free series representations of the semidiscrete solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.signal
import scipy.special

from . import transforms as tr
from .dispersion import make_dispersion, require_valid
from .errors import AccuracyFailure, InvalidArgument, InvalidProblem, UnsupportedDiscretization
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
    diffusion_factor,
    dirichlet,
)

# half-width of the Poisson window in units of (sqrt(p) + 1)
_WINDOW = 12.0
_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class SeriesSolveOptions:
    T: float
    log_domain: bool = True
    tol: float = 1e-12
    closure: str = "centered"

    def __post_init__(self):
        if not (self.T >= 0):
            raise InvalidArgument("final time must be nonnegative")
        if self.closure not in ("centered", "forward", "first-order"):
            raise InvalidArgument(f"unknown closure {self.closure!r}")


def _composite_gl(panels: int):
    """Composite 16-point Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = _GL16
    edges = np.linspace(0.0, 1.0, panels + 1)
    a, half = edges[:-1, None], 0.5 * np.diff(edges)[:, None]
    nodes = (a + half * (x[None, :] + 1)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _correlate(weights, psi):
    """``out[n] = sum_{m >= 0, n+m < len(psi)} weights[m] psi[n+m]``."""
    r = psi[::-1]
    if len(psi) <= 512:
        conv = np.convolve(r, weights[: len(psi)])
    else:
        conv = scipy.signal.fftconvolve(r, weights[: len(psi)])
    return conv[: len(psi)][::-1]


# ---------------------------------------------------------------------------
# advection, first-order one-sided stencil


def poisson_weights(a: float, count: int, log_domain: bool = True) -> np.ndarray:
    """``exp(m ln a - ln m! - a)`` for ``m = 0..count-1``."""
    m = np.arange(count)
    if log_domain:
        return np.exp(scipy.special.xlogy(m, a) - a - scipy.special.gammaln(m + 1))
    with np.errstate(over="ignore", invalid="ignore"):
        fact = np.array([float(math.factorial(int(j))) if j < 171 else np.inf for j in m])
        return a**m / fact * math.exp(-a)


def _poisson_boundary(p, a, v, T, h_over_c, tol):
    """``integral_0^a pmf(p; x) v(T - x h/c) dx`` for each order in ``p``."""
    p = np.asarray(p, dtype=float)
    if v.is_constant:
        return v.constant_value * scipy.special.gammainc(p + 1, a)
    span = _WINDOW * (np.sqrt(p) + 1)
    lo = np.clip(p - span, 0.0, a)
    hi = np.clip(p + span, 0.0, a)
    width = hi - lo
    prev = None
    for panels in (2, 4, 8, 16, 32, 64, 128, 256):
        t, w = _composite_gl(panels)
        X = lo[:, None] + width[:, None] * t[None, :]
        dens = np.exp(
            scipy.special.xlogy(p[:, None], X) - X - scipy.special.gammaln(p[:, None] + 1)
        )
        vals = v(T - X * h_over_c)
        cur = (dens * vals) @ w * width
        if prev is not None and np.max(np.abs(cur - prev)) <= tol * (1 + np.max(np.abs(cur))):
            return cur
        prev = cur
    raise AccuracyFailure(
        "boundary integral did not converge", achieved_error=float(np.max(np.abs(cur - prev)))
    )


def _right_dirichlet(spec):
    b = spec.bc(Side.RIGHT)
    if b is None or b.kind is not BCKind.DIRICHLET:
        raise InvalidProblem("advection needs Dirichlet data at the inflow end x = L")
    return b.data


def _mirror(spec: ProblemSpec) -> ProblemSpec:
    """Map a left-moving problem with backward stencils to its right-moving image."""
    stencil = {S.BACKWARD_O1: S.FORWARD_O1, S.BACKWARD_O2: S.FORWARD_O2}[spec.stencil]
    left = spec.bc(Side.LEFT)
    if left is None or left.kind is not BCKind.DIRICHLET:
        raise InvalidProblem("advection needs Dirichlet data at the inflow end x = 0")
    return ProblemSpec(
        AdvectionRight(spec.equation.c),
        stencil,
        spec.grid,
        spec.ic.values[::-1],
        (dirichlet(Side.RIGHT, left.data),),
    )


def _mirrored_result(sol: SolutionField, spec: ProblemSpec) -> SolutionField:
    return SolutionField(spec.grid, sol.T, sol.values[::-1], dict(sol.meta, mirrored=True))


def advection_forward_series(spec: ProblemSpec, T: float, log_domain: bool = True, tol: float = 1e-12):
    """First-order one-sided advection solved by Poisson-weight sums.

    ``q_n(T) = sum_m P(m; cT/h) phi_{n+m} + (c/h) int_0^T P(N-n; cs/h) v(T-s) ds``
    where ``P`` is the Poisson probability mass, evaluated through log-gamma.
    """
    if isinstance(spec.equation, AdvectionLeft):
        require_valid(spec)
        return _mirrored_result(advection_forward_series(_mirror(spec), T, log_domain, tol), spec)
    if not (isinstance(spec.equation, AdvectionRight) and spec.stencil is S.FORWARD_O1):
        raise UnsupportedDiscretization("solver needs forward first-order advection")
    v = _right_dirichlet(spec)
    require_valid(spec)
    SeriesSolveOptions(T)
    N, h, c = spec.grid.N, spec.grid.h, spec.equation.c
    phi = np.asarray(spec.ic.values)
    out = np.empty(N + 2, dtype=complex)
    if T == 0:
        out[:] = phi
        out[N + 1] = v(0.0)
        return SolutionField(spec.grid, T, out, {"solver": "sdutm-series"})
    a = c * T / h
    w = poisson_weights(a, N + 1, log_domain)
    out[: N + 1] = _correlate(w, phi[: N + 1])
    p = N - np.arange(N + 1)
    out[: N + 1] += _poisson_boundary(p, a, v, T, h / c, tol)
    out[N + 1] = v(T)
    return SolutionField(spec.grid, T, out, {"solver": "sdutm-series"})


# ---------------------------------------------------------------------------
# advection, second-order one-sided stencil


def _fft_size(P: int, x_max: float) -> int:
    need = P + max(64, int(8 * x_max + 40 * math.sqrt(x_max + 1)))
    return 1 << max(6, (need - 1).bit_length())


def forward2_kernel(x, P: int) -> np.ndarray:
    """``kappa_p(x) = exp(-3x) [z^p] exp(x (4z - z^2))`` for ``p = 0..P-1``.

    Rows follow ``x``. The coefficients are read off a discrete Fourier
    transform on the unit circle, where the generating function has modulus
    at most one, so the alternating factorial sum never cancels.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    M = _fft_size(P, float(x.max()) if x.size else 0.0)
    z = np.exp(2j * np.pi * np.arange(M) / M)
    G = np.exp(np.multiply.outer(x, 4 * z - z * z - 3))
    return (scipy.fft.fft(G, axis=-1) / M)[:, :P]


def forward2_kernel_direct(x: float, P: int) -> np.ndarray:
    """Log-domain double sum for ``kappa_p(x)``; accurate only for moderate ``x``."""
    out = np.zeros(P, dtype=complex)
    if x == 0:
        out[0] = 1.0
        return out
    lx = math.log(x)
    for p in range(P):
        ks = np.arange(p // 2 + 1)
        mags = (
            (p - 2 * ks) * math.log(4.0)
            + (p - ks) * lx
            - scipy.special.gammaln(p - 2 * ks + 1)
            - scipy.special.gammaln(ks + 1)
            - 3 * x
        )
        out[p] = np.sum((-1.0) ** ks * np.exp(mags))
    return out


def _forward2_boundary(vs, weights, A, T, N, two_h_over_c, tol):
    """``sum_i weight_i int_0^A kappa_p(x) v_i(T - 2hx/c) dx`` for ``p = 0..N``."""
    prev = None
    panels = max(4, int(math.ceil(A)))
    while panels <= 1 << 16:
        t, w = _composite_gl(panels)
        X, Wt = A * t, A * w
        K = forward2_kernel(X, N + 1)
        data = sum(wi * vi(T - X * two_h_over_c) for wi, vi in zip(weights, vs))
        cur = (Wt * data) @ K
        if prev is not None and np.max(np.abs(cur - prev)) <= tol * (1 + np.max(np.abs(cur))):
            return cur
        prev = cur
        panels *= 2
    raise AccuracyFailure(
        "boundary integral did not converge", achieved_error=float(np.max(np.abs(cur - prev)))
    )


def advection_forward2_series(
    spec: ProblemSpec, T: float, closure: str = "centered", log_domain: bool = True, tol: float = 1e-12
):
    """Second-order one-sided advection.

    The ghost node beyond ``x = L`` is closed with the derivative data
    ``q_x = v'/c`` and ``q_xx = v''/c^2``. The ``centered`` and ``forward``
    closures produce the same ghost value; ``first-order`` drops the
    ``v''`` term and is only first-order accurate.
    """
    opts = SeriesSolveOptions(T, log_domain, tol, closure)
    if isinstance(spec.equation, AdvectionLeft):
        require_valid(spec)
        sol = advection_forward2_series(_mirror(spec), T, closure, log_domain, tol)
        return _mirrored_result(sol, spec)
    if not (isinstance(spec.equation, AdvectionRight) and spec.stencil is S.FORWARD_O2):
        raise UnsupportedDiscretization("solver needs forward second-order advection")
    v = _right_dirichlet(spec)
    require_valid(spec)
    vdot = v.derivative(1)
    vddot = v.derivative(2) if opts.closure != "first-order" else None
    N, h, c = spec.grid.N, spec.grid.h, spec.equation.c
    phi = np.asarray(spec.ic.values)
    out = np.empty(N + 2, dtype=complex)
    if T == 0:
        out[:] = phi
        out[N + 1] = v(0.0)
        return SolutionField(spec.grid, T, out, {"solver": "sdutm-series"})
    A = c * T / (2 * h)
    if log_domain and A <= 3.0:
        kap = forward2_kernel_direct(A, N + 1)
    else:
        kap = forward2_kernel(A, N + 1)[0]
    out[: N + 1] = _correlate(kap, phi[: N + 1])
    # boundary: 3 B_0(v) - B_1(v) - (h/c) B_0(v') - (h^2/2c^2) B_0(v'')
    two_h_over_c = 2 * h / c
    b0_terms, b0_w = [v, vdot], [3.0, -h / c]
    if vddot is not None:
        b0_terms.append(vddot)
        b0_w.append(-(h**2) / (2 * c**2))
    # ghost-free B_0 with combined data, B_1 with v alone
    B0 = _forward2_boundary(b0_terms, b0_w, A, T, N, two_h_over_c, tol)
    B1 = _forward2_boundary([v], [1.0], A, T, N, two_h_over_c, tol)
    n = np.arange(N + 1)
    out[: N + 1] += B0[N - n]
    shifted = np.zeros(N + 1, dtype=complex)
    shifted[: N] = B1[N - 1 - n[:N]]
    out[: N + 1] -= shifted
    out[N + 1] = v(T)
    return SolutionField(spec.grid, T, out, {"solver": "sdutm-series", "closure": closure})


# ---------------------------------------------------------------------------
# heat and linear Schrodinger, centered second-order stencil


def _check_second_order(spec: ProblemSpec, kind: BCKind, eq_types):
    if not isinstance(spec.equation, eq_types) or spec.stencil is not S.CENTERED_O2:
        raise UnsupportedDiscretization("solver needs a centered second-order stencil")
    require_valid(spec)
    left, right = spec.bc(Side.LEFT), spec.bc(Side.RIGHT)
    if left.kind is not kind or right.kind is not kind:
        raise UnsupportedDiscretization(f"solver needs {kind.value} data at both ends")
    return left.data, right.data


def dirichlet_spectral_data(spec: ProblemSpec, T: float, tol: float = tr.DEFAULT_TOL) -> tr.SpectralData:
    """Modes ``l = 1..N`` with ``k_l = pi l / L`` and fused boundary combinations."""
    N, L = spec.grid.N, spec.grid.L
    u, v = spec.bc(Side.LEFT).data, spec.bc(Side.RIGHT).data
    model = make_dispersion(spec.equation, spec.stencil, spec.grid.h)
    ells = np.arange(1, N + 1)
    k = np.pi * ells / L
    W = model(k)
    b = tr.sine_coefficients(spec.ic, spec.grid)[1 : N + 1]
    H = tr.boundary_combination(tr.fused_transform(u, W, T, tol), tr.fused_transform(v, W, T, tol), ells)
    return tr.SpectralData(ells, k, W, b, H)


def neumann_spectral_data(spec: ProblemSpec, T: float, tol: float = tr.DEFAULT_TOL) -> tr.SpectralData:
    """Modes ``l = 0..N+1`` with ``k_l = pi l / (L + h)`` and fused Neumann combinations."""
    N, L, h = spec.grid.N, spec.grid.L, spec.grid.h
    u1, v1 = spec.bc(Side.LEFT).data, spec.bc(Side.RIGHT).data
    model = make_dispersion(spec.equation, spec.stencil, h)
    ells = np.arange(N + 2)
    k = np.pi * ells / (L + h)
    W = model(k)
    W[0] = 0.0
    b = tr.cosine_coefficients(spec.ic, spec.grid)
    H = tr.boundary_combination(tr.fused_transform(u1, W, T, tol), tr.fused_transform(v1, W, T, tol), ells)
    return tr.SpectralData(ells, k, W, b, H)


def _dirichlet_series(spec, T, tol, eq_types):
    u, v = _check_second_order(spec, BCKind.DIRICHLET, eq_types)
    SeriesSolveOptions(T)
    grid = spec.grid
    N, L, h = grid.N, grid.L, grid.h
    alpha = diffusion_factor(spec.equation)
    sd = dirichlet_spectral_data(spec, T, tol)
    coeff = np.exp(-sd.W * T) * sd.b + (2 * alpha / (L * h)) * np.sin(sd.k * h) * sd.H
    out = np.empty(N + 2, dtype=complex)
    out[1 : N + 1] = 0.5 * scipy.fft.dst(coeff, type=1)
    out[0], out[N + 1] = u(T), v(T)
    return SolutionField(grid, T, out, {"solver": "sdutm-series"})


def _neumann_series(spec, T, tol, eq_types):
    _check_second_order(spec, BCKind.NEUMANN, eq_types)
    SeriesSolveOptions(T)
    grid = spec.grid
    N, L, h = grid.N, grid.L, grid.h
    M = N + 2
    alpha = diffusion_factor(spec.equation)
    sd = neumann_spectral_data(spec, T, tol)
    ells = sd.ells
    coeff = (L / (L + h)) * (
        np.exp(-sd.W * T) * sd.b - (2 * alpha / L) * np.cos(np.pi * ells / (2 * M)) * sd.H
    )
    coeff[0] = 0.0
    out = 0.5 * scipy.fft.dct(coeff, type=3)
    out = out + L * sd.b[0] / (2 * (L + h)) - alpha * sd.H[0] / (L + h)
    return SolutionField(grid, T, out, {"solver": "sdutm-series"})


def heat_dirichlet_series(spec: ProblemSpec, T: float, tol: float = tr.DEFAULT_TOL) -> SolutionField:
    """Sine series ``sum_l sin(pi l n h/L) [e^{-W_l T} b_l + (2/(Lh)) sin(k_l h) D_l]``."""
    return _dirichlet_series(spec, T, tol, Heat)


def heat_neumann_series(spec: ProblemSpec, T: float, tol: float = tr.DEFAULT_TOL) -> SolutionField:
    """Half-shifted cosine series for first-order Neumann closures at both ends."""
    return _neumann_series(spec, T, tol, Heat)


def ls_dirichlet_series(spec: ProblemSpec, T: float, tol: float = tr.DEFAULT_TOL) -> SolutionField:
    """Sine series for ``q_t = (i/2) q_xx``; modes rotate without decay."""
    return _dirichlet_series(spec, T, tol, LinearSchrodinger)


def ls_neumann_series(spec: ProblemSpec, T: float, tol: float = tr.DEFAULT_TOL) -> SolutionField:
    """Half-shifted cosine series for ``q_t = (i/2) q_xx``."""
    return _neumann_series(spec, T, tol, LinearSchrodinger)


def solve_series(spec: ProblemSpec, T: float, **options) -> SolutionField:
    """Dispatch to the series solver matching ``spec``."""
    eq, st = spec.equation, spec.stencil
    if isinstance(eq, (AdvectionRight, AdvectionLeft)):
        if st in (S.FORWARD_O1, S.BACKWARD_O1):
            return advection_forward_series(spec, T, **options)
        if st in (S.FORWARD_O2, S.BACKWARD_O2):
            return advection_forward2_series(spec, T, **options)
        require_valid(spec)
    if isinstance(eq, (Heat, LinearSchrodinger)) and st is S.CENTERED_O2:
        require_valid(spec)
        kind = spec.bc(Side.LEFT).kind
        table = {
            (Heat, BCKind.DIRICHLET): heat_dirichlet_series,
            (Heat, BCKind.NEUMANN): heat_neumann_series,
            (LinearSchrodinger, BCKind.DIRICHLET): ls_dirichlet_series,
            (LinearSchrodinger, BCKind.NEUMANN): ls_neumann_series,
        }
        return table[(type(eq), kind)](spec, T, **options)
    require_valid(spec)
    raise UnsupportedDiscretization(f"no series representation for {eq.name} with {st.value}")
