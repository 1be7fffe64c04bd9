"""Independent reference solutions: exact PDE solutions and ODE-system oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import fd
from .errors import ResourceLimit, UnsupportedOracle
from .problem import Heat, LinearSchrodinger

EXPM_MAX_DIM = 2000


@dataclass(frozen=True)
class ExactSolution:
    """Evaluator ``(x, t) -> complex`` with a note on where it is valid."""

    func: Callable
    domain: str = ""

    def __call__(self, x, t):
        return np.asarray(self.func(np.asarray(x, dtype=float), float(t)), dtype=complex)


def advection_traveling_wave(phi, v, c: float, L: float) -> ExactSolution:
    """Exact solution of ``q_t = c q_x`` on ``[0, L]`` with data ``v`` at ``x = L``.

    ``phi(x + c t)`` where the characteristic starts inside the interval,
    ``v((x - L)/c + t)`` where it enters through ``x = L``.
    """

    def f(x, t):
        x = np.asarray(x, dtype=float)
        inside = x + c * t < L
        xi = np.where(inside, x + c * t, 0.0)
        tau = np.where(inside, 0.0, (x - L) / c + t)
        return np.where(inside, np.asarray(phi(xi), dtype=complex), np.asarray(v(tau), dtype=complex))

    return ExactSolution(f, f"advection, c={c}, 0 <= x <= {L}")


def heat_dirichlet_example() -> ExactSolution:
    """``2x + sin(5 pi x) exp(-25 pi^2 t)`` for the unit-interval heat problem."""
    return ExactSolution(
        lambda x, t: 2 * x + np.sin(5 * np.pi * x) * np.exp(-25 * np.pi**2 * t),
        "heat on [0, 1], q(0,t)=0, q(1,t)=2",
    )


def _gauss_legendre(L, nodes):
    x, w = np.polynomial.legendre.leggauss(64)
    panels = max(1, nodes // 64)
    edges = np.linspace(0.0, L, panels + 1)
    half = 0.5 * np.diff(edges)
    X = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel()
    Wt = (half[:, None] * w[None, :]).ravel()
    return X, Wt


def separation_series(equation, phi, kind: str, left: float, right: float, L: float, modes: int,
                      quad_nodes: int = 1 << 16) -> ExactSolution:
    """Eigenfunction expansion for heat or Schrodinger with constant boundary data.

    Dirichlet: ``q = u + (v - u) x/L + sum a_n sin(n pi x/L) exp(-a (n pi/L)^2 t)``.
    Neumann: ``q = p(x, t) + a_0/2 + sum a_n cos(n pi x/L) exp(...)`` with the
    particular part ``p = beta x^2 + u1 x + kappa beta t`` carrying the flux.
    Coefficients are computed by composite Gauss-Legendre quadrature.
    """
    if isinstance(equation, Heat):
        alpha, kappa = 1.0, 2.0
    elif isinstance(equation, LinearSchrodinger):
        alpha, kappa = 0.5j, 1j
    else:
        raise UnsupportedOracle(f"no separation oracle for {equation!r}")
    kind = kind.lower()
    X, Wt = _gauss_legendre(L, quad_nodes)
    phiX = np.asarray(phi(X), dtype=complex)
    n = np.arange(1, modes + 1)
    lam = alpha * (n * np.pi / L) ** 2
    if kind == "dirichlet":
        steady = lambda x: left + (right - left) * np.asarray(x) / L
        resid = phiX - steady(X)
        a = np.empty(modes, dtype=complex)
        for s in range(0, modes, 256):
            blk = n[s : s + 256]
            a[s : s + 256] = (2 / L) * (np.sin(np.outer(blk, X) * np.pi / L) @ (Wt * resid))

        def f(x, t):
            x = np.atleast_1d(x)
            modes_t = a * np.exp(-lam * t)
            return steady(x) + np.sin(np.outer(x, n) * np.pi / L) @ modes_t

        return ExactSolution(f, f"{equation.name} Dirichlet, {modes} modes")
    if kind == "neumann":
        beta = (right - left) / (2 * L)

        def particular(x, t):
            return beta * np.asarray(x) ** 2 + left * np.asarray(x) + kappa * beta * t

        resid = phiX - particular(X, 0.0)
        a0 = (2 / L) * np.sum(Wt * resid)
        a = np.empty(modes, dtype=complex)
        for s in range(0, modes, 256):
            blk = n[s : s + 256]
            a[s : s + 256] = (2 / L) * (np.cos(np.outer(blk, X) * np.pi / L) @ (Wt * resid))

        def f(x, t):
            x = np.atleast_1d(x)
            modes_t = a * np.exp(-lam * t)
            return particular(x, t) + a0 / 2 + np.cos(np.outer(x, n) * np.pi / L) @ modes_t

        return ExactSolution(f, f"{equation.name} Neumann, {modes} modes")
    raise UnsupportedOracle(f"unsupported boundary family {kind!r}")


def expm_solve(system: fd.OdeSystem, Q0, T: float) -> np.ndarray:
    """``Q(T)`` for constant forcing via the exponential of ``[[A, g], [0, 0]] T``.

    The augmented form avoids inverting ``A``, which is singular for Neumann
    problems.
    """
    n = system.dim
    if n + 1 > EXPM_MAX_DIM:
        raise ResourceLimit(f"dense exponential limited to dimension {EXPM_MAX_DIM}", dim=n)
    if not system.forcing_is_constant:
        raise UnsupportedOracle("matrix-exponential oracle needs time-independent forcing")
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = system.dense()
    aug[:n, n] = system.forcing(0.0)
    E = scipy.linalg.expm(aug * T)
    return E[:n, :n] @ np.asarray(Q0, dtype=complex) + E[:n, n]


def spectral_radius_bound(system: fd.OdeSystem) -> float:
    """Gershgorin bound on ``|eigenvalue|`` of ``A``."""
    return float(np.max(np.sum(np.abs(system.bands), axis=0))) if system.dim else 0.0


def rk4_oracle(system: fd.OdeSystem, Q0, T: float, courant: float = 0.01) -> np.ndarray:
    """Fine-step RK4 reference with ``rho(A) dt <= courant``.

    Boundary data is sampled at every stage time up front so the loop only
    performs dense matrix-vector products.
    """
    if T == 0:
        return np.array(Q0, dtype=complex)
    rho = max(spectral_radius_bound(system), 1.0 / T)
    M = max(1, int(math.ceil(rho * T / courant)))
    dt = T / M
    A = system.dense()
    terms = system.forcing_terms
    G = np.zeros((system.dim, len(terms)), dtype=complex)
    for j, (row, weight, _) in enumerate(terms):
        G[row, j] = weight
    half_steps = np.arange(2 * M + 1) * (0.5 * dt)
    data = np.array([np.broadcast_to(d(half_steps), half_steps.shape) for _, _, d in terms])
    g = (G @ data).T if terms else np.zeros((2 * M + 1, system.dim), dtype=complex)
    Q = np.array(Q0, dtype=complex)
    for m in range(M):
        g0, g1, g2 = g[2 * m], g[2 * m + 1], g[2 * m + 2]
        k1 = A @ Q + g0
        k2 = A @ (Q + 0.5 * dt * k1) + g1
        k3 = A @ (Q + 0.5 * dt * k2) + g1
        k4 = A @ (Q + dt * k3) + g2
        Q = Q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Q


def ode_oracle(spec, T: float, closure: str = "default") -> np.ndarray:
    """Nodal oracle for ``spec``: matrix exponential when forcing is constant, else RK4."""
    system = fd.assemble_system(spec, closure)
    Q0 = system.initial_state(spec.ic)
    if system.forcing_is_constant:
        Q = expm_solve(system, Q0, T)
    else:
        Q = rk4_oracle(system, Q0, T)
    return system.full(Q, T)
