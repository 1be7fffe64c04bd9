import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdutm import fd, oracles, registry
from sdutm.errors import ResourceLimit, UnsupportedOracle
from sdutm.problem import AdvectionRight, Heat, LinearSchrodinger, ProblemSpec, StencilKind as S, dirichlet, make_grid


def test_traveling_wave_inside_and_inflow():
    w = oracles.advection_traveling_wave(lambda x: x**2, lambda t: 10 + t, c=1.0, L=1.0)
    assert w(0.2, 0.3) == pytest.approx(0.25)
    # characteristic from x = 0.9 leaves through x = 1 at t = 0.1
    assert w(0.9, 0.3) == pytest.approx(10.2)
    assert w(np.array([0.0, 0.5]), 0.0) == pytest.approx(np.array([0.0, 0.25]))


def test_heat_example_values():
    ex = oracles.heat_dirichlet_example()
    assert ex(0.5, 0.0) == pytest.approx(2.0)
    assert ex(0.1, 0.0) == pytest.approx(0.2 + 1.0)
    assert ex(0.3, 1.0) == pytest.approx(0.6, abs=1e-100)


def test_separation_series_steady_state():
    sol = oracles.separation_series(Heat(), lambda x: 1 + 2 * x, "dirichlet", 1.0, 3.0, 1.0, modes=50)
    x = np.linspace(0, 1, 7)
    assert np.allclose(sol(x, 0.3), 1 + 2 * x, atol=1e-12)


def test_separation_series_converges_in_modes():
    p = registry.get_problem("heat-neumann")
    kw = dict(kind="neumann", left=12.0, right=30 * np.pi - 8, L=1.0)
    phi = lambda x: 12 * x - 10 * x**2 + 0.5 * np.sin(20 * np.pi * x**3)
    a = oracles.separation_series(Heat(), phi, modes=400, **kw)
    b = oracles.separation_series(Heat(), phi, modes=800, **kw)
    assert abs(a(0.5, p.T) - b(0.5, p.T))[0] < 1e-10


def test_schrodinger_modes_keep_their_modulus():
    sol = oracles.separation_series(LinearSchrodinger(), lambda x: np.sin(2 * np.pi * x), "dirichlet", 0, 0, 1.0, 8)
    x = np.linspace(0, 1, 9)
    for t in (0.1, 1.0, 7.3):
        assert np.allclose(np.abs(sol(x, t)), np.abs(np.sin(2 * np.pi * x)), atol=1e-12)


def test_separation_series_rejects_advection():
    with pytest.raises(UnsupportedOracle):
        oracles.separation_series(AdvectionRight(1.0), np.sin, "dirichlet", 0, 0, 1.0, 4)


def _heat_system(N, u=0.0, v=0.0, eq=None):
    g = make_grid(1.0, N)
    spec = ProblemSpec(eq or Heat(), S.CENTERED_O2, g, np.zeros(N + 2), [dirichlet("left", u), dirichlet("right", v)])
    return spec, fd.assemble_system(spec)


def test_expm_single_unknown_closed_form():
    spec, sys = _heat_system(1, u=1.0, v=3.0)
    a, g = -2 / spec.grid.h**2, 4.0 / spec.grid.h**2
    q0, T = 0.7, 0.05
    exact = q0 * np.exp(a * T) + g / a * (np.exp(a * T) - 1)
    assert oracles.expm_solve(sys, [q0], T)[0] == pytest.approx(exact, rel=1e-13)


def test_expm_at_zero_time_is_identity():
    _, sys = _heat_system(7, 1.0, 2.0)
    Q0 = np.arange(7.0)
    assert np.allclose(oracles.expm_solve(sys, Q0, 0.0), Q0, atol=1e-15)


@given(st.floats(0.0, 0.05), st.floats(0.0, 0.05))
@settings(max_examples=20, deadline=None)
def test_expm_semigroup(s, t):
    _, sys = _heat_system(9, 0.5, -1.0, eq=LinearSchrodinger())
    Q0 = np.linspace(-1, 1, 9)
    one = oracles.expm_solve(sys, Q0, s + t)
    two = oracles.expm_solve(sys, oracles.expm_solve(sys, Q0, s), t)
    assert np.allclose(one, two, atol=1e-10)


def test_expm_and_rk4_oracles_agree():
    spec = registry.get_problem("ls-neumann").spec(h=0.05)
    sys = fd.assemble_system(spec)
    Q0 = sys.initial_state(spec.ic)
    a = oracles.expm_solve(sys, Q0, 0.02)
    b = oracles.rk4_oracle(sys, Q0, 0.02)
    assert np.max(np.abs(a - b)) < 1e-9


def test_expm_dimension_limit():
    _, sys = _heat_system(oracles.EXPM_MAX_DIM + 5)
    with pytest.raises(ResourceLimit):
        oracles.expm_solve(sys, np.zeros(sys.dim), 0.1)


def test_registry_exact_solutions_satisfy_initial_data():
    for name in ("heat-dirichlet", "heat4-sine", "advec-sech", "advec-smooth"):
        p = registry.get_problem(name)
        spec = p.spec(N=19)
        assert np.allclose(p.exact_solution()(spec.grid.x, 0.0), spec.ic.values, atol=1e-12)
