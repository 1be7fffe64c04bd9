import math

import numpy as np
import pytest
from scipy.integrate import quad

from sdutm import registry, series, smalltime
from sdutm.dispersion import make_dispersion
from sdutm.errors import InvalidArgument, UnsupportedDiscretization
from sdutm.problem import (
    AdvectionRight,
    ProblemSpec,
    StencilKind as S,
    TimeFunction,
    dirichlet,
    make_grid,
    sample_initial,
)


def _spec(N=19, c=1.0, v=None, phi=np.cos):
    g = make_grid(1.0, N)
    v = TimeFunction.sinusoid(1.0, 3.0, 0.3) if v is None else v
    return ProblemSpec(AdvectionRight(c), S.FORWARD_O1, g, sample_initial(phi, g), [dirichlet("right", v)])


def _kquad(f, h):
    re = quad(lambda k: f(k).real, -math.pi / h, math.pi / h, limit=200)[0]
    im = quad(lambda k: f(k).imag, -math.pi / h, math.pi / h, limit=200)[0]
    return re + 1j * im


def test_zeroth_moment():
    g = make_grid(1.0, 7)
    assert smalltime.moment_integral(0, 7, g, 2.0) == pytest.approx(2 * math.pi / g.h)
    assert all(smalltime.moment_integral(0, n, g, 2.0) == 0 for n in range(7))


@pytest.mark.parametrize("m,n", [(2, 0), (1, 1), (3, 0), (2, 1)])
def test_moments_match_quadrature(m, n):
    g, c = make_grid(1.0, 1), 1.3
    W = make_dispersion(AdvectionRight(c), S.FORWARD_O1, g.h)
    ref = _kquad(lambda k: np.exp(1j * k * (n - g.N) * g.h) * W(k) ** m, g.h)
    assert smalltime.moment_integral(m, n, g, c) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_moment_argument_checks():
    g = make_grid(1.0, 3)
    with pytest.raises(InvalidArgument):
        smalltime.moment_integral(-1, 0, g, 1.0)
    with pytest.raises(InvalidArgument):
        smalltime.moment_integral(1, 4, g, 1.0)


def test_first_coefficient_feeds_last_node_only():
    spec = _spec(N=9, c=1.7, v=TimeFunction.constant(2.5))
    K = smalltime.smalltime_coefficients(spec, 0.0, order=1).K
    expect = np.zeros(10)
    expect[9] = 1.7 * 2.5 / spec.grid.h
    assert np.allclose(K[0], expect)


def test_second_coefficient_matches_taylor_quadrature():
    # tau^2 term of integral_0^tau exp(-W s) v(t0 + tau - s) ds is (v' - W v)/2
    t0, c = 0.4, 1.3
    spec = _spec(N=3, c=c)
    h, N = spec.grid.h, spec.grid.N
    v = spec.bcs[0].data
    v0, v1 = complex(v(t0)), complex(v.derivative(1)(t0))
    W = make_dispersion(AdvectionRight(c), S.FORWARD_O1, h)
    K = smalltime.smalltime_coefficients(spec, t0, order=2).K
    for n in range(N + 1):
        ref = c / (2 * math.pi) * _kquad(lambda k: np.exp(1j * k * (n - N) * h) * (v1 - W(k) * v0) / 2, h)
        assert K[1, n] == pytest.approx(ref, abs=1e-9)


def test_zero_data_gives_zero():
    spec = _spec(v=TimeFunction.zero(), phi=lambda x: 0 * x)
    assert np.all(smalltime.smalltime_solve(spec, 0.3, 0.01).values == 0)


def test_zero_step_returns_initial_samples():
    spec = _spec()
    sol = smalltime.smalltime_solve(spec, 0.0, 0.0)
    assert np.allclose(sol.values[:-1], spec.ic.values[:-1], atol=1e-15)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_constant_state_error_bound(order):
    spec = _spec(N=19, c=1.0, v=TimeFunction.constant(1.0), phi=lambda x: 0 * x + 1.0)
    for tau in (1e-3, 1e-2, 4e-2):
        err = np.max(np.abs(smalltime.smalltime_solve(spec, 0.0, tau, order).values - 1.0))
        assert err <= 10 * (tau / spec.grid.h) ** (order + 1)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_order_of_the_remainder(order):
    spec = _spec()
    taus = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    errs = [np.max(np.abs(smalltime.smalltime_solve(spec, 0.0, t, order).values
                          - series.advection_forward_series(spec, t).values)) for t in taus]
    slope = np.polyfit(np.log10(taus), np.log10(errs), 1)[0]
    assert abs(slope - (order + 1)) <= 0.4


def test_later_start_time_uses_absolute_boundary_times():
    spec = _spec()
    t0, tau = 0.2, 2e-3
    mid = series.advection_forward_series(spec, t0)
    ref = series.advection_forward_series(spec, t0 + tau).values
    restarted = spec.with_ic(mid.values)
    good = np.max(np.abs(smalltime.smalltime_solve(restarted, t0, tau).values - ref))
    wrong = np.max(np.abs(smalltime.smalltime_solve(restarted, 0.0, tau).values - ref))
    assert good < 1e-6 and wrong > 100 * good


def test_large_step_warns():
    spec = _spec(N=19)
    with pytest.warns(smalltime.SmallTimeWarning):
        smalltime.smalltime_solve(spec, 0.0, 2 * spec.grid.h)


def test_rejects_other_problems():
    with pytest.raises(UnsupportedDiscretization):
        smalltime.smalltime_coefficients(registry.get_problem("heat-dirichlet").spec(N=9), 0.0)
    with pytest.raises(InvalidArgument):
        smalltime.smalltime_coefficients(_spec(), 0.0, order=4)
    with pytest.raises(InvalidArgument):
        smalltime.smalltime_solve(_spec(), 0.0, -1.0)
