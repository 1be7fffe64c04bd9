import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdutm import quadrature
from sdutm import transforms as tr
from sdutm.errors import AccuracyFailure, InvalidArgument
from sdutm.problem import InitialCondition, TimeFunction, make_grid


def test_fourier_sum_examples():
    h = 0.1
    assert tr.forward_fourier_sum(np.zeros(11), 1.3, h) == 0
    assert tr.forward_fourier_sum(np.ones(11), 0.0, h, 1, 9) == pytest.approx(0.9)
    vals = np.zeros(11)
    vals[4] = 1
    assert tr.forward_fourier_sum(vals, 2 - 1j, h) == pytest.approx(h * np.exp(-1j * (2 - 1j) * 4 * h))


def test_fourier_sum_range_checked():
    with pytest.raises(InvalidArgument):
        tr.forward_fourier_sum(np.ones(5), 0.0, 0.1, 0, 5)


def test_time_transform_closed_forms():
    assert tr.time_transform(TimeFunction.constant(1.0), 0.0, 2.0).value == pytest.approx(2.0)
    assert tr.time_transform(TimeFunction.constant(2.0), 1.0, 1.0).value == pytest.approx(2 * (np.e - 1))


def test_time_transform_sine_against_antiderivative():
    W, T = 2 + 1j, 1.0
    # integral of exp(W t) sin(3t) = exp(W t)(W sin 3t - 3 cos 3t)/(W^2 + 9)
    F = lambda t: np.exp(W * t) * (W * np.sin(3 * t) - 3 * np.cos(3 * t)) / (W**2 + 9)
    exact = F(T) - F(0)
    closed = tr.time_transform(TimeFunction.sinusoid(1.0, 3.0), W, T).value
    quad = tr.time_transform(TimeFunction.from_callable(lambda t: np.sin(3 * t)), W, T, tol=1e-13).value
    assert abs(closed - exact) < 1e-12
    assert abs(quad - exact) < 1e-12


@given(
    st.floats(-50, 50), st.floats(-2000, 2000), st.floats(0.01, 2.0),
    st.sampled_from([0, 1, 2]), st.floats(-3, 3),
)
@settings(max_examples=60, deadline=None)
def test_closed_form_matches_quadrature(re, im, T, p, rate):
    W = complex(re, im)
    v = TimeFunction.exp_poly([(1.5, p, rate)])
    generic = TimeFunction.from_callable(lambda t: v(t))
    a = tr.fused_transform(v, W, T)
    b = tr.fused_transform(generic, W, T, tol=1e-12)
    assert abs(a - b) <= 1e-9 * (1 + abs(a))


def test_fused_transform_stays_finite_for_large_rates():
    W = np.array([4e6, 4e6 + 3e5j])
    val = tr.fused_transform(TimeFunction.constant(2.0), W, 1.0)
    assert np.all(np.isfinite(val))
    assert np.allclose(val, 2.0 / W)


def test_transform_rejects_negative_time():
    with pytest.raises(InvalidArgument):
        tr.time_transform(TimeFunction.constant(1.0), 1.0, -1.0)


def test_quadrature_failure_reports_error_estimate():
    with pytest.raises(AccuracyFailure) as err:
        quadrature.integrate(lambda t: 1 / np.sqrt(np.abs(t - 0.3))[:, None], [0.0, 1.0], tol=1e-14, max_panels=64)
    assert "achieved_error" in err.value.details


def test_sine_coefficients():
    g = make_grid(1.0, 9)
    assert np.all(tr.sine_coefficients(InitialCondition(np.zeros(11)), g) == 0)
    m = np.arange(11)
    b = tr.sine_coefficients(InitialCondition(np.sin(np.pi * 3 * m * g.h)), g)
    expect = np.zeros(11)
    expect[3] = 1
    assert np.allclose(b, expect, atol=1e-14)
    assert b[0] == 0 and b[10] == 0


def _direct_sine(phi, g):
    N, h, L = g.N, g.h, g.L
    ell = np.arange(N + 2)[:, None]
    m = np.arange(1, N + 1)[None, :]
    return 2 * h / L * np.sin(np.pi * ell * m * h / L) @ phi[1 : N + 1]


def _direct_cosine(phi, g):
    N, h, L = g.N, g.h, g.L
    ell = np.arange(N + 2)[:, None]
    m = np.arange(N + 2)[None, :]
    return 2 * h / L * np.cos(np.pi * ell * (m + 0.5) * h / (L + h)) @ phi


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_coefficients_match_direct_sums_and_are_linear(N, seed):
    g = make_grid(1.3, N)
    rng = np.random.default_rng(seed)
    p1, p2 = rng.normal(size=(2, N + 2)) + 1j * rng.normal(size=(2, N + 2))
    a, b = rng.normal(size=2)
    for fn, direct in ((tr.sine_coefficients, _direct_sine), (tr.cosine_coefficients, _direct_cosine)):
        c1, c2 = fn(InitialCondition(p1), g), fn(InitialCondition(p2), g)
        assert np.allclose(c1, direct(p1, g), atol=1e-12)
        assert np.allclose(fn(InitialCondition(a * p1 + b * p2), g), a * c1 + b * c2, atol=1e-12)


def test_cosine_coefficients_of_constant_and_single_mode():
    g = make_grid(1.0, 7)
    C = 2.5
    b = tr.cosine_coefficients(InitialCondition(np.full(9, C)), g)
    assert b[0] == pytest.approx(2 * g.h * C * 9 / g.L)
    assert np.allclose(b[1:], 0, atol=1e-13)
    m = np.arange(9)
    b = tr.cosine_coefficients(InitialCondition(np.cos(np.pi * 4 * (m + 0.5) * g.h / (g.L + g.h))), g)
    others = np.delete(b, 4)
    assert abs(b[4]) > 0.5 and np.allclose(others, 0, atol=1e-13)


def test_sine_reconstruction():
    g = make_grid(1.0, 15)
    phi = np.random.default_rng(0).normal(size=17)
    b = tr.sine_coefficients(InitialCondition(phi), g)
    n = np.arange(1, 16)
    rec = np.sin(np.pi * np.outer(n, np.arange(17)) * g.h / g.L) @ b
    assert np.allclose(rec, phi[1:16], atol=1e-10)


def test_boundary_combination_sign_rule():
    assert np.all(tr.boundary_combination(np.zeros(3), np.zeros(3)) == 0)
    H = tr.boundary_combination(np.array([1.0, 1.0]), np.array([2.0, 2.0]), ells=np.array([2, 3]))
    assert H[0] == -1.0 and H[1] == 3.0
    with pytest.raises(InvalidArgument):
        tr.boundary_combination(np.zeros(3), np.zeros(4))
