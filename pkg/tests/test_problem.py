import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdutm.errors import InvalidArgument, InvalidProblem
from sdutm.problem import (
    Heat,
    ProblemSpec,
    SolutionField,
    StencilKind,
    TimeFunction,
    compatibility_warnings,
    dirichlet,
    grid_from_h,
    make_grid,
    sample_initial,
)


def test_grid_spacing_for_fine_example_grid():
    assert make_grid(1.0, 199).h == pytest.approx(0.005, abs=1e-15)


def test_smallest_grid():
    g = make_grid(1.0, 1)
    assert g.h == 0.5
    assert g.x[1] == 0.5


def test_grid_on_longer_interval():
    g = make_grid(2.0, 3)
    assert g.h == 0.5 and g.x[2] == 1.0


@pytest.mark.parametrize("L,N", [(0.0, 3), (-1.0, 3), (1.0, 0), (1.0, 2.5)])
def test_grid_rejects_bad_input(L, N):
    with pytest.raises(InvalidArgument):
        make_grid(L, N)


@given(st.floats(0.1, 10.0), st.integers(1, 2000))
def test_grid_spacing_and_round_trip(L, N):
    g = make_grid(L, N)
    assert abs(g.h * (N + 1) - L) <= 2 * np.spacing(L)
    n = np.arange(N + 2)
    assert np.array_equal(g.coordinate(g.index(g.x)), g.x)
    assert g.x[0] == 0.0 and g.x[-1] == pytest.approx(L, rel=1e-15)
    assert np.array_equal(g.index(g.x), n)


def test_grid_from_h_rejects_nondividing_width():
    assert grid_from_h(1.0, 0.1).N == 9
    with pytest.raises(InvalidArgument):
        grid_from_h(1.0, 0.3)


def test_sample_zero_and_arithmetic():
    g = make_grid(1.0, 3)
    assert np.all(sample_initial(lambda x: 0 * x, g).values == 0)
    vals = sample_initial(lambda x: 2 * x + np.sin(5 * np.pi * x), g).values
    assert vals[2] == pytest.approx(2.0, abs=1e-14)


def test_sample_sech_pulse_matches_direct_evaluation():
    g = make_grid(1.0, 199)
    phi = lambda x: 1 / np.cosh(40 * (x - 0.425)) + 1 / np.cosh(200 * (x - 0.925))
    vals = sample_initial(phi, g).values
    assert np.array_equal(vals, phi(np.arange(201) * g.h).astype(complex))


def test_initial_condition_length_checked():
    g = make_grid(1.0, 3)
    with pytest.raises(InvalidArgument):
        ProblemSpec(Heat(), StencilKind.CENTERED_O2, g, np.zeros(4), [])


def test_time_function_closed_form_derivatives():
    v = TimeFunction.sinusoid(2.0, 3.0, 0.5)
    t = np.linspace(0, 1, 7)
    assert np.allclose(v(t), 2 * np.sin(3 * t + 0.5))
    assert np.allclose(v.derivative(1)(t), 6 * np.cos(3 * t + 0.5))
    assert np.allclose(v.derivative(2)(t), -18 * np.sin(3 * t + 0.5))
    assert TimeFunction.constant(4.0).is_constant
    assert not v.is_constant


def test_callable_without_derivatives_is_rejected_when_needed():
    v = TimeFunction.from_callable(np.cos)
    with pytest.raises(InvalidProblem) as err:
        v.derivative(1)
    assert err.value.code == "derivatives-required"


def test_corner_mismatch_is_a_warning_only():
    g = make_grid(1.0, 3)
    spec = ProblemSpec(Heat(), StencilKind.CENTERED_O2, g, np.ones(5), [dirichlet("left", 0.0), dirichlet("right", 1.0)])
    with pytest.warns(UserWarning):
        msgs = compatibility_warnings(spec)
    assert len(msgs) == 1


def test_solution_field_is_immutable():
    sol = SolutionField(make_grid(1.0, 2), 0.1, np.zeros(4))
    with pytest.raises(ValueError):
        sol.values[0] = 1.0
