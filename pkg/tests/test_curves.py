import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import DimensionMismatchError, EmptyActionSetError, MechanismError
from core.simplex import grid_matrix, make_posterior, make_prior, simplex_grid
from curves.convexity import check_convexity
from curves.preference_curve import (
    CurveFactory,
    NegatedQuadraticCurve,
    QuadraticCurve,
    evaluate,
    from_action_set,
    gradient,
    scalar_derivative,
    shift,
    vertex_values,
)
from oracle.brute_force import finite_difference_gradient


def test_quadratic_evaluation(quadratic):
    assert evaluate(quadratic, make_posterior([0.5, 0.5])) == pytest.approx(0.0, abs=1e-12)
    assert evaluate(quadratic, make_posterior([0.9, 0.1])) == pytest.approx(0.32)
    assert evaluate(shift(quadratic, 0.1), make_posterior([0.9, 0.1])) == pytest.approx(0.22)


def test_quadratic_gradient(quadratic):
    np.testing.assert_allclose(gradient(quadratic, make_posterior([0.9, 0.1])), [1.8, 0.2])


def test_action_set_gradient_and_tie_break(two_actions):
    np.testing.assert_array_equal(gradient(two_actions, make_posterior([0.7, 0.3])), [1.0, 0.0])
    np.testing.assert_array_equal(gradient(two_actions, make_posterior([0.5, 0.5])), [1.0, 0.0])


def test_from_action_set_examples(uniform_prior, two_actions):
    assert evaluate(two_actions, make_posterior([0.7, 0.3])) == pytest.approx(0.2)
    assert evaluate(two_actions, make_posterior([1.0, 0.0])) == pytest.approx(0.5)
    assert evaluate(two_actions, uniform_prior.value) == 0.0
    constant = from_action_set([[3.0, 3.0]], uniform_prior)
    for point in simplex_grid(2, 0.1):
        assert evaluate(constant, point) == pytest.approx(0.0, abs=1e-12)


def test_from_action_set_errors(uniform_prior):
    with pytest.raises(EmptyActionSetError):
        from_action_set([], uniform_prior)
    with pytest.raises(DimensionMismatchError):
        from_action_set([[1.0, 0.0], [1.0, 0.0, 0.0]], uniform_prior)
    with pytest.raises(DimensionMismatchError):
        from_action_set([[1.0, 0.0, 0.0]], uniform_prior)


def test_negative_beta_is_rejected(quadratic):
    with pytest.raises(MechanismError):
        shift(quadratic, -0.1)


@pytest.mark.parametrize("beta", [0.1, 0.37])
def test_beta_shift_identity_and_gradient_independence(quadratic, two_actions, beta):
    grid = grid_matrix(simplex_grid(2, 0.01))
    for curve in (quadratic, two_actions):
        shifted = shift(curve, beta)
        np.testing.assert_allclose(shifted.values(grid), curve.values(grid) - beta, atol=1e-12, rtol=0)
        np.testing.assert_array_equal(shifted.gradients(grid), curve.gradients(grid))


def test_quadratic_gradient_matches_finite_differences():
    prior = make_prior([0.2, 0.3, 0.5])
    curve = QuadraticCurve(prior)
    rng = np.random.default_rng(11)
    for point in rng.dirichlet(np.ones(3), size=100):
        point = np.clip(point, 1e-3, None)
        analytic = curve.gradient(point)
        numeric = finite_difference_gradient(curve, point)
        np.testing.assert_allclose(numeric, analytic, rtol=1e-6, atol=1e-9)


def test_action_set_subgradient_supports_the_curve(three_outcomes):
    curve = three_outcomes.curve
    grid = grid_matrix(simplex_grid(3, 0.05))
    values = curve.values(grid)
    for x in grid[::7]:
        a = curve.gradient(x)
        assert float(a @ x) - curve.normalizer == pytest.approx(curve.value(x), abs=1e-12)
        assert np.all(values >= grid @ a - curve.normalizer - 1e-12)


def test_curve_is_zero_at_prior(three_outcomes):
    assert evaluate(three_outcomes.curve, three_outcomes.prior.value) == pytest.approx(0.0, abs=1e-12)


def test_scalar_derivative_of_quadratic(quadratic):
    # P_0(rho) = 2 rho^2 - 2 rho + 0.5 en la parametrización escalar
    assert scalar_derivative(quadratic, 0.9) == pytest.approx(4 * 0.9 - 2)


def test_vertex_values(quadratic, two_actions):
    assert vertex_values(quadratic) == pytest.approx([0.5, 0.5])
    assert vertex_values(two_actions) == pytest.approx([0.5, 0.5])


def test_factory_builds_each_kind(uniform_prior):
    assert isinstance(CurveFactory.build({"kind": "quadratic"}, uniform_prior), QuadraticCurve)
    assert CurveFactory.build({"kind": "action_set", "actions": [[1, 0], [0, 1]]}, uniform_prior).n == 2
    assert isinstance(CurveFactory.build({"kind": "negated_quadratic"}, uniform_prior), NegatedQuadraticCurve)
    with pytest.raises(MechanismError):
        CurveFactory.build({"kind": "logarithmic"}, uniform_prior)


# ---------------- convexidad ----------------

def test_convexity_passes_for_convex_families(quadratic, two_actions, three_outcomes):
    report = check_convexity(quadratic, 10_000, seed=1)
    assert report.passed
    assert report.worst_violation <= 1e-12
    assert check_convexity(two_actions, 10_000, seed=2).passed
    assert check_convexity(three_outcomes.curve, 10_000, seed=3).passed


def test_convexity_detects_concave_curve(uniform_prior):
    report = check_convexity(NegatedQuadraticCurve(uniform_prior), 1_000, seed=4)
    assert not report.passed
    assert report.worst_violation > 0.0
    assert report.witness is not None


def test_convexity_is_reproducible(quadratic):
    first = check_convexity(quadratic, 500, seed=9)
    second = check_convexity(quadratic, 500, seed=9)
    assert first.worst_violation == second.worst_violation


def test_convexity_requires_samples(quadratic):
    with pytest.raises(MechanismError):
        check_convexity(quadratic, 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=5.0))
def test_shift_subtracts_beta_everywhere(rho, beta):
    curve = QuadraticCurve(make_prior([0.5, 0.5]))
    point = np.array([rho, 1.0 - rho])
    assert evaluate(shift(curve, beta), point) == pytest.approx(evaluate(curve, point) - beta, abs=1e-12)
