import math

import numpy as np
import pytest

from contracts.contract import Contract, payment_vector
from core.errors import EmptyFeasibleSetError, MechanismError, NotBinaryError
from core.simplex import grid_matrix, make_posterior, make_prior, simplex_grid
from core.technology import make_technology
from curves.preference_curve import QuadraticCurve, from_action_set
from experts.expert import make_expert, truthful_bid
from maxrisk.bounds import (
    allowed_report_table,
    binary_report_bounds,
    bounds_sweep,
    tangency_root,
)
from maxrisk.limits import (
    RiskLimits,
    contract_exposure,
    is_report_allowed,
    restricted_technologies,
)
from maxrisk.restricted import beta_grid, bid_grid, min_beta_reserve, restricted_bid

HALF = RiskLimits(phi_e=0.5)


def closed_form_rho_max(beta, phi_e):
    return math.sqrt((phi_e + 0.5 - beta) / 2.0)


# ---------------- límites ----------------

def test_risk_limits_reject_negative_values():
    with pytest.raises(MechanismError):
        RiskLimits(phi_p=-0.1)
    assert RiskLimits().unbounded
    assert not HALF.unbounded


@pytest.mark.parametrize(
    "report, expected",
    [((0.5, 0.5), True), ((0.9, 0.1), False), ((0.70711, 0.29289), True), ((0.75, 0.25), False)],
)
def test_is_report_allowed(quadratic, report, expected):
    assert is_report_allowed(quadratic, make_posterior(list(report)), HALF) is expected


def test_contract_exposure(quadratic):
    exposure = contract_exposure(payment_vector(Contract.for_curve(quadratic), make_posterior([0.9, 0.1])))
    assert exposure.principal_max_payment == pytest.approx(0.48)
    assert exposure.expert_max_loss == pytest.approx(1.12)
    assert not exposure.within(HALF)
    assert exposure.within(RiskLimits(phi_p=0.5, phi_e=1.2))


def test_restricted_technologies(expert_a, quadratic):
    assert restricted_technologies(expert_a, quadratic, 0.0, HALF) == [1]
    assert restricted_technologies(expert_a, quadratic, 0.0, RiskLimits(phi_e=1.5)) == [0, 1]
    assert restricted_technologies(expert_a, quadratic, 0.0, RiskLimits()) == [0, 1]
    # con beta > 0.38 el pago -1.12 - beta supera la pérdida 1.5
    assert restricted_technologies(expert_a, quadratic, 0.4, RiskLimits(phi_e=1.5)) == [1]


# ---------------- cotas binarias ----------------

def test_binary_bounds_examples(quadratic):
    interval = binary_report_bounds(quadratic, 0.0, HALF)
    assert interval.rho_min == pytest.approx(0.29289, abs=1e-5)
    assert interval.rho_max == pytest.approx(closed_form_rho_max(0.0, 0.5), abs=1e-6)
    assert interval.rho_min == pytest.approx(1.0 - interval.rho_max, abs=1e-6)

    unbounded = binary_report_bounds(quadratic, 0.0, RiskLimits())
    assert (unbounded.rho_min, unbounded.rho_max) == (0.0, 1.0)

    shifted = binary_report_bounds(quadratic, 0.25, HALF)
    assert shifted.rho_max == pytest.approx(math.sqrt(0.375), abs=1e-6)
    assert shifted.rho_min == pytest.approx(1.0 - math.sqrt(0.375), abs=1e-6)


def test_zero_loss_leaves_only_the_prior(quadratic):
    interval = binary_report_bounds(quadratic, 0.0, RiskLimits(phi_e=0.0))
    assert interval.rho_min == pytest.approx(0.5, abs=1e-6)
    assert interval.rho_max == pytest.approx(0.5, abs=1e-6)


def test_empty_interval_when_every_report_loses_too_much(quadratic):
    interval = binary_report_bounds(quadratic, 0.3, RiskLimits(phi_e=0.1))
    assert interval.is_empty
    assert str(interval) == "vacío"
    assert not interval.contains(0.5)


def test_principal_limit_cuts_both_sides(quadratic):
    limits = RiskLimits(phi_p=0.3, phi_e=math.inf)
    interval = binary_report_bounds(quadratic, 0.1, limits)
    # pago_1 = 0.4 - 2 (1 - rho)^2 <= 0.3
    assert interval.rho_max == pytest.approx(1.0 - math.sqrt(0.05), abs=1e-6)
    assert interval.rho_min == pytest.approx(math.sqrt(0.05), abs=1e-6)


def test_bounds_require_two_outcomes(three_outcomes):
    with pytest.raises(NotBinaryError):
        binary_report_bounds(three_outcomes.curve, 0.0, HALF)


def test_bounds_shrink_as_beta_grows(quadratic):
    sweep = bounds_sweep(quadratic, np.linspace(0.0, 0.45, 19), HALF)
    assert list(sweep.columns) == ["beta", "rho_min", "rho_max"]
    assert np.all(np.diff(sweep["rho_max"]) <= 1e-12)
    assert np.all(np.diff(sweep["rho_min"]) >= -1e-12)


def test_sweep_marks_empty_intervals_with_nan(quadratic):
    sweep = bounds_sweep(quadratic, [0.0, 0.3], RiskLimits(phi_e=0.1))
    assert not math.isnan(sweep["rho_max"][0])
    assert math.isnan(sweep["rho_min"][1]) and math.isnan(sweep["rho_max"][1])


@pytest.mark.parametrize("beta, limits", [(0.0, HALF), (0.1, RiskLimits(phi_p=0.3, phi_e=0.8))])
def test_bounds_are_sound_on_a_fine_grid(quadratic, beta, limits):
    interval = binary_report_bounds(quadratic, beta, limits)
    table = allowed_report_table(quadratic, beta, limits, 1e-4)
    inside = (table["rho"] >= interval.rho_min) & (table["rho"] <= interval.rho_max)
    assert table.loc[inside, "allowed"].all()
    outside = (table["rho"] < interval.rho_min - 1e-4) | (table["rho"] > interval.rho_max + 1e-4)
    assert not table.loc[outside, "allowed"].any()


def test_tangency_root_requires_a_sign_change():
    assert tangency_root(lambda r: r - 0.25) == pytest.approx(0.25, abs=1e-9)
    with pytest.raises(MechanismError):
        tangency_root(lambda r: r + 1.0)


def test_allowed_reports_can_all_lose_money(quadratic):
    # con beta por encima del mayor valor admisible ningún informe permitido da pago esperado positivo
    table = allowed_report_table(quadratic, 0.2, HALF, 1e-3)
    assert table["allowed"].any()
    assert table.loc[table["allowed"], "expected_payment"].max() < 0.0
    assert list(table.columns) == ["rho", "payment_outcome1", "payment_outcome2", "allowed", "expected_payment"]


# ---------------- puja restringida ----------------

def test_beta_grid():
    grid = beta_grid(0.5, 0.005)
    assert grid[0] == 0.0
    assert grid[-1] == 0.5
    assert len(grid) == 101
    assert grid[24] == 0.12
    assert beta_grid(0.51, 0.04)[-1] == 0.52
    with pytest.raises(MechanismError):
        beta_grid(0.5, -1.0)
    with pytest.raises(MechanismError):
        beta_grid(math.inf, 0.005)


def test_restricted_bid_examples(expert_a, quadratic, uniform_prior):
    grid = beta_grid(0.5, 0.005)
    wide = restricted_bid(expert_a, quadratic, RiskLimits(phi_e=1.5), grid)
    assert wide.beta_prime == pytest.approx(0.12)
    assert wide.technology == 0

    tight = restricted_bid(expert_a, quadratic, HALF, grid)
    assert tight.beta_prime == 0.0
    assert tight.technology == 1

    only_null = make_expert("N", [], uniform_prior)
    assert restricted_bid(only_null, quadratic, RiskLimits(phi_p=0.2, phi_e=0.1), grid).beta_prime == 0.0


def test_restricted_bid_without_limits_matches_truthful_bid(expert_a, expert_b, quadratic):
    step = 0.005
    for expert in (expert_a, expert_b):
        bid = restricted_bid(expert, quadratic, RiskLimits(), beta_grid(0.5, step))
        assert truthful_bid(expert, quadratic) - step <= bid.beta_prime <= truthful_bid(expert, quadratic) + 1e-12


def test_restricted_bid_literal_argmax(expert_a, quadratic):
    bid = restricted_bid(expert_a, quadratic, RiskLimits(phi_e=1.5), beta_grid(0.5, 0.005), literal_argmax=True)
    assert bid.beta_prime == 0.0
    assert bid.restricted_value == pytest.approx(0.12)


def test_restricted_bid_refinement(expert_b, quadratic):
    coarse = restricted_bid(expert_b, quadratic, RiskLimits(phi_e=1.5), beta_grid(0.5, 0.04))
    assert coarse.beta_prime == pytest.approx(0.12)
    refined = restricted_bid(expert_b, quadratic, RiskLimits(phi_e=1.5), beta_grid(0.5, 0.04), refine=True)
    assert refined.beta_prime == pytest.approx(0.13, abs=1e-6)


def test_restricted_bid_validates_grid(expert_a, quadratic):
    with pytest.raises(MechanismError):
        restricted_bid(expert_a, quadratic, HALF, [])
    with pytest.raises(MechanismError):
        restricted_bid(expert_a, quadratic, HALF, [0.1, 0.2])
    with pytest.raises(MechanismError):
        restricted_bid(expert_a, quadratic, HALF, [0.0, 0.2, 0.1])


def test_bid_grid_reaches_past_every_value(expert_a, expert_b, quadratic):
    grid = bid_grid([expert_a, expert_b], quadratic, 0.005)
    assert grid[0] == 0.0
    assert grid[-1] >= truthful_bid(expert_b, quadratic) + 0.005 - 1e-12


def test_restricted_bid_default_grid_follows_large_values(uniform_prior):
    curve = from_action_set([[4.0, 0.0], [0.0, 4.0]], uniform_prior)
    revealing = make_technology(
        [(make_posterior([1.0, 0.0]), 0.5), (make_posterior([0.0, 1.0]), 0.5)], cost=0.1, name="revelacion"
    )
    expert = make_expert("R", [revealing], uniform_prior)
    assert truthful_bid(expert, curve) == pytest.approx(1.9)

    bid = restricted_bid(expert, curve, RiskLimits())
    assert 1.9 - 0.005 <= bid.beta_prime <= 1.9 + 1e-12
    assert bid.technology == 0
    refined = restricted_bid(expert, curve, RiskLimits(), refine=True)
    assert refined.beta_prime == pytest.approx(1.9, abs=1e-6)


def test_restricted_bid_with_no_feasible_technology():
    prior = make_prior([0.3, 0.7])
    expert = make_expert("X", [], prior)
    # con prior asimétrico mu0 ya paga (-0.56, 0.24) con beta = 0
    with pytest.raises(EmptyFeasibleSetError):
        restricted_bid(expert, QuadraticCurve(prior), RiskLimits(phi_p=0.1, phi_e=0.1), [0.0, 0.1])


# ---------------- reserve por la cota de vértices ----------------

def test_min_beta_reserve(quadratic, two_actions):
    assert min_beta_reserve(quadratic, 0.3) == pytest.approx(0.2)
    assert min_beta_reserve(quadratic, 0.5) == 0.0
    assert min_beta_reserve(two_actions, 0.1) == pytest.approx(0.4)
    assert min_beta_reserve(quadratic, math.inf) == 0.0


def test_min_beta_reserve_caps_every_payment(quadratic, two_actions, three_outcomes):
    for curve, phi_p in ((quadratic, 0.3), (two_actions, 0.1), (three_outcomes.curve, 0.25)):
        beta = min_beta_reserve(curve, phi_p)
        grid = grid_matrix(simplex_grid(curve.n, 0.05))
        assert Contract.for_curve(curve, beta).payment_matrix(grid).max() <= phi_p + 1e-9
