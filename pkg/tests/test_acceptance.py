"""
Criterios de aceptación numerados: la tabla de contratos A/B más las propiedades que
deben cumplirse a escala de escritorio (segundos por criterio).
"""

import math

import numpy as np
import pytest

import main
from auction.engine import MechanismEngine, check_dominant_strategy
from auction.statistics import estimate_principal_utility
from conftest import scenario_path
from contracts.audits import check_properness, verify_uniqueness
from contracts.contract import Contract, PaymentVector, expected_payment, payment_vector
from core.simplex import grid_matrix, make_posterior, simplex_grid
from curves.convexity import check_convexity
from maxrisk.bounds import binary_report_bounds
from maxrisk.limits import RiskLimits
from maxrisk.restricted import min_beta_reserve
from oracle.brute_force import brute_force_best_report, brute_force_report_bounds

BETAS = (0.0, 0.1, 0.37)


def families(quadratic, two_actions, three_outcomes):
    return [(quadratic, 0.01), (two_actions, 0.01), (three_outcomes.curve, 0.05)]


def test_1_contract_table():
    belief = make_posterior([0.1, 0.9])
    assert abs(expected_payment(PaymentVector((-8000.0, 1000.0), belief), belief) - 100.0) <= 1e-9
    assert abs(expected_payment(PaymentVector((-8000000.0, 889000.0), belief), belief) - 100.0) <= 1e-9


def test_2_expected_payment_identity(quadratic, two_actions, three_outcomes):
    for curve, step in families(quadratic, two_actions, three_outcomes):
        grid = grid_matrix(simplex_grid(curve.n, step))
        for beta in BETAS:
            contract = Contract.for_curve(curve, beta)
            gap = np.einsum("ij,ij->i", grid, contract.payment_matrix(grid)) - contract.curve.values(grid)
            assert np.abs(gap).max() <= 1e-9


def test_3_properness_and_oracle(quadratic, two_actions, three_outcomes):
    for curve, step in families(quadratic, two_actions, three_outcomes):
        for beta in BETAS:
            assert check_properness(Contract.for_curve(curve, beta), step).worst_violation <= 1e-9
    # el oráculo recorre todas las creencias de una rejilla más gruesa
    for curve, step in ((quadratic, 0.02), (two_actions, 0.02), (three_outcomes.curve, 0.1)):
        for belief in simplex_grid(curve.n, step):
            report, _ = brute_force_best_report(curve, belief, step)
            assert np.max(np.abs(report.as_array() - belief.as_array())) <= step / 2


def test_4_convexity(quadratic, two_actions, three_outcomes):
    for seed, curve in enumerate((quadratic, two_actions, three_outcomes.curve)):
        report = check_convexity(curve, 10_000, seed=seed)
        assert report.violations == 0
        assert report.worst_violation <= 1e-9


def test_5_truthful_bidding_is_dominant(two_experts):
    grid = [0.0, 0.05, 0.12, 0.13, 0.2, 1.0]
    for index in range(len(two_experts.experts)):
        assert check_dominant_strategy(two_experts, index, grid).max_gain <= 1e-9


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_6_principal_gets_second_highest_value(two_experts, seed):
    mean, half_width = estimate_principal_utility(two_experts, 100_000, seed=seed)
    assert mean - half_width <= 0.12 <= mean + half_width


def test_7_uniqueness_of_the_tangent_contract(quadratic):
    report = make_posterior([0.9, 0.1])
    contract = Contract.for_curve(quadratic)
    tangent = payment_vector(contract, report).as_array()
    # las desviaciones ortogonales al informe conservan el pago esperado en él
    orthogonal = np.array([report.probs[1], -report.probs[0]])
    orthogonal /= np.max(np.abs(orthogonal))
    rng = np.random.default_rng(77)
    for size, sign in zip(rng.uniform(0.01, 0.5, 100), rng.choice([-1.0, 1.0], 100)):
        alternative = tangent + sign * size * orthogonal
        assert verify_uniqueness(contract, report, alternative, 0.01).counterexample_found


def test_8_report_bounds(quadratic):
    rng = np.random.default_rng(8)
    for beta, phi_e, phi_p in zip(rng.uniform(0.0, 0.3, 50), rng.uniform(0.3, 2.0, 50), rng.uniform(0.25, 2.0, 50)):
        limits = RiskLimits(phi_p=float(phi_p), phi_e=float(phi_e))
        exact = binary_report_bounds(quadratic, float(beta), limits)
        scan = brute_force_report_bounds(quadratic, float(beta), limits, 1e-4)
        assert abs(exact.rho_min - scan.rho_min) <= 1e-4 + 1e-9
        assert abs(exact.rho_max - scan.rho_max) <= 1e-4 + 1e-9

    for beta, phi_e in zip(rng.uniform(0.0, 0.4, 20), rng.uniform(0.4, 1.0, 20)):
        interval = binary_report_bounds(quadratic, float(beta), RiskLimits(phi_e=float(phi_e)))
        assert interval.rho_max == pytest.approx(math.sqrt((phi_e + 0.5 - beta) / 2.0), abs=1e-6)


def test_9_vertex_reserve_caps_payments(maxrisk_scenario):
    phi_p = maxrisk_scenario.risk_limits.phi_p
    scenario = maxrisk_scenario.with_overrides(reserve=min_beta_reserve(maxrisk_scenario.curve, phi_p))
    runs = MechanismEngine(scenario).simulate(10_000)
    assert runs["winner"].eq("C").all()
    assert runs["payment"].max() <= phi_p + 1e-9


def test_10_auction_output_is_deterministic(tmp_path):
    paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
    for path in paths:
        assert main.main(["auction", "--scenario", scenario_path("two_experts.json"), "--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
