import os
import sys

import pytest

# Configuración del Path para importar módulos de 'src'
TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
PROJECT_ROOT = os.path.abspath(os.path.join(TESTS_DIR, ".."))
sys.path.append(os.path.join(PROJECT_ROOT, "src"))

from cli.scenario_loader import load_scenario  # noqa: E402
from core.simplex import make_posterior, make_prior  # noqa: E402
from core.technology import make_technology  # noqa: E402
from curves.preference_curve import QuadraticCurve, from_action_set  # noqa: E402
from experts.expert import make_expert  # noqa: E402

SCENARIOS_DIR = os.path.join(PROJECT_ROOT, "scenarios")
FIXTURES_DIR = os.path.join(TESTS_DIR, "fixtures")


def scenario_path(name: str) -> str:
    return os.path.join(SCENARIOS_DIR, name)


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES_DIR, name)


@pytest.fixture
def uniform_prior():
    return make_prior([0.5, 0.5])


@pytest.fixture
def quadratic(uniform_prior):
    return QuadraticCurve(uniform_prior)


@pytest.fixture
def two_actions(uniform_prior):
    return from_action_set([[1.0, 0.0], [0.0, 1.0]], uniform_prior)


@pytest.fixture
def mu1():
    return make_technology(
        [(make_posterior([0.9, 0.1]), 0.5), (make_posterior([0.1, 0.9]), 0.5)], cost=0.2, name="mu1"
    )


@pytest.fixture
def mu2():
    return make_technology(
        [(make_posterior([0.8, 0.2]), 0.5), (make_posterior([0.2, 0.8]), 0.5)], cost=0.05, name="mu2"
    )


@pytest.fixture
def expert_a(mu1, uniform_prior):
    return make_expert("A", [mu1], uniform_prior)


@pytest.fixture
def expert_b(mu2, uniform_prior):
    return make_expert("B", [mu2], uniform_prior)


@pytest.fixture
def null_expert(uniform_prior):
    return make_expert("solo", [], uniform_prior)


@pytest.fixture
def two_experts():
    return load_scenario(scenario_path("two_experts.json"))


@pytest.fixture
def two_experts_reserve():
    return load_scenario(scenario_path("two_experts_reserve.json"))


@pytest.fixture
def single_null():
    return load_scenario(scenario_path("single_expert_null.json"))


@pytest.fixture
def three_outcomes():
    return load_scenario(scenario_path("three_outcomes_actions.json"))


@pytest.fixture
def maxrisk_scenario():
    return load_scenario(scenario_path("maxrisk_reserve.json"))
