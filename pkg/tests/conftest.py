"""
Test configuration and fixtures
"""
import json

import numpy as np
import pytest

from models.distributions import HypothesisSpace, PriorDistribution
from models.likelihood import EliminationLikelihood, TableLikelihood, TwoValuedLikelihood
from quantum_core.preparation import prepare_prior_circuit, prior_state


WORKED_TABLE = (0.5, 0.25, 0.125, 0.125)


@pytest.fixture
def space4():
    """Two-qubit hypothesis space {0, 1, 2, 3}"""
    return HypothesisSpace(2)


@pytest.fixture
def uniform4(space4):
    return PriorDistribution.uniform(space4)


@pytest.fixture
def worked_likelihood():
    """Likelihood table (0.5, 0.25, 0.125, 0.125); with a uniform prior P(d) = 0.25"""
    return TableLikelihood(np.array(WORKED_TABLE))


@pytest.fixture
def worked_state(uniform4):
    return prior_state(uniform4)


@pytest.fixture
def uniform4_circuit(uniform4):
    return prepare_prior_circuit(uniform4)


@pytest.fixture
def eliminate_all_but_3():
    return EliminationLikelihood(frozenset({3}))


@pytest.fixture
def favor_01_r3():
    return TwoValuedLikelihood.from_suppression({0, 1}, 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def minimal_config_dict():
    """Smallest accepted experiment document"""
    return {
        "schema": "bayes-update/config/v1",
        "n": 2,
        "prior": {"kind": "uniform"},
        "likelihood": {"kind": "elimination", "favored": [3]},
        "algorithm": {"kind": "det", "theta_source": "exact_classical"},
        "trials": 0,
        "master_seed": 7,
    }


@pytest.fixture
def worked_prob_config_dict():
    return {
        "schema": "bayes-update/config/v1",
        "n": 2,
        "prior": {"kind": "uniform"},
        "likelihood": {"kind": "table", "values": list(WORKED_TABLE)},
        "algorithm": {"kind": "prob", "mode": "exact_max"},
        "trials": 200,
        "master_seed": 11,
    }


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to a temporary JSON file and return its path"""
    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return path
    return _write
