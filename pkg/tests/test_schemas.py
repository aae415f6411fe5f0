"""
Tests for shared schemas
"""
import json

import pytest
from pydantic import ValidationError

from shared.schemas.experiment_schema import (
    DetAlgorithm,
    EliminationLikelihoodSpec,
    ExperimentConfig,
    ProbAlgorithm,
    TablePrior,
    UniformPrior,
)
from shared.schemas.report_schema import ExactSection, RunReport, TimingSection
from shared.schemas.response_schema import create_error_response


class TestExperimentConfig:
    """Test ExperimentConfig schema"""

    def test_minimal_config(self, minimal_config_dict):
        """Test the smallest accepted document"""
        config = ExperimentConfig.model_validate(minimal_config_dict)
        assert config.n == 2
        assert isinstance(config.prior, UniformPrior)
        assert isinstance(config.likelihood, EliminationLikelihoodSpec)
        assert isinstance(config.algorithm, DetAlgorithm)
        assert config.algorithm.theta_source == "exact_classical"
        assert config.schema_id == "bayes-update/config/v1"

    def test_defaults(self):
        config = ExperimentConfig.model_validate({
            "n": 1,
            "likelihood": {"kind": "two_valued", "favored": [0], "r": 2},
            "algorithm": {"kind": "det"},
        })
        assert config.trials == 0
        assert config.master_seed == 0
        assert config.algorithm.mode == "fractional_final"
        assert config.algorithm.m == 3
        assert config.algorithm.epsilon == 0.125

    def test_prior_not_normalized(self, minimal_config_dict):
        minimal_config_dict["prior"] = {"kind": "table", "values": [0.3, 0.3, 0.2, 0.1]}
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.model_validate(minimal_config_dict)
        assert "prior not normalized" in str(excinfo.value)

    def test_schedule_must_decrease(self, minimal_config_dict):
        minimal_config_dict["algorithm"] = {"kind": "prob", "schedule": [0.5, 0.7]}
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.model_validate(minimal_config_dict)
        assert "bounds must strictly decrease" in str(excinfo.value)

    def test_prob_schedule_accepted(self, minimal_config_dict):
        minimal_config_dict["algorithm"] = {"kind": "prob", "schedule": [1.0, 0.5]}
        config = ExperimentConfig.model_validate(minimal_config_dict)
        assert isinstance(config.algorithm, ProbAlgorithm)
        assert config.algorithm.schedule == [1.0, 0.5]

    def test_bound_mode_needs_bound(self, minimal_config_dict):
        minimal_config_dict["algorithm"] = {"kind": "prob", "mode": "bound"}
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(minimal_config_dict)

    def test_table_size_checked_against_n(self, minimal_config_dict):
        minimal_config_dict["likelihood"] = {"kind": "table", "values": [0.5, 0.5]}
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.model_validate(minimal_config_dict)
        assert "expected 4" in str(excinfo.value)

    def test_favored_out_of_range(self, minimal_config_dict):
        minimal_config_dict["likelihood"] = {"kind": "elimination", "favored": [4]}
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(minimal_config_dict)

    def test_suppression_must_exceed_one(self, minimal_config_dict):
        minimal_config_dict["likelihood"] = {"kind": "two_valued", "favored": [0], "r": 1.0}
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(minimal_config_dict)

    def test_unknown_schema_rejected(self, minimal_config_dict):
        minimal_config_dict["schema"] = "bayes-update/config/v0"
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(minimal_config_dict)

    def test_unknown_field_rejected(self, minimal_config_dict):
        minimal_config_dict["shots"] = 10
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(minimal_config_dict)

    def test_table_prior(self, minimal_config_dict):
        minimal_config_dict["prior"] = {"kind": "table", "values": [0.0, 0.5, 0.5, 0.0]}
        config = ExperimentConfig.model_validate(minimal_config_dict)
        assert isinstance(config.prior, TablePrior)

    def test_dump_uses_schema_alias(self, minimal_config_dict):
        config = ExperimentConfig.model_validate(minimal_config_dict)
        dumped = config.model_dump(by_alias=True, mode="json")
        assert dumped["schema"] == "bayes-update/config/v1"


class TestRunReport:
    """Test RunReport schema"""

    def _report(self, elapsed):
        return RunReport(
            verb="bound",
            master_seed=3,
            config={"n": 2},
            exact=ExactSection(evidence=0.25, bound=0.5, prior=[0.25] * 4, posterior=[0.5, 0.25, 0.125, 0.125]),
            timing=TimingSection(started_at="2024-01-01T00:00:00", elapsed_seconds=elapsed),
        )

    def test_deterministic_json_excludes_timing(self):
        document = json.loads(self._report(0.5).deterministic_json())
        assert "timing" not in document
        assert document["schema"] == "bayes-update/report/v1"
        assert document["exact"]["evidence"] == 0.25

    def test_deterministic_json_is_stable(self):
        assert self._report(0.5).deterministic_json() == self._report(9.0).deterministic_json()


class TestCliResponse:
    """Test the CLI response envelope"""

    def test_error_response(self):
        response = create_error_response("ZeroEvidenceException", "P(d) = 0", 3)
        assert not response.success
        assert response.exit_code == 3
        assert response.error == "ZeroEvidenceException"

    def test_error_envelope_fields(self):
        document = create_error_response("ConfigException", "n: must be >= 1", 1).model_dump()
        assert document == {"success": False, "error": "ConfigException", "message": "n: must be >= 1", "exit_code": 1}
