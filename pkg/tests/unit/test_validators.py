"""
Unit tests for config validation against the command it drives
"""

import pytest

from models.requests import ExperimentConfig
from utils.validators import ConfigValidator


@pytest.fixture
def validator():
    return ConfigValidator()


class TestConfigValidator:
    """Test suite for ConfigValidator"""

    def test_default_config_drives_every_command(self, validator):
        config = ExperimentConfig()
        for command in ("propagator", "scenario", "chi-scan", "verdict", "rt", "sample", "deco", "oscillator"):
            result = validator.validate(config, command)
            assert result.valid, (command, result.errors)

    def test_unknown_command(self, validator):
        result = validator.validate(ExperimentConfig(), "teleport")
        assert not result.valid
        assert "unknown command" in result.errors[0]

    def test_malformed_kraus_literal(self, validator):
        result = validator.validate(ExperimentConfig(kraus="kick:cubic"), "verdict")
        assert not result.valid
        assert result.errors[0].startswith("kraus:")

    def test_malformed_resolution_literal(self, validator):
        result = validator.validate(ExperimentConfig(resolution="uniform:w=-1"), "rt")
        assert not result.valid

    def test_literals_only_checked_where_used(self, validator):
        """rt never reads the Kraus literal"""
        assert validator.validate(ExperimentConfig(kraus="kick:cubic"), "rt").valid

    def test_points_outside_four_point_causet(self, validator):
        result = validator.validate(ExperimentConfig(f_points=(1, 5)), "scenario")
        assert not result.valid
        assert "[5]" in result.errors[0]

    def test_continuum_scenario_needs_lab(self, validator):
        result = validator.validate(ExperimentConfig(spacetime="continuum"), "chi-scan")
        assert not result.valid
        assert "lab_rect" in result.errors[0]

    def test_deco_needs_four_point_causet(self, validator):
        result = validator.validate(ExperimentConfig(spacetime="sprinkle"), "deco")
        assert not result.valid

    def test_propagator_needs_causet(self, validator):
        result = validator.validate(ExperimentConfig(spacetime="continuum", lab_rect=(0, 1, 0, 1)), "propagator")
        assert not result.valid

    def test_low_fock_cutoff_warns(self, validator):
        result = validator.validate(ExperimentConfig(oracle="fock", n_max=10), "chi-scan")
        assert result.valid
        assert "n_max=10" in result.warnings[0]

    def test_empty_s_grid(self, validator):
        result = validator.validate(ExperimentConfig(s_grid=""), "chi-scan")
        assert not result.valid


class TestSamplingChecks:
    """Sampling plans are built during validation"""

    def test_vanishing_fourier_factor_is_rejected(self, validator):
        config = ExperimentConfig(sample_kernel="l2:box:w=6.283185307179586")
        result = validator.validate(config, "sample")
        assert not result.valid

    def test_ideal_family_has_no_kernel(self, validator):
        result = validator.validate(ExperimentConfig(sample_kernel="ideal:threshold:0"), "sample")
        assert not result.valid
        assert result.errors[0].startswith("sample_kernel:")

    def test_point_needs_no_kernel(self, validator):
        assert validator.validate(ExperimentConfig(sample_kernel="point"), "sample").valid

    def test_few_replications_warn(self, validator):
        result = validator.validate(ExperimentConfig(replications=20), "sample")
        assert result.valid
        assert result.warnings
