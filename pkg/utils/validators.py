"""
Experiment config validation
Checks that a config can drive the command it is handed to before any work starts
"""

from typing import List

from pydantic import BaseModel

from models.requests import ExperimentConfig, OracleChoice, SpacetimeSource
from services.kraus import parse_kraus
from services.resolutions import parse_resolution
from services.sampling import make_plan
from utils.errors import SorkinLabError
from utils.logger import get_logger

logger = get_logger(__name__)

COMMANDS = ("sprinkle", "propagator", "scenario", "chi-scan", "verdict", "rt", "sample", "deco", "oscillator")

_CAUSET_SOURCES = (SpacetimeSource.FOUR_POINT, SpacetimeSource.SPRINKLE, SpacetimeSource.FILE)

# Fewer replications than this make pass-rate checks noisy
_MIN_REPLICATIONS = 200
# Below this cutoff the Fock oracle is usually not converged for smeared fields
_MIN_FOCK_CUTOFF = 20


class ConfigValidationResult(BaseModel):
    """Result of config validation"""
    valid: bool
    errors: List[str] = []
    warnings: List[str] = []


class ConfigValidator:
    """
    Validates an ExperimentConfig against the command it will drive

    Literals are parsed here, so malformed Kraus or resolution strings are
    reported before a long scan starts.
    """

    def validate(self, config: ExperimentConfig, command: str) -> ConfigValidationResult:
        """
        Args:
            config: Parsed experiment config
            command: CLI subcommand name

        Returns:
            Validation result with errors/warnings
        """
        result = ConfigValidationResult(valid=True)
        if command not in COMMANDS:
            self._fail(result, f"unknown command '{command}'")
            return result

        if command in ("chi-scan", "verdict"):
            self._check_literal(result, "kraus", config.kraus, parse_kraus)
        if command in ("rt", "oscillator"):
            self._check_literal(result, "resolution", config.resolution, parse_resolution)

        if command in ("propagator", "deco") and config.spacetime not in _CAUSET_SOURCES:
            self._fail(result, f"{command} needs a causal set, got spacetime={config.spacetime.value}")

        if command in ("scenario", "chi-scan"):
            self._check_scenario_inputs(config, result)

        if command in ("chi-scan", "deco", "oscillator") and not config.s_grid:
            self._fail(result, "s_grid is empty")

        if command == "chi-scan" and config.oracle == OracleChoice.FOCK:
            if config.spacetime not in _CAUSET_SOURCES:
                self._fail(result, "the Fock oracle needs a causal set")
            if config.n_max < _MIN_FOCK_CUTOFF:
                result.warnings.append(f"n_max={config.n_max} is below {_MIN_FOCK_CUTOFF}; expect truncation error")

        if command == "deco" and config.spacetime != SpacetimeSource.FOUR_POINT:
            self._fail(result, "the binned path integral runs on the four-point causet")

        if command == "sample":
            self._check_sampling(config, result)

        if result.errors:
            logger.warning(f"Config rejected for {command}: {result.errors}")
        return result

    def _fail(self, result: ConfigValidationResult, message: str):
        result.valid = False
        result.errors.append(message)

    def _check_literal(self, result: ConfigValidationResult, name: str, literal: str, parse):
        try:
            parse(literal)
        except SorkinLabError as e:
            self._fail(result, f"{name}: {e.message}")

    def _check_scenario_inputs(self, config: ExperimentConfig, result: ConfigValidationResult):
        if config.spacetime == SpacetimeSource.CONTINUUM:
            if config.lab_rect is None:
                self._fail(result, "continuum scenarios need lab_rect")
            t_min, t_max, x_min, x_max = config.grid
            if t_max <= t_min or x_max <= x_min:
                self._fail(result, "grid extent is degenerate")
            return
        if not config.lab_points:
            self._fail(result, "causal-set scenarios need lab_points")
        if not config.f_points:
            self._fail(result, "causal-set scenarios need f_points")
        if config.spacetime == SpacetimeSource.FOUR_POINT:
            outside = [p for p in (*config.f_points, *config.lab_points) if not 0 <= p < 4]
            if outside:
                self._fail(result, f"points {outside} are outside the four-point causet")

    def _check_sampling(self, config: ExperimentConfig, result: ConfigValidationResult):
        kernel = None
        if config.sample_kernel != "point":
            try:
                kernel = parse_kraus(config.sample_kernel).l2_kernel()
            except (SorkinLabError, ValueError) as e:
                self._fail(result, f"sample_kernel: {e}")
                return
        try:
            make_plan(config.t, kernel, config.w_gg, config.epsilon, config.delta)
        except SorkinLabError as e:
            self._fail(result, e.message)
        if config.replications < _MIN_REPLICATIONS:
            result.warnings.append(f"{config.replications} replications give a noisy pass rate")
