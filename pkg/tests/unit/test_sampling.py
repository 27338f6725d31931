"""
Unit tests for the simulated L2-Kraus measurements and the eta estimator
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from models.kraus import KernelShape, L2KernelSpec
from models.sampling import EstimatorPlan
from services.sampling import (
    chebyshev_n,
    estimate,
    kernel_char_fn,
    ks_distance,
    make_plan,
    outcome_cdf,
    replicate,
    sample_noise,
    sample_outcomes,
)
from utils.errors import DegenerateWidthError, IllConditionedEstimatorError


GAUSSIAN = L2KernelSpec(shape=KernelShape.GAUSSIAN, sigma=1.0)
BOX = L2KernelSpec(shape=KernelShape.BOX, width=1.0)
CUSTOM_BOX = L2KernelSpec(
    shape=KernelShape.CUSTOM,
    k=lambda x: 1.0 if -0.5 <= x < 0.5 else 0.0,
    support=(-0.5, 0.5),
)


class TestChebyshev:
    """Sample-size bound"""

    def test_exact_quotient(self):
        assert chebyshev_n(1.0, 0.1, 0.1) == 1000

    def test_zero_variance_needs_one_sample(self):
        assert chebyshev_n(0.0, 0.05, 0.1) == 1

    def test_rounds_up(self):
        assert chebyshev_n(1.0, 0.3, 0.1) == 112

    def test_rejects_non_positive_epsilon(self):
        with pytest.raises(ValueError):
            chebyshev_n(1.0, 0.0, 0.1)


class TestKernelCharFn:
    """Characteristic function of |k|^2"""

    def test_point_mass(self):
        assert kernel_char_fn(None, 3.0) == 1.0

    def test_gaussian(self):
        assert kernel_char_fn(GAUSSIAN, 2.0) == pytest.approx(math.exp(-2.0))

    def test_box_and_custom_box_agree(self):
        assert kernel_char_fn(BOX, 2.0) == pytest.approx(math.sin(1.0))
        assert abs(kernel_char_fn(CUSTOM_BOX, 2.0) - math.sin(1.0)) < 1e-9


class TestPlan:
    """Estimator plans"""

    def test_variance(self):
        plan = make_plan(1.0, GAUSSIAN, 1.0, 0.05, 0.1)
        assert plan.variance == pytest.approx(math.e - math.exp(-1.0))
        assert plan.n_samples == chebyshev_n(plan.variance, 0.05, 0.1)

    def test_noiseless_variance(self):
        """Without noise eta has variance 1 - exp(-t^2 W)"""
        plan = make_plan(1.0, None, 1.0, 0.05, 0.1)
        assert plan.variance == pytest.approx(1.0 - math.exp(-1.0))

    def test_vanishing_fourier_factor(self):
        kernel = L2KernelSpec(shape=KernelShape.BOX, width=2.0 * math.pi)
        with pytest.raises(IllConditionedEstimatorError):
            make_plan(1.0, kernel, 1.0, 0.05, 0.1)

    def test_rejects_undersized_plan(self):
        with pytest.raises(ValidationError):
            EstimatorPlan(t=1.0, kernel=GAUSSIAN, w_gg=1.0, epsilon=0.05, delta=0.1, variance=2.0, n_samples=10)


class TestSamplingAndEstimation:
    """Outcome draws, eta means and replications"""

    def test_outcomes_are_reproducible(self):
        plan = make_plan(1.0, GAUSSIAN, 1.0, 0.1, 0.1, seed=3)
        assert np.array_equal(sample_outcomes(plan), sample_outcomes(plan))

    @pytest.mark.parametrize("kernel", [GAUSSIAN, BOX])
    def test_outcome_distribution(self, kernel):
        """KS distance to the analytic CDF at 1e5 draws"""
        plan = make_plan(1.0, kernel, 1.0, 0.1, 0.1, seed=1, n_samples=100_000)
        assert ks_distance(sample_outcomes(plan), plan) < 0.01

    def test_zero_strength_mean_is_one(self):
        plan = make_plan(0.0, GAUSSIAN, 1.0, 0.1, 0.1)
        result = estimate(sample_outcomes(plan), plan)
        assert result.mean == pytest.approx(1.0)
        assert result.passed

    def test_custom_kernel_draws_stay_in_support(self):
        draws = sample_noise(CUSTOM_BOX, 5000, np.random.default_rng(0))
        assert draws.shape == (5000,)
        assert draws.min() >= -0.5 and draws.max() < 0.5
        assert abs(draws.mean()) < 0.05

    def test_pass_rate_meets_confidence(self):
        plan = make_plan(1.0, GAUSSIAN, 1.0, 0.05, 0.1, seed=11)
        table = replicate(plan, 200)
        assert table.pass_rate >= 1.0 - plan.delta
        assert abs(table.grand_mean - math.exp(-0.5)) < 0.01

    def test_replications_are_deterministic(self):
        plan = make_plan(1.0, BOX, 1.0, 0.1, 0.1, seed=4)
        a, b = replicate(plan, 20), replicate(plan, 20)
        assert a.grand_mean == b.grand_mean
        assert [r.estimate.mean for r in a.rows] == [r.estimate.mean for r in b.rows]

    def test_point_mass_cdf_needs_width(self):
        plan = make_plan(1.0, None, 0.0, 0.1, 0.1)
        with pytest.raises(DegenerateWidthError):
            outcome_cdf(plan, [0.0])
