"""
Sampling Service - simulated L2-Kraus measurements of phi(g)

An outcome is gamma = lambda - x with lambda ~ Normal(0, W(g,g)) the vacuum
value of phi(g) and x ~ |k|^2 the kernel noise. The weight
eta(gamma) = exp(i t gamma) / phi_k(-t), with phi_k the characteristic
function of |k|^2, has mean exp(-t^2 W(g,g)/2).
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats

from config import settings
from models.kraus import KernelShape, L2KernelSpec
from models.sampling import (
    EstimateResult,
    EstimatorPlan,
    ReplicationRow,
    ReplicationTable,
    chebyshev_bound,
)
from services.gaussian_state import char_fn, complex_quad
from utils.errors import DegenerateWidthError, IllConditionedEstimatorError, QuadratureError, UnsampleableKernelError
from utils.metrics import timed_operation
from utils.parallel import parallel_map


logger = logging.getLogger(__name__)

# |phi_k(-t)| below this makes eta unusable
_MIN_FOURIER_FACTOR = 1e-12
_REJECTION_ROUNDS = 200
_CDF_TABLE_POINTS = 2001


def chebyshev_n(variance: float, epsilon: float, delta: float) -> int:
    """Samples needed so that P(|mean - mu| >= epsilon) <= delta by Chebyshev"""
    return chebyshev_bound(variance, epsilon, delta)


def kernel_char_fn(kernel: Optional[L2KernelSpec], u: float) -> complex:
    """
    integral exp(i u x) |k(x)|^2 dx

    Raises:
        QuadratureError: If the custom-kernel quadrature does not converge
    """
    if kernel is None:
        return 1.0 + 0j
    if kernel.shape == KernelShape.GAUSSIAN:
        return complex(math.exp(-0.5 * (kernel.sigma * u) ** 2))
    if kernel.shape == KernelShape.BOX:
        return complex(np.sinc(u * kernel.width / (2.0 * math.pi)))
    lo, hi = kernel.support
    value, error = complex_quad(lambda x: np.exp(1j * u * x) * abs(kernel.value(x)) ** 2, lo, hi)
    if error > settings.QUAD_MAX_RESIDUAL:
        raise QuadratureError("kernel characteristic function did not converge", residual=error)
    return value


def _fourier_factor(kernel: Optional[L2KernelSpec], t: float) -> complex:
    factor = kernel_char_fn(kernel, -t)
    if abs(factor) < _MIN_FOURIER_FACTOR:
        raise IllConditionedEstimatorError(
            f"Fourier factor of the kernel vanishes at t={t}",
            t=t,
            factor=abs(factor),
        )
    return factor


def make_plan(
    t: float,
    kernel: Optional[L2KernelSpec],
    w_gg: float,
    epsilon: float,
    delta: float,
    seed: int = 0,
    n_samples: Optional[int] = None
) -> EstimatorPlan:
    """
    Plan with variance 1/|phi_k(-t)|^2 - exp(-t^2 W(g,g)) and the Chebyshev N

    Raises:
        IllConditionedEstimatorError: If phi_k(-t) vanishes
    """
    factor = _fourier_factor(kernel, t)
    variance = max(1.0 / abs(factor) ** 2 - math.exp(-t * t * w_gg), 0.0)
    needed = chebyshev_n(variance, epsilon, delta)
    return EstimatorPlan(
        t=t,
        kernel=kernel,
        w_gg=w_gg,
        epsilon=epsilon,
        delta=delta,
        variance=variance,
        n_samples=needed if n_samples is None else n_samples,
        seed=seed,
    )


def _rejection_sample(kernel: L2KernelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws from |k|^2 on its support window under a Gaussian envelope"""
    lo, hi = kernel.support
    centre, scale = 0.5 * (lo + hi), 0.5 * (hi - lo)
    envelope = stats.norm(loc=centre, scale=scale)
    density = np.vectorize(lambda x: abs(kernel.value(x)) ** 2, otypes=[float])
    xs = np.linspace(lo, hi, 4001)
    bound = 1.1 * float(np.max(density(xs) / envelope.pdf(xs)))
    if not np.isfinite(bound) or bound <= 0.0:
        raise UnsampleableKernelError("kernel density has no usable Gaussian envelope", support=[lo, hi])

    draws = []
    have = 0
    for _ in range(_REJECTION_ROUNDS):
        x = envelope.rvs(size=2 * (n - have) + 16, random_state=rng)
        x = x[(x >= lo) & (x < hi)]
        accept = rng.random(x.size) * bound * envelope.pdf(x) < density(x)
        draws.append(x[accept])
        have += int(accept.sum())
        if have >= n:
            return np.concatenate(draws)[:n]
    raise UnsampleableKernelError(f"rejection sampling produced {have} of {n} draws", support=[lo, hi])


def sample_noise(kernel: Optional[L2KernelSpec], n: int, rng: np.random.Generator) -> np.ndarray:
    """x ~ |k|^2: inverse CDF for Gaussian and box kernels, rejection otherwise"""
    if kernel is None:
        return np.zeros(n)
    if kernel.shape == KernelShape.GAUSSIAN:
        return stats.norm.ppf(rng.random(n), scale=kernel.sigma)
    if kernel.shape == KernelShape.BOX:
        return kernel.width * (rng.random(n) - 0.5)
    return _rejection_sample(kernel, n, rng)


def sample_outcomes(plan: EstimatorPlan, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    plan.n_samples outcomes gamma = lambda - x

    Bit-identical for identical plans when rng is not given.
    """
    rng = np.random.default_rng(plan.seed) if rng is None else rng
    lam = rng.normal(0.0, math.sqrt(plan.w_gg), plan.n_samples) if plan.w_gg > 0 else np.zeros(plan.n_samples)
    return lam - sample_noise(plan.kernel, plan.n_samples, rng)


def estimate(outcomes: np.ndarray, plan: EstimatorPlan) -> EstimateResult:
    """
    Mean of eta over the outcomes against exp(-t^2 W(g,g)/2)

    Raises:
        IllConditionedEstimatorError: If phi_k(-t) vanishes
    """
    outcomes = np.asarray(outcomes, dtype=float)
    factor = _fourier_factor(plan.kernel, plan.t)
    mean = complex(np.mean(np.exp(1j * plan.t * outcomes)) / factor)
    target = complex(char_fn(plan.t, plan.w_gg))
    error = abs(mean - target)
    return EstimateResult(mean=mean, target=target, error=error, passed=error <= plan.epsilon)


@timed_operation("replicate")
def replicate(plan: EstimatorPlan, replications: int, seed: Optional[int] = None) -> ReplicationTable:
    """
    Independent estimates on per-replication streams spawned from one seed

    The table is identical across runs and thread counts.
    """
    root = np.random.SeedSequence(plan.seed if seed is None else seed)
    streams = root.spawn(replications)

    def run(i: int) -> ReplicationRow:
        rng = np.random.default_rng(streams[i])
        return ReplicationRow(replication=i, estimate=estimate(sample_outcomes(plan, rng), plan))

    rows = parallel_map(run, range(replications))
    means = np.array([r.estimate.mean for r in rows], dtype=complex)
    pass_rate = float(np.mean([r.estimate.passed for r in rows]))
    grand = complex(np.mean(means))
    spread = float(np.sqrt(np.mean(np.abs(means - grand) ** 2) / max(replications - 1, 1)))
    logger.info(f"{replications} replications at N={plan.n_samples}: pass rate {pass_rate:.3f}")
    return ReplicationTable(plan=plan, rows=rows, pass_rate=pass_rate, grand_mean=grand, standard_error=spread)


def _box_cdf(gamma: np.ndarray, width: float, scale: float) -> np.ndarray:
    """E_x Phi((gamma + x)/scale) for x uniform on [-w/2, w/2)"""
    def antiderivative(y):
        return y * stats.norm.cdf(y / scale) + scale * stats.norm.pdf(y / scale)
    return (antiderivative(gamma + width / 2.0) - antiderivative(gamma - width / 2.0)) / width


def outcome_cdf(plan: EstimatorPlan, gamma: Sequence[float]) -> np.ndarray:
    """
    Analytic CDF of gamma = lambda - x

    Raises:
        DegenerateWidthError: For noisy non-Gaussian kernels with W(g,g) = 0
    """
    gamma = np.asarray(gamma, dtype=float)
    kernel = plan.kernel
    if kernel is None or kernel.shape == KernelShape.GAUSSIAN:
        var = plan.w_gg + (0.0 if kernel is None else kernel.sigma ** 2)
        if var <= 0:
            raise DegenerateWidthError("outcome distribution is a point mass", w_gg=plan.w_gg)
        return stats.norm.cdf(gamma, scale=math.sqrt(var))
    if plan.w_gg <= 0:
        raise DegenerateWidthError("outcome CDF needs W(g,g) > 0 for this kernel", w_gg=plan.w_gg)
    scale = math.sqrt(plan.w_gg)
    if kernel.shape == KernelShape.BOX:
        return _box_cdf(gamma, kernel.width, scale)

    lo, hi = kernel.support
    table_x = np.linspace(gamma.min(), gamma.max(), _CDF_TABLE_POINTS)
    table = np.array([
        integrate.quad(
            lambda x: abs(kernel.value(x)) ** 2 * stats.norm.cdf((y + x) / scale),
            lo, hi, limit=settings.QUAD_LIMIT,
        )[0]
        for y in table_x
    ])
    return np.interp(gamma, table_x, table)


def ks_distance(outcomes: np.ndarray, plan: EstimatorPlan) -> float:
    """Kolmogorov-Smirnov distance between the outcomes and their analytic CDF"""
    outcomes = np.sort(np.asarray(outcomes, dtype=float))
    return float(stats.kstest(outcomes, lambda x: outcome_cdf(plan, x)).statistic)
