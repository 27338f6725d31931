"""
Kraus Service - overlap functions kappa~, causality verdicts and the signal chi(s)
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from config import settings
from models.gaussian import ComplexDensityQ
from models.kraus import (
    CausalityVerdict,
    CausalityWitness,
    KernelShape,
    KrausFamily,
    KrausVariant,
    L2KernelSpec,
    PhaseKind,
    Verdict,
    VerdictSampling,
)
from models.propagators import PairingContext
from models.resolutions import IntervalSet
from services.gaussian_state import complex_quad, expect_via_weierstrass
from services.resolutions import nearest_edges, parse_key_values, parse_resolution, r_t
from utils.errors import LiteralParseError, QuadratureError


logger = logging.getLogger(__name__)


class VerdictRow(BaseModel):
    literal: str
    verdict: Verdict
    method: str
    witness: Optional[CausalityWitness] = None


def default_sampling() -> VerdictSampling:
    return VerdictSampling(
        half_width=settings.VERDICT_WINDOW,
        samples=settings.VERDICT_SAMPLES,
        tolerance=settings.VERDICT_TOLERANCE,
    )


def is_lambda_independent(fam: KrausFamily) -> bool:
    """kappa~ does not depend on lambda by construction"""
    if fam.variant in (KrausVariant.GAUSSIAN_WEAK, KrausVariant.L2_KERNEL):
        return True
    return fam.variant == KrausVariant.UNITARY_PHASE and fam.phase in (PhaseKind.ZERO, PhaseKind.LINEAR)


def kernel_autocorrelation(kernel: L2KernelSpec, shift: float) -> complex:
    """
    integral k(gamma) conj(k(gamma + shift)) d gamma

    Raises:
        QuadratureError: If the custom-kernel quadrature does not converge
    """
    if kernel.shape == KernelShape.GAUSSIAN:
        return complex(math.exp(-shift * shift / (8.0 * kernel.sigma ** 2)))
    if kernel.shape == KernelShape.BOX:
        return complex(max(kernel.width - abs(shift), 0.0) / kernel.width)
    lo, hi = kernel.support
    value, error = complex_quad(
        lambda g: kernel.value(g) * np.conj(kernel.value(g + shift)),
        lo,
        hi,
        [lo - shift, hi - shift],
    )
    if error > settings.QUAD_MAX_RESIDUAL:
        raise QuadratureError("kernel autocorrelation did not converge", residual=error)
    return value


class IntervalIndicator:
    """Fast vectorised indicator of an IntervalSet via binary search"""

    def __init__(self, intervals: IntervalSet):
        self.intervals = intervals
        self._starts = np.array([a for a, _ in intervals.intervals])
        self._ends = np.array([b for _, b in intervals.intervals])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self._starts.size == 0:
            out = np.zeros(x.shape)
        else:
            idx = np.searchsorted(self._starts, x, side="right") - 1
            out = ((idx >= 0) & (x < self._ends[np.clip(idx, 0, None)])).astype(float)
        return float(out) if out.ndim == 0 else out


def ideal_overlap_set(fam: KrausFamily, shift: float, window: Tuple[float, float]) -> IntervalSet:
    """
    D & R_{-shift}: the outcomes lambda for which lambda and lambda + shift
    share a bin
    """
    return r_t(fam.resolution, -shift, window)


def kappa_tilde(fam: KrausFamily, lam, shift: float):
    """
    kappa~(lambda, shift) = integral kappa(lambda, gamma) conj(kappa(lambda + shift, gamma))

    Callers pass shift = t Delta(f, g).

    Args:
        fam: Kraus family
        lam: Outcome value or array
        shift: t Delta(f, g)

    Returns:
        Complex value (or array) with modulus at most 1
    """
    lam_arr = np.asarray(lam, dtype=float)
    if fam.variant == KrausVariant.UNITARY_PHASE:
        theta = np.vectorize(fam.theta_value, otypes=[float])
        out = np.exp(1j * (theta(lam_arr) - theta(lam_arr + shift)))
    elif fam.variant == KrausVariant.IDEAL:
        lo = float(np.min(lam_arr)) - 1.0
        hi = float(np.max(lam_arr)) + 1.0
        out = IntervalIndicator(ideal_overlap_set(fam, shift, (lo, hi)))(lam_arr) + 0j
    else:
        out = np.full(lam_arr.shape, kernel_autocorrelation(fam.l2_kernel(), shift), dtype=complex)
    return complex(out) if np.ndim(out) == 0 else out


def _witness_from_samples(fam: KrausFamily, shift: float, sampling: VerdictSampling) -> CausalityVerdict:
    grid = np.linspace(-sampling.half_width, sampling.half_width, sampling.samples)
    values = kappa_tilde(fam, grid, shift)
    gaps = np.abs(values - values[0])
    j = int(np.argmax(gaps))
    if gaps[j] <= sampling.tolerance:
        return CausalityVerdict(verdict=Verdict.CAUSAL, tolerance=sampling.tolerance, method="sampled")
    return CausalityVerdict(
        verdict=Verdict.ACAUSAL,
        witness=CausalityWitness(lambda_1=float(grid[0]), lambda_2=float(grid[j]), t=shift, gap=float(gaps[j])),
        tolerance=sampling.tolerance,
        method="sampled",
    )


def _edge_window(fam: KrausFamily, shift: float, sampling: VerdictSampling) -> Tuple[float, float]:
    """Sampling window widened so the nearest bin edge on each side, and its shift, fall inside"""
    lo, hi = -sampling.half_width, sampling.half_width
    left, right = nearest_edges(fam.resolution, (lo, hi))
    reach = abs(shift) + 1.0
    if left is not None:
        lo = min(lo, left - reach)
    if right is not None:
        hi = max(hi, right + reach)
    return lo, hi


def causality_verdict(fam: KrausFamily, shift: float, sampling: Optional[VerdictSampling] = None) -> CausalityVerdict:
    """
    Decide whether kappa~(., shift) is constant in lambda

    Analytic for kicks with zero, linear or square phase and for L2-type
    maps; interval-exact for ideal measurements on the sampling window;
    sampled otherwise, which can miss features finer than the grid.
    """
    sampling = sampling or default_sampling()
    tol = sampling.tolerance
    if shift == 0.0 or is_lambda_independent(fam):
        return CausalityVerdict(verdict=Verdict.CAUSAL, tolerance=tol, method="analytic")

    if fam.variant == KrausVariant.UNITARY_PHASE and fam.phase == PhaseKind.SQUARE:
        # kappa~ = exp(-i shift (2 lambda + shift)) turns by pi between these points
        lam_2 = math.pi / (2.0 * abs(shift))
        gap = abs(kappa_tilde(fam, 0.0, shift) - kappa_tilde(fam, lam_2, shift))
        return CausalityVerdict(
            verdict=Verdict.ACAUSAL,
            witness=CausalityWitness(lambda_1=0.0, lambda_2=lam_2, t=shift, gap=gap),
            tolerance=tol,
            method="analytic",
        )

    if fam.variant == KrausVariant.IDEAL:
        window = _edge_window(fam, shift, sampling)
        inside = ideal_overlap_set(fam, shift, window)
        ratio = inside.measure() / (window[1] - window[0])
        if ratio <= tol or ratio >= 1.0 - tol:
            return CausalityVerdict(verdict=Verdict.CAUSAL, tolerance=tol, method="interval-exact")
        outside = inside.complement_within(*window)
        a, b = inside.intervals[0]
        c, d = outside.intervals[0]
        logger.debug(f"{fam.describe()} at shift {shift}: overlap ratio {ratio:.6g} on {window}")
        return CausalityVerdict(
            verdict=Verdict.ACAUSAL,
            witness=CausalityWitness(lambda_1=0.5 * (a + b), lambda_2=0.5 * (c + d), t=shift, gap=1.0),
            tolerance=tol,
            method="interval-exact",
        )

    return _witness_from_samples(fam, shift, sampling)


def _zeta_and_breakpoints(fam: KrausFamily, ctx: ComplexDensityQ, offset: float, shift: float) -> Tuple[Callable, List[float]]:
    """zeta(lambda) = kappa~(lambda + offset, shift) and its discontinuities"""
    if fam.variant == KrausVariant.IDEAL:
        sigma = math.sqrt(ctx.w_ff)
        c = ctx.centre
        half = 30.0 * sigma + 3.0 * abs(c.imag) + abs(shift) + 1.0
        window = (c.real + offset - half, c.real + offset + half)
        indicator = IntervalIndicator(ideal_overlap_set(fam, shift, window))
        breaks = [p - offset for p in indicator.intervals.endpoints()]
        return (lambda lam: indicator(lam + offset)), breaks
    return (lambda lam: kappa_tilde(fam, lam + offset, shift)), []


def chi(fam: KrausFamily, ctx: PairingContext, s: float, t: float) -> complex:
    """
    Bob's signal chi(s) = <kappa~(phi(f) + s Delta(f,h), t Delta(f,g)) exp(i t phi(g))>

    Evaluated as exp(-t^2 W(g,g)/2) W{kappa~(a .)}((s Delta(f,h) + i t W(f,g)) / a)
    with a = sqrt(W(f,f)/2).
    """
    shift = t * ctx.d_fg
    q = ComplexDensityQ.from_context(ctx, t)
    if is_lambda_independent(fam):
        return complex(kappa_tilde(fam, 0.0, shift)) * q.damping
    zeta, breaks = _zeta_and_breakpoints(fam, q, s * ctx.d_fh, shift)
    return expect_via_weierstrass(zeta, q, breaks)


def parse_kraus(literal: str) -> KrausFamily:
    """
    Parse the Kraus literal syntax

    kick:zero|linear|square, ideal:<resolution>, weak:sigma=0.5,
    l2:gaussian:sigma=0.5, l2:box:w=1

    Raises:
        LiteralParseError: On malformed literals
    """
    kind, _, body = literal.strip().partition(":")
    try:
        if kind == "kick":
            phase = PhaseKind(body.strip())
            if phase == PhaseKind.CUSTOM:
                raise LiteralParseError("custom phases cannot be written as literals")
            return KrausFamily.unitary(phase)
        if kind == "ideal":
            return KrausFamily.ideal(parse_resolution(body))
        if kind == "weak":
            return KrausFamily.weak(float(parse_key_values(body)["sigma"]))
        if kind == "l2":
            shape, _, params = body.partition(":")
            kv = parse_key_values(params)
            if shape == "gaussian":
                return KrausFamily.l2(L2KernelSpec(shape=KernelShape.GAUSSIAN, sigma=float(kv["sigma"])))
            if shape == "box":
                return KrausFamily.l2(L2KernelSpec(shape=KernelShape.BOX, width=float(kv["w"])))
            raise LiteralParseError(f"unknown L2 kernel shape '{shape}'")
    except LiteralParseError:
        raise
    except (KeyError, ValueError) as e:
        raise LiteralParseError(f"invalid Kraus literal '{literal}': {e}") from e
    raise LiteralParseError(f"unknown Kraus family '{kind}' in '{literal}'")


def format_kraus(fam: KrausFamily) -> str:
    return fam.describe()


STANDARD_FAMILIES = (
    "kick:zero",
    "kick:linear",
    "kick:square",
    "weak:sigma=0.5",
    "l2:gaussian:sigma=0.5",
    "l2:box:w=1",
    "ideal:uniform:w=1,o=0",
    "ideal:threshold:0",
    "ideal:svc:d=3",
)


def verdict_table(shift: float, literals=STANDARD_FAMILIES, sampling: Optional[VerdictSampling] = None) -> List[VerdictRow]:
    """Causality verdict of each standard family at one shift"""
    rows = []
    for literal in literals:
        v = causality_verdict(parse_kraus(literal), shift, sampling)
        rows.append(VerdictRow(literal=literal, verdict=v.verdict, method=v.method, witness=v.witness))
    return rows
