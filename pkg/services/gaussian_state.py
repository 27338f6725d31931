"""
Gaussian State Service - vacuum functional calculus for smeared fields
Moments, characteristic functions, the densities p and q, Fourier and
Weierstrass transforms and <zeta(phi(f)) exp(i t phi(g))>
"""

import logging
import math
import warnings
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from config import settings
from models.gaussian import ComplexDensityQ
from models.propagators import PairingContext
from utils.errors import DegenerateWidthError, QuadratureError


logger = logging.getLogger(__name__)

Zeta = Callable[[float], complex]

_MAX_WINDOW_GROWTH = 40


def complex_quad(
    fn: Zeta,
    lo: float,
    hi: float,
    breakpoints: Iterable[float] = ()
) -> Tuple[complex, float]:
    """
    Adaptive quadrature of a complex integrand, split at breakpoints

    Returns:
        (value, summed absolute error estimate)
    """
    cuts = sorted({float(lo), float(hi), *(float(p) for p in breakpoints if lo < p < hi)})
    value = 0j
    error = 0.0
    options = dict(epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL, limit=settings.QUAD_LIMIT)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(cuts[:-1], cuts[1:]):
            re, re_err = integrate.quad(lambda x: complex(fn(x)).real, a, b, **options)
            im, im_err = integrate.quad(lambda x: complex(fn(x)).imag, a, b, **options)
            value += re + 1j * im
            error += re_err + im_err
    return value, error


def _check_residual(what: str, value: complex, error: float) -> complex:
    if not np.isfinite(error) or error > settings.QUAD_MAX_RESIDUAL * max(1.0, abs(value)):
        raise QuadratureError(f"{what} did not converge", residual=float(error))
    return value


def _gaussian_window(centre: float, sigma: float, mass_scale: float, bound: float) -> float:
    """
    Half-width L around centre such that the Gaussian tail mass beyond L,
    times the integrand bound, is below QUAD_TAIL_TOL
    """
    if not np.isfinite(mass_scale):
        raise QuadratureError("Gaussian kernel overflows for this complex shift", residual=float("inf"))
    half = 10.0 * sigma
    for _ in range(_MAX_WINDOW_GROWTH):
        tail = 2.0 * bound * mass_scale * stats.norm.sf(half / sigma)
        if tail < settings.QUAD_TAIL_TOL:
            return half
        half *= 1.5
    raise QuadratureError("integration window kept growing", residual=float(tail))


def moment(n: int, w_ff: float) -> float:
    """
    <phi(f)^n> = (n-1)!! W(f,f)^(n/2) for even n, 0 for odd n
    """
    if n < 0:
        raise ValueError(f"moment order must be non-negative, got {n}")
    if w_ff < 0:
        raise ValueError(f"W(f,f) must be non-negative, got {w_ff}")
    if n % 2:
        return 0.0
    return float(math.prod(range(n - 1, 0, -2)) * w_ff ** (n // 2))


def char_fn(t: float, w_ff: float) -> float:
    """<exp(i t phi(f))> = exp(-t^2 W(f,f) / 2)"""
    if w_ff < 0:
        raise ValueError(f"W(f,f) must be non-negative, got {w_ff}")
    return math.exp(-0.5 * t * t * w_ff)


def density_p(lam, w_ff: float):
    """Vacuum outcome density of phi(f), Normal(0, W(f,f))"""
    if w_ff <= 0:
        raise DegenerateWidthError("density p needs W(f,f) > 0", w_ff=w_ff)
    return stats.norm.pdf(lam, loc=0.0, scale=math.sqrt(w_ff))


def fourier_transform(fn: Zeta, t: float, window: Tuple[float, float], breakpoints: Sequence[float] = ()) -> complex:
    """F{fn}(t) = (2 pi)^(-1/2) integral exp(i t x) fn(x) dx over a finite window"""
    value, error = complex_quad(lambda x: np.exp(1j * t * x) * fn(x), window[0], window[1], breakpoints)
    return _check_residual("Fourier transform", value, error) / math.sqrt(2.0 * math.pi)


def inverse_fourier_transform(fn: Zeta, x: float, window: Tuple[float, float]) -> complex:
    """(2 pi)^(-1/2) integral exp(-i t x) fn(t) dt over a finite window"""
    value, error = complex_quad(lambda t: np.exp(-1j * t * x) * fn(t), window[0], window[1])
    return _check_residual("inverse Fourier transform", value, error) / math.sqrt(2.0 * math.pi)


def density_q(ctx: ComplexDensityQ, lam):
    """
    (2 pi W(f,f))^(-1/2) exp(-t^2 W(g,g)/2) exp(-(lam - i t W(f,g))^2 / (2 W(f,f)))
    """
    if ctx.w_ff <= 0:
        raise DegenerateWidthError("density q needs W(f,f) > 0", w_ff=ctx.w_ff)
    lam = np.asarray(lam, dtype=float)
    shifted = lam - ctx.centre
    value = ctx.damping * np.exp(-shifted * shifted / (2.0 * ctx.w_ff)) / math.sqrt(2.0 * math.pi * ctx.w_ff)
    return complex(value) if value.ndim == 0 else value


def expect_zeta_exp(
    zeta: Zeta,
    ctx: ComplexDensityQ,
    breakpoints: Sequence[float] = (),
    zeta_bound: float = 1.0
) -> complex:
    """
    <zeta(phi(f)) exp(i t phi(g))> as the integral of zeta against q

    The window is centred on Re(i t W(f,g)) and covers ten widths plus the
    imaginary shift, widened until the Gaussian tail is negligible.

    Args:
        zeta: Bounded, piecewise continuous function of lambda
        ctx: Density parameters
        breakpoints: Discontinuities of zeta, used to split the domain
        zeta_bound: Upper bound of |zeta| for the tail estimate

    Raises:
        QuadratureError: If the error estimate exceeds QUAD_MAX_RESIDUAL
    """
    if ctx.w_ff <= 0:
        raise DegenerateWidthError("expectation needs W(f,f) > 0", w_ff=ctx.w_ff)
    sigma = math.sqrt(ctx.w_ff)
    c = ctx.centre
    growth = ctx.damping * np.exp(c.imag ** 2 / (2.0 * ctx.w_ff))
    half = _gaussian_window(c.real, sigma, growth, zeta_bound) + abs(c.imag)
    value, error = complex_quad(
        lambda lam: zeta(lam) * density_q(ctx, lam),
        c.real - half,
        c.real + half,
        [*breakpoints, c.real],
    )
    return _check_residual("expectation against q", value, error)


def weierstrass(
    zeta: Zeta,
    z: complex,
    breakpoints: Sequence[float] = (),
    zeta_bound: float = 1.0
) -> complex:
    """
    Weierstrass transform (4 pi)^(-1/2) integral exp(-(x - z)^2 / 4) zeta(x) dx

    For z = alpha + i beta the kernel is evaluated on the real axis as
    exp(beta^2/4) exp(-(x-alpha)^2/4) exp(i beta (x-alpha)/2), so zeta need
    not be analytic.
    """
    z = complex(z)
    alpha, beta = z.real, z.imag
    growth = np.exp(beta * beta / 4.0)
    half = _gaussian_window(alpha, math.sqrt(2.0), growth, zeta_bound) + abs(beta)
    norm = 1.0 / math.sqrt(4.0 * math.pi)

    def integrand(x):
        d = x - alpha
        return norm * growth * np.exp(-d * d / 4.0 + 0.5j * beta * d) * zeta(x)

    value, error = complex_quad(integrand, alpha - half, alpha + half, [*breakpoints, alpha])
    return _check_residual("Weierstrass transform", value, error)


def expect_via_weierstrass(
    zeta: Zeta,
    ctx: ComplexDensityQ,
    breakpoints: Sequence[float] = (),
    zeta_bound: float = 1.0
) -> complex:
    """
    exp(-t^2 W(g,g)/2) W{zeta(a .)}(z) with a = sqrt(W(f,f)/2) and
    z = i t sqrt(2/W(f,f)) W(f,g)
    """
    if ctx.w_ff <= 0:
        raise DegenerateWidthError("expectation needs W(f,f) > 0", w_ff=ctx.w_ff)
    a = math.sqrt(ctx.w_ff / 2.0)
    z = 1j * ctx.t * math.sqrt(2.0 / ctx.w_ff) * ctx.w_fg
    scaled = [p / a for p in breakpoints]
    return ctx.damping * weierstrass(lambda x: zeta(a * x), z, scaled, zeta_bound)


def bch_closed_form(ctx: PairingContext, s: float, t: float) -> complex:
    """
    <exp(i s phi(f)) exp(i t phi(g))>
    = exp(-(i/2) s t Delta(f,g)) exp(-W(sf+tg, sf+tg)/2)
    """
    w_mixed = s * s * ctx.w_ff + s * t * (ctx.w_fg + ctx.w_gf) + t * t * ctx.w_gg
    return complex(np.exp(-0.5j * s * t * ctx.d_fg - 0.5 * w_mixed))
