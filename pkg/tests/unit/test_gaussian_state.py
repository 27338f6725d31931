"""
Unit tests for the vacuum functional calculus
"""

import math

import numpy as np
import pytest
from scipy import integrate

from models.gaussian import ComplexDensityQ
from services.gaussian_state import (
    bch_closed_form,
    char_fn,
    density_p,
    density_q,
    expect_via_weierstrass,
    expect_zeta_exp,
    fourier_transform,
    inverse_fourier_transform,
    moment,
    weierstrass,
)
from utils.errors import DegenerateWidthError


class TestMoments:
    """Gaussian moments and characteristic function"""

    def test_even_moments(self):
        """<phi^4> = 3 W^2"""
        assert moment(0, 2.0) == 1.0
        assert moment(2, 2.0) == pytest.approx(2.0)
        assert moment(4, 2.0) == pytest.approx(12.0)

    def test_odd_moments_vanish(self):
        assert moment(1, 0.7) == 0.0
        assert moment(5, 0.7) == 0.0

    def test_rejects_negative_width(self):
        with pytest.raises(ValueError):
            moment(2, -1.0)
        with pytest.raises(ValueError):
            char_fn(1.0, -1.0)

    def test_char_fn(self):
        assert char_fn(0.0, 3.0) == 1.0
        assert char_fn(2.0, 0.5) == pytest.approx(math.exp(-1.0))


class TestDensities:
    """The outcome densities p and q"""

    def test_p_is_normalised(self):
        value, _ = integrate.quad(lambda x: density_p(x, 0.5), -np.inf, np.inf)
        assert value == pytest.approx(1.0, abs=1e-10)

    def test_p_needs_positive_width(self):
        with pytest.raises(DegenerateWidthError):
            density_p(0.0, 0.0)

    def test_q_needs_positive_width(self):
        q = ComplexDensityQ(w_ff=0.0, w_gg=1.0, w_fg=0.0, t=0.5)
        with pytest.raises(DegenerateWidthError):
            density_q(q, 0.0)
        with pytest.raises(DegenerateWidthError):
            expect_zeta_exp(lambda lam: 1.0, q)

    def test_q_reduces_to_p_at_zero_strength(self, ctx):
        """With t = 0 the complex density is the vacuum density"""
        q = ComplexDensityQ.from_context(ctx, 0.0)
        lam = np.linspace(-2.0, 2.0, 9)
        assert np.allclose(density_q(q, lam), density_p(lam, ctx.w_ff))

    def test_q_integrates_to_damping(self, ctx):
        """The total mass of q is exp(-t^2 W(g,g)/2)"""
        q = ComplexDensityQ.from_context(ctx, 1.3)
        value = expect_zeta_exp(lambda lam: 1.0, q)
        assert value == pytest.approx(q.damping, abs=1e-9)


class TestExpectations:
    """<zeta(phi(f)) exp(i t phi(g))> by quadrature and by Weierstrass transform"""

    @pytest.mark.parametrize("s,t", [(0.0, 1.0), (1.0, 0.5), (-2.0, 1.5)])
    def test_exponential_matches_bch(self, ctx, s, t):
        """zeta = exp(i s lambda) reproduces the closed BCH form"""
        q = ComplexDensityQ.from_context(ctx, t)
        value = expect_zeta_exp(lambda lam: np.exp(1j * s * lam), q)
        assert abs(value - bch_closed_form(ctx, s, t)) < 1e-8

    @pytest.mark.parametrize("t", [0.4, 1.0, 2.0])
    def test_weierstrass_route_agrees(self, ctx, t):
        """Both routes agree on a discontinuous zeta"""
        q = ComplexDensityQ.from_context(ctx, t)
        step = lambda lam: 1.0 if lam >= 0.0 else 0.0
        direct = expect_zeta_exp(step, q, breakpoints=[0.0])
        via_w = expect_via_weierstrass(step, q, breakpoints=[0.0])
        assert abs(direct - via_w) < 1e-7

    def test_weierstrass_of_constant(self):
        """The heat kernel has unit mass for any complex centre"""
        assert abs(weierstrass(lambda x: 1.0, 0.3 + 0.2j) - 1.0) < 1e-9

    def test_fourier_of_gaussian(self):
        """exp(-x^2/2) is its own Fourier transform"""
        value = fourier_transform(lambda x: np.exp(-0.5 * x * x), 1.2, (-15.0, 15.0))
        assert abs(value - math.exp(-0.72)) < 1e-9

    def test_inverse_fourier_of_gaussian(self):
        value = inverse_fourier_transform(lambda t: np.exp(-0.5 * t * t), 1.2, (-15.0, 15.0))
        assert abs(value - math.exp(-0.72)) < 1e-9

    def test_bch_at_zero(self, ctx):
        assert bch_closed_form(ctx, 0.0, 0.0) == 1.0
