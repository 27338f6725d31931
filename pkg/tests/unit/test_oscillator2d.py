"""
Unit tests for the two-dimensional oscillator signal and the pure-point cure
"""

import pytest

from models.oscillator import QuadratureGrid
from services.oscillator2d import (
    chi_closed,
    chi_pure_point,
    chi_quadrature,
    pure_point_bound,
    state_norm,
    uniform_bins,
)
from services.resolutions import parse_resolution
from utils.errors import GridResolutionError


class TestGroundState:
    def test_norm(self):
        assert abs(state_norm() - 1.0) < 1e-10


class TestCoarseGrainedSignal:
    """Charlie measures x + y"""

    @pytest.mark.parametrize("s", [0.0, 0.4, 1.3])
    def test_closed_form_matches_quadrature(self, s):
        res = uniform_bins(1.0)
        assert abs(chi_closed(s, 0.5, res) - chi_quadrature(s, 0.5, res)) < 1e-6

    def test_threshold_closed_form_matches_quadrature(self):
        res = parse_resolution("threshold:0")
        assert abs(chi_closed(0.7, 0.8, res) - chi_quadrature(0.7, 0.8, res)) < 1e-6

    def test_no_kick_no_overlap_loss(self):
        assert chi_closed(0.9, 0.0, uniform_bins(1.0)) == 1.0

    def test_signal_depends_on_alice(self):
        res = uniform_bins(1.0)
        values = [chi_closed(s, 0.5, res) for s in (0.0, 0.25, 0.5, 0.75)]
        assert max(abs(v - values[0]) for v in values) > 1e-3


class TestPurePoint:
    """O_eps = x_eps + y_eps carries no signal"""

    @pytest.mark.parametrize("eps", [0.5, 0.25])
    def test_flat_in_alice_shift(self, eps):
        values = [chi_pure_point(s, 0.5, eps) for s in (0.0, 0.3, 0.7, 1.1)]
        assert max(abs(v - values[0]) for v in values) <= 1e-6

    def test_rejects_unresolved_width(self):
        with pytest.raises(GridResolutionError):
            chi_pure_point(0.0, 0.5, 1e-4)

    @pytest.mark.parametrize("operator", ["x", "O"])
    @pytest.mark.parametrize("eps", [1.0, 0.5, 0.1])
    def test_bound_holds(self, operator, eps):
        result = pure_point_bound(eps, operator)
        assert result.holds
        assert result.deviation <= result.bound

    def test_bound_rejects_unknown_operator(self):
        with pytest.raises(ValueError):
            pure_point_bound(0.5, "p")

    def test_bound_respects_grid_resolution(self):
        with pytest.raises(GridResolutionError):
            pure_point_bound(0.05, grid=QuadratureGrid(min_feature=0.1))
