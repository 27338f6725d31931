"""
Unit tests for scenario construction, signal scans and massless strips
"""

import numpy as np
import pytest

from models.spacetime import BumpFunction, Grid2D
from services.kraus import chi, parse_kraus
from services.propagators import continuum_delta_apply
from services.scenario import (
    acausality_search,
    build_scenario_causet,
    closed_form_phi2,
    default_s_grid,
    default_t_grid,
    detect_strips,
    massless_decompose,
    signal_scan,
)
from services.spacetime import chain_causet, four_point_causet
from utils.errors import NotASolutionError, UnsupportedCaseError


class TestBuildScenarioCauset:
    """Alice and Bob placement on causal sets"""

    def test_four_point_scenario(self, scenario):
        """Alice at A, Bob at B"""
        assert scenario.x_minus == 0
        assert scenario.x_plus == 3
        assert scenario.d_fg == pytest.approx(0.5)
        assert scenario.d_fh == pytest.approx(-0.5)
        assert scenario.d_gh == 0.0
        assert "non-transitive lab" in scenario.validated

    def test_pairing_context_values(self, ctx):
        assert ctx.w_ff == pytest.approx(0.5)
        assert ctx.w_gg == pytest.approx(0.25)
        assert ctx.w_fg == pytest.approx(0.25j)

    def test_transitive_lab_has_no_scenario(self):
        cs = chain_causet(4)
        result = build_scenario_causet(cs, np.array([0.0, 1.0, 1.0, 0.0]), K={1, 2})
        assert not result.found
        assert result.reason == "lab is transitive"

    def test_vanishing_mode_has_no_scenario(self):
        result = build_scenario_causet(four_point_causet(), np.zeros(4), K={1, 2})
        assert not result.found
        assert "vanishes" in result.reason

    def test_budget_exhaustion(self):
        result = build_scenario_causet(four_point_causet(), np.array([0.0, 1.0, 1.0, 0.0]), K={1, 2}, budget=1)
        # The single allowed pair is A, B which is also the valid one
        assert result.found
        assert result.candidates_examined == 1

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            build_scenario_causet(four_point_causet(), np.ones(3), K={1, 2})


class TestSignalScan:
    """chi(s) over Alice's strengths"""

    def test_linear_kick_gives_flat_scan(self, scenario):
        scan = signal_scan(scenario, parse_kraus("kick:linear"), 1.0, np.linspace(0.0, 3.0, 7))
        assert scan.max_gap < 1e-12

    def test_square_kick_scan_matches_closed_form(self, scenario, ctx):
        """chi(s) = exp(-2 i s t Delta(f,g) Delta(f,h)) exp(-W(g~,g~)/2)"""
        s_grid = np.linspace(0.0, 3.0, 7)
        scan = signal_scan(scenario, parse_kraus("kick:square"), 1.0, s_grid)
        expected = np.array([closed_form_phi2(ctx, s, 1.0).lhs for s in s_grid])
        assert np.max(np.abs(scan.chi - expected)) < 1e-8
        assert scan.max_gap > 1e-2

    def test_massless_continuum_needs_w(self, scenario):
        bare = scenario.model_copy(update={"ctx": None})
        with pytest.raises(UnsupportedCaseError):
            signal_scan(bare, parse_kraus("kick:square"), 1.0, [0.0])

    def test_acausality_search(self, scenario):
        result = acausality_search(scenario, parse_kraus("kick:square"), t_grid=[0.5, 1.0], s_grid=[0.0, 1.0, 2.0])
        assert result.max_gap > 0.0
        assert result.t_best in (0.5, 1.0)
        assert len(result.profile) == 2

    def test_default_grids(self, ctx):
        assert default_t_grid(ctx).shape == (50,)
        assert default_s_grid(ctx)[0] == 0.0


class TestClosedFormPhi2:
    """Bob's expectation after a phi(f)^2 kick"""

    def test_phase(self, ctx):
        """2 s t Delta(f,g) Delta(f,h) = -st/2 here"""
        result = closed_form_phi2(ctx, 2.0, 1.5)
        assert result.phase == pytest.approx(-1.5)
        assert abs(result.lhs) == pytest.approx(abs(result.rhs))

    def test_no_alice_no_phase(self, ctx):
        result = closed_form_phi2(ctx, 0.0, 1.0)
        assert result.lhs == result.rhs

    def test_matches_chi_at_zero(self, ctx):
        assert abs(chi(parse_kraus("kick:square"), ctx, 0.0, 0.8) - closed_form_phi2(ctx, 0.0, 0.8).rhs) < 1e-8


class TestMasslessModes:
    """Left/right split and the spacelike strips"""

    @pytest.fixture
    def grid(self):
        return Grid2D(t_min=-3.0, t_max=3.0, x_min=-3.0, x_max=3.0, spacing=0.1)

    def test_decomposes_sum_of_movers(self, grid):
        T, X = grid.mesh()
        phi = np.exp(-(T - X) ** 2) + 0.5 * np.tanh(T + X)
        d = massless_decompose(phi, grid)
        assert d.residual < 1e-6
        assert d.wave_residual < 1e-8

    def test_rejects_non_solution(self, grid):
        T, _ = grid.mesh()
        with pytest.raises(NotASolutionError):
            massless_decompose(T ** 2, grid)

    def test_rejects_shape_mismatch(self, grid):
        with pytest.raises(ValueError):
            massless_decompose(np.zeros((3, 3)), grid)

    def test_strips_of_bump_mode(self, grid):
        phi = continuum_delta_apply(BumpFunction(radius=0.5), 0.0, grid)
        d = massless_decompose(phi, grid)
        strips = detect_strips(phi, d, grid)
        assert strips.found
        assert strips.mutually_spacelike
        assert not np.any(strips.s_plus & strips.s_minus)
