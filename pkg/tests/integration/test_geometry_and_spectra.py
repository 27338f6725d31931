"""
Integration tests: SJ spectra on sprinkled causets and scenario construction on grids
"""

import numpy as np
import pytest

from models.spacetime import BumpFunction, Grid2D, Region
from services.propagators import causet_retarded_green, sj_modes
from services.scenario import build_scenario_causet, build_scenario_continuum
from services.spacetime import four_point_causet, spacelike_margin, sprinkle


class TestSprinkledSpectra:
    """Spectral facts of i*Delta over many sprinklings"""

    @pytest.mark.parametrize("seed", range(50))
    def test_spectral_facts(self, seed):
        cs = sprinkle((0.0, 2.0), (-1.0, 1.0), 8.0, seed=seed)
        props = causet_retarded_green(cs, mass=0.0, density=8.0)
        modes = sj_modes(props)

        spectrum = np.sort(np.linalg.eigvalsh(1j * props.delta))
        assert np.max(np.abs(spectrum + spectrum[::-1]), initial=0.0) < 1e-10
        assert modes.rank % 2 == 0
        assert modes.pairing_defect <= 1e-10

        w = modes.w_matrix
        assert np.linalg.eigvalsh(w).min(initial=0.0) > -1e-10
        assert np.max(np.abs(w - w.T - 1j * props.delta), initial=0.0) < 1e-10


class TestContinuumScenarios:
    """Alice and Bob placed on the strips of Delta f around a tight lab"""

    @pytest.fixture
    def grid(self):
        return Grid2D(t_min=-1.6, t_max=1.6, x_min=-2.2, x_max=2.2, spacing=0.05)

    @pytest.fixture
    def lab(self):
        return Region(rectangle=(-0.6, 0.6, -0.6, 0.6))

    def _check(self, result):
        assert result.found, result.reason
        sc = result.scenario
        plus = np.array([[sc.x_plus.t, sc.x_plus.x]])
        minus = np.array([[sc.x_minus.t, sc.x_minus.x]])
        assert spacelike_margin(plus, minus)[0, 0] > 0.0
        assert sc.d_fg != 0.0
        assert sc.d_fh != 0.0
        assert sc.d_gh == 0.0
        return sc

    def test_massless(self, grid, lab):
        result = build_scenario_continuum(BumpFunction(radius=0.5), lab, grid, mass=0.0, bump_radius=0.15)
        sc = self._check(result)
        assert sc.ctx is None

    @pytest.mark.slow
    @pytest.mark.parametrize("mass", [0.5, 1.0])
    def test_massive(self, grid, lab, mass):
        result = build_scenario_continuum(BumpFunction(radius=0.5), lab, grid, mass=mass, bump_radius=0.15)
        sc = self._check(result)
        assert sc.ctx is not None
        assert sc.ctx.w_ff > 0.0


class TestCausetLabs:
    def test_single_point_lab_has_no_scenario(self):
        """f = e_1 only reaches A, which is in the lab's past"""
        result = build_scenario_causet(four_point_causet(), np.array([0.0, 1.0, 0.0, 0.0]), K={1})
        assert not result.found
