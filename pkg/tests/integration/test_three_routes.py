"""
Integration tests: Bob's signal on the four-point causet by three routes

Analytic Gaussian evaluation, the truncated Fock oracle and the binned
double path integral must tell the same story.
"""

import numpy as np
import pytest

from services.deco import (
    binned_decoherence,
    centered_edges,
    chi_from_deco,
    chi_no_measurement,
    marginal_independence_check,
    richardson_extrapolate,
)
from services.fock_oracle import chi_oracle, chi_oracle_scan
from models.kraus import KrausFamily
from services.kraus import chi, parse_kraus
from services.resolutions import parse_resolution


@pytest.fixture(scope="module")
def vectors(scenario):
    return scenario.f, scenario.h, scenario.g


@pytest.fixture(scope="module")
def deco(fock):
    """Six cells of width 0.5 per axis cover three vacuum widths"""
    return binned_decoherence(fock, [centered_edges(0.5, 6)] * 4)


def _max_gap(values) -> float:
    values = np.asarray(values)
    return float(np.max(np.abs(values - values[0])))


class TestAnalyticAgainstFock:
    """Gaussian closed forms against dense matrices"""

    S_GRID = [0.0, 0.5, 1.0, 1.5, 2.0]

    @pytest.mark.parametrize("literal", ["kick:zero", "kick:linear", "kick:square", "weak:sigma=0.5", "ideal:uniform:w=1", "ideal:threshold:0"])
    def test_scan_agrees(self, fock, vectors, ctx, literal):
        f, h, g = vectors
        fam = parse_kraus(literal)
        oracle = chi_oracle_scan(fock, f, h, g, fam, self.S_GRID, 1.0)
        analytic = np.array([chi(fam, ctx, s, 1.0) for s in self.S_GRID])
        assert np.max(np.abs(oracle - analytic)) < 1e-4

    def test_threshold_measurement_signals_on_both_routes(self, fock, vectors, ctx):
        f, h, g = vectors
        fam = parse_kraus("ideal:threshold:0")
        analytic = [chi(fam, ctx, s, 1.0) for s in self.S_GRID]
        oracle = [chi_oracle(fock, f, h, g, fam, s, 1.0) for s in self.S_GRID]
        assert _max_gap(analytic) > 1e-2
        assert _max_gap(oracle) > 1e-2


class TestDecoAgainstAnalytic:
    """Binned path integral against the vacuum characteristic function"""

    @pytest.mark.parametrize("t", [0.5, 1.0])
    def test_no_measurement_matches_vacuum(self, deco, ctx, t):
        """Cell centres move Bob's phase by at most t w / 2, so the gap is second order"""
        expected = np.exp(-0.5 * t * t * ctx.w_gg)
        for s in (0.0, 1.0, 2.0):
            assert abs(chi_no_measurement(deco, s, t) - expected) < 5e-2

    def test_no_measurement_is_flat(self, deco):
        assert marginal_independence_check(deco, [0.5, 1.0, 1.5, 2.0], 1.0) <= 1e-6

    def test_threshold_measurement_signals(self, deco):
        res = parse_resolution("threshold:0")
        assert marginal_independence_check(deco, [0.5, 1.0, 1.5, 2.0], 1.0, res) > 1e-3

    @pytest.mark.slow
    def test_measured_signal_converges_as_cells_shrink(self, fock, ctx):
        """
        Cells of width 1, 1/2 and 3/8 over the same +-1.5 range

        Cell counts grow as w^-4 on four axes, so the finest width is set by
        DECO_MAX_BYTES at n_max = 40. The cut at 0.3 never meets a sum of
        cell centres.
        """
        res = parse_resolution("threshold:0.3")
        fam = KrausFamily.ideal(res)
        widths = [1.0, 0.5, 0.375]
        s_grid = [0.5, 1.0]
        errors, values = [], []
        for w in widths:
            D = binned_decoherence(fock, [centered_edges(w, round(3.0 / w))] * 4)
            scan = np.array([chi_from_deco(D, s, 1.0, res, 1.0, 1.0) for s in s_grid])
            analytic = np.array([chi(fam, ctx, s, 1.0) for s in s_grid])
            values.append(scan)
            errors.append(float(np.max(np.abs(scan - analytic))))
        assert errors[-1] < errors[0]
        assert errors[-1] < 0.1
        # centre phases err at second order in w
        for i, s in enumerate(s_grid):
            extrapolated = richardson_extrapolate(widths[:2], [v[i] for v in values[:2]], order=2)
            assert abs(extrapolated[0] - chi(fam, ctx, s, 1.0)) < errors[0]
