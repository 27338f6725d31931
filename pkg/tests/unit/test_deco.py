"""
Unit tests for the binned decoherence functional of the four-point causet
"""

import numpy as np
import pytest

from services.deco import (
    binned_decoherence,
    centered_edges,
    chi_from_deco,
    chi_no_measurement,
    dense_decoherence,
    marginal_independence_check,
    richardson_extrapolate,
    single_path_amplitudes,
)
from services.fock_oracle import build
from services.resolutions import parse_resolution
from utils.errors import SizeGuardError


@pytest.fixture(scope="module")
def deco(fock):
    edges = [centered_edges(0.5, 4)] * 4
    return binned_decoherence(fock, edges)


class TestEdges:
    def test_centered_edges(self):
        assert centered_edges(0.5, 4).tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            centered_edges(0.5, 0)


class TestBinnedDecoherence:
    """Path vectors and the functional D(c, c_bar)"""

    def test_single_cell_is_normalised(self, four_point_modes):
        """One open cell per axis projects onto everything"""
        F = build(four_point_modes, 6)
        D = binned_decoherence(F, [[-1.0, 1.0]] * 4)
        assert D.n_cells == 1
        assert abs(D.normalisation() - 1.0) < 1e-10

    def test_normalisation(self, deco):
        assert abs(deco.normalisation() - 1.0) < 1e-10

    def test_hermitian_with_nonnegative_diagonal(self, deco):
        M = dense_decoherence(deco)
        assert np.max(np.abs(M - M.conj().T)) < 1e-12
        assert np.all(np.diag(M).real >= -1e-14)

    def test_row_sums_are_single_path_amplitudes(self, deco):
        """Summing D over c_bar collapses the bra to the vacuum"""
        M = dense_decoherence(deco)
        assert np.max(np.abs(M.sum(axis=1) - single_path_amplitudes(deco))) < 1e-10

    def test_closed_ends_lose_weight(self, four_point_modes):
        F = build(four_point_modes, 6)
        D = binned_decoherence(F, [centered_edges(0.5, 2)] * 4, open_ends=False)
        assert D.normalisation().real < 1.0

    def test_axis_guard(self, fock):
        with pytest.raises(SizeGuardError):
            binned_decoherence(fock, [centered_edges(0.1, 13)] * 4)

    def test_needs_four_axes(self, fock):
        with pytest.raises(ValueError):
            binned_decoherence(fock, [centered_edges(0.5, 2)] * 3)


class TestChiFromDeco:
    """Bob's signal as a restricted sum over cell pairs"""

    @pytest.mark.parametrize("literal", [None, "uniform:w=1", "threshold:0"])
    def test_bob_on_either_branch(self, deco, literal):
        """Pi_B is the last projector, so D vanishes unless xi_B = xi_bar_B"""
        res = None if literal is None else parse_resolution(literal)
        a = chi_from_deco(deco, 0.8, 1.0, res, 1.0, 1.0)
        b = chi_from_deco(deco, 0.8, 1.0, res, 1.0, 1.0, bob_on_bar=True)
        assert abs(a - b) < 1e-10

    def test_no_measurement_has_no_signal(self, deco):
        assert marginal_independence_check(deco, [0.5, 1.0, 2.0], 1.0) <= 1e-6

    def test_no_measurement_helper(self, deco):
        assert chi_no_measurement(deco, 0.5, 1.0) == chi_from_deco(deco, 0.5, 1.0, None, 0.0, 0.0)

    def test_ideal_measurement_signals(self, deco):
        res = parse_resolution("uniform:w=1")
        assert marginal_independence_check(deco, [0.5, 1.0, 1.5, 2.0], 1.0, res) > 1e-6


class TestRichardson:
    def test_linear_extrapolation(self):
        assert richardson_extrapolate([1.0, 0.5], [1.0, 0.75]) == [pytest.approx(0.5)]

    def test_second_order(self):
        """Exact for v = 1 + w^2"""
        out = richardson_extrapolate([1.0, 0.5, 0.25], [2.0, 1.25, 1.0625], order=2)
        assert out == [pytest.approx(1.0), pytest.approx(1.0)]

    def test_rejects_equal_widths(self):
        with pytest.raises(ValueError):
            richardson_extrapolate([0.5, 0.5], [1.0, 1.0])
