"""
Deco Service - binned double path integral on the four-point causet

Delta functions in the field values are replaced by spectral projectors
onto cells; chi(s) is then a restricted sum of D(c, c_bar) weighted by
exp(-i s (xi_A - xi_bar_A)) exp(i t xi_B).
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from config import settings
from models.deco import BinnedDecoherence
from models.fock import FockSpace
from models.resolutions import Resolution
from services.fock_oracle import field_spectrum
from services.resolutions import bin_labels
from utils.errors import SizeGuardError
from utils.metrics import timed_operation
from utils.parallel import parallel_map


logger = logging.getLogger(__name__)


def centered_edges(width: float, count: int, centre: float = 0.0) -> np.ndarray:
    """count cells of the given width centred on centre"""
    if width <= 0 or count < 1:
        raise ValueError("cells need a positive width and count")
    return centre + width * (np.arange(count + 1) - count / 2.0)


def _cell_index(values: np.ndarray, edges: np.ndarray, open_ends: bool) -> np.ndarray:
    """Cell of each eigenvalue, -1 outside closed edges"""
    idx = np.searchsorted(edges, values, side="right") - 1
    if open_ends:
        return np.clip(idx, 0, edges.size - 2)
    idx[(values < edges[0]) | (values >= edges[-1])] = -1
    return idx


@timed_operation("binned_decoherence")
def binned_decoherence(
    F: FockSpace,
    edges: Sequence[Sequence[float]],
    order: Sequence[int] = (0, 1, 2, 3),
    open_ends: bool = True
) -> BinnedDecoherence:
    """
    Path vectors u(c) = Pi_B Pi_2 Pi_1 Pi_A |Omega> for every cell

    Args:
        F: Fock space of the four-point causet
        edges: Cell edges for each axis, listed in the causal order
        order: Point indices in causal order (A, 1, 2, B)
        open_ends: Extend the outer cells to infinity so projectors sum to 1

    Raises:
        SizeGuardError: If an axis has too many cells or the vectors exceed DECO_MAX_BYTES
    """
    if F.n_points != 4 or len(order) != 4 or len(edges) != 4:
        raise ValueError("the binned path integral is defined on the four-point causet")
    edges = [np.asarray(e, dtype=float) for e in edges]
    for e in edges:
        if e.size - 1 > settings.DECO_MAX_CELLS_PER_AXIS:
            raise SizeGuardError(
                f"{e.size - 1} cells on one axis exceed DECO_MAX_CELLS_PER_AXIS={settings.DECO_MAX_CELLS_PER_AXIS}",
                cells=e.size - 1,
            )
    n_cells = int(np.prod([e.size - 1 for e in edges]))
    size = n_cells * F.dim * 16
    if size > settings.DECO_MAX_BYTES:
        raise SizeGuardError(f"path vectors need {size} bytes, above DECO_MAX_BYTES", bytes=size)

    def spectrum(x: int):
        e = np.zeros(4)
        e[x] = 1.0
        return field_spectrum(F, e)

    spectra = parallel_map(spectrum, order)

    block = F.vacuum.reshape(1, -1)
    for spec, e in zip(spectra, edges):
        cells = _cell_index(spec.values, e, open_ends)
        coeffs = block @ spec.vectors.conj()

        def project(j: int) -> np.ndarray:
            return (coeffs * (cells == j)) @ spec.vectors.T

        parts = parallel_map(project, range(e.size - 1))
        # row-major: previous cells outer, this axis inner
        block = np.stack(parts, axis=1).reshape(-1, F.dim)

    deco = BinnedDecoherence(
        edges=tuple(edges),
        order=tuple(order),
        vectors=block,
        vacuum=F.vacuum,
        open_ends=open_ends,
    )
    logger.debug(f"Binned decoherence: cells {deco.shape}, normalisation {deco.normalisation():.12g}")
    return deco


def dense_decoherence(D: BinnedDecoherence) -> np.ndarray:
    """
    D(c, c_bar) as an n_cells x n_cells array, rows indexed by c

    Raises:
        SizeGuardError: Above DECO_DENSE_MAX_CELLS cells
    """
    if D.n_cells > settings.DECO_DENSE_MAX_CELLS:
        raise SizeGuardError(
            f"{D.n_cells} cells exceed DECO_DENSE_MAX_CELLS={settings.DECO_DENSE_MAX_CELLS}",
            cells=D.n_cells,
        )
    return D.vectors @ D.vectors.conj().T


def single_path_amplitudes(D: BinnedDecoherence) -> np.ndarray:
    """<Omega| Pi_B Pi_2 Pi_1 Pi_A |Omega> per cell, the sum of D over c_bar"""
    return D.vectors @ D.vacuum.conj()


def _restricted_sum(D: BinnedDecoherence, ket: np.ndarray, bra: np.ndarray, labels: np.ndarray) -> complex:
    total = 0j
    for n in np.unique(labels):
        mask = labels == n
        X = ket[mask] @ D.vectors[mask]
        Y = bra[mask] @ D.vectors[mask]
        total += np.vdot(Y, X)
    return complex(total)


def chi_from_deco(
    D: BinnedDecoherence,
    s: float,
    t: float,
    res: Optional[Resolution],
    f1: float,
    f2: float,
    bob_on_bar: bool = False
) -> complex:
    """
    sum over cell pairs of D exp(-i s (xi_A - xi_bar_A)) exp(i t xi_B)
    restricted to pairs whose f1 xi_1 + f2 xi_2 share a bin

    Args:
        D: Binned decoherence functional
        s, t: Alice's and Bob's parameters
        res: Charlie's resolution, None for no measurement
        f1, f2: Charlie's smearing weights on points 1 and 2
        bob_on_bar: Weight exp(i t xi_bar_B) instead of exp(i t xi_B)
    """
    xi_a, xi_1, xi_2, xi_b = D.centres()
    alice = np.exp(-1j * s * xi_a)
    bob = np.exp(1j * t * xi_b)
    # the bra side enters conjugated through vdot
    ket = alice if bob_on_bar else alice * bob
    bra = alice * bob.conj() if bob_on_bar else alice
    labels = np.zeros(D.n_cells, dtype=np.int64) if res is None else bin_labels(res, f1 * xi_1 + f2 * xi_2)
    return _restricted_sum(D, ket, bra, labels)


def chi_no_measurement(D: BinnedDecoherence, s: float, t: float) -> complex:
    return chi_from_deco(D, s, t, None, 0.0, 0.0)


def marginal_independence_check(
    D: BinnedDecoherence,
    s_grid: Sequence[float],
    t: float,
    res: Optional[Resolution] = None,
    f1: float = 1.0,
    f2: float = 1.0
) -> float:
    """max over s of |chi(s) - chi(0)|, without Charlie when res is None"""
    zero = chi_from_deco(D, 0.0, t, res, f1, f2)
    values = [chi_from_deco(D, float(s), t, res, f1, f2) for s in s_grid]
    return float(max(abs(v - zero) for v in values)) if values else 0.0


def richardson_extrapolate(widths: Sequence[float], values: Sequence[complex], order: int = 1) -> List[complex]:
    """
    w -> 0 estimates from consecutive (coarse, fine) pairs

    (r^p v_fine - v_coarse) / (r^p - 1) with r = w_coarse / w_fine.
    """
    if len(widths) != len(values) or len(widths) < 2:
        raise ValueError("need at least two (width, value) pairs")
    out = []
    for (w_c, v_c), (w_f, v_f) in zip(zip(widths, values), zip(widths[1:], values[1:])):
        r = (w_c / w_f) ** order
        if r == 1.0:
            raise ValueError("consecutive widths must differ")
        out.append(complex((r * v_f - v_c) / (r - 1.0)))
    return out
