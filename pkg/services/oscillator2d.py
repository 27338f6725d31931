"""
Oscillator Service - Bob's signal for the two-dimensional oscillator

Alice shifts x by s, Charlie measures x + y with a resolution and Bob
reads exp(i t p_y). The signal reduces to a Weierstrass transform of the
indicator of R_{-t}; the pure-point approximation O_eps = x_eps + y_eps
removes it.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from models.oscillator import PurePointBound, QuadratureGrid, ground_state
from models.resolutions import Resolution, ResolutionKind
from services.gaussian_state import weierstrass
from services.kraus import IntervalIndicator
from services.resolutions import r_t
from utils.errors import GridResolutionError


logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)


def _panel_rule(lo: float, hi: float, breakpoints: Sequence[float], grid: QuadratureGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [lo, hi] with panel edges at every breakpoint"""
    cuts = np.unique(np.clip(np.asarray([lo, hi, *breakpoints], dtype=float), lo, hi))
    base, base_w = np.polynomial.legendre.leggauss(grid.nodes)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        pieces = max(1, math.ceil((b - a) / grid.panel_width))
        edges = np.linspace(a, b, pieces + 1)
        for c, d in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (d - c) * base + 0.5 * (c + d))
            weights.append(0.5 * (d - c) * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def _multiples(eps: float, lo: float, hi: float, offset: float = 0.0) -> np.ndarray:
    """Points offset + k eps inside [lo, hi]"""
    first = math.ceil((lo - offset) / eps)
    last = math.floor((hi - offset) / eps)
    return offset + eps * np.arange(first, last + 1)


def _check_feature(eps: float, grid: QuadratureGrid):
    if eps < grid.min_feature:
        raise GridResolutionError(
            f"bin width {eps} is below the grid resolution {grid.min_feature}",
            epsilon=eps,
            min_feature=grid.min_feature,
        )


def state_norm(grid: Optional[QuadratureGrid] = None) -> float:
    """integral |psi|^2 on the grid, 1 up to quadrature error"""
    grid = grid or QuadratureGrid()
    x, wx = _panel_rule(-grid.half_width, grid.half_width, (), grid)
    psi = ground_state(x[:, None], x[None, :])
    return float(wx @ (psi * psi) @ wx)


def chi_closed(s: float, t: float, res: Resolution, grid: Optional[QuadratureGrid] = None) -> complex:
    """
    exp(-t^2/4) W{1_{R_{-t}}(. / sqrt 2)}(sqrt 2 s - t / sqrt 2)
    """
    grid = grid or QuadratureGrid()
    if t == 0.0:
        return 1.0 + 0j
    centre = s - t / 2.0
    window = (centre - grid.half_width, centre + grid.half_width)
    indicator = IntervalIndicator(r_t(res, -t, window))
    z = _SQRT2 * s - t / _SQRT2
    breaks = [_SQRT2 * p for p in indicator.intervals.endpoints()]
    value = weierstrass(lambda x: indicator(x / _SQRT2), z, breaks)
    return complex(math.exp(-t * t / 4.0) * value)


def chi_quadrature(s: float, t: float, res: Resolution, grid: Optional[QuadratureGrid] = None) -> complex:
    """
    integral of 1_{R_{-t}}(x + y) psi(x - s, y) psi(x - s, y + t) over the plane

    Evaluated in u = (x - y)/2, v = x + y (unit Jacobian) so the indicator
    depends on v alone and the v panels split at the ends of R_{-t}.
    """
    grid = grid or QuadratureGrid()
    u_centre = (2.0 * s + t) / 4.0
    v_centre = s - t / 2.0
    v_window = (v_centre - grid.half_width, v_centre + grid.half_width)
    region = r_t(res, -t, v_window)

    u, wu = _panel_rule(u_centre - grid.half_width / 2.0, u_centre + grid.half_width / 2.0, (), grid)
    v, wv = _panel_rule(*v_window, region.endpoints(), grid)
    keep = region.contains(v)
    v, wv = v[keep], wv[keep]

    U, V = np.meshgrid(u, v, indexing="ij")
    x = V / 2.0 + U
    y = V / 2.0 - U
    integrand = ground_state(x - s, y) * ground_state(x - s, y + t)
    return complex(wu @ integrand @ wv)


def chi_pure_point(s: float, t: float, eps: float, grid: Optional[QuadratureGrid] = None) -> complex:
    """
    Bob's signal when Charlie measures O_eps with the bins [k eps, (k+1) eps)

    1_{S_k}(x, y) 1_{S_k}(x, y + t) summed over k is 1 exactly when
    floor(y/eps) = floor((y + t)/eps), so x only enters through psi.

    Raises:
        GridResolutionError: If eps is below the grid resolution
    """
    grid = grid or QuadratureGrid()
    _check_feature(eps, grid)
    x_lo, x_hi = s - grid.half_width, s + grid.half_width
    y_lo, y_hi = -t / 2.0 - grid.half_width, -t / 2.0 + grid.half_width
    x, wx = _panel_rule(x_lo, x_hi, _multiples(eps, x_lo, x_hi), grid)
    y_breaks = np.concatenate([_multiples(eps, y_lo, y_hi), _multiples(eps, y_lo, y_hi, offset=-t)])
    y, wy = _panel_rule(y_lo, y_hi, y_breaks, grid)
    same_cell = np.floor(y / eps) == np.floor((y + t) / eps)
    y, wy = y[same_cell], wy[same_cell]

    # the integrand factorises, so the tensor rule is a product of two sums
    along_x = wx @ np.exp(-(x - s) ** 2)
    along_y = wy @ np.exp(-0.5 * (y * y + (y + t) ** 2))
    return complex(along_x * along_y / math.pi)


def uniform_bins(eps: float) -> Resolution:
    """The resolution {[k eps, (k+1) eps)} shared by x + y and O_eps"""
    return Resolution(kind=ResolutionKind.UNIFORM, width=eps, offset=0.0)


def pure_point_bound(eps: float, operator: str = "x", grid: Optional[QuadratureGrid] = None) -> PurePointBound:
    """
    ||(x_eps - x) psi|| <= eps ||psi|| or ||(O_eps - O) psi|| <= 2 eps ||psi||
    checked on the grid

    Raises:
        GridResolutionError: If eps is below the grid resolution
    """
    grid = grid or QuadratureGrid()
    _check_feature(eps, grid)
    if operator not in ("x", "O"):
        raise ValueError(f"operator must be 'x' or 'O', got '{operator}'")
    lo, hi = -grid.half_width, grid.half_width
    q, wq = _panel_rule(lo, hi, _multiples(eps, lo, hi), grid)
    # |psi|^2 is a product of two copies of rho, so moments of the gap suffice
    rho = np.exp(-q * q) / math.sqrt(math.pi)
    gap = eps * np.floor(q / eps) - q
    m0 = float(wq @ rho)
    m1 = float(wq @ (gap * rho))
    m2 = float(wq @ (gap * gap * rho))
    if operator == "x":
        deviation = math.sqrt(m2 * m0)
    else:
        deviation = math.sqrt(2.0 * m2 * m0 + 2.0 * m1 * m1)
    norm = m0
    bound = (1.0 if operator == "x" else 2.0) * eps * norm
    logger.debug(f"Pure-point bound for {operator}_eps at eps={eps}: {deviation:.6g} <= {bound:.6g}")
    return PurePointBound(operator=operator, epsilon=eps, deviation=deviation, bound=bound, holds=deviation <= bound)
