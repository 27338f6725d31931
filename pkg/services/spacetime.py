"""
Spacetime Service - causal-set sprinkling, causal futures and pasts, lab regions
Also the continuum lab geometry used on 1+1 Minkowski grids
"""

import logging
from enum import Enum
from typing import Iterable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate

from models.spacetime import BumpFunction, CausalSet, Grid2D, Region
from utils.metrics import timed_operation


logger = logging.getLogger(__name__)


class Direction(str, Enum):
    FUTURE = "future"
    PAST = "past"


class RegionSide(str, Enum):
    """K+ is the out-region (not in the past of K), K- the in-region"""
    OUT = "out"
    IN = "in"


class TransitivityWitness(BaseModel):
    """x in the past of z, y in the future of z_prime, yet x does not precede y"""
    x: int
    z: int
    z_prime: int
    y: int


class TransitivityResult(BaseModel):
    transitive: bool
    witness: Optional[TransitivityWitness] = None


def _as_index_array(points: Iterable[int], n: int) -> np.ndarray:
    idx = np.array(sorted(set(int(p) for p in points)), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"point indices must lie in [0, {n})")
    return idx


@timed_operation("sprinkle")
def sprinkle(
    t_range: Tuple[float, float],
    x_range: Tuple[float, float],
    density: float,
    seed: int
) -> CausalSet:
    """
    Poisson sprinkling into a rectangle of 1+1 Minkowski spacetime

    Points are sorted by time, so the index order is a natural labelling.
    Lightlike pairs count as related.

    Args:
        t_range: (t0, t1) with t0 <= t1
        x_range: (x0, x1) with x0 <= x1
        density: Expected points per unit area
        seed: Seed of the numpy Generator

    Returns:
        CausalSet with coordinates

    Raises:
        ValueError: On reversed ranges or a non-positive density
    """
    (t0, t1), (x0, x1) = t_range, x_range
    if t1 < t0 or x1 < x0:
        raise ValueError(f"reversed sprinkling range t={t_range} x={x_range}")
    if not np.isfinite(density) or density <= 0:
        raise ValueError(f"density must be positive and finite, got {density}")

    rng = np.random.default_rng(seed)
    area = (t1 - t0) * (x1 - x0)
    n = int(rng.poisson(density * area)) if area > 0 else 0

    t = rng.uniform(t0, t1, n)
    x = rng.uniform(x0, x1, n)
    order = np.argsort(t, kind="stable")
    t, x = t[order], x[order]

    dt = t[None, :] - t[:, None]
    dx = x[None, :] - x[:, None]
    relation = (dt > 0) & (dt * dt >= dx * dx)

    logger.info(f"Sprinkled {n} points (density={density}, area={area:.6g}, seed={seed})")
    return CausalSet(relation=relation.reshape(n, n), coords=np.column_stack([t, x]).reshape(n, 2))


def chain_causet(n: int) -> CausalSet:
    """Total order 0 < 1 < ... < n-1"""
    return CausalSet(relation=np.triu(np.ones((n, n), dtype=bool), k=1))


def four_point_causet() -> CausalSet:
    """
    Two causal links A < 1 and 2 < B with every cross pair spacelike

    Indices: A=0, 1=1, 2=2, B=3.
    """
    coords = np.array([[0.0, -2.0], [1.0, -2.0], [1.0, 2.0], [2.0, 2.0]])
    relation = np.zeros((4, 4), dtype=bool)
    relation[0, 1] = True
    relation[2, 3] = True
    return CausalSet(relation=relation, coords=coords)


def natural_labelling(cs: CausalSet) -> np.ndarray:
    """
    Permutation listing points so that every relation points forward

    Sorting by the number of predecessors is a topological order for a
    transitively closed relation.
    """
    return np.argsort(cs.relation.sum(axis=0), kind="stable")


def future_past(cs: CausalSet, points: Iterable[int], direction: Direction) -> frozenset:
    """
    Reflexive causal future J+(S) or past J-(S)

    One relation step suffices since the relation is transitively closed.
    """
    idx = _as_index_array(points, cs.n_points)
    if idx.size == 0:
        return frozenset()
    rows = cs.relation[idx, :] if direction == Direction.FUTURE else cs.relation[:, idx].T
    reached = np.nonzero(rows.any(axis=0))[0]
    return frozenset(int(i) for i in np.union1d(idx, reached))


def in_out_region(cs: CausalSet, K: Iterable[int], which: RegionSide) -> frozenset:
    """
    K+ = S minus J-(K) (out-region) or K- = S minus J+(K) (in-region)
    """
    K = list(K)
    everything = frozenset(range(cs.n_points))
    if which == RegionSide.OUT:
        return everything - future_past(cs, K, Direction.PAST)
    return everything - future_past(cs, K, Direction.FUTURE)


def is_causally_convex(cs: CausalSet, R: Iterable[int]) -> bool:
    """True iff every y between two points of R belongs to R"""
    inside = _as_index_array(R, cs.n_points)
    if inside.size == 0:
        return True
    outside = np.setdiff1d(np.arange(cs.n_points), inside)
    if outside.size == 0:
        return True
    r = cs.relation.astype(np.int64)
    between = r[np.ix_(inside, outside)] @ r[np.ix_(outside, inside)]
    return not bool(np.any(between > 0))


def is_transitive(cs: CausalSet, K: Iterable[int]) -> TransitivityResult:
    """
    Check that every point outside K in the past of K precedes every point
    outside K in its future

    For x, y outside K with x <= z and z' <= y for some z, z' in K, the
    lab is transitive iff always x <= y. On failure the witnessing
    (x, z, z', y) is returned.
    """
    K_idx = _as_index_array(K, cs.n_points)
    if K_idx.size == 0:
        return TransitivityResult(transitive=True)
    K_set = set(K_idx.tolist())
    past = np.array(sorted(future_past(cs, K_idx, Direction.PAST) - K_set), dtype=np.int64)
    fut = np.array(sorted(future_past(cs, K_idx, Direction.FUTURE) - K_set), dtype=np.int64)
    if past.size == 0 or fut.size == 0:
        return TransitivityResult(transitive=True)

    ok = cs.relation[np.ix_(past, fut)] | (past[:, None] == fut[None, :])
    bad = np.argwhere(~ok)
    if bad.size == 0:
        return TransitivityResult(transitive=True)

    x, y = int(past[bad[0, 0]]), int(fut[bad[0, 1]])
    z = int(K_idx[np.nonzero(cs.relation[x, K_idx])[0][0]])
    z_prime = int(K_idx[np.nonzero(cs.relation[K_idx, y])[0][0]])
    return TransitivityResult(
        transitive=False,
        witness=TransitivityWitness(x=x, z=z, z_prime=z_prime, y=y),
    )


def spacelike_to_all(cs: CausalSet, x: int, others: Iterable[int]) -> bool:
    """True if x is spacelike to every point in others"""
    return not any(cs.related(x, y) for y in others)


# Continuum lab geometry on 1+1 grids

_BUMP_NORM: Optional[float] = None


def _bump_norm() -> float:
    """Integral of exp(-1/(1-r^2)) over the unit disc"""
    global _BUMP_NORM
    if _BUMP_NORM is None:
        value, _ = integrate.quad(lambda r: 2.0 * np.pi * r * np.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0)
        _BUMP_NORM = value
    return _BUMP_NORM


def bump_values(bump: BumpFunction, T: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Evaluate a bump test function on coordinate arrays"""
    r2 = ((T - bump.t0) ** 2 + (X - bump.x0) ** 2) / bump.radius ** 2
    values = np.zeros(np.broadcast(T, X).shape)
    inside = r2 < 1.0
    values[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return bump.amplitude * values / (_bump_norm() * bump.radius ** 2)


def sample_on_grid(f, grid: Grid2D) -> np.ndarray:
    """Grid samples of a test function: a BumpFunction, a callable (T, X) or an array"""
    T, X = grid.mesh()
    if isinstance(f, BumpFunction):
        return bump_values(f, T, X)
    if callable(f):
        return np.asarray(f(T, X), dtype=float)
    values = np.asarray(f, dtype=float)
    if values.shape != T.shape:
        raise ValueError(f"grid function has shape {values.shape}, grid is {T.shape}")
    return values


def continuum_in_out_mask(grid: Grid2D, lab: Region, which: RegionSide, margin: float = 0.0) -> np.ndarray:
    """
    Grid mask of K+ (out) or K- (in) for a rectangular lab

    The rectangle is enlarged by margin on every side first, so a disc of
    that radius centred on a masked point lies wholly in the region.
    """
    if lab.rectangle is None:
        raise ValueError("continuum regions need a rectangle lab")
    t0, t1, x0, x1 = lab.rectangle
    t0, t1, x0, x1 = t0 - margin, t1 + margin, x0 - margin, x1 + margin
    T, X = grid.mesh()
    gap = np.maximum(np.maximum(x0 - X, X - x1), 0.0)
    if which == RegionSide.OUT:
        in_past_cone = (T <= t1) & (gap <= t1 - T)
        return ~in_past_cone
    in_future_cone = (T >= t0) & (gap <= T - t0)
    return ~in_future_cone


def spacelike_margin(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Pairwise spacelike margin between (t, x) point arrays

    In lightcone coordinates two points are spacelike when du and dv have
    opposite signs; the margin is the smaller of |du|, |dv| in that case
    and negative otherwise.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    du = (a[:, None, 0] - a[:, None, 1]) - (b[None, :, 0] - b[None, :, 1])
    dv = (a[:, None, 0] + a[:, None, 1]) - (b[None, :, 0] + b[None, :, 1])
    opposite = du * dv < 0
    return np.where(opposite, np.minimum(np.abs(du), np.abs(dv)), -np.minimum(np.abs(du), np.abs(dv)))
