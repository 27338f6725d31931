"""
Scenario Service - builds Sorkin scenarios and scans Bob's signal

Causal sets: Alice and Bob sit at single points in the in- and out-regions
of a non-transitive lab. Continuum grids: Alice and Bob are bumps placed on
mutually spacelike points where Charlie's mode Delta f is nonzero.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import lsqr

from config import settings
from models.kraus import KrausFamily
from models.propagators import PairingContext
from models.scenario import (
    AcausalityResult,
    MasslessDecomposition,
    Phi2ClosedForm,
    ScenarioSearchResult,
    SignalScan,
    SorkinScenario,
    SpacelikeStrips,
    SpacetimeKind,
)
from models.spacetime import BumpFunction, CausalSet, Event2D, Grid2D, Region
from services.kraus import chi
from services.propagators import (
    causet_retarded_green,
    continuum_delta_apply,
    continuum_delta_pairing,
    continuum_pairing_context,
    pairing_context,
    sj_modes,
)
from services.spacetime import (
    RegionSide,
    continuum_in_out_mask,
    four_point_causet,
    in_out_region,
    is_transitive,
    spacelike_margin,
)
from utils.errors import NotASolutionError, UnsupportedCaseError
from utils.metrics import timed_operation
from utils.parallel import parallel_map


logger = logging.getLogger(__name__)

# Relative size of the discrete d'Alembertian accepted as a massless solution
WAVE_RESIDUAL_TOL = 1e-8

# Spacelike candidate pairs validated by full pairings before giving up
_MAX_PAIR_ATTEMPTS = 25


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


@timed_operation("build_scenario_causet")
def build_scenario_causet(
    cs: CausalSet,
    f: np.ndarray,
    K: Sequence[int],
    mass: float = 0.0,
    density: float = 1.0,
    budget: Optional[int] = None
) -> ScenarioSearchResult:
    """
    Sorkin scenario on a causal set

    Alice gets the unit vector at a point x- of K- and Bob the unit vector
    at x+ in K+, with x+ and x- spacelike and (Delta f)(x+-) nonzero.

    Args:
        cs: Causal set
        f: Charlie's test vector
        K: Lab point indices
        mass: Field mass
        density: Sprinkling density of the Green function
        budget: Maximum number of (x+, x-) pairs to examine

    Returns:
        ScenarioSearchResult; not found for transitive labs or when no
        spacelike pair exists
    """
    budget = budget or settings.SCENARIO_PAIR_BUDGET
    K = frozenset(int(k) for k in K)
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape[0] != cs.n_points:
        raise ValueError(f"f must have length {cs.n_points}")

    transitivity = is_transitive(cs, K)
    if transitivity.transitive:
        return ScenarioSearchResult(found=False, reason="lab is transitive")

    props = causet_retarded_green(cs, mass, density)
    phi = props.delta @ f
    scale = float(np.max(np.abs(phi))) if phi.size else 0.0
    if scale == 0.0:
        return ScenarioSearchResult(found=False, reason="Delta f vanishes identically")
    support = np.abs(phi) > settings.SCENARIO_SUPPORT_TOL * scale

    plus = sorted((x for x in in_out_region(cs, K, RegionSide.OUT) if support[x]), key=lambda x: -abs(phi[x]))
    minus = sorted((x for x in in_out_region(cs, K, RegionSide.IN) if support[x]), key=lambda x: -abs(phi[x]))

    examined = 0
    modes = None
    for xp in plus:
        for xm in minus:
            if examined >= budget:
                return ScenarioSearchResult(found=False, reason="pair budget exhausted", candidates_examined=examined)
            examined += 1
            if cs.related(xp, xm):
                continue
            if modes is None:
                modes = sj_modes(props)
            g, h = _unit(cs.n_points, xp), _unit(cs.n_points, xm)
            ctx = pairing_context(props, modes, f, g, h)
            if ctx.d_fg == 0.0 or ctx.d_fh == 0.0:
                continue
            scenario = SorkinScenario(
                kind=SpacetimeKind.CAUSET,
                causet=cs,
                mass=mass,
                density=density,
                lab=Region(points=K),
                f=f,
                g=g,
                h=h,
                x_plus=xp,
                x_minus=xm,
                d_fg=ctx.d_fg,
                d_fh=ctx.d_fh,
                d_gh=ctx.d_gh,
                ctx=ctx,
                validated=("non-transitive lab", "spacelike Alice and Bob", "commutator identity"),
            )
            logger.info(f"Scenario on {cs.n_points}-point causet: Alice at {xm}, Bob at {xp}")
            return ScenarioSearchResult(found=True, scenario=scenario, candidates_examined=examined)

    return ScenarioSearchResult(
        found=False,
        reason="no spacelike pair in the support of Delta f",
        candidates_examined=examined,
    )


def four_point_scenario() -> SorkinScenario:
    """Lab {1, 2} between the links A < 1 and 2 < B, Charlie's f = e_1 + e_2"""
    cs = four_point_causet()
    f = np.array([0.0, 1.0, 1.0, 0.0])
    return build_scenario_causet(cs, f, K={1, 2}).scenario


@timed_operation("build_scenario_continuum")
def build_scenario_continuum(
    f: BumpFunction,
    lab: Region,
    grid: Grid2D,
    mass: float = 0.0,
    bump_radius: Optional[float] = None,
    budget: Optional[int] = None
) -> ScenarioSearchResult:
    """
    Sorkin scenario on a 1+1 Minkowski grid

    Candidate centres for Alice and Bob are grid points whose bump disc
    lies in K- or K+ and inside the grid, where |Delta f| is above the
    support tolerance. The strongest pair whose discs are spacelike
    (margin above 2 sqrt(2) r in lightcone coordinates) is kept.
    """
    budget = budget or settings.SCENARIO_PAIR_BUDGET
    r = bump_radius or max(4.0 * grid.spacing, 0.25)
    phi = continuum_delta_apply(f, mass, grid)
    scale = float(np.max(np.abs(phi)))
    if scale == 0.0:
        return ScenarioSearchResult(found=False, reason="Delta f vanishes on the grid")

    T, X = grid.mesh()
    inside = (T - r >= grid.t_min) & (T + r <= grid.t_max) & (X - r >= grid.x_min) & (X + r <= grid.x_max)
    support = (np.abs(phi) > settings.SCENARIO_SUPPORT_TOL * scale) & inside
    plus_mask = support & continuum_in_out_mask(grid, lab, RegionSide.OUT, margin=r)
    minus_mask = support & continuum_in_out_mask(grid, lab, RegionSide.IN, margin=r)

    per_side = max(1, int(math.isqrt(int(budget))))
    plus = _ranked_points(plus_mask, phi, T, X, per_side)
    minus = _ranked_points(minus_mask, phi, T, X, per_side)
    examined = plus.shape[0] * minus.shape[0]
    if examined == 0:
        return ScenarioSearchResult(found=False, reason="K+ or K- misses the support of Delta f")

    margin = spacelike_margin(plus[:, :2], minus[:, :2])
    strength = plus[:, None, 2] * minus[None, :, 2]
    strength[margin <= 2.0 * math.sqrt(2.0) * r] = -1.0
    for flat in np.argsort(strength, axis=None)[::-1][:_MAX_PAIR_ATTEMPTS]:
        i, j = np.unravel_index(flat, strength.shape)
        if strength[i, j] < 0:
            break
        g = BumpFunction(t0=plus[i, 0], x0=plus[i, 1], radius=r)
        h = BumpFunction(t0=minus[j, 0], x0=minus[j, 1], radius=r)
        d_fg = continuum_delta_pairing(f, g, mass, grid)
        d_fh = continuum_delta_pairing(f, h, mass, grid)
        d_gh = continuum_delta_pairing(g, h, mass, grid)
        if d_fg == 0.0 or d_fh == 0.0 or d_gh != 0.0:
            continue
        ctx = continuum_pairing_context(f, g, h, mass, grid) if mass > 0 else None
        scenario = SorkinScenario(
            kind=SpacetimeKind.CONTINUUM,
            grid=grid,
            mass=mass,
            lab=lab,
            f=f,
            g=g,
            h=h,
            x_plus=Event2D(t=g.t0, x=g.x0),
            x_minus=Event2D(t=h.t0, x=h.x0),
            d_fg=d_fg,
            d_fh=d_fh,
            d_gh=d_gh,
            ctx=ctx,
            validated=("bump discs in K+-", "spacelike Alice and Bob", "nonzero couplings"),
        )
        logger.info(
            f"Continuum scenario (m={mass}): Alice at ({h.t0:.3g}, {h.x0:.3g}), "
            f"Bob at ({g.t0:.3g}, {g.x0:.3g})"
        )
        return ScenarioSearchResult(found=True, scenario=scenario, candidates_examined=examined)

    return ScenarioSearchResult(
        found=False,
        reason="no mutually spacelike bump discs",
        candidates_examined=examined,
    )


def _ranked_points(mask: np.ndarray, phi: np.ndarray, T: np.ndarray, X: np.ndarray, limit: int) -> np.ndarray:
    """(t, x, |phi|) rows of the masked points, strongest first"""
    rows = np.column_stack([T[mask], X[mask], np.abs(phi[mask])])
    order = np.argsort(-rows[:, 2], kind="stable")
    return rows[order[:limit]]


def _require_context(sc: SorkinScenario) -> PairingContext:
    if sc.ctx is None:
        raise UnsupportedCaseError("signal scans need W pairings, unavailable for massless continuum fields")
    return sc.ctx


@timed_operation("signal_scan")
def signal_scan(sc: SorkinScenario, fam: KrausFamily, t: float, s_grid: Sequence[float]) -> SignalScan:
    """
    Bob's signal chi(s) over Alice's kick strengths s

    max_gap = max over s of |chi(s) - chi(0)|.
    """
    ctx = _require_context(sc)
    s_grid = np.asarray(s_grid, dtype=float)
    values = np.array(parallel_map(lambda s: chi(fam, ctx, float(s), t), s_grid), dtype=complex)
    zero = chi(fam, ctx, 0.0, t)
    gap = float(np.max(np.abs(values - zero))) if values.size else 0.0
    return SignalScan(s_grid=s_grid, t=t, chi=values, chi_zero=zero, max_gap=gap)


def default_t_grid(ctx: PairingContext, points: int = 50) -> np.ndarray:
    """t in (0.1 .. 3) sqrt(W(f,f)) / |Delta(f,g)|, so shifts are comparable to outcome spreads"""
    return np.linspace(0.1, 3.0, points) * math.sqrt(ctx.w_ff) / abs(ctx.d_fg)


def default_s_grid(ctx: PairingContext, points: int = 13) -> np.ndarray:
    return np.linspace(0.0, 3.0 * math.sqrt(ctx.w_ff) / abs(ctx.d_fh), points)


@timed_operation("acausality_search")
def acausality_search(
    sc: SorkinScenario,
    fam: KrausFamily,
    t_grid: Optional[Sequence[float]] = None,
    s_grid: Optional[Sequence[float]] = None
) -> AcausalityResult:
    """Scan t and report the largest max_s |chi(s) - chi(0)|"""
    ctx = _require_context(sc)
    t_grid = default_t_grid(ctx) if t_grid is None else np.asarray(t_grid, dtype=float)
    s_grid = default_s_grid(ctx) if s_grid is None else np.asarray(s_grid, dtype=float)
    gaps = parallel_map(lambda t: signal_scan(sc, fam, float(t), s_grid).max_gap, t_grid)
    best = int(np.argmax(gaps))
    logger.info(f"Acausality search for {fam.describe()}: max gap {gaps[best]:.3g} at t={t_grid[best]:.4g}")
    return AcausalityResult(
        t_best=float(t_grid[best]),
        max_gap=float(gaps[best]),
        profile=[(float(t), float(g)) for t, g in zip(t_grid, gaps)],
    )


def closed_form_phi2(ctx: PairingContext, s: float, t: float) -> Phi2ClosedForm:
    """
    Bob's expectation of exp(i t phi(g)) after Charlie kicks with exp(i phi(f)^2)

    rhs = exp(-W(g~, g~)/2) with g~ = t (g - 2 Delta(f,g) f), the value
    without Alice; lhs = exp(-2 i s t Delta(f,g) Delta(f,h)) rhs with
    Alice's kick exp(i s phi(h)).
    """
    rhs = complex(math.exp(-0.5 * ctx.w_tilde_gg(t)))
    phase = 2.0 * s * t * ctx.d_fg * ctx.d_fh
    lhs = complex(np.exp(-1j * phase) * rhs)
    return Phi2ClosedForm(lhs=lhs, rhs=rhs, phase=phase)


@timed_operation("massless_decompose")
def massless_decompose(phi: np.ndarray, grid: Grid2D) -> MasslessDecomposition:
    """
    Split a lattice massless solution into left and right movers

    On the lattice p = i - j and q = i + j index u and v; U[p] + V[q] = phi
    is solved by sparse least squares with the gauge V at the first v node
    set to zero.

    Raises:
        NotASolutionError: If phi fails the discrete wave equation
    """
    phi = np.asarray(phi, dtype=float)
    n_t, n_x = grid.n_t, grid.n_x
    if phi.shape != (n_t, n_x):
        raise ValueError(f"phi has shape {phi.shape}, grid is {(n_t, n_x)}")

    scale = max(float(np.max(np.abs(phi))), 1e-300)
    box = phi[2:, 1:-1] + phi[:-2, 1:-1] - phi[1:-1, 2:] - phi[1:-1, :-2]
    wave = float(np.max(np.abs(box))) / scale if box.size else 0.0
    if wave > WAVE_RESIDUAL_TOL:
        raise NotASolutionError("field does not satisfy the discrete massless wave equation", residual=wave)

    i, j = np.meshgrid(np.arange(n_t), np.arange(n_x), indexing="ij")
    p = (i - j).ravel() + (n_x - 1)
    q = (i + j).ravel()
    n_u = n_t + n_x - 1
    n_rows = p.size
    rows = np.concatenate([np.arange(n_rows), np.arange(n_rows), [n_rows]])
    cols = np.concatenate([p, n_u + q, [n_u]])
    vals = np.ones(rows.size)
    A = coo_matrix((vals, (rows, cols)), shape=(n_rows + 1, 2 * n_u)).tocsr()
    b = np.concatenate([phi.ravel(), [0.0]])
    solution = lsqr(A, b, atol=1e-15, btol=1e-15, iter_lim=20 * (2 * n_u))[0]
    U, V = solution[:n_u], solution[n_u:]

    residual = float(np.max(np.abs(U[p] + V[q] - phi.ravel())))
    h = grid.spacing
    u_axis = (grid.t_min - grid.x_min) + h * (np.arange(n_u) - (n_x - 1))
    v_axis = (grid.t_min + grid.x_min) + h * np.arange(n_u)
    logger.debug(f"Massless decomposition: residual {residual:.3g}, wave residual {wave:.3g}")
    return MasslessDecomposition(u_axis=u_axis, U=U, v_axis=v_axis, V=V, residual=residual, wave_residual=wave)


def _variation_bounds(axis: np.ndarray, values: np.ndarray, tol: float):
    """Outermost points where values leave their end constants"""
    left = np.nonzero(np.abs(values - values[0]) > tol)[0]
    right = np.nonzero(np.abs(values - values[-1]) > tol)[0]
    if left.size == 0 or right.size == 0:
        return 0.0, 0.0
    return float(axis[left[0]]), float(axis[right[-1]])


def detect_strips(phi: np.ndarray, decomposition: MasslessDecomposition, grid: Grid2D) -> SpacelikeStrips:
    """
    The strips S+ and S- of a massless mode

    With [u-, u+] and [v-, v+] the ranges where U and V vary, S+ holds
    nonzero points with u > u+ and v in the lower half of (v-, v+), S- the
    nonzero points with u < u- and v in the upper half. Every point of S+
    is spacelike to every point of S-.
    """
    phi = np.asarray(phi, dtype=float)
    tol = settings.SCENARIO_SUPPORT_TOL * max(float(np.max(np.abs(phi))), 1e-300)
    d = decomposition
    u_lo, u_hi = _variation_bounds(d.u_axis, d.U, tol)
    v_lo, v_hi = _variation_bounds(d.v_axis, d.V, tol)
    v_mid = 0.5 * (v_lo + v_hi)

    T, X = grid.mesh()
    u, v = T - X, T + X
    nonzero = np.abs(phi) > tol
    s_plus = nonzero & (u > u_hi) & (v > v_lo) & (v < v_mid)
    s_minus = nonzero & (u < u_lo) & (v > v_mid) & (v < v_hi)
    found = bool(s_plus.any() and s_minus.any())
    spacelike = found and bool(u[s_minus].max() < u[s_plus].min() and v[s_plus].max() < v[s_minus].min())
    return SpacelikeStrips(
        s_plus=s_plus,
        s_minus=s_minus,
        u_bounds=(u_lo, u_hi),
        v_bounds=(v_lo, v_hi),
        found=found,
        mutually_spacelike=spacelike,
    )
