"""
Propagators Service - causal-set Green functions, Sorkin-Johnston modes and pairings
Also the continuum Delta- and W-pairings on 1+1 Minkowski grids
"""

import logging
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, linalg, special

from config import settings
from models.propagators import ModeBasis, PairingContext, PropagatorSet, RichardsonEstimate
from models.spacetime import CausalSet, Grid2D
from services.spacetime import sample_on_grid
from utils.errors import ResummationDivergesError, UnsupportedCaseError
from utils.metrics import timed_operation


logger = logging.getLogger(__name__)

# Kernel entries evaluated per block
_KERNEL_BLOCK_ENTRIES = 4_000_000
_MIN_SUPPORT_POINTS = 9
# Grid offsets below this count as exactly null
_NULL_TOL = 1e-12


class PairingKind(str, Enum):
    DELTA = "delta"
    W = "w"


@timed_operation("causet_retarded_green")
def causet_retarded_green(
    cs: CausalSet,
    mass: float,
    density: float,
    a: Optional[float] = None
) -> PropagatorSet:
    """
    Retarded Green matrix as a weighted sum over chains

    G+ = a C (I - b a C)^-1 with C[x][y] = 1 iff y precedes x and
    b = -mass^2 / density.

    Args:
        cs: Causal set
        mass: Field mass, >= 0
        density: Sprinkling density, > 0
        a: Chain prefactor (default settings.PROPAGATOR_A)

    Returns:
        PropagatorSet with G+, G- = G+^T and Delta = G- - G+

    Raises:
        ResummationDivergesError: If I - b a C is numerically singular
    """
    if density <= 0:
        raise ValueError(f"density must be positive, got {density}")
    if mass < 0:
        raise ValueError(f"mass must be non-negative, got {mass}")

    a = settings.PROPAGATOR_A if a is None else float(a)
    b = -(mass ** 2) / density
    C = cs.relation.T.astype(float)
    n = cs.n_points

    if b == 0.0 or n == 0:
        g_ret = a * C
    else:
        M = np.eye(n) - b * a * C
        condition = float(np.linalg.cond(M))
        if not np.isfinite(condition) or condition * np.finfo(float).eps > 1e-2:
            radius = float(np.max(np.abs(np.linalg.eigvals(b * a * C))))
            raise ResummationDivergesError(spectral_radius=radius, condition=condition)
        # C and M commute, so solving from the left gives a C M^-1
        g_ret = linalg.solve(M, a * C)

    g_adv = g_ret.T.copy()
    delta = g_adv - g_ret
    logger.debug(f"Green matrices for n={n}, mass={mass}, density={density} (a={a}, b={b:.6g})")
    return PropagatorSet(
        g_ret=g_ret,
        g_adv=g_adv,
        delta=delta,
        mass=mass,
        density=density,
        coefficient_a=a,
        coefficient_b=b,
    )


@timed_operation("sj_modes")
def sj_modes(p: PropagatorSet) -> ModeBasis:
    """
    Sorkin-Johnston modes from the Hermitian matrix i*Delta

    Eigenvalues above EIGEN_REL_TOL * max|lambda| are retained; the positive
    ones build W = sum_k lambda_k v_k v_k^dagger.
    """
    n = p.n_points
    if n == 0 or not np.any(p.delta):
        return ModeBasis(
            eigenvalues=np.zeros(0),
            eigenvectors=np.zeros((n, 0), dtype=complex),
            w_matrix=np.zeros((n, n), dtype=complex),
            rank=0,
        )

    values, vectors = linalg.eigh(1j * p.delta)
    cutoff = settings.EIGEN_REL_TOL * float(np.max(np.abs(values)))
    positive = values > cutoff
    negative = values < -cutoff

    pos = np.sort(values[positive])[::-1]
    neg = np.sort(-values[negative])[::-1]
    rank = int(positive.sum() + negative.sum())
    defect = 0.0
    if pos.size != neg.size:
        defect = float("inf")
        logger.warning(f"Unpaired spectrum of i*Delta: {pos.size} positive vs {neg.size} negative")
    elif pos.size:
        defect = float(np.max(np.abs(pos - neg) / pos))

    order = np.argsort(values[positive])[::-1]
    lam = values[positive][order]
    vecs = vectors[:, positive][:, order]
    w = (vecs * lam) @ vecs.conj().T

    logger.debug(f"SJ modes: rank={rank}, {lam.size} positive modes, pairing defect {defect:.3g}")
    return ModeBasis(eigenvalues=lam, eigenvectors=vecs, w_matrix=w, rank=rank, pairing_defect=defect)


def pair(
    source: Union[PropagatorSet, ModeBasis],
    f: np.ndarray,
    g: np.ndarray,
    kind: PairingKind
) -> complex:
    """
    Smeared pairing f^dagger M g with M = Delta or W

    Args:
        source: PropagatorSet for Delta, ModeBasis for W
        f: Left vector (conjugated)
        g: Right vector
        kind: delta or w

    Raises:
        ValueError: On size mismatch or when source cannot serve kind
    """
    kind = PairingKind(kind)
    if kind == PairingKind.DELTA:
        if not isinstance(source, PropagatorSet):
            raise ValueError("Delta pairings need a PropagatorSet")
        M = source.delta
    else:
        if not isinstance(source, ModeBasis):
            raise ValueError("W pairings need a ModeBasis")
        M = source.w_matrix

    f = np.asarray(f).reshape(-1)
    g = np.asarray(g).reshape(-1)
    if f.shape[0] != M.shape[0] or g.shape[0] != M.shape[0]:
        raise ValueError(f"vectors must have length {M.shape[0]}")
    return complex(np.vdot(f, M @ g))


def pairing_context(
    props: PropagatorSet,
    modes: ModeBasis,
    f: np.ndarray,
    g: np.ndarray,
    h: np.ndarray
) -> PairingContext:
    """Collect every Delta- and W-pairing of a causal-set scenario"""
    d = lambda a, b: pair(props, a, b, PairingKind.DELTA).real
    w = lambda a, b: pair(modes, a, b, PairingKind.W)
    return PairingContext(
        d_fg=d(f, g),
        d_fh=d(f, h),
        d_gh=d(g, h),
        w_ff=max(w(f, f).real, 0.0),
        w_gg=max(w(g, g).real, 0.0),
        w_fg=w(f, g),
        w_gf=w(g, f),
    )


# Continuum 1+1 Minkowski

def _snap_null(d: np.ndarray) -> np.ndarray:
    """Zero out lightcone offsets that differ from 0 only by rounding"""
    return np.where(np.abs(d) <= _NULL_TOL, 0.0, d)


def retarded_kernel(dt: np.ndarray, dx: np.ndarray, mass: float) -> np.ndarray:
    """
    G+(x, y) as a function of dt = t_x - t_y, dx = x_x - x_y

    1/2 H(du) H(dv) J0(m tau) with du = dt - dx, dv = dt + dx and
    tau^2 = du dv; H(0) = 1/2 on the light cone.
    """
    du = _snap_null(dt - dx)
    dv = _snap_null(dt + dx)
    step = np.heaviside(du, 0.5) * np.heaviside(dv, 0.5)
    if mass == 0.0:
        return 0.5 * step
    tau = np.sqrt(np.clip(du * dv, 0.0, None))
    return 0.5 * step * special.j0(mass * tau)


def pauli_jordan_kernel(dt: np.ndarray, dx: np.ndarray, mass: float) -> np.ndarray:
    """Delta(x, y) = G+(y, x) - G+(x, y)"""
    return retarded_kernel(-dt, -dx, mass) - retarded_kernel(dt, dx, mass)


def _support(values: np.ndarray, grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    """(points (k, 2), weighted values (k,)) over the nonzero grid samples"""
    T, X = grid.mesh()
    weighted = values * grid.weights()
    mask = weighted != 0.0
    points = np.column_stack([T[mask], X[mask]])
    if 0 < points.shape[0] < _MIN_SUPPORT_POINTS:
        logger.warning(
            f"Test function covers only {points.shape[0]} grid points at spacing {grid.spacing}; "
            f"the pairing is poorly resolved"
        )
    return points, weighted[mask]


def _delta_block_apply(targets: np.ndarray, points: np.ndarray, weights: np.ndarray, mass: float) -> np.ndarray:
    """sum_j Delta(target_i, point_j) weights_j, evaluated in row blocks"""
    out = np.zeros(targets.shape[0])
    if points.shape[0] == 0:
        return out
    block = max(1, _KERNEL_BLOCK_ENTRIES // points.shape[0])
    for start in range(0, targets.shape[0], block):
        chunk = targets[start:start + block]
        dt = chunk[:, None, 0] - points[None, :, 0]
        dx = chunk[:, None, 1] - points[None, :, 1]
        out[start:start + block] = pauli_jordan_kernel(dt, dx, mass) @ weights
    return out


@timed_operation("continuum_delta_apply")
def continuum_delta_apply(f, mass: float, grid: Grid2D) -> np.ndarray:
    """
    The mode Delta f sampled on every grid point

    (Delta f)(x) = integral of Delta(x, y) f(y) dy with trapezoidal weights.
    """
    points, weights = _support(sample_on_grid(f, grid), grid)
    T, X = grid.mesh()
    targets = np.column_stack([T.ravel(), X.ravel()])
    return _delta_block_apply(targets, points, weights, mass).reshape(T.shape)


@timed_operation("continuum_delta_pairing")
def continuum_delta_pairing(f, g, mass: float, grid: Grid2D) -> float:
    """
    Delta(f, g) = double integral of f(x) Delta(x, y) g(y) on the grid

    Only the supports of f and g enter, so the cost is |supp f| x |supp g|.
    """
    if mass < 0:
        raise ValueError(f"mass must be non-negative, got {mass}")
    pf, wf = _support(sample_on_grid(f, grid), grid)
    pg, wg = _support(sample_on_grid(g, grid), grid)
    if pf.shape[0] == 0 or pg.shape[0] == 0:
        return 0.0
    return float(wf @ _delta_block_apply(pf, pg, wg, mass))


def richardson_delta_pairing(f, g, mass: float, grid: Grid2D, order: int = 2) -> RichardsonEstimate:
    """Delta(f, g) at spacing h and h/2 with Richardson extrapolation"""
    coarse = continuum_delta_pairing(f, g, mass, grid)
    fine = continuum_delta_pairing(f, g, mass, grid.refined())
    factor = 2.0 ** order
    extrapolated = (factor * fine - coarse) / (factor - 1.0)
    return RichardsonEstimate(
        coarse=coarse,
        fine=fine,
        extrapolated=extrapolated,
        difference=abs(fine - coarse),
        order=order,
    )


def _mass_shell_transform(points: np.ndarray, weights: np.ndarray, k: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """F(k) = sum_j w_j exp(i (omega t_j - k x_j))"""
    out = np.zeros(k.shape[0], dtype=complex)
    if points.shape[0] == 0:
        return out
    block = max(1, _KERNEL_BLOCK_ENTRIES // points.shape[0])
    for start in range(0, k.shape[0], block):
        kk = k[start:start + block]
        ww = omega[start:start + block]
        phase = ww[:, None] * points[None, :, 0] - kk[:, None] * points[None, :, 1]
        out[start:start + block] = np.exp(1j * phase) @ weights
    return out


@timed_operation("continuum_w_pairing")
def continuum_w_pairing(f, g, mass: float, grid: Grid2D, max_k_points: int = 20001) -> complex:
    """
    Vacuum two-point pairing of a massive field on 1+1 Minkowski

    W(f, g) = integral dk / (4 pi omega_k) conj(F[f](k)) F[g](k) with
    omega_k = sqrt(k^2 + m^2), k restricted to the grid's Nyquist band and
    integrated with Simpson's rule.

    Raises:
        UnsupportedCaseError: For mass 0 (infrared divergent)
    """
    if mass <= 0:
        raise UnsupportedCaseError("the massless vacuum two-point function is not defined in 1+1", mass=mass)

    pf, wf = _support(sample_on_grid(f, grid), grid)
    pg, wg = _support(sample_on_grid(g, grid), grid)
    if pf.shape[0] == 0 or pg.shape[0] == 0:
        return 0j

    everything = np.vstack([pf, pg])
    extent = float(np.max(np.abs(everything - everything.mean(axis=0)).sum(axis=1))) + grid.spacing
    k_max = np.pi / grid.spacing
    dk = np.pi / (4.0 * extent)
    n_k = int(min(max_k_points, 2 * np.ceil(k_max / dk) + 1))
    n_k += (n_k + 1) % 2
    k = np.linspace(-k_max, k_max, n_k)
    omega = np.sqrt(k * k + mass * mass)

    Ff = _mass_shell_transform(pf, wf, k, omega)
    Fg = _mass_shell_transform(pg, wg, k, omega)
    integrand = np.conj(Ff) * Fg / (4.0 * np.pi * omega)
    value = integrate.simpson(integrand.real, x=k) + 1j * integrate.simpson(integrand.imag, x=k)
    logger.debug(f"W pairing with {n_k} momenta, k_max={k_max:.4g}")
    return complex(value)


def continuum_pairing_context(f, g, h, mass: float, grid: Grid2D, tolerance: float = 1e-3) -> PairingContext:
    """PairingContext of a massive continuum scenario with a quadrature-level consistency tolerance"""
    w_ff = continuum_w_pairing(f, f, mass, grid)
    w_gg = continuum_w_pairing(g, g, mass, grid)
    return PairingContext(
        d_fg=continuum_delta_pairing(f, g, mass, grid),
        d_fh=continuum_delta_pairing(f, h, mass, grid),
        d_gh=continuum_delta_pairing(g, h, mass, grid),
        w_ff=max(w_ff.real, 0.0),
        w_gg=max(w_gg.real, 0.0),
        w_fg=continuum_w_pairing(f, g, mass, grid),
        w_gf=continuum_w_pairing(g, f, mass, grid),
        consistency_tol=tolerance,
    )
