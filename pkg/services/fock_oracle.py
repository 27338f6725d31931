"""
Fock Oracle Service - brute-force matrix checks of the signal formulas

Builds ladder matrices for the Sorkin-Johnston modes of a causal set, the
smeared field operators phi(f) = sum_k sqrt(lambda_k) (c_k a_k + c_k^* a_k^dagger)
with c_k = <v_k^*, f>, and evaluates chi(s) and the covariance identities
directly at a finite cutoff. Agreement is evidence at the cutoff, not proof.
"""

import logging
import math
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse

from config import settings
from models.fock import FieldSpectrum, FockSpace, TruncationRow, TruncationStudy, TwoPointRow
from models.kraus import KernelShape, KrausFamily, KrausVariant, L2KernelSpec
from models.propagators import ModeBasis
from models.resolutions import IntervalSet
from services.kraus import ideal_overlap_set
from services.resolutions import bin_labels
from utils.errors import DegenerateWidthError, QuadratureError, SizeGuardError
from utils.metrics import timed_operation
from utils.parallel import parallel_map


logger = logging.getLogger(__name__)

# Gauss-Legendre nodes per panel for custom L2 kernels
_GAMMA_NODES = 24
_GAMMA_PANELS = 64

# Quadrature-representation panels for ideal measurements; coherent states
# are negligible beyond _X_REACH from their centre
_X_NODES = 32
_X_PANEL = 0.25
_X_REACH = 10.0


def _ladder(n_max: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), offsets=1, format="csr")


@timed_operation("fock_build")
def build(modes: ModeBasis, n_max: int) -> FockSpace:
    """
    Truncated Fock space of the Sorkin-Johnston modes

    Args:
        modes: Positive spectral part of i*Delta
        n_max: Occupation cutoff per mode

    Returns:
        FockSpace with sparse ladders and the vacuum vector

    Raises:
        SizeGuardError: If the mode count, cutoff or dimension exceeds its guard
    """
    k = modes.n_modes
    if k > settings.FOCK_MAX_MODES:
        raise SizeGuardError(
            f"{k} modes exceed FOCK_MAX_MODES={settings.FOCK_MAX_MODES}",
            n_modes=k,
        )
    if n_max > settings.FOCK_MAX_CUTOFF:
        raise SizeGuardError(
            f"cutoff {n_max} exceeds FOCK_MAX_CUTOFF={settings.FOCK_MAX_CUTOFF}",
            n_max=n_max,
        )
    dim = (n_max + 1) ** k
    if dim > settings.FOCK_MAX_DIM:
        raise SizeGuardError(f"Fock dimension {dim} exceeds FOCK_MAX_DIM={settings.FOCK_MAX_DIM}", dim=dim)

    a = _ladder(n_max)
    eye = sparse.identity(n_max + 1, format="csr")
    annihilators = []
    for mode in range(k):
        op = sparse.identity(1, format="csr")
        for j in range(k):
            op = sparse.kron(op, a if j == mode else eye, format="csr")
        annihilators.append(op)

    occupations = np.array(list(np.ndindex(*([n_max + 1] * k))), dtype=np.int64).reshape(dim, k)
    vacuum = np.zeros(dim, dtype=complex)
    vacuum[0] = 1.0
    logger.debug(f"Fock space: {k} modes, cutoff {n_max}, dimension {dim}")
    return FockSpace(
        modes=modes,
        n_max=n_max,
        annihilators=tuple(annihilators),
        occupations=occupations,
        vacuum=vacuum,
    )


def field_operator(F: FockSpace, f: np.ndarray) -> np.ndarray:
    """Dense Hermitian matrix of phi(f) for a real test vector f"""
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape[0] != F.n_points:
        raise ValueError(f"f must have length {F.n_points}")
    coeffs = f @ F.modes.eigenvectors
    op = sparse.csr_matrix((F.dim, F.dim), dtype=complex)
    for lam, c, a in zip(F.modes.eigenvalues, coeffs, F.annihilators):
        op = op + math.sqrt(lam) * (c * a + np.conj(c) * a.T)
    return op.toarray()


def point_operator(F: FockSpace, x: int) -> np.ndarray:
    e = np.zeros(F.n_points)
    e[x] = 1.0
    return field_operator(F, e)


def field_spectrum(F: FockSpace, f: np.ndarray) -> FieldSpectrum:
    values, vectors = linalg.eigh(field_operator(F, f))
    return FieldSpectrum(values=values, vectors=vectors)


def delta_matrix(F: FockSpace) -> np.ndarray:
    """Pauli-Jordan matrix recovered from the modes, i Delta = W - W^T"""
    w = F.modes.w_matrix
    return (-1j * (w - w.T)).real


def commutator_defect(F: FockSpace, pairs: Optional[Iterable[Tuple[int, int]]] = None) -> float:
    """
    max |[phi_x, phi_y] - i Delta(x,y) I| over interior rows and columns

    States with any mode at the cutoff are excluded; there [a, a^dagger]
    is not the identity.
    """
    n = F.n_points
    pairs = list(pairs) if pairs is not None else [(x, y) for x in range(n) for y in range(x + 1, n)]
    delta = delta_matrix(F)
    keep = F.interior(1)
    ops = {}
    worst = 0.0
    for x, y in pairs:
        for p in (x, y):
            if p not in ops:
                ops[p] = point_operator(F, p)
        comm = ops[x] @ ops[y] - ops[y] @ ops[x]
        block = comm[np.ix_(keep, keep)] - 1j * delta[x, y] * np.eye(keep.size)
        worst = max(worst, float(np.max(np.abs(block))))
    return worst


def two_point_table(F: FockSpace, points: Optional[Sequence[int]] = None) -> List[TwoPointRow]:
    """<Omega| phi_x phi_y |Omega> against the Sorkin-Johnston W(x, y)"""
    points = list(range(F.n_points)) if points is None else list(points)
    kicked = {x: point_operator(F, x) @ F.vacuum for x in points}
    rows = []
    for x in points:
        for y in points:
            oracle = complex(np.vdot(kicked[x], kicked[y]))
            sj = complex(F.modes.w_matrix[x, y])
            rows.append(TwoPointRow(x=x, y=y, oracle=oracle, sj=sj, difference=abs(oracle - sj)))
    return rows


def projector_from_spectrum(spec: FieldSpectrum, bins: IntervalSet) -> np.ndarray:
    return spec.function(lambda lam: bins.contains(lam).astype(float))


def spectral_projector(F: FockSpace, f: np.ndarray, bins: IntervalSet) -> np.ndarray:
    """
    1_B(phi(f)): sum of eigenprojectors of phi(f) with eigenvalue in bins

    Hermitian and idempotent up to the accuracy of eigh.
    """
    return projector_from_spectrum(field_spectrum(F, f), bins)


def pvm_unitary_covariance_check(X: np.ndarray, U: np.ndarray, bins: IntervalSet) -> float:
    """
    max-abs of U^-1 1_B(X) U - 1_B(U^-1 X U)

    Exact at finite dimension, so the deviation is rounding only.
    """
    U_inv = U.conj().T
    vals, vecs = linalg.eigh(X)
    lhs = U_inv @ ((vecs * bins.contains(vals)) @ vecs.conj().T) @ U
    Y = U_inv @ X @ U
    vals_y, vecs_y = linalg.eigh(0.5 * (Y + Y.conj().T))
    rhs = (vecs_y * bins.contains(vals_y)) @ vecs_y.conj().T
    return float(np.max(np.abs(lhs - rhs)))


def _low_occupation_block(F: FockSpace, block_cutoff: Optional[int]) -> np.ndarray:
    cutoff = max(1, F.n_max // 4) if block_cutoff is None else block_cutoff
    return np.nonzero(np.all(F.occupations <= cutoff, axis=1))[0]


def operator_shift_deviation(
    F: FockSpace,
    f: np.ndarray,
    g: np.ndarray,
    zeta: Callable[[np.ndarray], np.ndarray],
    block_cutoff: Optional[int] = None
) -> float:
    """
    max-abs of exp(-i phi(g)) zeta(phi(f)) exp(i phi(g)) - zeta(phi(f) - Delta(f,g))
    on the states with at most block_cutoff quanta per mode

    Args:
        F: Fock space
        f, g: Real test vectors
        zeta: Vectorised function of the outcome, e.g. an indicator or exp(i s .)
        block_cutoff: Occupation bound of the compared block (default n_max // 4)
    """
    d_fg = float(np.asarray(f, dtype=float) @ delta_matrix(F) @ np.asarray(g, dtype=float))
    spec_f, spec_g = parallel_map(lambda v: field_spectrum(F, v), [f, g])
    U = spec_g.function(lambda lam: np.exp(1j * lam))
    lhs = U.conj().T @ spec_f.function(zeta) @ U
    rhs = spec_f.function(lambda lam: zeta(lam - d_fg))
    keep = _low_occupation_block(F, block_cutoff)
    return float(np.max(np.abs((lhs - rhs)[np.ix_(keep, keep)])))


def _custom_overlap(kernel: L2KernelSpec, lam: np.ndarray) -> np.ndarray:
    """M[i, j] = integral k(lam_i - gamma) conj(k(lam_j - gamma)) d gamma by Gauss-Legendre panels"""
    lo, hi = kernel.support
    k = np.vectorize(kernel.value, otypes=[complex])

    def integrate_panels(n_nodes: int) -> np.ndarray:
        nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
        edges = np.linspace(lam.min() - hi, lam.max() - lo, _GAMMA_PANELS + 1)
        total = np.zeros((lam.size, lam.size), dtype=complex)
        for a, b in zip(edges[:-1], edges[1:]):
            gamma = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            K = k(lam[:, None] - gamma[None, :])
            total += (K * (0.5 * (b - a) * weights)) @ K.conj().T
        return total

    coarse = integrate_panels(_GAMMA_NODES // 2)
    fine = integrate_panels(_GAMMA_NODES)
    residual = float(np.max(np.abs(fine - coarse)))
    if residual > settings.QUAD_MAX_RESIDUAL:
        raise QuadratureError("gamma quadrature of the Kraus factors did not converge", residual=residual)
    return fine


def channel_multiplier(fam: KrausFamily, lam: np.ndarray) -> np.ndarray:
    """
    Schur multiplier M with E(X) = V ((V^dagger X V) o M) V^dagger

    E(X) = integral kappa(phi(f), gamma) X kappa(phi(f), gamma)^dagger, written
    in the eigenbasis V of phi(f) with eigenvalues lam.
    """
    lam = np.asarray(lam, dtype=float)
    if fam.variant == KrausVariant.UNITARY_PHASE:
        phase = np.exp(1j * np.vectorize(fam.theta_value, otypes=[float])(lam))
        return phase[:, None] * phase.conj()[None, :]
    if fam.variant == KrausVariant.IDEAL:
        labels = bin_labels(fam.resolution, lam)
        return (labels[:, None] == labels[None, :]).astype(complex)
    kernel = fam.l2_kernel()
    d = lam[None, :] - lam[:, None]
    if kernel.shape == KernelShape.GAUSSIAN:
        return np.exp(-d * d / (8.0 * kernel.sigma ** 2)).astype(complex)
    if kernel.shape == KernelShape.BOX:
        return (np.clip(kernel.width - np.abs(d), 0.0, None) / kernel.width).astype(complex)
    return _custom_overlap(kernel, lam)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """
    Oscillator eigenfunctions <x|m> for m = 0..n_max, shape (n_max + 1, len(x))

    Three-term recurrence on the normalised functions, stable well past the
    classical turning points.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    H = np.zeros((n_max + 1, x.size))
    H[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        H[1] = math.sqrt(2.0) * x * H[0]
    for m in range(1, n_max):
        H[m + 1] = math.sqrt(2.0 / (m + 1)) * x * H[m] - math.sqrt(m / (m + 1)) * H[m - 1]
    return H


def mode_amplitudes(F: FockSpace, v: np.ndarray) -> np.ndarray:
    """alpha_k with phi(v) = sum_k alpha_k a_k + h.c."""
    v = np.asarray(v, dtype=float).reshape(-1)
    return np.sqrt(F.modes.eigenvalues) * (v @ F.modes.eigenvectors)


def mode_rotation(alpha: np.ndarray) -> np.ndarray:
    """
    Unitary Q with alpha @ Q = (|alpha|, 0, ..., 0)

    The rotated modes b = Q^dagger a are a passive change of basis: the vacuum
    is unchanged and phi(v) = sum_j (alpha_v @ Q)_j b_j + h.c.
    """
    e = np.asarray(alpha, dtype=complex) / np.linalg.norm(alpha)
    stacked = np.column_stack([e.conj(), np.eye(e.size, dtype=complex)])
    Q, _ = np.linalg.qr(stacked, mode="complete")
    Q[:, 0] = e.conj()
    return Q


def _panel_integral(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> complex:
    nodes, weights = np.polynomial.legendre.leggauss(_X_NODES)
    n_panels = max(1, math.ceil((hi - lo) / _X_PANEL))
    edges = np.linspace(lo, hi, n_panels + 1)
    total = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total += 0.5 * (b - a) * complex(np.sum(weights * fn(x)))
    return total


def ideal_chi_scan(
    F: FockSpace,
    f: np.ndarray,
    h: np.ndarray,
    g: np.ndarray,
    fam: KrausFamily,
    s_grid: Sequence[float],
    t: float
) -> np.ndarray:
    """
    chi(s) for an ideal measurement with the bins applied to the continuous
    spectrum of phi(f)

    The modes are rotated so that phi(f) = sqrt(2) |alpha_f| x on the first
    one. Kicked states are prepared in the truncated Fock space of each
    rotated mode; on the measured mode they are carried to the quadrature
    representation, where sum_n P_n exp(i t phi(g)) P_n is a translate, a
    phase and the indicator of the overlap set of the bins.

    Raises:
        DegenerateWidthError: If f carries no mode weight
    """
    alpha_f = mode_amplitudes(F, f)
    norm = float(np.linalg.norm(alpha_f))
    if norm <= 0.0:
        raise DegenerateWidthError("phi(f) has no mode weight", w_ff=norm * norm)
    Q = mode_rotation(alpha_f)
    amp_h = mode_amplitudes(F, h) @ Q
    amp_g = mode_amplitudes(F, g) @ Q

    n = F.n_max
    a = _ladder(n).toarray()
    X = (a + a.T) / math.sqrt(2.0)
    vacuum = np.zeros(n + 1, dtype=complex)
    vacuum[0] = 1.0

    def generator(amp: complex) -> np.ndarray:
        return amp * a + np.conj(amp) * a.T

    # exp(i t phi(g)) on the measured mode is exp(i (k x + c p))
    beta = complex(amp_g[0])
    k = math.sqrt(2.0) * t * beta.real
    c = -math.sqrt(2.0) * t * beta.imag
    scale = math.sqrt(2.0) * norm
    shift = scale * c
    bob_rest = [linalg.expm(1j * t * generator(b)) for b in amp_g[1:]]

    def at(s: float) -> complex:
        spectator = 1.0 + 0j
        for amp, U in zip(amp_h[1:], bob_rest):
            psi = linalg.expm(-1j * s * generator(amp)) @ vacuum
            spectator *= complex(np.vdot(psi, U @ psi))

        coeffs = linalg.expm(-1j * s * generator(complex(amp_h[0]))) @ vacuum
        centre = float(np.vdot(coeffs, X @ coeffs).real)
        reach = _X_REACH + abs(c)
        window = (scale * (centre - reach), scale * (centre + reach))

        def integrand(x: np.ndarray) -> np.ndarray:
            here = coeffs @ hermite_functions(n, x)
            there = coeffs @ hermite_functions(n, x + c)
            return np.conj(here) * np.exp(1j * k * x) * there

        measured = sum(
            (_panel_integral(integrand, lo / scale, hi / scale)
             for lo, hi in ideal_overlap_set(fam, shift, window).intervals),
            0j,
        )
        return complex(np.exp(0.5j * k * c) * measured * spectator)

    return np.array(parallel_map(at, [float(s) for s in s_grid]), dtype=complex)


@timed_operation("chi_oracle")
def chi_oracle_scan(
    F: FockSpace,
    f: np.ndarray,
    h: np.ndarray,
    g: np.ndarray,
    fam: KrausFamily,
    s_grid: Sequence[float],
    t: float,
    discrete_projectors: bool = False
) -> np.ndarray:
    """
    chi(s) = <Omega| exp(i s phi(h)) E(exp(i t phi(g))) exp(-i s phi(h)) |Omega>
    for every s, sharing the t-dependent part

    Ideal measurements go through ideal_chi_scan unless discrete_projectors
    is set; then the bins are applied to the eigenvalues of the truncated
    phi(f), which only resolves them to the spacing of its spectrum.

    Raises:
        QuadratureError: If a custom kernel's gamma quadrature fails
    """
    if fam.variant == KrausVariant.IDEAL and not discrete_projectors:
        return ideal_chi_scan(F, f, h, g, fam, s_grid, t)
    spec_f, spec_g, spec_h = parallel_map(lambda v: field_spectrum(F, v), [f, g, h])
    U_g = spec_g.function(lambda lam: np.exp(1j * t * lam))
    V = spec_f.vectors
    updated = (V.conj().T @ U_g @ V) * channel_multiplier(fam, spec_f.values)

    def at(s: float) -> complex:
        psi = V.conj().T @ spec_h.apply(lambda lam: np.exp(-1j * s * lam), F.vacuum)
        return complex(np.vdot(psi, updated @ psi))

    return np.array(parallel_map(at, [float(s) for s in s_grid]), dtype=complex)


def chi_oracle(
    F: FockSpace,
    f: np.ndarray,
    h: np.ndarray,
    g: np.ndarray,
    fam: KrausFamily,
    s: float,
    t: float
) -> complex:
    """Bob's signal chi(s) by direct matrix evaluation"""
    return complex(chi_oracle_scan(F, f, h, g, fam, [s], t)[0])


@timed_operation("truncation_study")
def truncation_study(
    modes: ModeBasis,
    f: np.ndarray,
    h: np.ndarray,
    g: np.ndarray,
    fam: KrausFamily,
    s: float,
    t: float,
    cutoffs: Sequence[int] = (20, 30, 40),
    step: int = 10
) -> TruncationStudy:
    """
    |chi at n_max - chi at n_max + step| for each cutoff

    The largest cutoff plus step must fit the size guards.
    """
    levels = sorted(set(int(c) for c in cutoffs))
    needed = sorted(set(levels) | {n + step for n in levels})
    values = {n: chi_oracle(build(modes, n), f, h, g, fam, s, t) for n in needed}

    rows = [
        TruncationRow(n_max=n, chi=values[n], change=abs(values[n] - values[n + step]))
        for n in levels
    ]
    changes = [r.change for r in rows]
    monotone = all(b <= a for a, b in zip(changes, changes[1:]))
    logger.info(f"Truncation study for {fam.describe()}: changes {[f'{c:.3g}' for c in changes]}")
    return TruncationStudy(rows=rows, monotone=monotone)
