"""
Resolutions Service - bin enumeration, the self-overlap sets R_t and their measure
Implements the non-triviality search over shifts t and continuity checks
"""

import logging
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from config import settings
from models.resolutions import Interval, IntervalSet, Resolution, ResolutionKind
from utils.errors import LiteralParseError, NontrivialitySearchError


logger = logging.getLogger(__name__)

Window = Tuple[float, float]

_INTERVAL_RE = re.compile(r"^[\[\(]\s*([^,]+?)\s*,\s*([^\)\]]+?)\s*[\)\]]$")


class NontrivialityResult(BaseModel):
    """Outcome of the search for a shift with a non-trivial R_t"""
    t_star: float = Field(..., description="Shift at which 0 < measure(D & R_t) < measure(D)")
    measure_ratio: float = Field(..., gt=0.0, lt=1.0, description="measure(D & R_t*) / measure(D)")
    scanned_points: int = Field(..., ge=1)


def _check_window(window: Window) -> Window:
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError(f"window must be a bounded interval with lo < hi, got {window}")
    return lo, hi


@lru_cache(maxsize=None)
def svc_cell(depth: int, exact: bool = False) -> Tuple[tuple, tuple]:
    """
    Fat Cantor remainder and removed gaps inside [0, 1) at a finite depth

    Step k removes the middle [m - r/2, m + r/2) of every remaining piece,
    with r = 4^-k. Endpoints are dyadic, so the float form is exact.

    Returns:
        (remainder pieces, gap pieces) as tuples of (a, b) pairs
    """
    pieces = [(Fraction(0), Fraction(1))]
    gaps = []
    for k in range(1, depth + 1):
        r = Fraction(1, 4 ** k)
        next_pieces = []
        for a, b in pieces:
            m = (a + b) / 2
            next_pieces.append((a, m - r / 2))
            next_pieces.append((m + r / 2, b))
            gaps.append((m - r / 2, m + r / 2))
        pieces = next_pieces
    gaps.sort()
    if exact:
        return tuple(pieces), tuple(gaps)
    return (
        tuple((float(a), float(b)) for a, b in pieces),
        tuple((float(a), float(b)) for a, b in gaps),
    )


def _clip(pairs, lo: float, hi: float) -> List[Interval]:
    clipped = []
    for a, b in pairs:
        a2, b2 = max(a, lo), min(b, hi)
        if a2 < b2:
            clipped.append((a2, b2))
    return clipped


def _bin_pairs(res: Resolution, lo: float, hi: float) -> List[List[Interval]]:
    """Bins meeting [lo, hi), each clipped to the window, as raw interval lists"""
    bins: List[List[Interval]] = []
    if res.kind == ResolutionKind.UNIFORM:
        w, o = res.width, res.offset
        first = math.floor((lo - o) / w)
        last = math.ceil((hi - o) / w)
        for n in range(first, last + 1):
            piece = _clip([(o + n * w, o + (n + 1) * w)], lo, hi)
            if piece:
                bins.append(piece)
    elif res.kind == ResolutionKind.THRESHOLD:
        edges = [-math.inf, *res.cuts, math.inf]
        for a, b in zip(edges[:-1], edges[1:]):
            piece = _clip([(a, b)], lo, hi)
            if piece:
                bins.append(piece)
    elif res.kind == ResolutionKind.SVC:
        remainder, gaps = svc_cell(res.depth)
        for n in range(math.floor(lo), math.ceil(hi)):
            for cell in (remainder, gaps):
                piece = _clip([(a + n, b + n) for a, b in cell], lo, hi)
                if piece:
                    bins.append(piece)
    else:
        for b in res.bins:
            piece = _clip(b.intervals, lo, hi)
            if piece:
                bins.append(piece)
    return bins


def enumerate_bins(res: Resolution, window: Window) -> List[IntervalSet]:
    """
    Bins of a resolution that meet the window, clipped to it

    Args:
        res: Resolution to enumerate
        window: Bounded (lo, hi)

    Returns:
        One IntervalSet per bin, in increasing order of first point
    """
    lo, hi = _check_window(window)
    return [IntervalSet(intervals=tuple(p)) for p in _bin_pairs(res, lo, hi)]


def bin_labels(res: Resolution, values) -> np.ndarray:
    """
    Integer label of the bin containing each value

    Two values share a label iff they lie in the same bin.
    """
    x = np.asarray(values, dtype=float)
    if res.kind == ResolutionKind.UNIFORM:
        return np.floor((x - res.offset) / res.width).astype(np.int64)
    if res.kind == ResolutionKind.THRESHOLD:
        return np.searchsorted(np.asarray(res.cuts), x, side="right").astype(np.int64)
    if res.kind == ResolutionKind.SVC:
        _, gaps = svc_cell(res.depth)
        cell = np.floor(x)
        frac = x - cell
        starts = np.array([a for a, _ in gaps])
        ends = np.array([b for _, b in gaps])
        idx = np.searchsorted(starts, frac, side="right") - 1
        in_gap = (idx >= 0) & (frac < ends[np.clip(idx, 0, None)])
        return (2 * cell.astype(np.int64) + in_gap).astype(np.int64)
    labels = np.full(x.shape, -1, dtype=np.int64)
    for i, b in enumerate(res.bins):
        labels[b.contains(x)] = i
    return labels


def r_t(res: Resolution, t: float, window: Window) -> IntervalSet:
    """
    D & R_t where R_t is the union over bins of B & (B + t)

    Only bins meeting D or D - t contribute, so the bins are clipped to
    the hull of both before shifting.
    """
    lo, hi = _check_window(window)
    hull = (min(lo, lo - t), max(hi, hi - t))
    pieces: List[Interval] = []
    for bin_pairs in _bin_pairs(res, *hull):
        shifted = [(a + t, b + t) for a, b in bin_pairs]
        for a, b in bin_pairs:
            for c, d in shifted:
                x, y = max(a, c, lo), min(b, d, hi)
                if x < y:
                    pieces.append((x, y))
    return IntervalSet(intervals=tuple(pieces))


def measure_profile(res: Resolution, window: Window, ts: Sequence[float]) -> np.ndarray:
    """
    L(t) = measure(D & R_t) evaluated for many shifts at once

    Each pair of pieces (I, J) from the same bin contributes the piecewise
    linear overlap |I & (J + t) & D|, summed with numpy over all t.
    """
    lo, hi = _check_window(window)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    reach = float(np.max(np.abs(ts))) if ts.size else 0.0
    total = np.zeros_like(ts)
    for bin_pairs in _bin_pairs(res, lo - reach, hi + reach):
        for a, b in bin_pairs:
            a_d, b_d = max(a, lo), min(b, hi)
            if a_d >= b_d:
                continue
            for c, d in bin_pairs:
                left = np.maximum(a_d, c + ts)
                right = np.minimum(b_d, d + ts)
                total += np.clip(right - left, 0.0, None)
    return total


def bin_edges(res: Resolution, window: Window) -> np.ndarray:
    """
    Finite bin boundaries that matter for the window, sorted

    Periodic families (uniform, svc) contribute the edges of the periods
    touching the window plus one period on each side; threshold and
    explicit resolutions contribute all of theirs.
    """
    lo, hi = _check_window(window)
    if res.kind == ResolutionKind.UNIFORM:
        w, o = res.width, res.offset
        ns = np.arange(math.floor((lo - o) / w) - 1, math.ceil((hi - o) / w) + 2)
        edges = o + ns * w
    elif res.kind == ResolutionKind.THRESHOLD:
        edges = np.asarray(res.cuts, dtype=float)
    elif res.kind == ResolutionKind.SVC:
        _, gaps = svc_cell(res.depth)
        cell = np.array([0.0, *[p for gap in gaps for p in gap]])
        ns = np.arange(math.floor(lo) - 1, math.ceil(hi) + 2)
        edges = (ns[:, None] + cell[None, :]).ravel()
    else:
        edges = np.array([p for b in res.bins for p in b.endpoints()], dtype=float)
    edges = edges[np.isfinite(edges)]
    return np.unique(edges)


def nearest_edges(res: Resolution, window: Window) -> Tuple[Optional[float], Optional[float]]:
    """
    (largest edge below hi, smallest edge above lo)

    Either side is None when the resolution has no edge there.
    """
    lo, hi = _check_window(window)
    edges = bin_edges(res, (lo, hi))
    left = edges[edges < hi]
    right = edges[edges > lo]
    return (
        float(left[-1]) if left.size else None,
        float(right[0]) if right.size else None,
    )


def _search_direction(res: Resolution, lo: float, hi: float, start: float, ts: np.ndarray):
    """
    Walk t away from a shift `start` with L(start) = measure(D) and bisect
    toward measure(D) / 2 at the first scan point that reaches it
    """
    total = hi - lo
    half = total / 2.0
    profile = measure_profile(res, (lo, hi), ts)
    below = np.nonzero(profile <= half)[0]
    if below.size:
        i = int(below[0])
        t_far = float(ts[i])
        t_near = float(ts[i - 1]) if i > 0 else start
        for _ in range(settings.NONTRIVIALITY_BISECTION_STEPS):
            mid = 0.5 * (t_near + t_far)
            if measure_profile(res, (lo, hi), [mid])[0] <= half:
                t_far = mid
            else:
                t_near = mid
        ratio = float(measure_profile(res, (lo, hi), [t_far])[0]) / total
        if 0.0 < ratio < 1.0:
            return t_far, ratio, profile
    return None, None, profile


def nontriviality_search(res: Resolution, window: Window) -> NontrivialityResult:
    """
    Find a shift t* with 0 < measure(D & R_t*) < measure(D)

    Positive shifts are tried first, then negative ones. Each direction
    starts where the nearest bin edge on that side first reaches D, scans
    a span of twice the widest bin meeting D, and bisects the continuous
    L(t) toward measure(D) / 2.

    Raises:
        NontrivialitySearchError: If the scan finds no non-trivial shift
    """
    lo, hi = _check_window(window)
    total = hi - lo
    widths = [sum(b - a for a, b in p) for p in _bin_pairs(res, lo, hi)]
    span = 2.0 * max(widths)
    n_scan = settings.NONTRIVIALITY_SCAN_POINTS
    steps = np.linspace(span / n_scan, span, n_scan)
    left, right = nearest_edges(res, (lo, hi))

    scanned_ts, scanned_profile = [], []
    directions = []
    if left is not None:
        directions.append((max(0.0, lo - left), 1.0))
    if right is not None:
        directions.append((-max(0.0, right - hi), -1.0))
    for start, sign in directions:
        ts = start + sign * steps
        t_star, ratio, profile = _search_direction(res, lo, hi, start, ts)
        if t_star is not None:
            logger.debug(f"Non-trivial shift for {res.describe()}: t*={t_star:.6g}, ratio={ratio:.6g}")
            return NontrivialityResult(t_star=t_star, measure_ratio=ratio, scanned_points=len(scanned_ts) + n_scan)
        scanned_ts.extend(ts.tolist())
        scanned_profile.extend(profile.tolist())

    ts = np.asarray(scanned_ts)
    ratios = np.asarray(scanned_profile) / total
    eps = 1e-12
    usable = np.nonzero((ratios > eps) & (ratios < 1.0 - eps))[0]
    if usable.size:
        j = int(usable[np.argmin(np.abs(ratios[usable] - 0.5))])
        return NontrivialityResult(t_star=float(ts[j]), measure_ratio=float(ratios[j]), scanned_points=ts.size)

    stride = max(1, n_scan // 100)
    sampled = [(float(t), float(v)) for t, v in zip(ts[::stride], ratios[::stride] * total)]
    raise NontrivialitySearchError(
        f"no non-trivial R_t found for {res.describe()} on window [{lo}, {hi})",
        profile=sampled,
    )


def continuity_jumps(res: Resolution, window: Window, t: float, deltas: Sequence[float]) -> List[float]:
    """|L(t + delta) - L(t)| for each offset"""
    values = measure_profile(res, window, [t, *[t + d for d in deltas]])
    return [float(abs(v - values[0])) for v in values[1:]]


def _parse_number(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "+inf", "infinity"):
        return math.inf
    if text in ("-inf", "-infinity"):
        return -math.inf
    return float(text)


def parse_key_values(body: str) -> dict:
    values = {}
    for item in filter(None, (p.strip() for p in body.split(","))):
        if "=" not in item:
            raise LiteralParseError(f"expected key=value, got '{item}'")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def parse_resolution(literal: str) -> Resolution:
    """
    Parse the resolution literal syntax

    uniform:w=1,o=0 | threshold:0[,c2...] | svc:d=3 | explicit:[0,1);[1,inf)...
    Pieces of one explicit bin are joined with '|'.

    Raises:
        LiteralParseError: On malformed literals or invalid resolutions
    """
    kind, _, body = literal.strip().partition(":")
    try:
        if kind == "uniform":
            kv = parse_key_values(body)
            return Resolution(kind=ResolutionKind.UNIFORM, width=float(kv["w"]), offset=float(kv.get("o", 0.0)))
        if kind == "threshold":
            cuts = tuple(_parse_number(c) for c in body.split(",") if c.strip())
            return Resolution(kind=ResolutionKind.THRESHOLD, cuts=cuts)
        if kind == "svc":
            kv = parse_key_values(body)
            return Resolution(kind=ResolutionKind.SVC, depth=int(kv["d"]))
        if kind == "explicit":
            bins = []
            for bin_text in filter(None, (b.strip() for b in body.split(";"))):
                pieces = []
                for piece in bin_text.split("|"):
                    match = _INTERVAL_RE.match(piece.strip())
                    if not match:
                        raise LiteralParseError(f"malformed interval '{piece}'")
                    pieces.append((_parse_number(match.group(1)), _parse_number(match.group(2))))
                bins.append(IntervalSet(intervals=tuple(pieces)))
            return Resolution(kind=ResolutionKind.EXPLICIT, bins=tuple(bins))
    except LiteralParseError:
        raise
    except (KeyError, ValueError) as e:
        raise LiteralParseError(f"invalid resolution literal '{literal}': {e}") from e
    raise LiteralParseError(f"unknown resolution family '{kind}' in '{literal}'")


def format_resolution(res: Resolution) -> str:
    return res.describe()
