"""
Interval sets and resolutions of the real line
Bins are finite unions of half-open intervals [a, b)
"""

import math
from enum import Enum
from typing import Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


Interval = Tuple[float, float]


def _canonical(pairs: Iterable[Interval]) -> Tuple[Interval, ...]:
    """Sort, drop empty pieces and merge overlapping or touching intervals"""
    cleaned = sorted((float(a), float(b)) for a, b in pairs if float(a) < float(b))
    merged: List[List[float]] = []
    for a, b in cleaned:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


class IntervalSet(BaseModel):
    """Finite union of disjoint half-open intervals, always canonical"""
    intervals: Tuple[Interval, ...] = Field(
        default=(),
        description="Sorted, disjoint, non-degenerate [a, b) pieces; endpoints may be +/-inf"
    )

    model_config = {
        "frozen": True,
        "json_schema_extra": {
            "examples": [
                {"intervals": [[0.0, 1.0], [2.0, 3.5]]}
            ]
        }
    }

    @field_validator('intervals', mode='before')
    @classmethod
    def canonicalize(cls, v):
        """Canonical form: sorted, merged, no empty intervals"""
        for a, b in v:
            if math.isnan(float(a)) or math.isnan(float(b)):
                raise ValueError("interval endpoints must not be NaN")
        return _canonical(v)

    @classmethod
    def of(cls, *pairs: Interval) -> "IntervalSet":
        return cls(intervals=tuple(pairs))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(intervals=())

    @classmethod
    def real_line(cls) -> "IntervalSet":
        return cls(intervals=((-math.inf, math.inf),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> float:
        """Lebesgue measure (sum of lengths)"""
        return float(sum(b - a for a, b in self.intervals))

    def endpoints(self) -> List[float]:
        """All finite endpoints, sorted"""
        points = [p for pair in self.intervals for p in pair if math.isfinite(p)]
        return sorted(points)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(intervals=self.intervals + other.intervals)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        """Two-pointer sweep over both canonical lists"""
        result = []
        i = j = 0
        left, right = self.intervals, other.intervals
        while i < len(left) and j < len(right):
            a = max(left[i][0], right[j][0])
            b = min(left[i][1], right[j][1])
            if a < b:
                result.append((a, b))
            if left[i][1] < right[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(intervals=tuple(result))

    def complement_within(self, lo: float, hi: float) -> "IntervalSet":
        """[lo, hi) minus this set"""
        gaps = []
        cursor = lo
        for a, b in self.intervals:
            if b <= lo or a >= hi:
                continue
            if a > cursor:
                gaps.append((cursor, min(a, hi)))
            cursor = max(cursor, b)
        if cursor < hi:
            gaps.append((cursor, hi))
        return IntervalSet(intervals=tuple(gaps))

    def shifted(self, t: float) -> "IntervalSet":
        """Translate every interval by t"""
        return IntervalSet(intervals=tuple((a + t, b + t) for a, b in self.intervals))

    def contains(self, x) -> np.ndarray:
        """Vectorised membership test honouring the [a, b) convention"""
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (x >= a) & (x < b)
        return inside

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return "|".join(f"[{a:g},{b:g})" for a, b in self.intervals)


class ResolutionKind(str, Enum):
    """Supported resolution families"""
    UNIFORM = "uniform"
    THRESHOLD = "threshold"
    SVC = "svc"
    EXPLICIT = "explicit"


class Resolution(BaseModel):
    """
    Disjoint cover of the real line by positive-measure bins

    uniform:   [offset + n*width, offset + (n+1)*width) for every integer n
    threshold: (-inf, c1), [c1, c2), ..., [ck, inf)
    svc:       per unit cell [n, n+1) the depth-d fat Cantor remainder and its gaps
    explicit:  a finite list of interval sets
    """
    kind: ResolutionKind = Field(..., description="Resolution family")
    width: Optional[float] = Field(None, gt=0, description="Bin width (uniform)")
    offset: float = Field(0.0, description="Bin offset (uniform)")
    cuts: Tuple[float, ...] = Field(default=(), description="Sorted cut points (threshold)")
    depth: Optional[int] = Field(None, ge=1, le=12, description="Construction depth (svc)")
    bins: Tuple[IntervalSet, ...] = Field(default=(), description="Explicit bins")

    model_config = {
        "frozen": True,
        "json_schema_extra": {
            "examples": [
                {"kind": "uniform", "width": 1.0, "offset": 0.0},
                {"kind": "threshold", "cuts": [0.0]},
                {"kind": "svc", "depth": 3}
            ]
        }
    }

    @model_validator(mode='after')
    def check_cover(self):
        """Bins must be disjoint, of positive measure, at least two, and cover R"""
        if self.kind == ResolutionKind.UNIFORM:
            if self.width is None:
                raise ValueError("uniform resolution needs a width")
        elif self.kind == ResolutionKind.THRESHOLD:
            if not self.cuts:
                raise ValueError("threshold resolution needs at least one cut")
            if any(not math.isfinite(c) for c in self.cuts):
                raise ValueError("threshold cuts must be finite")
            if list(self.cuts) != sorted(set(self.cuts)):
                raise ValueError("threshold cuts must be strictly increasing")
        elif self.kind == ResolutionKind.SVC:
            if self.depth is None:
                raise ValueError("svc resolution needs a depth")
        elif self.kind == ResolutionKind.EXPLICIT:
            if len(self.bins) < 2:
                raise ValueError("a resolution needs at least two bins")
            total = IntervalSet.empty()
            for b in self.bins:
                if b.measure() <= 0:
                    raise ValueError(f"bin {b} has zero measure")
                if not total.intersection(b).is_empty:
                    raise ValueError(f"bin {b} overlaps an earlier bin")
                total = total.union(b)
            if total.intervals != ((-math.inf, math.inf),):
                raise ValueError("explicit bins must cover the real line")
        return self

    def describe(self) -> str:
        """Literal form, e.g. uniform:w=1,o=0"""
        if self.kind == ResolutionKind.UNIFORM:
            return f"uniform:w={self.width!r},o={self.offset!r}"
        if self.kind == ResolutionKind.THRESHOLD:
            return "threshold:" + ",".join(repr(c) for c in self.cuts)
        if self.kind == ResolutionKind.SVC:
            return f"svc:d={self.depth}"
        return "explicit:" + ";".join(
            "|".join(f"[{a!r},{b!r})" for a, b in b_.intervals) for b_ in self.bins
        )
