"""
Exact arc-set arithmetic on the circle

An ``ArcSet`` is a closed subset of the circle R/2πZ stored as a finite union of
closed arcs inside one fundamental domain [0, 2π/fold] and repeated ``fold`` times.
Images of lattices and periodic bands under z ↦ 2⁻ⁿz stay compact in this form
even when they consist of 2ⁿ pieces.
"""

import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np


TWO_PI = 2.0 * math.pi
ARC_TOL = 1e-12
MAX_EXPANSION = 1 << 20
MAX_DENOMINATOR = 10 ** 4
RATIONAL_TOL = 1e-12

Interval = Tuple[float, float]


def _reduce(value: float, period: float) -> float:
    r = math.fmod(value, period)
    if r < 0:
        r += period
    return 0.0 if r >= period else r


def _merge(intervals: List[Interval], tol: float) -> List[Interval]:
    if not intervals:
        return []
    intervals = sorted(intervals)
    merged = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


class ArcSet:
    """Closed rotation-periodic union of arcs"""

    __slots__ = ('fold', 'base')

    def __init__(self, intervals: Iterable[Interval] = (), fold: int = 1):
        if fold < 1:
            raise ValueError(f"fold must be positive, got {fold}")
        self.fold = int(fold)
        self.base: Tuple[Interval, ...] = tuple(self._normalize(list(intervals), self.period))

    # construction

    @property
    def period(self) -> float:
        return TWO_PI / self.fold

    @staticmethod
    def _normalize(intervals: List[Interval], w: float) -> List[Interval]:
        pieces: List[Interval] = []
        for lo, hi in intervals:
            if hi < lo:
                raise ValueError(f"arc with hi < lo: ({lo}, {hi})")
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi - lo >= w - ARC_TOL:
                return [(0.0, w)]
            start = _reduce(lo, w)
            end = start + (hi - lo)
            if end > w:
                pieces.append((start, w))
                pieces.append((0.0, min(end - w, w)))
            else:
                pieces.append((start, end))
        merged = _merge(pieces, ARC_TOL)
        if len(merged) == 1 and merged[0][0] <= ARC_TOL and merged[0][1] >= w - ARC_TOL:
            return [(0.0, w)]
        return merged

    @classmethod
    def full(cls, fold: int = 1) -> 'ArcSet':
        return cls([(0.0, TWO_PI / fold)], fold)

    @classmethod
    def empty(cls) -> 'ArcSet':
        return cls()

    @classmethod
    def point(cls, theta: float) -> 'ArcSet':
        return cls([(theta, theta)])

    # predicates

    @property
    def is_empty(self) -> bool:
        return not self.base

    @property
    def is_full(self) -> bool:
        return len(self.base) == 1 and self.base[0][0] <= ARC_TOL and self.base[0][1] >= self.period - ARC_TOL

    @property
    def is_discrete(self) -> bool:
        return bool(self.base) and all(hi - lo <= ARC_TOL for lo, hi in self.base)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArcSet):
            return NotImplemented
        return self.covers(other) and other.covers(self)

    def __repr__(self) -> str:
        return f"ArcSet(fold={self.fold}, base={list(self.base)})"

    def contains(self, theta: float, tol: float = ARC_TOL) -> bool:
        if self.is_empty:
            return False
        return self.distance(theta) <= tol

    def distance(self, theta: float) -> float:
        """Angular distance from ``theta`` to the set"""
        if self.is_empty:
            return math.inf
        w = self.period
        phi = _reduce(theta, w)
        best = math.inf
        for lo, hi in self.base:
            for shift in (-w, 0.0, w):
                p = phi + shift
                if lo <= p <= hi:
                    return 0.0
                best = min(best, abs(p - lo), abs(p - hi))
        return best

    def covers(self, other: 'ArcSet', tol: float = ARC_TOL) -> bool:
        """True if ``other`` is contained in this set up to ``tol``"""
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        g = math.gcd(self.fold, other.fold)
        mine = self._refold(g)
        theirs = other._refold(g)
        merged = _merge(list(mine), tol)
        return all(
            any(a - tol <= lo and hi <= b + tol for a, b in merged)
            for lo, hi in theirs
        )

    # algebra

    def _refold(self, g: int) -> List[Interval]:
        """Base intervals expressed in the fundamental domain of fold ``g`` (g divides fold)"""
        copies = self.fold // g
        if copies * len(self.base) > MAX_EXPANSION:
            raise ValueError(f"arc expansion too large ({copies} copies)")
        w = self.period
        return [(lo + j * w, hi + j * w) for j in range(copies) for lo, hi in self.base]

    def union(self, other: 'ArcSet') -> 'ArcSet':
        if other.is_empty:
            return self
        if self.is_empty:
            return other
        g = math.gcd(self.fold, other.fold)
        return ArcSet(self._refold(g) + other._refold(g), g)

    def intersect(self, other: 'ArcSet') -> 'ArcSet':
        if self.is_empty or other.is_empty:
            return ArcSet.empty()
        g = math.gcd(self.fold, other.fold)
        a = sorted(self._refold(g))
        b = sorted(other._refold(g))
        out: List[Interval] = []
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi + ARC_TOL:
                out.append((lo, max(lo, hi)))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return ArcSet(out, g)

    def rotate(self, phi: float) -> 'ArcSet':
        w = self.period
        shift = _reduce(phi, w)
        if shift <= ARC_TOL or w - shift <= ARC_TOL:
            return self
        return ArcSet([(lo + shift, hi + shift) for lo, hi in self.base], self.fold)

    def antipodal(self) -> 'ArcSet':
        """Points θ of the set with θ + π also in the set"""
        return self.intersect(self.rotate(math.pi))

    def is_symmetric(self, tol: float = ARC_TOL) -> bool:
        """Invariance under rotation by π"""
        rotated = self.rotate(math.pi)
        return self.covers(rotated, tol) and rotated.covers(self, tol)

    # measurements

    def total_length(self) -> float:
        return self.fold * sum(hi - lo for lo, hi in self.base)

    def _domain_components(self) -> List[Interval]:
        """Components inside one fundamental domain, merged across its seam"""
        if self.is_empty:
            return []
        if self.is_full:
            return [(0.0, self.period)]
        parts = list(self.base)
        w = self.period
        if len(parts) > 1 and parts[0][0] <= ARC_TOL and parts[-1][1] >= w - ARC_TOL:
            first = parts.pop(0)
            last = parts.pop()
            parts.append((last[0], first[1] + w))
        return parts

    def component_lengths(self) -> List[float]:
        """Lengths of the connected components (one representative per rotation class)"""
        if self.is_full:
            return [TWO_PI]
        return [hi - lo for lo, hi in self._domain_components()]

    def max_component_length(self) -> float:
        lengths = self.component_lengths()
        return max(lengths) if lengths else 0.0

    def components(self) -> List[Tuple[float, float]]:
        """All components as (start, length), start in [0, 2π)"""
        if self.is_empty:
            return []
        if self.is_full:
            return [(0.0, TWO_PI)]
        w = self.period
        if self.fold * len(self.base) > MAX_EXPANSION:
            raise ValueError("too many components to enumerate")
        out = []
        for j in range(self.fold):
            for lo, hi in self._domain_components():
                start = lo + j * w
                out.append((start % TWO_PI if start >= TWO_PI else start, hi - lo))
        return sorted(out)

    def gaps(self) -> List[Tuple[float, float]]:
        """Open complementary arcs as (start, length)"""
        comps = self.components()
        if not comps:
            return [(0.0, TWO_PI)]
        if comps == [(0.0, TWO_PI)]:
            return []
        out = []
        for k, (start, length) in enumerate(comps):
            end = start + length
            nxt = comps[(k + 1) % len(comps)][0]
            if k == len(comps) - 1:
                nxt += TWO_PI
            if nxt - end > ARC_TOL:
                out.append((end % TWO_PI, nxt - end))
        return out

    def largest_gap_midpoint(self) -> Optional[float]:
        """Direction in the middle of the widest gap, or None for the full circle"""
        if self.is_full:
            return None
        if self.is_empty:
            return math.pi
        parts = self._domain_components()
        w = self.period
        best_len, best_mid = -1.0, None
        for k, (lo, hi) in enumerate(parts):
            nxt = parts[(k + 1) % len(parts)][0] + (w if k == len(parts) - 1 else 0.0)
            gap = nxt - hi
            if gap > best_len + ARC_TOL:
                best_len, best_mid = gap, (hi + gap / 2.0) % TWO_PI
        return best_mid

    def free_point_between(self, start: float, length: float, margin: float = 0.0) -> Optional[float]:
        """A direction inside the open arc (start, start+length) at distance > margin from the set"""
        best = None
        for g_start, g_len in self.gaps():
            for shift in (-TWO_PI, 0.0, TWO_PI):
                lo = max(g_start + shift, start)
                hi = min(g_start + shift + g_len, start + length)
                if hi - lo > 2.0 * margin + ARC_TOL:
                    candidate = (hi - lo, ((lo + hi) / 2.0) % TWO_PI)
                    if best is None or candidate[0] > best[0]:
                        best = candidate
        return None if best is None else best[1]

    def points(self) -> np.ndarray:
        """Sorted angles of a discrete set"""
        if not self.is_discrete:
            raise ValueError("arc set is not discrete")
        w = self.period
        if self.fold * len(self.base) > MAX_EXPANSION:
            raise ValueError("too many points to enumerate")
        base = np.array([lo for lo, _ in self.base])
        angles = (base[None, :] + w * np.arange(self.fold)[:, None]).ravel()
        return np.sort(np.mod(angles, TWO_PI))

    def min_spacing(self) -> float:
        """Smallest angular distance between distinct points of a discrete set"""
        if not self.is_discrete:
            raise ValueError("arc set is not discrete")
        w = self.period
        starts = [lo for lo, _ in self.base]
        if len(starts) == 1:
            return w if self.fold > 1 else math.inf
        diffs = [b - a for a, b in zip(starts, starts[1:])]
        diffs.append(w - starts[-1] + starts[0])
        return min(diffs)

    def mark_columns(self, theta_cells: int) -> np.ndarray:
        """Columns whose centre lies within half a column of the set"""
        h = TWO_PI / theta_cells
        centres = np.arange(theta_cells) * h
        mask = np.zeros(theta_cells, dtype=bool)
        if self.is_empty:
            return mask
        if self.is_full:
            mask[:] = True
            return mask
        w = self.period
        r = h / 2.0 + ARC_TOL
        phi = np.mod(centres, w)
        for lo, hi in self.base:
            for shift in (-w, 0.0, w):
                p = phi + shift
                mask |= (p >= lo - r) & (p <= hi + r)
        return mask


def periodic_image(intervals: Sequence[Interval], period: float, n: int) -> ArcSet:
    """Closure of the image of ⋃ₖ (I + k·period) under t ↦ 2⁻ⁿt mod 2π

    A rational ratio period/2π gives a finite orbit of rotations; an irrational
    one gives a dense orbit, whose closure is the whole circle.
    """
    if not intervals:
        return ArcSet.empty()
    scale = math.ldexp(1.0, -n)
    ratio = period / TWO_PI
    frac = Fraction(ratio).limit_denominator(MAX_DENOMINATOR)
    if abs(float(frac) - ratio) > RATIONAL_TOL * max(1.0, ratio):
        return ArcSet.full()
    fold = (frac / (1 << n)).denominator
    return ArcSet([(scale * lo, scale * hi) for lo, hi in intervals], fold)
