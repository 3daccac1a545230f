"""
Geometric primitives describing a closed spectrum in a left half-plane
"""

import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spectrum.arcs import ArcSet, periodic_image


INF = math.inf

# (kind, payload) contribution of a primitive to a vertical section
SectionPart = Tuple[str, tuple]
LogPiece = Tuple[float, float, ArcSet]


def _check_not_nan(model: BaseModel):
    for name, value in model:
        if isinstance(value, float) and math.isnan(value):
            raise ValueError(f"{name} must not be NaN")


def _check_finite(model: BaseModel, *names: str):
    for name in names:
        if not math.isfinite(getattr(model, name)):
            raise ValueError(f"{name} must be finite")


class PrimitiveBase(BaseModel):
    """Common behaviour of all primitives"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    def re_range(self) -> Tuple[float, float]:
        raise NotImplementedError

    def im_range(self) -> Tuple[float, float]:
        raise NotImplementedError

    def log_image(self, n: int) -> LogPiece:
        """Image under z ↦ 2⁻ⁿz in (u, θ mod 2π) coordinates as a product piece"""
        raise NotImplementedError

    def section(self, s: float) -> Optional[SectionPart]:
        raise NotImplementedError

    def anchors(self) -> List[complex]:
        """A few deterministic points of the primitive"""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> complex:
        raise NotImplementedError


class Point(PrimitiveBase):
    kind: Literal["point"] = "point"
    re: float
    im: float

    @model_validator(mode="after")
    def _validate(self):
        _check_finite(self, "re", "im")
        return self

    def re_range(self):
        return self.re, self.re

    def im_range(self):
        return self.im, self.im

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        return c * self.re, c * self.re, ArcSet.point(c * self.im)

    def section(self, s):
        return ("interval", (self.im, self.im)) if s == self.re else None

    def anchors(self):
        return [complex(self.re, self.im)]

    def sample(self, rng):
        return complex(self.re, self.im)


class VSegment(PrimitiveBase):
    kind: Literal["vsegment"] = "vsegment"
    re: float
    im_lo: float
    im_hi: float

    @model_validator(mode="after")
    def _validate(self):
        _check_not_nan(self)
        _check_finite(self, "re")
        if self.im_lo == INF or self.im_hi == -INF:
            raise ValueError("im_lo may only be -inf and im_hi only +inf")
        if self.im_hi < self.im_lo:
            raise ValueError("im_hi must be >= im_lo")
        return self

    def re_range(self):
        return self.re, self.re

    def im_range(self):
        return self.im_lo, self.im_hi

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        return c * self.re, c * self.re, ArcSet([(c * self.im_lo, c * self.im_hi)])

    def section(self, s):
        return ("interval", (self.im_lo, self.im_hi)) if s == self.re else None

    def anchors(self):
        return [complex(self.re, t) for t in _interval_anchors(self.im_lo, self.im_hi)]

    def sample(self, rng):
        return complex(self.re, _uniform(rng, self.im_lo, self.im_hi))


class HSegment(PrimitiveBase):
    kind: Literal["hsegment"] = "hsegment"
    re_lo: float
    re_hi: float
    im: float

    @model_validator(mode="after")
    def _validate(self):
        _check_not_nan(self)
        _check_finite(self, "re_hi", "im")
        if self.re_lo == INF:
            raise ValueError("re_lo may only be -inf")
        if self.re_hi < self.re_lo:
            raise ValueError("re_hi must be >= re_lo")
        return self

    def re_range(self):
        return self.re_lo, self.re_hi

    def im_range(self):
        return self.im, self.im

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        return c * self.re_lo, c * self.re_hi, ArcSet.point(c * self.im)

    def section(self, s):
        return ("interval", (self.im, self.im)) if self.re_lo <= s <= self.re_hi else None

    def anchors(self):
        return [complex(s, self.im) for s in _interval_anchors(self.re_lo, self.re_hi)]

    def sample(self, rng):
        return complex(_uniform(rng, self.re_lo, self.re_hi), self.im)


class Rect(PrimitiveBase):
    kind: Literal["rect"] = "rect"
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    @model_validator(mode="after")
    def _validate(self):
        _check_not_nan(self)
        _check_finite(self, "re_hi")
        if self.re_lo == INF:
            raise ValueError("re_lo may only be -inf")
        if self.im_lo == INF or self.im_hi == -INF:
            raise ValueError("im_lo may only be -inf and im_hi only +inf")
        if self.re_hi < self.re_lo:
            raise ValueError("re_hi must be >= re_lo")
        if self.im_hi < self.im_lo:
            raise ValueError("im_hi must be >= im_lo")
        return self

    def re_range(self):
        return self.re_lo, self.re_hi

    def im_range(self):
        return self.im_lo, self.im_hi

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        return c * self.re_lo, c * self.re_hi, ArcSet([(c * self.im_lo, c * self.im_hi)])

    def section(self, s):
        if self.re_lo <= s <= self.re_hi:
            return ("interval", (self.im_lo, self.im_hi))
        return None

    def anchors(self):
        return [complex(s, t)
                for s in _interval_anchors(self.re_lo, self.re_hi)
                for t in _interval_anchors(self.im_lo, self.im_hi)]

    def sample(self, rng):
        return complex(_uniform(rng, self.re_lo, self.re_hi), _uniform(rng, self.im_lo, self.im_hi))


class VLattice(PrimitiveBase):
    kind: Literal["vlattice"] = "vlattice"
    re: float
    im_base: float
    im_step: float

    @model_validator(mode="after")
    def _validate(self):
        _check_finite(self, "re", "im_base", "im_step")
        if self.im_step <= 0:
            raise ValueError("im_step must be > 0")
        return self

    def re_range(self):
        return self.re, self.re

    def im_range(self):
        return -INF, INF

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        arcs = periodic_image([(self.im_base, self.im_base)], self.im_step, n)
        return c * self.re, c * self.re, arcs

    def section(self, s):
        return ("lattice", (self.im_base, self.im_step)) if s == self.re else None

    def anchors(self):
        return [complex(self.re, self.im_base + k * self.im_step) for k in (0, 1, -1)]

    def sample(self, rng):
        k = int(rng.integers(-8, 9))
        return complex(self.re, self.im_base + k * self.im_step)


class VLine(PrimitiveBase):
    kind: Literal["vline"] = "vline"
    re: float

    @model_validator(mode="after")
    def _validate(self):
        _check_finite(self, "re")
        return self

    def re_range(self):
        return self.re, self.re

    def im_range(self):
        return -INF, INF

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        return c * self.re, c * self.re, ArcSet.full()

    def section(self, s):
        return ("interval", (-INF, INF)) if s == self.re else None

    def anchors(self):
        return [complex(self.re, t) for t in (0.0, math.pi, -math.pi / 2)]

    def sample(self, rng):
        return complex(self.re, float(rng.uniform(-8 * math.pi, 8 * math.pi)))


class PeriodicBand(PrimitiveBase):
    kind: Literal["periodic_band"] = "periodic_band"
    re_lo: float
    re_hi: float
    im_intervals: Tuple[Tuple[float, float], ...]
    period: float

    @model_validator(mode="after")
    def _validate(self):
        _check_not_nan(self)
        _check_finite(self, "re_hi", "period")
        if self.re_lo == INF:
            raise ValueError("re_lo may only be -inf")
        if self.re_hi < self.re_lo:
            raise ValueError("re_hi must be >= re_lo")
        if self.period <= 0:
            raise ValueError("period must be > 0")
        if not self.im_intervals:
            raise ValueError("im_intervals must not be empty")
        for lo, hi in self.im_intervals:
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise ValueError(f"invalid im interval [{lo}, {hi}]")
        return self

    def re_range(self):
        return self.re_lo, self.re_hi

    def im_range(self):
        return -INF, INF

    def log_image(self, n):
        c = math.ldexp(1.0, -n)
        return c * self.re_lo, c * self.re_hi, periodic_image(self.im_intervals, self.period, n)

    def section(self, s):
        if self.re_lo <= s <= self.re_hi:
            return ("periodic", (tuple(self.im_intervals), self.period))
        return None

    def anchors(self):
        return [complex(s, t)
                for s in _interval_anchors(self.re_lo, self.re_hi)
                for lo, hi in self.im_intervals
                for t in (lo, hi)]

    def sample(self, rng):
        lo, hi = self.im_intervals[int(rng.integers(len(self.im_intervals)))]
        k = int(rng.integers(-8, 9))
        t = _uniform(rng, lo, hi) + k * self.period
        return complex(_uniform(rng, self.re_lo, self.re_hi), t)


Primitive = Annotated[
    Union[Point, VSegment, HSegment, Rect, VLattice, VLine, PeriodicBand],
    Field(discriminator="kind"),
]


def _interval_anchors(lo: float, hi: float) -> List[float]:
    if math.isfinite(lo) and math.isfinite(hi):
        return [lo, hi] if hi > lo else [lo]
    if math.isfinite(hi):
        return [hi, hi - 1.0]
    if math.isfinite(lo):
        return [lo, lo + 1.0]
    return [0.0, 1.0]


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    """Uniform draw, unbounded ends replaced by a window of width 8π"""
    if not math.isfinite(lo) and not math.isfinite(hi):
        lo, hi = -8 * math.pi, 8 * math.pi
    elif not math.isfinite(lo):
        lo = hi - 8 * math.pi
    elif not math.isfinite(hi):
        hi = lo + 8 * math.pi
    if hi == lo:
        return lo
    return float(rng.uniform(lo, hi))
