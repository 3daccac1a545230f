"""
Winding numbers and Fredholm indices of operator models

The index of a Toeplitz model is minus the winding number of its symbol; normal
(multiplication) models have index zero off their spectrum. The kernel check
evaluates one λ per bounded complement component of every level.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from config.config import Thresholds
from spectrum.document import ModelDecl
from spectrum.spectrum import LevelShape
from tower.tower import Tower
from utils.errors import EssentialSpectrumError, ModelMismatchError, OnCurveError


logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MIN_SAMPLES = 64
ON_CURVE_FLOOR = 1e-12
RAY_GAP = 1e-3
MEMBERSHIP_TOL = 1e-6
MEMBERSHIP_SAMPLES = 256


@dataclass(frozen=True, eq=False)
class SymbolCurve:
    """Closed curve t ↦ b(e^{it}); ``sampler`` evaluates it at any resolution"""
    samples: np.ndarray
    source: str
    sampler: Optional[Callable[[int], np.ndarray]] = None

    def at(self, count: int) -> np.ndarray:
        if self.sampler is None:
            return self.samples
        return self.sampler(count)

    @classmethod
    def _from_sampler(cls, sampler: Callable[[int], np.ndarray], source: str) -> 'SymbolCurve':
        return cls(samples=sampler(MIN_SAMPLES), source=source, sampler=sampler)

    @classmethod
    def from_polynomial(cls, coefficients: Sequence[complex]) -> 'SymbolCurve':
        """b(z) = Σ c_k z^k, ascending coefficients"""
        coefficients = np.asarray(coefficients, dtype=complex)

        def sampler(count: int) -> np.ndarray:
            z = np.exp(1j * TWO_PI * np.arange(count) / count)
            return P.polyval(z, coefficients)

        return cls._from_sampler(sampler, "polynomial")

    @classmethod
    def from_trigonometric(cls, coefficients: Sequence[complex], offset: int = 0) -> 'SymbolCurve':
        """b(e^{it}) = Σ c_k e^{i(k + offset)t}, evaluated by FFT"""
        coefficients = np.asarray(coefficients, dtype=complex)
        powers = np.arange(coefficients.size) + offset

        def sampler(count: int) -> np.ndarray:
            # e^{ipt} on the grid depends on p mod count only
            spectrum = np.zeros(count, dtype=complex)
            np.add.at(spectrum, powers % count, coefficients)
            return np.fft.ifft(spectrum) * count

        return cls._from_sampler(sampler, "trigonometric")

    @classmethod
    def from_samples(cls, points: Sequence[complex], source: str = "trace") -> 'SymbolCurve':
        points = np.asarray(points, dtype=complex)
        if points.size < 16:
            raise ValueError(f"a symbol curve needs at least 16 samples, got {points.size}")
        return cls(samples=points, source=source)

    @classmethod
    def unit_circle(cls) -> 'SymbolCurve':
        return cls.from_polynomial([0.0, 1.0])

    def omitted_ray(self, count: int = 4096) -> Optional[float]:
        """Direction of a ray from 0 that the curve misses, or None"""
        values = self.at(count)
        if np.any(np.abs(values) <= ON_CURVE_FLOOR):
            return None
        angles = np.sort(np.mod(np.angle(values), TWO_PI))
        gaps = np.diff(np.concatenate([angles, [angles[0] + TWO_PI]]))
        k = int(np.argmax(gaps))
        # a gap narrower than two sample steps may be crossed between samples
        steps = np.abs(np.angle(np.roll(values, -1) / values))
        if gaps[k] <= max(RAY_GAP, 2.0 * float(steps.max())):
            return None
        return float((angles[k] + gaps[k] / 2.0) % TWO_PI)

    def power(self, exponent: float) -> Optional['SymbolCurve']:
        """b^exponent on the branch cut along an omitted ray (the principal one if −ℝ₊ is omitted)"""
        ray = self.omitted_ray()
        if ray is None:
            return None
        base = self
        cut = ray

        def sampler(count: int) -> np.ndarray:
            values = base.at(count)
            argument = cut - TWO_PI + np.mod(np.angle(values) - cut, TWO_PI)
            return np.exp(exponent * (np.log(np.abs(values)) + 1j * argument))

        return SymbolCurve._from_sampler(sampler, f"{self.source}^{exponent:g}")

    def product(self, other: 'SymbolCurve') -> 'SymbolCurve':
        def sampler(count: int) -> np.ndarray:
            return self.at(count) * other.at(count)

        return SymbolCurve._from_sampler(sampler, f"{self.source}*{other.source}")


def winding_number(curve: SymbolCurve, lam: complex = 0j, refine_max_power: int = 18) -> int:
    """Winding number about λ by summing argument increments, refining until each is below π/2"""
    count = max(MIN_SAMPLES, curve.samples.size)
    limit = 1 << refine_max_power
    while True:
        shifted = curve.at(count) - lam
        magnitudes = np.abs(shifted)
        distance = float(magnitudes.min())
        if distance <= ON_CURVE_FLOOR:
            raise OnCurveError(f"λ = {lam} lies on the curve", distance)
        following = np.roll(shifted, -1)
        steps = np.angle(following / shifted)
        chords = np.abs(following - shifted)
        # every chord shorter than the nearer endpoint's distance to λ
        clear = chords < np.minimum(magnitudes, np.roll(magnitudes, -1))
        if np.abs(steps).max() < math.pi / 2 and clear.all():
            return int(round(float(steps.sum()) / TWO_PI))
        if curve.sampler is None:
            if np.abs(steps).max() < math.pi:
                return int(round(float(steps.sum()) / TWO_PI))
            raise OnCurveError(f"λ = {lam} is too close to a fixed-sample curve", distance)
        count *= 2
        if count > limit:
            raise OnCurveError(f"λ = {lam} within the refinement floor of the curve", distance)


@dataclass(frozen=True, eq=False)
class OperatorModel:
    """Toeplitz (symbol), multiplication (region) or direct sum of models"""
    kind: str
    symbol: Optional[SymbolCurve] = None
    region: Optional[LevelShape] = None
    parts: Tuple['OperatorModel', ...] = ()
    description: str = ""

    @classmethod
    def toeplitz(cls, symbol: SymbolCurve, description: str = "") -> 'OperatorModel':
        return cls(kind="toeplitz", symbol=symbol, description=description)

    @classmethod
    def multiplication(cls, region: Optional[LevelShape] = None, description: str = "") -> 'OperatorModel':
        return cls(kind="multiplication", region=region, description=description)

    @classmethod
    def direct_sum(cls, parts: Sequence['OperatorModel'], description: str = "") -> 'OperatorModel':
        return cls(kind="direct_sum", parts=tuple(parts), description=description)

    @classmethod
    def from_decl(cls, decl: ModelDecl, region: Optional[LevelShape] = None) -> 'OperatorModel':
        if decl.kind == "toeplitz":
            if decl.poly is not None:
                symbol = SymbolCurve.from_polynomial(decl.coefficients())
            else:
                symbol = SymbolCurve.from_trigonometric(decl.coefficients(), decl.trig_offset)
            return cls.toeplitz(symbol, decl.description)
        if decl.kind == "multiplication":
            return cls.multiplication(region, decl.description)
        return cls.direct_sum([cls.from_decl(part, region) for part in decl.parts], decl.description)

    def at_level(self, n: int, region: LevelShape) -> Optional['OperatorModel']:
        """Model of q(2⁻ⁿ): symbols through the 2⁻ⁿ-th power, regions replaced by Ω_n"""
        if self.kind == "multiplication":
            return OperatorModel.multiplication(region, self.description)
        if self.kind == "toeplitz":
            if n == 0:
                return self
            symbol = self.symbol.power(math.ldexp(1.0, -n))
            return None if symbol is None else OperatorModel.toeplitz(symbol, self.description)
        parts = [part.at_level(n, region) for part in self.parts]
        if any(part is None for part in parts):
            return None
        return OperatorModel.direct_sum(parts, self.description)

    def symbol_points(self) -> List[np.ndarray]:
        if self.kind == "toeplitz":
            return [self.symbol.at(MEMBERSHIP_SAMPLES)]
        return [points for part in self.parts for points in part.symbol_points()]


def fredholm_index(model: OperatorModel, lam: complex, refine_max_power: int = 18) -> int:
    if model.kind == "toeplitz":
        try:
            return -winding_number(model.symbol, lam, refine_max_power)
        except OnCurveError as e:
            raise EssentialSpectrumError(f"λ = {lam} lies in the essential spectrum of the Toeplitz model") from e
    if model.kind == "multiplication":
        if model.region is not None and model.region.contains_point(complex(lam), MEMBERSHIP_TOL):
            raise EssentialSpectrumError(f"λ = {lam} lies in the spectrum of the multiplication model")
        return 0
    return sum(fredholm_index(part, lam, refine_max_power) for part in model.parts)


@dataclass
class KernelResult:
    status: str
    witness: Optional[Dict[str, Any]] = None
    table: List[Dict[str, Any]] = field(default_factory=list)
    note: str = ""

    @property
    def obstructed(self) -> bool:
        return self.status == "obstructed"

    @property
    def usable(self) -> bool:
        return self.status in ("passes", "assumed")

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status, "witness": self.witness, "samples": self.table, "note": self.note}


class IndexTools:
    """Kernel condition: index zero at one λ per bounded component of every level"""

    def __init__(self, thresholds: Thresholds):
        self.thresholds = thresholds

    def _models_by_level(self, decls: Sequence[ModelDecl]) -> Tuple[Optional[OperatorModel], Dict[int, OperatorModel]]:
        base = [OperatorModel.from_decl(d) for d in decls if d.level is None]
        explicit = {}
        for decl in decls:
            if decl.level is not None:
                if decl.level in explicit:
                    explicit[decl.level] = OperatorModel.direct_sum([explicit[decl.level], OperatorModel.from_decl(decl)])
                else:
                    explicit[decl.level] = OperatorModel.from_decl(decl)
        if not base:
            return None, explicit
        return (base[0] if len(base) == 1 else OperatorModel.direct_sum(base)), explicit

    def _check_consistency(self, model: OperatorModel, region: LevelShape, n: int):
        for points in model.symbol_points():
            stray = [p for p in points if not region.contains_point(complex(p), MEMBERSHIP_TOL)]
            if stray:
                raise ModelMismatchError(
                    f"level {n}: model symbol leaves Ω_{n} (e.g. at {stray[0]:.6g})"
                )

    def check_kernel_condition(self, tower: Tower, models: Sequence[ModelDecl] = (),
                               assume_normal_lifts: bool = False) -> KernelResult:
        """passes | obstructed (λ, n) | assumed | obstructed-unknown"""
        if all(level.ext_rank == 0 for level in tower.levels):
            return KernelResult("passes", note="no bounded complement components at any level")
        if not models:
            if assume_normal_lifts:
                return KernelResult("assumed", note="each q(t) assumed to have a normal lift")
            return KernelResult("obstructed-unknown", note="no operator model and no normal-lift assumption")

        base, explicit = self._models_by_level(models)
        table: List[Dict[str, Any]] = []
        assumed_levels = []
        for level in tower.levels:
            if not level.component_samples:
                continue
            model = explicit.get(level.n)
            if model is None and base is not None:
                model = base.at_level(level.n, level.shape)
            if model is None:
                if not assume_normal_lifts:
                    return KernelResult(
                        "obstructed-unknown", table=table,
                        note=f"no model for level {level.n}; supply one or assume normal lifts",
                    )
                assumed_levels.append(level.n)
                continue
            self._check_consistency(model, level.shape, level.n)
            for lam in level.component_samples:
                index = fredholm_index(model, lam, self.thresholds.refine_max_power)
                table.append({"n": level.n, "lambda": complex(lam), "index": index})
                if index != 0:
                    logger.info(f"Index obstruction at level {level.n}, λ = {lam}: index {index}")
                    witness = {"n": level.n, "lambda": complex(lam), "index": index}
                    return KernelResult("obstructed", witness=witness, table=table)

        if assumed_levels:
            return KernelResult("assumed", table=table, note=f"levels {assumed_levels} assumed")
        return KernelResult("passes", table=table)
