"""
Strong-continuity criteria for the dyadic semigroup

Necessary condition on fibers, the O(2⁻ⁿ) sufficient condition on levels, and
the quasi-uniform (L_n, S_n) probe search. All answers are at tested depth.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.config import Thresholds
from spectrum.document import ProbeDecl
from tower.tower import FiberPoint, Tower
from utils.errors import ProbeDepthError, SpecSemanticError


logger = logging.getLogger(__name__)

MIN_NECESSARY_DEPTH = 8
MIN_O2N_DEPTH = 6


class Outcome(str, Enum):
    PASSES = "passes"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ContinuityResult:
    status: Outcome
    witness: Dict[str, Any] = field(default_factory=dict)
    evidence: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status.value, "witness": self.witness, "evidence": self.evidence}


def dyadic_parameters(t: Union[Fraction, str, float]) -> Tuple[int, int, int]:
    """(F, L, S) for t = Σ 2^{-ℓ_i}, 1 ≤ ℓ_1 < … < ℓ_k: F = ℓ_1, L = ℓ_k, S = t·2^L"""
    t = Fraction(t)
    if not 0 < t < 1:
        raise ValueError(f"dyadic time must lie in (0, 1), got {t}")
    denominator = t.denominator
    if denominator & (denominator - 1):
        raise ValueError(f"{t} is not a dyadic rational")
    L = denominator.bit_length() - 1
    S = t.numerator
    F = L - (S.bit_length() - 1)
    return F, L, S


def dyadic_norm_bound(t: Union[Fraction, str, float], zeta: float) -> float:
    """‖Q(t)‖ ≤ exp(tζ)"""
    return math.exp(float(Fraction(t)) * zeta)


def _pattern_values(pattern: Union[str, Sequence[int]], count: int) -> List[int]:
    if not isinstance(pattern, str):
        return [int(v) for v in pattern]
    if pattern == "n":
        return list(range(1, count + 1))
    if pattern == "2n":
        return [2 * n for n in range(1, count + 1)]
    constant = int(pattern.split(":", 1)[1])
    return [constant] * count


@dataclass(frozen=True)
class ContinuityProbe:
    """Index sequences L_n, S_n (n = 1, 2, …) with 2^{-L_n}·S_n → 0"""
    L: Tuple[int, ...]
    S: Tuple[int, ...]
    epsilon: float
    n0: int = 1
    label: str = ""

    def __post_init__(self):
        if len(self.L) != len(self.S) or not self.L:
            raise SpecSemanticError("probe needs equally long, non-empty L and S")
        if self.epsilon <= 0 or self.n0 < 1:
            raise SpecSemanticError("probe needs epsilon > 0 and n0 >= 1")
        for l, s in zip(self.L, self.S):
            if l < 1 or not 1 <= s <= (1 << (l + 1)) - 1:
                raise SpecSemanticError(f"probe entry (L={l}, S={s}) violates 1 <= S <= 2^(L+1) - 1")
        ratios = self.ratios()
        tail = ratios[len(ratios) // 2:]
        if len(tail) > 1 and any(b >= a for a, b in zip(tail, tail[1:])):
            raise SpecSemanticError("2^-L_n S_n must decrease strictly along the tail of the probe")

    def ratios(self) -> List[float]:
        return [math.ldexp(s, -l) for l, s in zip(self.L, self.S)]

    @classmethod
    def from_patterns(cls, L, S, epsilon: float, n0: int = 1, depth: int = 32, label: str = "") -> 'ContinuityProbe':
        """Generator patterns ("n", "2n", "const:c") or explicit lists; pattern entries stop at L_n ≤ depth"""
        explicit = [len(p) for p in (L, S) if not isinstance(p, str)]
        count = explicit[0] if explicit else depth
        Ls = _pattern_values(L, count)
        Ss = _pattern_values(S, count)
        if not explicit:
            keep = [k for k, l in enumerate(Ls) if l <= depth]
            Ls = [Ls[k] for k in keep]
            Ss = [Ss[k] for k in keep]
        return cls(L=tuple(Ls), S=tuple(Ss), epsilon=epsilon, n0=n0, label=label)

    @classmethod
    def from_dyadic_times(cls, times: Sequence[Union[str, Fraction]], epsilon: float, n0: int = 1,
                          label: str = "") -> 'ContinuityProbe':
        """Probe whose n-th entry represents q(t_n) exactly as π_L^S"""
        Ls, Ss = [], []
        for t in times:
            try:
                _, L, S = dyadic_parameters(t)
            except ValueError as e:
                raise SpecSemanticError(str(e)) from e
            Ls.append(L)
            Ss.append(S)
        return cls(L=tuple(Ls), S=tuple(Ss), epsilon=epsilon, n0=n0, label=label)

    @classmethod
    def from_decl(cls, decl: ProbeDecl, depth: int) -> 'ContinuityProbe':
        label = decl.label or ""
        if decl.times is not None:
            return cls.from_dyadic_times(decl.times, decl.epsilon, decl.n0, label)
        return cls.from_patterns(decl.L, decl.S, decl.epsilon, decl.n0, depth, label)


def probe_norm_bound(probe: ContinuityProbe, zeta: float) -> List[float]:
    """sup |1 − z^{S_n}| over Ω_{L_n} is at most 1 + exp(2^{-L_n} S_n ζ)"""
    return [1.0 + math.exp(r * zeta) for r in probe.ratios()]


def _fiber_witness(fiber: FiberPoint, tail: np.ndarray) -> Dict[str, Any]:
    return {
        "provenance": fiber.provenance,
        "label": fiber.label,
        "base": fiber.base,
        "eps": list(fiber.eps),
        "flips": list(fiber.flips),
        "tail_min": float(tail.min()),
        "tail_max": float(tail.max()),
        "coords": [complex(x) for x in fiber.coords],
    }


@dataclass
class ContinuityReport:
    necessary: ContinuityResult
    sufficient_O2n: ContinuityResult
    quasi_uniform: List[ContinuityResult]
    eta_finite: bool
    depth: int
    fiber_depth: int
    canonical: int
    twisted: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "necessary": self.necessary.to_dict(),
            "sufficient_O2n": self.sufficient_O2n.to_dict(),
            "quasi_uniform": [q.to_dict() for q in self.quasi_uniform],
            "eta_finite": self.eta_finite,
            "depth": self.depth,
            "fiber_depth": self.fiber_depth,
            "fibers": {"canonical": self.canonical, "twisted": self.twisted},
        }


class ContinuityTools:
    """Continuity checks at tested depth"""

    def __init__(self, thresholds: Thresholds):
        self.thresholds = thresholds

    def check_necessary(self, tower: Tower, fibers: Sequence[FiberPoint]) -> ContinuityResult:
        """η > −∞ and |1 − x_n| → 0 along every sampled fiber"""
        if not tower.bounds.eta_finite:
            return ContinuityResult(Outcome.FAILS, {"eta": tower.bounds.eta}, "inf Re σ(A) = −∞")
        if not fibers:
            return ContinuityResult(Outcome.INCONCLUSIVE, {}, "no fibers sampled")
        shallow = min(f.depth for f in fibers)
        if shallow < MIN_NECESSARY_DEPTH:
            raise ProbeDepthError(f"necessary condition needs fibers of depth >= {MIN_NECESSARY_DEPTH}, got {shallow}")

        fraction = self.thresholds.necessary_tail_fraction
        tails = [f.tail(fraction) for f in fibers]
        resistant = max(range(len(fibers)), key=lambda k: tails[k].min())
        worst = tails[resistant]
        if worst.min() > self.thresholds.necessary_fail:
            return ContinuityResult(
                Outcome.FAILS, _fiber_witness(fibers[resistant], worst),
                "a fiber stays away from 1",
            )
        settled = all(t.max() < self.thresholds.necessary_pass and t[-1] <= t[0] for t in tails)
        if settled:
            largest = max(float(t.max()) for t in tails)
            return ContinuityResult(Outcome.PASSES, {"tail_max": largest}, "every fiber tail is close to 1 and decreasing")
        return ContinuityResult(Outcome.INCONCLUSIVE, _fiber_witness(fibers[resistant], worst), "fiber tails undecided")

    def check_sufficient_O2n(self, tower: Tower) -> ContinuityResult:
        """d_n = max |1 − z| over Ω_n is O(2⁻ⁿ)"""
        if tower.depth < MIN_O2N_DEPTH:
            return ContinuityResult(Outcome.INCONCLUSIVE, {}, f"needs depth >= {MIN_O2N_DEPTH}")
        d = np.array([level.shape.max_abs_one_minus() for level in tower.levels])
        scaled = d * np.ldexp(1.0, np.arange(d.size))
        witness = {"d": d.tolist(), "scaled": scaled.tolist()}
        if not d.any():
            return ContinuityResult(Outcome.PASSES, {**witness, "C": 0.0}, "every level is {1}")

        window = scaled[-self.thresholds.o2n_window:]
        if window.min() > 0 and window.max() / window.min() < self.thresholds.o2n_ratio:
            return ContinuityResult(Outcome.PASSES, {**witness, "C": float(scaled.max())}, "2ⁿ·d_n is bounded")
        recent = d[-self.thresholds.o2n_window:]
        if recent[-1] >= recent[0] * (1.0 - 1e-12) and recent[-1] > self.thresholds.necessary_fail:
            return ContinuityResult(Outcome.FAILS, witness, "d_n does not tend to 0")
        return ContinuityResult(Outcome.INCONCLUSIVE, witness, "2ⁿ·d_n not yet stable")

    def quasi_uniform_test(self, tower: Tower, fibers: Sequence[FiberPoint],
                           probe: ContinuityProbe) -> ContinuityResult:
        """Indices n₀ ≤ n_1 < … < n_k with min_i |1 − x_{L_{n_i}}^{S_{n_i}}| < ε on every fiber

        Indices are tried in increasing order and kept when they cover a fiber
        not yet covered.
        """
        depth = min(f.depth for f in fibers)
        if max(probe.L) > depth:
            raise ProbeDepthError(f"probe needs fiber depth {max(probe.L)}, fibers reach {depth}")
        if probe.n0 > len(probe.L):
            raise ProbeDepthError(f"probe starts at n0 = {probe.n0} but lists {len(probe.L)} entries")

        L = np.asarray(probe.L)
        S = np.asarray(probe.S, dtype=float)
        coords = np.stack([f.coords[:depth + 1] for f in fibers])
        values = np.abs(1.0 - np.exp(S[None, :] * np.log(coords[:, L])))

        uncovered = np.ones(len(fibers), dtype=bool)
        chosen: List[int] = []
        for k in range(probe.n0 - 1, L.size):
            hits = uncovered & (values[:, k] < probe.epsilon)
            if hits.any():
                chosen.append(k + 1)
                uncovered &= ~hits
            if not uncovered.any() or len(chosen) >= self.thresholds.quasi_max_indices:
                break

        base = {"label": probe.label, "epsilon": probe.epsilon, "n0": probe.n0,
                "norm_bounds": probe_norm_bound(probe, tower.bounds.zeta)}
        if not uncovered.any():
            return ContinuityResult(Outcome.PASSES, {**base, "indices": chosen, "k": len(chosen)},
                                    "every fiber is covered")
        tail = values[:, probe.n0 - 1:]
        resistant = int(np.argmax(tail.min(axis=1)))
        witness = {**base, "indices": chosen, "min_value": float(tail[resistant].min()),
                   **_fiber_witness(fibers[resistant], tail[resistant])}
        return ContinuityResult(Outcome.FAILS, witness, f"fails at tested depth {depth}")

    def evaluate(self, tower: Tower, fibers: Sequence[FiberPoint],
                 probes: Sequence[ContinuityProbe]) -> ContinuityReport:
        report = ContinuityReport(
            necessary=self.check_necessary(tower, fibers),
            sufficient_O2n=self.check_sufficient_O2n(tower),
            quasi_uniform=[self.quasi_uniform_test(tower, fibers, p) for p in probes],
            eta_finite=tower.bounds.eta_finite,
            depth=tower.depth,
            fiber_depth=min((f.depth for f in fibers), default=0),
            canonical=sum(f.provenance == "canonical" for f in fibers),
            twisted=sum(f.provenance == "twisted" for f in fibers),
        )
        logger.info(
            f"Continuity: necessary {report.necessary.status.value}, "
            f"O(2^-n) {report.sufficient_O2n.status.value}, {len(probes)} probes"
        )
        return report
