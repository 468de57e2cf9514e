"""Riesz-basis diagnostics from eigenfunction pair angles.

When the two normalised eigenfunctions of the n-th cluster become
asymptotically collinear, the root-function system cannot be a Riesz basis.
The verdict combines that numerical trend with the potential conditions that
the corresponding theorem requires.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from .asymptotics import loglog_slope
from .bc_model import CanonicalBC, Family
from .errors import NormViolation, UndefinedCondition
from .potential import (DecayReport, EndpointCondition, Potential, Smoothness, Verdict,
                        decay_on_subsequences, endpoint_condition, sine_decay_condition)

NORM_TOL = 1e-6

# Theorem labels cited in reports, keyed by (family, sigma, regime)
THEOREM_LABELS = {
    (Family.T1, 1, "L1"): "Theorem 1(b)",
    (Family.T1, 1, "AC"): "Theorem 2(b)",
    (Family.T1, 0, "L1"): "Theorem 3(b)",
    (Family.T1, 0, "AC"): "Theorem 4(b)",
    (Family.T2, 1, "L1"): "Theorem 5(b)",
    (Family.T2, 1, "AC"): "Theorem 6(b)",
    (Family.T2, 0, "L1"): "Theorem 7(b)",
    (Family.T2, 0, "AC"): "Theorem 8(b)",
}


class RieszVerdict(str, enum.Enum):
    FAILS = "FailsRieszBasis"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PairAngleRecord:
    n: int
    angle: float
    inner: complex

    def as_csv(self) -> dict:
        return {"n": self.n, "angle": self.angle, "n_angle": self.n * self.angle}


def _norm(f: np.ndarray, x: np.ndarray) -> float:
    return math.sqrt(abs(simpson(np.abs(f) ** 2, x=x)))


def pair_angle(phi1: np.ndarray, phi2: np.ndarray, x: np.ndarray | None = None, n: int = 0,
               norm_tol: float = NORM_TOL) -> PairAngleRecord:
    """Angle arccos(min(1, |<phi1, phi2>|)) between two unit-norm functions.

    It is evaluated as 2 arcsin(||phi1 - e^{ia} phi2|| / 2) with the phase a
    aligning the two functions, which equals the arccos form but keeps full
    relative accuracy for small angles.
    """
    phi1 = np.asarray(phi1, dtype=complex)
    phi2 = np.asarray(phi2, dtype=complex)
    if x is None:
        x = np.linspace(0.0, 1.0, phi1.size)
    for k, f in enumerate((phi1, phi2), start=1):
        nrm = _norm(f, x)
        if abs(nrm - 1) > norm_tol:
            raise NormViolation(f"input {k} has norm {nrm:.9f}")
    inner = complex(simpson(phi1 * np.conj(phi2), x=x))
    a = inner / abs(inner) if abs(inner) > 0 else 1.0
    dist = _norm(phi1 - a * phi2, x)
    angle = 2 * math.asin(min(1.0, dist / 2))
    return PairAngleRecord(n, min(angle, math.pi / 2), inner)


def angles_from_eigs(eigs) -> list[PairAngleRecord]:
    """Pair angles for every n with two simple computed eigenfunctions."""
    by_n: dict[int, dict[int, object]] = {}
    for e in eigs:
        if e.phi is not None:
            by_n.setdefault(e.n, {})[e.j] = e
    out = []
    for n in sorted(by_n):
        g = by_n[n]
        if 1 in g and 2 in g:
            out.append(pair_angle(g[1].phi, g[2].phi, g[1].x, n))
    return out


@dataclass(frozen=True)
class AngleTrend:
    slope: float
    first: float
    last: float
    tends_to_zero: bool


def angle_trend(records: Sequence[PairAngleRecord], slope_max: float = -0.5) -> AngleTrend:
    """Angle -> 0: log-log slope <= -0.5 and the last angle below half the first."""
    recs = sorted(records, key=lambda r: r.n)
    if len(recs) < 2:
        return AngleTrend(float("nan"), float("nan"), float("nan"), False)
    slope = loglog_slope([r.n for r in recs], [r.angle for r in recs])
    first, last = recs[0].angle, recs[-1].angle
    ok = bool(np.isfinite(slope) and slope <= slope_max and last < first / 2)
    return AngleTrend(slope, first, last, ok)


@dataclass(frozen=True)
class Conditions:
    decay: DecayReport
    decay_subsequence: tuple | None
    decay_holds: bool
    endpoint: EndpointCondition | None
    endpoint_note: str = ""


def gather_conditions(q: Potential, cbc: CanonicalBC, n_range: Sequence[int],
                      variant: str = "printed") -> Conditions:
    rep = sine_decay_condition(q, cbc.sigma, n_range, variant)
    v, sub = decay_on_subsequences(rep)
    ep, note = None, ""
    if q.smoothness is Smoothness.AC:
        try:
            ep = endpoint_condition(q, cbc, variant)
        except UndefinedCondition as exc:
            note = str(exc)
    else:
        note = "potential is not absolutely continuous"
    return Conditions(rep, sub, v is Verdict.HOLDS, ep, note)


@dataclass(frozen=True)
class RieszResult:
    verdict: RieszVerdict
    theorems: list
    trend: AngleTrend
    evidence: dict = field(default_factory=dict)

    @property
    def theorem(self) -> str | None:
        return self.theorems[0] if self.theorems else None


def riesz_verdict(cbc: CanonicalBC, q: Potential, records: Sequence[PairAngleRecord],
                  conditions: Conditions) -> RieszResult:
    trend = angle_trend(records)
    theorems = []
    if conditions.decay_holds:
        theorems.append(THEOREM_LABELS[(cbc.family, cbc.sigma, "L1")])
    if conditions.endpoint is not None and conditions.endpoint.holds:
        theorems.append(THEOREM_LABELS[(cbc.family, cbc.sigma, "AC")])
    fails = bool(theorems) and trend.tends_to_zero
    evidence = {
        "angle_slope": trend.slope,
        "angle_first": trend.first,
        "angle_last": trend.last,
        "angle_tends_to_zero": trend.tends_to_zero,
        "decay_verdict": conditions.decay.verdict.value,
        "decay_tail_median": conditions.decay.tail_median,
        "decay_subsequence": conditions.decay_subsequence,
        "endpoint_holds": None if conditions.endpoint is None else conditions.endpoint.holds,
        "endpoint_lhs": None if conditions.endpoint is None else conditions.endpoint.lhs,
        "endpoint_rhs": None if conditions.endpoint is None else conditions.endpoint.rhs,
        "candidate_theorems": list(theorems),
        "note": conditions.endpoint_note,
    }
    verdict = RieszVerdict.FAILS if fails else RieszVerdict.INCONCLUSIVE
    return RieszResult(verdict, theorems if fails else [], trend, evidence)
