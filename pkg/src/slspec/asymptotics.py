"""Asymptotic eigenvalue formulas for the four families and residual trends.

Three regimes are supported:

* ``Unperturbed``: roots of the q = 0 determinant, c and c + k/c-type shifts.
* ``L1``: the same leading terms, valid when the sine-moment decay holds.
* ``AC``: a 1/n splitting governed by a discriminant built from the endpoint
  values q(0), q(1).

For sigma = 0 the ``printed`` discriminants use q(0) + q(1); the
``corrected`` variant uses q(0) - q(1), which is what the 1/mu term of the
exact determinant contains (check with :func:`slspec.determinant.delta_exact`).
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bc_model import TAU_ALG, CanonicalBC, Family
from .errors import ConditionViolated, UndefinedCondition
from .potential import (Potential, Smoothness, Verdict, endpoint_condition,
                        sine_decay_condition)

TAU_MULT = 1e-4


class Regime(str, enum.Enum):
    UNPERTURBED = "Unperturbed"
    L1 = "L1"
    AC = "AC"


def window_center(sigma: int, n: int) -> float:
    return 2 * math.pi * n if sigma == 1 else (2 * n + 1) * math.pi


def principal_sqrt(z: complex) -> complex:
    """Square root with Re >= 0, and Im >= 0 when Re = 0."""
    z = complex(z)
    w = cmath.sqrt(complex(z.real, z.imag + 0.0))
    if w.real < 0 or (w.real == 0 and w.imag < 0):
        w = -w
    if w.real == 0:
        w = complex(0.0, abs(w.imag))
    return w


@dataclass(frozen=True)
class Discriminant:
    name: str
    value: complex
    sqrt_value: complex

    @classmethod
    def of(cls, name: str, value: complex) -> "Discriminant":
        return cls(name, complex(value), principal_sqrt(value))


def discriminant(cbc: CanonicalBC, q0: float, q1: float, variant: str = "printed") -> Discriminant:
    p, r = cbc.p, cbc.r
    if variant not in ("printed", "corrected"):
        raise ValueError(f"unknown variant {variant!r}")
    jump = q0 - q1
    if cbc.sigma == 0 and variant == "printed":
        jump = q0 + q1
    if cbc.family is Family.T1:
        name = "D" if cbc.sigma == 1 else "D2"
        value = 2 * (1 - p * p) * jump - (2 * r) ** 2
    else:
        name = "D3" if cbc.sigma == 1 else "D4"
        value = 2 * (p * p - 1) * jump - (2 * r) ** 2
    return Discriminant.of(name, value)


@dataclass(frozen=True)
class AsymptoticPrediction:
    family: Family
    sigma: int
    regime: Regime
    n: int
    j: int
    mu_pred: complex
    order_term: float
    variant: str = "printed"


def _shift(cbc: CanonicalBC, n: int) -> complex:
    """First-order shift of the second root of the q = 0 determinant."""
    p, r = cbc.p, cbc.r
    c = window_center(cbc.sigma, n)
    if cbc.family is Family.T1:
        return r / ((p - 1) * math.pi * n) if cbc.sigma == 1 else 2 * r / ((p + 1) * c)
    return r / ((1 - p) * math.pi * n) if cbc.sigma == 1 else 2 * r / ((p + 1) * c)


def _ac_offset(cbc: CanonicalBC, n: int, disc: Discriminant, j: int) -> complex:
    p, r = cbc.p, cbc.r
    c = window_center(cbc.sigma, n)
    sgn = -1 if j == 1 else 1
    root = 1j * disc.sqrt_value
    if cbc.family is Family.T1:
        if cbc.sigma == 1:
            return (2 * r + sgn * root) / (4 * (p - 1) * math.pi * n)
        return (2 * r + sgn * root) / (2 * (p + 1) * c)
    if cbc.sigma == 1:
        return (-2 * r + sgn * root) / (4 * (p - 1) * math.pi * n)
    return (2 * r + sgn * root) / (2 * (p + 1) * c)


def check_regime(cbc: CanonicalBC, regime: Regime, q: Potential | None,
                 variant: str = "printed", n_range: Sequence[int] = range(5, 41)) -> None:
    """Raise ConditionViolated when the hypothesis of ``regime`` fails for q."""
    regime = Regime(regime)
    if regime is Regime.UNPERTURBED:
        return
    if q is None:
        raise ConditionViolated(f"regime {regime.value} needs a potential")
    if regime is Regime.AC:
        if q.smoothness is not Smoothness.AC:
            raise ConditionViolated("AC regime needs an absolutely continuous potential")
        try:
            cond = endpoint_condition(q, cbc, variant)
        except UndefinedCondition as exc:
            raise ConditionViolated(str(exc)) from exc
        if not cond.holds:
            raise ConditionViolated(
                f"endpoint condition fails: lhs={cond.lhs:.6g}, rhs={cond.rhs:.6g}"
            )
        return
    rep = sine_decay_condition(q, cbc.sigma, n_range, variant)
    if rep.verdict is Verdict.FAILS:
        raise ConditionViolated(
            f"sine-moment decay fails (tail median {rep.tail_median:.3g})"
        )


def predict(cbc: CanonicalBC, regime: Regime | str, q: Potential | None, n: int, j: int,
            variant: str = "printed", check: bool = True) -> AsymptoticPrediction:
    regime = Regime(regime)
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    if n < 1:
        raise ValueError("asymptotic formulas need n >= 1")
    if check:
        check_regime(cbc, regime, q, variant)
    c = window_center(cbc.sigma, n)
    if regime is Regime.AC:
        disc = discriminant(cbc, q.q0, q.q1, variant)
        mu = c + _ac_offset(cbc, n, disc, j)
        order = 1.0 / n
    else:
        mu = c if j == 1 else c + _shift(cbc, n)
        order = 1.0 / n**2 if regime is Regime.UNPERTURBED else 1.0 / n
    return AsymptoticPrediction(cbc.family, cbc.sigma, regime, n, j, complex(mu), order, variant)


def predict_pair(cbc, regime, q, n, variant="printed", check=False):
    return [predict(cbc, regime, q, n, j, variant, check) for j in (1, 2)]


def auto_regime(q: Potential, cbc: CanonicalBC, variant: str = "printed",
                n_range: Sequence[int] = range(5, 41)) -> tuple[Regime, str]:
    """AC when the endpoint condition holds, else L1 when the decay holds, else Unperturbed."""
    if q.smoothness is Smoothness.AC:
        try:
            if endpoint_condition(q, cbc, variant).holds:
                return Regime.AC, "endpoint condition holds"
        except UndefinedCondition as exc:
            note = f"endpoint condition undefined ({exc})"
        else:
            note = "endpoint condition fails"
    else:
        note = "potential is not absolutely continuous"
    rep = sine_decay_condition(q, cbc.sigma, n_range, variant)
    if rep.verdict is Verdict.HOLDS:
        return Regime.L1, f"{note}; sine-moment decay holds"
    return Regime.UNPERTURBED, f"{note}; sine-moment decay {rep.verdict.value.lower()}: unperturbed formulas only"


# ------------------------------------------------------------ residual trends

def loglog_slope(n: Sequence[float], y: Sequence[float]) -> float:
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (y > 0) & np.isfinite(y)
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(n[mask]), np.log(y[mask]), 1)[0])


@dataclass(frozen=True)
class ResidualRow:
    n: int
    j: int
    regime: str
    mu: complex
    mu_pred: complex
    r: float

    @property
    def n_r(self) -> float:
        return self.n * self.r

    @property
    def n2_r(self) -> float:
        return self.n * self.n * self.r

    def as_csv(self) -> dict:
        return {
            "n": self.n, "j": self.j, "regime": self.regime,
            "re_mu": self.mu.real, "re_mu_pred": self.mu_pred.real,
            "abs_r": self.r, "n_abs_r": self.n_r, "n2_abs_r": self.n2_r,
        }


@dataclass(frozen=True)
class SpectralReport:
    rows: list
    slopes: dict

    def by_branch(self, j: int) -> list:
        return [r for r in self.rows if r.j == j]


def residual_table(eigs: Iterable, preds: Iterable[AsymptoticPrediction]) -> SpectralReport:
    """Match eigenpairs to predictions by (n, j) and fit log(n r) against log n per branch."""
    table = {(p.n, p.j): p for p in preds}
    rows = []
    for e in sorted(eigs, key=lambda e: (e.n, e.j)):
        p = table.get((e.n, e.j))
        if p is None:
            continue
        rows.append(ResidualRow(e.n, e.j, p.regime.value, complex(e.mu), p.mu_pred, abs(e.mu - p.mu_pred)))
    slopes = {}
    for j in sorted({r.j for r in rows}):
        sub = [r for r in rows if r.j == j]
        slopes[j] = loglog_slope([r.n for r in sub], [r.n_r for r in sub])
    return SpectralReport(rows, slopes)


@dataclass(frozen=True)
class GapRecord:
    n: int
    gap: float
    predicted_gap: float
    simple: bool


def simplicity_report(eigs: Iterable, preds: Iterable[AsymptoticPrediction] | None = None,
                      tau_mult: float = TAU_MULT) -> list[GapRecord]:
    """Per-n gap |mu_{n,1} - mu_{n,2}| against the predicted gap."""
    by_n: dict[int, list] = {}
    for e in eigs:
        by_n.setdefault(e.n, []).append(e)
    pmap: dict[int, dict[int, complex]] = {}
    for p in preds or ():
        pmap.setdefault(p.n, {})[p.j] = p.mu_pred
    out = []
    for n in sorted(by_n):
        group = sorted(by_n[n], key=lambda e: e.j)
        pg = pmap.get(n, {})
        pred_gap = abs(pg[1] - pg[2]) if 1 in pg and 2 in pg else float("nan")
        if len(group) == 1 and group[0].multiplicity >= 2:
            out.append(GapRecord(n, 0.0, pred_gap, False))
            continue
        if len(group) < 2:
            continue
        gap = abs(group[0].mu - group[1].mu)
        simple = all(e.multiplicity == 1 for e in group) and gap > tau_mult
        out.append(GapRecord(n, float(gap), float(pred_gap), bool(simple)))
    return out
