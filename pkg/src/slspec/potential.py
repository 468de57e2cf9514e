"""Potentials on [0, 1], their trigonometric moments and the decay/endpoint tests.

A :class:`Potential` wraps a vectorised evaluator. All catalog constructors
return mean-zero potentials; :func:`normalize_mean` records the removed
constant in ``shift`` (the eigenvalues of the original operator are the
returned ones plus ``shift``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .bc_model import TAU_ALG, CanonicalBC, Family
from .errors import QuadratureFailure, UndefinedCondition

TAU_QUAD = 1e-12
TAU_COND = 0.02
DEFAULT_SAMPLES = 4097
MAX_IMAG_MU = 10.0

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_GL_X8, _GL_W8 = np.polynomial.legendre.leggauss(8)


class Smoothness(str, enum.Enum):
    L1 = "L1"
    AC = "AbsolutelyContinuous"


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential q on [0, 1].

    ``breakpoints`` lists interior points where q (or a derivative) jumps;
    quadrature and the ODE integrator align their panels with them. For
    sampled potentials ``nodes`` holds the sample grid and ``values`` the
    samples; the evaluator is their linear interpolant.
    """

    func: Callable[[np.ndarray], np.ndarray]
    smoothness: Smoothness = Smoothness.AC
    name: str = "custom"
    shift: float = 0.0
    breakpoints: tuple = ()
    n_samples: int = DEFAULT_SAMPLES
    nodes: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.func(x), dtype=float) * np.ones_like(x)

    @cached_property
    def grid(self) -> np.ndarray:
        if self.nodes is not None:
            return self.nodes
        return np.linspace(0.0, 1.0, self.n_samples)

    @cached_property
    def samples(self) -> np.ndarray:
        if self.values is not None:
            return self.values
        return self(self.grid)

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"

    @property
    def q0(self) -> float:
        return float(self.samples[0])

    @property
    def q1(self) -> float:
        return float(self.samples[-1])

    @cached_property
    def segments(self) -> np.ndarray:
        """Panel boundaries: 0, sorted interior breakpoints, 1."""
        inner = sorted(b for b in set(self.breakpoints) if 0.0 < b < 1.0)
        return np.array([0.0, *inner, 1.0])

    def describe(self) -> str:
        extra = "" if self.shift == 0 else f", shifted by {self.shift:.6g}"
        return f"{self.name} ({self.smoothness.value}{extra})"


@dataclass(frozen=True)
class TrigMoment:
    mu: complex
    c_mu: complex
    s_mu: complex


# ---------------------------------------------------------------- catalog

def zero() -> Potential:
    return Potential(lambda x: np.zeros_like(x), Smoothness.AC, "zero")


def cosine(k: int = 1, amplitude: float = 1.0) -> Potential:
    return Potential(
        lambda x: amplitude * np.cos(2 * np.pi * k * x), Smoothness.AC,
        f"cosine(k={k}, a={amplitude:g})", params={"k": k, "amplitude": amplitude},
    )


def sine(k: int = 1, amplitude: float = 1.0) -> Potential:
    return Potential(
        lambda x: amplitude * np.sin(2 * np.pi * k * x), Smoothness.AC,
        f"sine(k={k}, a={amplitude:g})", params={"k": k, "amplitude": amplitude},
    )


def sawtooth(amplitude: float = 1.0) -> Potential:
    """q(x) = a (x - 1/2)."""
    return Potential(
        lambda x: amplitude * (x - 0.5), Smoothness.AC, f"sawtooth(a={amplitude:g})",
        params={"amplitude": amplitude},
    )


def smoothed_step(width: float = 0.05, amplitude: float = 1.0) -> Potential:
    """a tanh((x - 1/2)/w); odd about 1/2, hence mean zero."""
    return Potential(
        lambda x: amplitude * np.tanh((x - 0.5) / width), Smoothness.AC,
        f"smoothed_step(w={width:g}, a={amplitude:g})",
        params={"width": width, "amplitude": amplitude},
    )


def step(amplitude: float = 1.0) -> Potential:
    """Discontinuous a sign(x - 1/2); an L1 potential that is not absolutely continuous."""
    return Potential(
        lambda x: amplitude * np.where(x < 0.5, -1.0, 1.0), Smoothness.L1,
        f"step(a={amplitude:g})", breakpoints=(0.5,), params={"amplitude": amplitude},
    )


def polynomial(coeffs: Sequence[float]) -> Potential:
    """sum_k coeffs[k] x^k with the mean removed."""
    coeffs = [float(c) for c in coeffs]
    mean = sum(c / (k + 1) for k, c in enumerate(coeffs))
    poly = np.polynomial.Polynomial(coeffs)
    return Potential(
        lambda x: poly(x) - mean, Smoothness.AC, f"polynomial({coeffs})",
        shift=mean, params={"coeffs": coeffs},
    )


def from_samples(values: Sequence[float], smoothness: Smoothness | str = Smoothness.L1) -> Potential:
    """Linear interpolant of uniform samples on [0, 1], mean removed.

    The mean of a piecewise-linear function is its trapezoid sum, so the
    removal is exact. Endpoint values come from the first and last sample.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("need at least two samples")
    if not np.all(np.isfinite(values)):
        raise ValueError("samples must be finite")
    nodes = np.linspace(0.0, 1.0, values.size)
    mean = float(np.trapezoid(values, nodes))
    vals = values - mean
    return Potential(
        lambda x: np.interp(x, nodes, vals), Smoothness(smoothness),
        f"samples(M={values.size})", shift=mean, breakpoints=tuple(nodes[1:-1]),
        n_samples=values.size, nodes=nodes, values=vals,
    )


CATALOG = {
    "zero": zero,
    "cosine": cosine,
    "sine": sine,
    "sawtooth": sawtooth,
    "smoothed_step": smoothed_step,
    "step": step,
    "polynomial": polynomial,
}


# ---------------------------------------------------------------- quadrature

def _panel_nodes(edges: np.ndarray, gx: np.ndarray, gw: np.ndarray):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * gx[None, :]
    w = half[:, None] * gw[None, :]
    return x.ravel(), w.ravel()


def _edges(q: Potential, panels_per_unit: int) -> np.ndarray:
    seg = q.segments
    parts = []
    for a, b in zip(seg[:-1], seg[1:]):
        k = max(1, math.ceil(panels_per_unit * (b - a)))
        parts.append(np.linspace(a, b, k + 1)[:-1])
    parts.append([1.0])
    return np.concatenate(parts)


def integrate(q: Potential, weight: Callable[[np.ndarray], np.ndarray] | None = None,
              panels: int = 16) -> float:
    """Integral of weight(x) q(x) over [0, 1] on breakpoint-aligned GL panels."""
    x, w = _panel_nodes(_edges(q, panels), _GL_X, _GL_W)
    vals = q(x) if weight is None else weight(x) * q(x)
    return complex(np.sum(w * vals)) if np.iscomplexobj(vals) else float(np.sum(w * vals))


def normalize_mean(q: Potential) -> Potential:
    """Subtract the mean of q; the removed constant accumulates in ``shift``."""
    m = integrate(q, panels=64)
    if m == 0.0:
        return q
    base = q.func
    vals = None if q.values is None else q.values - m
    return replace(q, func=lambda x: base(x) - m, shift=q.shift + m, values=vals)


def _exp_integrals(q: Potential, omega: np.ndarray, panels: int, high: bool = True) -> np.ndarray:
    """I(w) = int_0^1 e^{i w t} q(t) dt for every w in ``omega``."""
    gx, gw = (_GL_X, _GL_W) if high else (_GL_X8, _GL_W8)
    x, w = _panel_nodes(_edges(q, panels), gx, gw)
    wq = w * q(x)
    out = np.empty(omega.shape, dtype=complex)
    chunk = max(1, 2_000_000 // x.size)
    flat = omega.ravel()
    res = out.ravel()
    for i in range(0, flat.size, chunk):
        res[i:i + chunk] = np.exp(1j * np.outer(flat[i:i + chunk], x)) @ wq
    return out


def oscillatory_integrals(q: Potential, omega, tol: float = TAU_QUAD) -> np.ndarray:
    """Adaptive panel doubling for int e^{i w t} q dt; tolerance scales with e^{|Im w|}."""
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    scale = max(1.0, float(np.max(np.abs(q.samples))))
    target = tol * scale * np.exp(np.abs(omega.imag))
    panels = max(8, math.ceil(float(np.max(np.abs(omega.real), initial=0.0)) / 4))
    prev = _exp_integrals(q, omega, panels)
    for _ in range(12):
        panels *= 2
        cur = _exp_integrals(q, omega, panels)
        if np.all(np.abs(cur - prev) <= target):
            return cur
        prev = cur
    raise QuadratureFailure(f"oscillatory quadrature did not reach {tol:g}")


def trig_moments(q: Potential, mu: complex) -> TrigMoment:
    """c_mu = int cos(2 mu t) q dt and s_mu = int sin(2 mu t) q dt."""
    mu = complex(mu)
    if abs(mu.imag) > MAX_IMAG_MU:
        raise ValueError(f"|Im mu| = {abs(mu.imag):g} exceeds {MAX_IMAG_MU:g}")
    c, s = trig_moments_many(q, np.array([mu]))
    return TrigMoment(mu, complex(c[0]), complex(s[0]))


def trig_moments_many(q: Potential, mus, tol: float = TAU_QUAD) -> tuple[np.ndarray, np.ndarray]:
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    if q.is_zero:
        z = np.zeros(mus.shape, dtype=complex)
        return z, z.copy()
    ip = oscillatory_integrals(q, 2 * mus, tol)
    im = oscillatory_integrals(q, -2 * mus, tol)
    c = 0.5 * (ip + im)
    s = (ip - im) / 2j
    if np.all(mus.imag == 0):
        c, s = c.real.astype(complex), s.real.astype(complex)
    return c, s


def moment_table(q: Potential, ns: Sequence[int], sigma: int = 1) -> list[dict]:
    """Rows (n, c, s, n*s) with mu at the window centre of index n."""
    ns = np.asarray(list(ns), dtype=int)
    mus = 2 * np.pi * ns if sigma == 1 else (2 * ns + 1) * np.pi
    c, s = trig_moments_many(q, mus.astype(complex))
    return [
        {"n": int(n), "c": float(ci.real), "s": float(si.real), "n_s": float(n * si.real)}
        for n, ci, si in zip(ns, c, s)
    ]


# ---------------------------------------------------------------- conditions

class Verdict(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DecayReport:
    sigma: int
    variant: str
    n: np.ndarray
    d: np.ndarray
    tail_median: float
    tail_slope: float
    verdict: Verdict


def _loglog_slope(n: np.ndarray, y: np.ndarray) -> float:
    mask = y > 0
    if mask.sum() < 2:
        return float("-inf")
    return float(np.polyfit(np.log(n[mask]), np.log(y[mask]), 1)[0])


def decay_verdict(n: np.ndarray, d: np.ndarray, tau: float = TAU_COND) -> tuple[Verdict, float, float]:
    """Classify a sequence that should be o(1) when the decay condition holds.

    Holds when the last-quartile median is below tau. Fails when it is at
    least 10 tau, or at least tau while the tail is flat (log-log slope above
    -0.3). Anything else is inconclusive.
    """
    n = np.asarray(n, dtype=float)
    d = np.asarray(d, dtype=float)
    k = max(1, len(d) // 4)
    med = float(np.median(d[-k:]))
    half = max(2, len(d) // 2)
    slope = _loglog_slope(n[-half:], d[-half:]) if len(d) >= 2 else float("nan")
    if med < tau:
        return Verdict.HOLDS, med, slope
    if med >= 10 * tau or slope > -0.3:
        return Verdict.FAILS, med, slope
    return Verdict.INCONCLUSIVE, med, slope


def sine_decay_condition(q: Potential, sigma: int, n_range: Sequence[int],
                         variant: str = "printed", tau: float = TAU_COND,
                         tol: float = TAU_QUAD) -> DecayReport:
    """d_n = n |int sin(w_n t) q dt| with the sigma-dependent frequency.

    sigma = 1 uses w_n = 2 pi n. For sigma = 0 the ``printed`` variant uses
    w_n = (2n+1) pi and the ``corrected`` variant w_n = 2 (2n+1) pi, which is
    the frequency of s_mu at the window centre mu = (2n+1) pi.
    """
    n = np.asarray(list(n_range), dtype=int)
    if n.size == 0:
        raise ValueError("empty n_range")
    if sigma == 1:
        w = 2 * np.pi * n
    elif variant == "printed":
        w = (2 * n + 1) * np.pi
    elif variant == "corrected":
        w = 2 * (2 * n + 1) * np.pi
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if q.is_zero:
        d = np.zeros(n.size)
    else:
        _, s = trig_moments_many(q, (w / 2).astype(complex), tol)
        d = n * np.abs(s)
    verdict, med, slope = decay_verdict(n, d, tau)
    return DecayReport(sigma, variant, n, d, med, slope, verdict)


def decay_on_subsequences(report: DecayReport, max_step: int = 4, tau: float = TAU_COND):
    """Best verdict over arithmetic subsequences (step 1..max_step) of a decay report.

    Returns (verdict, (offset, step)) for the first subsequence that holds,
    else the full-range verdict with ``None``.
    """
    for step_ in range(1, max_step + 1):
        for off in range(step_):
            idx = np.arange(off, report.n.size, step_)
            if idx.size < 4:
                continue
            v, _, _ = decay_verdict(report.n[idx], report.d[idx], tau)
            if v is Verdict.HOLDS:
                return Verdict.HOLDS, (off, step_)
    return report.verdict, None


@dataclass(frozen=True)
class EndpointCondition:
    holds: bool
    lhs: complex
    rhs: complex
    variant: str


def endpoint_condition(q: Potential, cbc: CanonicalBC, variant: str = "printed") -> EndpointCondition:
    """Endpoint inequality for absolutely continuous potentials.

    ``printed``: q(0) + (-1)^sigma q(1) against 2r^2/(1-p^2) (T1) or
    2r^2/(p^2-1) (T2). ``corrected``: the left side is q(0) - q(1) for both
    parities, which is what the 1/mu term of the determinant contains.
    """
    if q.smoothness is not Smoothness.AC:
        raise UndefinedCondition("endpoint values need an absolutely continuous potential")
    if abs(cbc.p * cbc.p - 1) <= TAU_ALG:
        raise UndefinedCondition("p^2 = 1: the right-hand side has a vanishing denominator")
    if variant == "printed":
        lhs = q.q0 + cbc.eps * q.q1
    elif variant == "corrected":
        lhs = q.q0 - q.q1
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if cbc.family is Family.T1:
        rhs = 2 * cbc.r**2 / (1 - cbc.p**2)
    else:
        rhs = 2 * cbc.r**2 / (cbc.p**2 - 1)
    holds = abs(lhs - rhs) > TAU_ALG * (1 + abs(rhs))
    return EndpointCondition(bool(holds), complex(lhs), complex(rhs), variant)
