"""Zero counting and root finding for analytic functions on rectangles.

Functions are supplied through their logarithm ``logf`` (vectorised,
complex-valued, any branch): phase increments are wrapped to (-pi, pi], so
both ordinary functions (``log(f(z))``) and log-scaled determinants from a
factorisation can be used.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BoundaryZero, NonConvergence

TAU_BND = 1e-7
TAU_MULT = 1e-4
N_BOUNDARY = 512
MAX_DEPTH = 8

LogFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    @classmethod
    def around(cls, center: complex, half_w: float, half_h: float | None = None) -> "Rect":
        half_h = half_w if half_h is None else half_h
        c = complex(center)
        return cls(c.real - half_w, c.real + half_w, c.imag - half_h, c.imag + half_h)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def inflate(self, factor: float) -> "Rect":
        dx = 0.5 * self.width * factor
        dy = 0.5 * self.height * factor
        return Rect(self.x0 - dx, self.x1 + dx, self.y0 - dy, self.y1 + dy)

    def contains(self, z: complex) -> bool:
        return self.x0 <= z.real <= self.x1 and self.y0 <= z.imag <= self.y1

    def point(self, t: np.ndarray) -> np.ndarray:
        """Counter-clockwise perimeter parameterisation with t in [0, 4)."""
        t = np.asarray(t, dtype=float)
        side = np.floor(t).astype(int) % 4
        u = t - np.floor(t)
        x = np.select(
            [side == 0, side == 1, side == 2, side == 3],
            [self.x0 + u * self.width, np.full_like(u, self.x1), self.x1 - u * self.width, np.full_like(u, self.x0)],
        )
        y = np.select(
            [side == 0, side == 1, side == 2, side == 3],
            [np.full_like(u, self.y0), self.y0 + u * self.height, np.full_like(u, self.y1), self.y1 - u * self.height],
        )
        return x + 1j * y

    def split(self, shift: float = 0.0) -> tuple["Rect", "Rect"]:
        """Bisect the longer side; ``shift`` moves the cut by a fraction of that side."""
        if self.width >= self.height:
            xm = 0.5 * (self.x0 + self.x1) + shift * self.width
            return Rect(self.x0, xm, self.y0, self.y1), Rect(xm, self.x1, self.y0, self.y1)
        ym = 0.5 * (self.y0 + self.y1) + shift * self.height
        return Rect(self.x0, self.x1, self.y0, ym), Rect(self.x0, self.x1, ym, self.y1)


def _wrap(a: np.ndarray) -> np.ndarray:
    return (a + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class BoundaryTrace:
    z: np.ndarray
    logf: np.ndarray
    dphase: np.ndarray

    @property
    def winding(self) -> int:
        return int(round(float(np.sum(self.dphase)) / (2 * np.pi)))


def _trace_closed(points: Callable[[np.ndarray], np.ndarray], logf: LogFn, n_init: int,
                  period: float, tau_bnd: float, max_rounds: int = 40) -> BoundaryTrace:
    t = np.linspace(0.0, period, n_init, endpoint=False)
    z = points(t)
    L = np.asarray(logf(z), dtype=complex)
    for _ in range(max_rounds):
        if not np.all(np.isfinite(L)):
            raise BoundaryZero("function vanishes or overflows on the contour")
        mod = L.real
        if np.min(mod) <= np.log(tau_bnd) + np.median(mod):
            raise BoundaryZero("near-zero value on the contour")
        dph = _wrap(np.diff(np.append(L.imag, L.imag[0])))
        bad = np.abs(dph) >= np.pi / 2
        if not bad.any():
            total = float(np.sum(dph)) / (2 * np.pi)
            if abs(total - round(total)) < 0.05:
                zz = np.append(z, z[0])
                return BoundaryTrace(zz, np.append(L, L[0]), dph)
            bad = np.abs(dph) >= np.pi / 8
        t_next = np.append(t[1:], period)
        new_t = 0.5 * (t[bad] + t_next[bad])
        new_L = np.asarray(logf(points(new_t)), dtype=complex)
        t = np.concatenate([t, new_t])
        L = np.concatenate([L, new_L])
        order = np.argsort(t, kind="stable")
        t, L = t[order], L[order]
        z = points(t)
    raise BoundaryZero("phase refinement did not settle; a zero is likely near the contour")


def trace_rect(logf: LogFn, rect: Rect, n_init: int = N_BOUNDARY, tau_bnd: float = TAU_BND) -> BoundaryTrace:
    return _trace_closed(rect.point, logf, n_init, 4.0, tau_bnd)


def circle_winding(logf: LogFn, center: complex, radius: float, n_init: int = 64) -> int:
    def pts(t):
        return center + radius * np.exp(1j * np.asarray(t))

    return _trace_closed(pts, logf, n_init, 2 * np.pi, tau_bnd=1e-12).winding


@dataclass(frozen=True)
class CountResult:
    count: int
    rect: Rect
    trace: BoundaryTrace
    inflations: int


def count_zeros_rect(logf: LogFn, rect: Rect, n_init: int = N_BOUNDARY, tau_bnd: float = TAU_BND,
                     inflate: float = 0.03, max_inflations: int = 5) -> CountResult:
    """Winding number over the rectangle boundary, inflating by 3% on boundary zeros."""
    r = rect
    for k in range(max_inflations + 1):
        try:
            tr = trace_rect(logf, r, n_init, tau_bnd)
            return CountResult(tr.winding, r, tr, k)
        except BoundaryZero:
            r = r.inflate(inflate)
    raise BoundaryZero(f"zero on the boundary of {rect} after {max_inflations} inflations")


def moment_estimates(trace: BoundaryTrace, count: int, center: complex, scale: float) -> np.ndarray:
    """Approximate zeros from discrete contour moments of d(log f)."""
    if count <= 0:
        return np.empty(0, dtype=complex)
    dL = np.diff(trace.logf.real) + 1j * trace.dphase
    zm = 0.5 * (trace.z[:-1] + trace.z[1:])
    w = (zm - center) / scale
    sums = np.array([np.sum(w**k * dL) / (2j * np.pi) for k in range(1, count + 1)])
    # Newton identities: power sums -> elementary symmetric polynomials
    e = np.zeros(count + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, count + 1):
        acc = 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * sums[i - 1]
        e[k] = acc / k
    coeffs = [(-1) ** k * e[k] for k in range(count + 1)]
    return center + scale * np.roots(coeffs)


def _log_derivative(logf: LogFn, z: complex) -> complex:
    """f'(z)/f(z) from central differences of f / f(z) (safe next to a zero)."""
    h = 1e-6 * (1 + abs(z))
    with np.errstate(all="ignore"):
        L = np.asarray(logf(np.array([z, z + h, z - h, z + 1j * h, z - 1j * h])), dtype=complex)
        r = np.exp(L[1:] - L[0])
        dx = (r[0] - r[1]) / (2 * h)
        dy = (r[2] - r[3]) / (2 * h)
    # average the two directional estimates of the complex derivative
    return 0.5 * (dx - 1j * dy)


def newton_log(logf: LogFn, z0: complex, known: Sequence[tuple[complex, int]] = (),
               max_iter: int = 60, tol: float = 1e-13):
    """Newton on f using its log-derivative, deflated by known zeros.

    Returns (z, converged).
    """
    z = complex(z0)
    last = np.inf
    for _ in range(max_iter):
        d = _log_derivative(logf, z)
        for r, m in known:
            d -= m / (z - r)
        if d == 0 or not np.isfinite(d):
            return z, False
        step = 1.0 / d
        if abs(step) > 10 * max(abs(last), 1.0) and np.isfinite(last):
            step *= 0.5
        z -= step
        if abs(step) <= tol * (1 + abs(z)):
            return z, True
        # noise floor of f reached: steps stop shrinking while already tiny
        if abs(step) <= 1e-9 * (1 + abs(z)) and abs(step) > 0.5 * last:
            return z, True
        last = abs(step)
    return z, last <= 1e-9 * (1 + abs(z))


@dataclass(frozen=True)
class Zero:
    z: complex
    multiplicity: int


def find_zeros(logf: LogFn, rect: Rect, seeds: Sequence[complex] = (), *,
               mult_radius: float = TAU_MULT, n_init: int = N_BOUNDARY,
               depth: int = 0, max_depth: int = MAX_DEPTH, count: CountResult | None = None,
               max_direct: int = 4) -> tuple[list[Zero], CountResult]:
    """All zeros inside ``rect`` with multiplicities; the total matches the winding number."""
    cnt = count or count_zeros_rect(logf, rect, n_init=n_init)
    total = cnt.count
    if total <= 0:
        return [], cnt
    box = cnt.rect
    found: list[Zero] = []

    def have() -> int:
        return sum(zz.multiplicity for zz in found)

    def accept(z: complex):
        if not box.contains(z):
            return
        for zz in found:
            if abs(zz.z - z) <= 1e-8 * (1 + abs(z)):
                return
        try:
            m = circle_winding(logf, z, mult_radius)
        except BoundaryZero:
            m = 1
        found.append(Zero(z, max(1, m)))

    if total <= max_direct:
        scale = 0.5 * max(box.width, box.height)
        candidates = list(seeds) + list(moment_estimates(cnt.trace, total, box.center, scale))
        for s in candidates:
            if have() >= total:
                break
            z, ok = newton_log(logf, s, [(zz.z, zz.multiplicity) for zz in found])
            if ok:
                accept(z)
    if have() == total:
        return found, cnt
    if depth >= max_depth:
        raise NonConvergence(f"found {have()} of {total} zeros in {box} at depth {depth}")

    found = []
    for shift in (0.0, 0.0731, -0.0517, 0.1123):
        halves = box.split(shift)
        try:
            parts = [count_zeros_rect(logf, h, n_init=max(64, n_init // 2), max_inflations=0) for h in halves]
        except BoundaryZero:
            continue
        if sum(p.count for p in parts) != total:
            continue
        for h, p in zip(halves, parts):
            inner = [s for s in seeds if h.contains(complex(s))]
            sub, _ = find_zeros(logf, h, inner, mult_radius=mult_radius, n_init=max(64, n_init // 2),
                                depth=depth + 1, max_depth=max_depth, count=p, max_direct=max_direct)
            found.extend(sub)
        return found, cnt
    raise NonConvergence(f"could not split {box} without boundary zeros")
