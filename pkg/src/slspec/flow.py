"""Transfer matrices of y'' = (q - lambda) y on [0, 1].

The default integrator is a sixth-order Magnus method with three Gauss
nodes per step. Because A(x) = F + (q(x) - lambda) E with the sl(2) basis

    F = [[0, 1], [0, 0]],  E = [[0, 0], [1, 0]],  H = diag(1, -1),

every commutator in the Magnus expansion is written in closed form. The
only lambda-dependent coefficient is q(x_mid) - lambda; the higher terms
use differences of q alone, so no large cancellation happens at large
|lambda|. The step exponential of a traceless 2x2 matrix is exact.

Every fundamental matrix is stored as four arrays (m00, m01, m10, m11) so a
whole batch of spectral parameters is propagated at once.

``rk_fundamental`` is an independent adaptive Runge-Kutta route (scipy
DOP853) used for cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StiffnessFailure
from .potential import Potential

TAU_ODE = 1e-11
_S15 = math.sqrt(15.0)
_GAUSS = np.array([0.5 - _S15 / 10, 0.5, 0.5 + _S15 / 10])
MIN_STEPS = 32
MAX_STEPS = 1 << 16


def step_edges(q: Potential, n_steps: int, extra: np.ndarray | None = None) -> np.ndarray:
    """Step boundaries aligned with the breakpoints of q (and optional extra nodes)."""
    seg = q.segments
    if extra is not None:
        seg = np.union1d(seg, np.asarray(extra, dtype=float))
    parts = []
    for a, b in zip(seg[:-1], seg[1:]):
        k = max(1, math.ceil(n_steps * (b - a) - 1e-9))
        parts.append(np.linspace(a, b, k + 1)[:-1])
    parts.append([1.0])
    return np.concatenate(parts)


def _sinhc(z):
    """(cosh(sqrt z), sinh(sqrt z)/sqrt z), accurate for small z."""
    w = np.sqrt(z)
    small = np.abs(z) < 1e-6
    ch = np.cosh(w)
    with np.errstate(invalid="ignore", divide="ignore"):
        sc = np.sinh(w) / np.where(small, 1.0, w)
    series = 1 + z / 6 + z * z / 120 + z**3 / 5040
    sc = np.where(small, series, sc)
    return ch, sc


def step_propagators(q: Potential, lam: np.ndarray, edges: np.ndarray):
    """Magnus step matrices for each interval of ``edges`` and each lambda.

    Returns four arrays of shape (n_steps, len(lam)).
    """
    lam = np.asarray(lam, dtype=complex)[None, :]
    h = np.diff(edges)[:, None]
    x0 = edges[:-1][:, None]
    q1, q2, q3 = (q(x0[:, 0] + c * h[:, 0])[:, None] for c in _GAUSS)
    v2 = q2 - lam
    k2 = (_S15 * h / 3) * (q3 - q1)
    k3 = (10 * h / 3) * (q3 - 2 * q2 + q1)
    # X = -20 a1 - a3 + C1,  Y = a2 + C2 in the (F, E, H) basis
    xF = -20 * h
    xE = -(20 * h * v2 + k3)
    xH = h * k2
    yF = h * h * k2 / 30
    yE = k2 - h * h * k2 * v2 / 30
    yH = -h * k3 / 30
    wF = h - 2 * (xF * yH - xH * yF) / 240
    wE = h * v2 + k3 / 12 + 2 * (xE * yH - xH * yE) / 240
    wH = (xF * yE - xE * yF) / 240
    wF = np.broadcast_to(wF, v2.shape)
    wH = np.broadcast_to(wH, v2.shape)
    ch, sc = _sinhc(wH * wH + wF * wE)
    return ch + sc * wH, sc * wF, sc * wE, ch - sc * wH


def _mul(a, b):
    """Batched 2x2 product a @ b on 4-tuples."""
    a00, a01, a10, a11 = a
    b00, b01, b10, b11 = b
    return (
        a00 * b00 + a01 * b10,
        a00 * b01 + a01 * b11,
        a10 * b00 + a11 * b10,
        a10 * b01 + a11 * b11,
    )


def tree_product(props):
    """P[n-1] ... P[1] P[0] along axis 0 by pairwise reduction."""
    p = tuple(np.asarray(m) for m in props)
    while p[0].shape[0] > 1:
        n = p[0].shape[0]
        odd = n % 2
        even = tuple(m[: n - odd] for m in p)
        prod = _mul(tuple(m[1::2] for m in even), tuple(m[0::2] for m in even))
        if odd:
            prod = tuple(np.concatenate([pm, m[-1:]], axis=0) for pm, m in zip(prod, p))
        p = prod
    return tuple(m[0] for m in p)


def prefix_products(props):
    """Cumulative products Q[k] = P[k] ... P[0] (Hillis-Steele scan)."""
    q = [np.array(m) for m in props]
    n = q[0].shape[0]
    shift = 1
    while shift < n:
        hi = tuple(m[shift:] for m in q)
        lo = tuple(m[:-shift] for m in q)
        new = _mul(hi, lo)
        for m, nm in zip(q, new):
            m[shift:] = nm
        shift *= 2
    return tuple(q)


def _scaled(m, mu):
    """Monodromy in the mu-balanced form [[c, mu s], [c'/mu, s']] / e^{|Im mu|}."""
    mu = np.where(np.abs(mu) < 1.0, 1.0, np.abs(mu))
    return np.stack([m[0], m[1] * mu, m[2] / mu, m[3]])


@dataclass
class TransferSolver:
    """Adaptive Magnus propagation for a fixed potential.

    The number of uniform steps is chosen by comparing N against 2N on the
    balanced monodromy and cached per magnitude bucket of |mu|, so repeated
    calls near the same window reuse it.
    """

    q: Potential
    tol: float = TAU_ODE

    def __post_init__(self):
        self._steps: dict[int, int] = {}

    @staticmethod
    def _bucket(mu_abs: float) -> int:
        return max(3, math.ceil(math.log2(max(mu_abs, 1.0))))

    def _monodromy_at(self, mu: np.ndarray, n_steps: int):
        edges = step_edges(self.q, n_steps)
        return tree_product(step_propagators(self.q, mu * mu, edges))

    def steps_for(self, mu: np.ndarray) -> int:
        mu = np.atleast_1d(np.asarray(mu, dtype=complex))
        b = self._bucket(float(np.max(np.abs(mu))))
        if b in self._steps:
            return self._steps[b]
        if self.q.is_zero:
            self._steps[b] = 1
            return 1
        im = max(0.5, float(np.max(np.abs(mu.imag))))
        probe = np.array([2.0**b + 1j * im, 0.75 * 2.0**b + 0.3j])
        growth = np.exp(np.abs(probe.imag))
        n = MIN_STEPS
        prev = _scaled(self._monodromy_at(probe, n), probe) / growth
        last_err = np.inf
        while True:
            n *= 2
            if n > MAX_STEPS:
                raise StiffnessFailure(f"no step count up to {MAX_STEPS} reaches tol {self.tol:g}")
            cur = _scaled(self._monodromy_at(probe, n), probe) / growth
            err = float(np.max(np.abs(cur - prev)))
            # stop at the tolerance, or once doubling no longer helps (roundoff floor)
            if err <= self.tol or (err < 1e3 * self.tol and err > last_err / 4):
                break
            last_err = err
            prev = cur
        self._steps[b] = n
        return n

    def monodromy(self, mu, n_steps: int | None = None):
        """(c, s, c', s') at x = 1 for each mu, with c(0)=s'(0)=1, s(0)=c'(0)=0."""
        mu = np.atleast_1d(np.asarray(mu, dtype=complex))
        if n_steps is None:
            n_steps = self.steps_for(mu)
        out = self._monodromy_at(mu, n_steps)
        return tuple(np.asarray(m) for m in out)

    def trajectory(self, mu: complex, x_out: np.ndarray, refine: int | None = None):
        """Fundamental matrix at every node of ``x_out`` (which must contain 0 and 1)."""
        mu = np.atleast_1d(np.asarray(mu, dtype=complex))
        n_steps = self.steps_for(mu)
        if refine is None:
            refine = max(1, math.ceil(n_steps / (len(x_out) - 1)))
        edges = step_edges(self.q, refine * (len(x_out) - 1), extra=x_out)
        props = step_propagators(self.q, mu * mu, edges)
        cum = prefix_products(props)
        idx = np.searchsorted(edges, x_out)
        full = []
        for m, init in zip(cum, (1.0, 0.0, 0.0, 1.0)):
            arr = np.concatenate([np.full((1, m.shape[1]), init, dtype=complex), m], axis=0)
            full.append(arr[idx, 0])
        return tuple(full)


@dataclass(frozen=True)
class FundamentalPair:
    """y1 = e^{i mu x}(1 + O(1/mu)) and y2 = e^{-i mu x}(1 + O(1/mu)) sampled on ``x``."""

    mu: complex
    x: np.ndarray
    y1: np.ndarray
    dy1: np.ndarray
    y2: np.ndarray
    dy2: np.ndarray

    def wronskian(self) -> np.ndarray:
        return self.y1 * self.dy2 - self.dy1 * self.y2

    def boundary_data(self, which: int) -> np.ndarray:
        """(y'(0), y'(1), y(0), y(1)) for solution 1 or 2."""
        y, dy = (self.y1, self.dy1) if which == 1 else (self.y2, self.dy2)
        return np.array([dy[0], dy[-1], y[0], y[-1]])


def fundamental_pair(q: Potential, mu: complex, n_out: int = 257,
                     solver: TransferSolver | None = None, method: str = "magnus",
                     tol: float = TAU_ODE) -> FundamentalPair:
    mu = complex(mu)
    if mu == 0:
        raise ValueError("mu must be nonzero")
    if abs(mu.imag) > 10:
        raise ValueError("|Im mu| must not exceed 10")
    x = np.linspace(0.0, 1.0, n_out)
    if method == "rk":
        return rk_fundamental(q, mu, x, tol=tol)
    solver = solver or TransferSolver(q, tol=tol)
    c, s, dc, ds = solver.trajectory(mu, x)
    return FundamentalPair(mu, x, c + 1j * mu * s, dc + 1j * mu * ds,
                           c - 1j * mu * s, dc - 1j * mu * ds)


def rk_fundamental(q: Potential, mu: complex, x: np.ndarray, tol: float = TAU_ODE) -> FundamentalPair:
    """Adaptive DOP853 integration of both solutions.

    For |mu| > 100 pi the slowly varying envelopes u = e^{-+i mu x} y are
    integrated instead: u'' = q u -+ 2 i mu u'.
    """
    mu = complex(mu)
    lam = mu * mu
    envelope = abs(mu) > 100 * np.pi
    cols = []
    for sgn in (1, -1):
        if envelope:
            k = sgn * 1j * mu

            def rhs(t, y, k=k):
                return [y[1], q(np.array(t)) * y[0] - 2 * k * y[1]]

            y0 = [1.0 + 0j, 0.0 + 0j]
        else:
            def rhs(t, y):
                return [y[1], (q(np.array(t)) - lam) * y[0]]

            y0 = [1.0 + 0j, sgn * 1j * mu]
        seg = q.segments
        ys, dys = [], []
        state = np.array(y0, dtype=complex)
        for a, b in zip(seg[:-1], seg[1:]):
            mask = (x >= a) & ((x < b) | (b == 1.0))
            pts = x[mask]
            sol = solve_ivp(rhs, (a, b), state, method="DOP853", rtol=tol, atol=tol * 1e-2,
                            t_eval=np.unique(np.concatenate([pts, [b]])), dense_output=False)
            if not sol.success:
                raise StiffnessFailure(sol.message)
            keep = np.isin(sol.t, pts)
            ys.append(sol.y[0][keep])
            dys.append(sol.y[1][keep])
            state = sol.y[:, -1]
        u, du = np.concatenate(ys), np.concatenate(dys)
        if envelope:
            k = sgn * 1j * mu
            ph = np.exp(k * x)
            u, du = ph * u, ph * (du + k * u)
        cols.append((u, du))
    (y1, dy1), (y2, dy2) = cols
    return FundamentalPair(mu, x, y1, dy1, y2, dy2)
