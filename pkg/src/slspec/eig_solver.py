"""Eigenvalues and eigenfunctions from zeros of the characteristic determinant.

Large eigenvalues are searched window by window (square windows of
half-width pi/2 around 2 pi n for sigma = 1, around (2n+1) pi for sigma = 0).
Small ones are swept in the lambda-plane, where the determinant has no
spurious zero at the origin.

Conditions flagged ``adjoint`` are handled through their adjoint: its zeros
are conjugated, and eigenfunctions are built with the user's own rows.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .asymptotics import Regime, check_regime, predict_pair, window_center
from .bc_model import CanonicalBC
from .contour import Rect, count_zeros_rect, find_zeros
from .determinant import DeterminantContext, apply_rows
from .errors import ConditionViolated, DegenerateEigenfunction, NumericalFailure
from .potential import Potential

TAU_MULT = 1e-4
N_OUT = 2049
N0 = 5


def tau_eig(mu: complex, scale: float = 1e-8) -> float:
    return scale * (1 + abs(mu) ** 2)


@dataclass(frozen=True)
class SearchWindow:
    center: complex
    half_width: float
    n: int

    @classmethod
    def for_index(cls, sigma: int, n: int, half_width: float = math.pi / 2) -> "SearchWindow":
        return cls(complex(window_center(sigma, n)), half_width, n)

    @property
    def rect(self) -> Rect:
        return Rect.around(self.center, self.half_width)


@dataclass
class Eigenpair:
    n: int
    j: int
    mu: complex
    multiplicity: int = 1
    x: np.ndarray | None = field(default=None, repr=False)
    phi: np.ndarray | None = field(default=None, repr=False)
    det_residual: float = float("nan")
    bc_residual: float = float("nan")
    fn_residual: float = float("nan")
    ambiguous: bool = False
    source: str = "window"

    @property
    def lam(self) -> complex:
        return self.mu * self.mu

    def as_csv(self) -> dict:
        return {
            "n": self.n, "j": self.j, "re_mu": self.mu.real, "im_mu": self.mu.imag,
            "re_lambda": self.lam.real, "im_lambda": self.lam.imag,
            "multiplicity": self.multiplicity, "det_residual": self.det_residual,
            "bc_residual": self.bc_residual,
        }


@dataclass
class SolverOptions:
    n0: int = N0
    half_width: float = math.pi / 2
    tau_mult: float = TAU_MULT
    n_out: int = N_OUT
    tol_ode: float = 1e-11
    eig_scale: float = 1e-8
    regime: Regime | str = Regime.UNPERTURBED
    variant: str = "printed"
    functions: bool = True


class SpectralProblem:
    """Evaluation context for one (q, boundary conditions) pair.

    The canonical rows drive root finding; ``source_rows`` are the user's
    conditions (they differ only for adjoint-flagged forms).
    """

    def __init__(self, q: Potential, cbc: CanonicalBC, options: SolverOptions | None = None):
        self.q = q
        self.cbc = cbc
        self.opts = options or SolverOptions()
        self.ctx = DeterminantContext(q, cbc, tol=self.opts.tol_ode)
        self.source_rows = cbc.source_functionals()
        self.conjugate = bool(cbc.adjoint)

    # ----------------------------------------------------------- determinant
    def logf(self, z):
        return np.log(self.ctx.delta(np.asarray(z, dtype=complex)))

    def logf_lambda(self, lam):
        return np.log(self.ctx.delta_lambda(np.asarray(lam, dtype=complex)))

    def source_delta(self, mu) -> np.ndarray:
        mu = np.atleast_1d(np.asarray(mu, dtype=complex))
        u1c, u1s, u2c, u2s = apply_rows(self.source_rows, self.ctx.solver.monodromy(mu))
        return -2j * mu * (u1c * u2s - u1s * u2c)

    # ----------------------------------------------------------- labels
    def index_of(self, mu: complex) -> int:
        if self.cbc.sigma == 1:
            return int(round(mu.real / (2 * math.pi)))
        return max(0, int(round((mu.real / math.pi - 1) / 2)))

    def predictions(self, n: int):
        regime = Regime(self.opts.regime)
        try:
            return predict_pair(self.cbc, regime, self.q, n, self.opts.variant, check=False)
        except (ConditionViolated, ValueError, ZeroDivisionError):
            return predict_pair(self.cbc, Regime.UNPERTURBED, self.q, n, check=False)

    # ----------------------------------------------------------- windows
    def count_zeros(self, window: SearchWindow) -> int:
        return count_zeros_rect(self.logf, window.rect).count

    def solve_window(self, window: SearchWindow) -> list[Eigenpair]:
        preds = self.predictions(window.n) if window.n >= 1 else []
        seeds = [p.mu_pred for p in preds]
        zeros, _ = find_zeros(self.logf, window.rect, seeds, mult_radius=self.opts.tau_mult)
        roots = [(z.z, z.multiplicity) for z in zeros]
        if self.conjugate:
            roots = [(np.conj(z), m) for z, m in roots]
            seeds = [np.conj(s) for s in seeds]
        pairs = label_roots(window.n, roots, seeds)
        for ep in pairs:
            self.finish(ep)
        return pairs

    # ----------------------------------------------------------- low sweep
    def low_region(self) -> Rect:
        r = window_center(self.cbc.sigma, self.opts.n0) - self.opts.half_width
        h = math.pi
        return Rect(-h * h, r * r, -2 * r * h, 2 * r * h)

    def low_sweep(self) -> list[Eigenpair]:
        """Zeros with Re mu below the first asymptotic window, found in the lambda-plane."""
        region = self.low_region()
        limit = window_center(self.cbc.sigma, self.opts.n0) - self.opts.half_width

        zeros, _ = find_zeros(self.logf_lambda, region, mult_radius=self.opts.tau_mult * 8)
        roots = []
        for z in zeros:
            mu = np.sqrt(complex(z.z))
            if self.conjugate:
                mu = np.conj(mu)
            if mu.real < limit:
                roots.append((complex(mu), z.multiplicity))
        groups: dict[int, list] = {}
        for mu, m in roots:
            groups.setdefault(self.index_of(mu), []).append((mu, m))
        out = []
        for n in sorted(groups):
            for ep in label_roots(n, groups[n], []):
                ep.source = "sweep"
                self.finish(ep)
                out.append(ep)
        return out

    # ----------------------------------------------------------- eigenfunctions
    def eigenfunction(self, mu: complex, n: int | None = None):
        """Normalised eigenfunction sampled on a uniform grid, with endpoint data."""
        x = np.linspace(0.0, 1.0, self.opts.n_out)
        c, s, dc, ds = self.ctx.solver.trajectory(mu, x)
        end = (c[-1], s[-1], dc[-1], ds[-1])
        u1c, u1s, u2c, u2s = apply_rows(self.source_rows, end)
        a, b = u1c, u1s
        if abs(u1c) + abs(mu) * abs(u1s) < 1e-8 * (abs(u2c) + abs(mu) * abs(u2s)):
            a, b = u2c, u2s
        y = a * s - b * c
        dy = a * ds - b * dc
        norm = math.sqrt(abs(simpson(np.abs(y) ** 2, x=x)))
        if norm < tau_eig(mu) * 1e-8 or norm == 0:
            raise DegenerateEigenfunction(f"eigenfunction vanishes at mu={mu}")
        n = self.index_of(mu) if n is None else n
        k = 2 * n if self.cbc.sigma == 1 else 2 * n + 1
        ref = math.sqrt(2) * np.cos(k * math.pi * x)
        inner = simpson(y * ref, x=x)
        if abs(inner) > 1e-12 * norm:
            rot = np.conj(inner) / abs(inner)
        else:
            i = int(np.argmax(np.abs(y)))
            rot = np.conj(y[i]) / abs(y[i])
        phi = y * rot / norm
        dphi = dy * rot / norm
        return x, phi, dphi

    def finish(self, ep: Eigenpair) -> Eigenpair:
        mu = ep.mu
        ep.det_residual = float(abs(self.source_delta(mu)[0]))
        if not self.opts.functions or ep.multiplicity > 1:
            return ep
        x, phi, dphi = self.eigenfunction(mu, ep.n)
        data = np.array([dphi[0], dphi[-1], phi[0], phi[-1]])
        ep.bc_residual = float(np.sum(np.abs(self.source_rows @ data)))
        ep.fn_residual = equation_residual(self.q, x, phi, mu * mu)
        ep.x, ep.phi = x, phi
        tau = tau_eig(mu, self.opts.eig_scale)
        if ep.det_residual > tau or ep.bc_residual > tau * (1 + abs(mu)):
            raise NumericalFailure(
                f"residual check failed at mu={mu}: det {ep.det_residual:.3g}, bc {ep.bc_residual:.3g}"
            )
        return ep

    # ----------------------------------------------------------- driver
    def solve(self, n_min: int, n_max: int, low: bool = True, threads: int = 1) -> list[Eigenpair]:
        if n_max < n_min:
            raise ValueError("empty n range")
        if self.opts.regime is not Regime.UNPERTURBED:
            try:
                check_regime(self.cbc, Regime(self.opts.regime), self.q, self.opts.variant)
            except ConditionViolated:
                self.opts.regime = Regime.UNPERTURBED
        start = max(n_min, self.opts.n0)
        windows = [SearchWindow.for_index(self.cbc.sigma, n, self.opts.half_width)
                   for n in range(start, n_max + 1)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(self.solve_window, windows))
        else:
            parts = [self.solve_window(w) for w in windows]
        out = [ep for part in parts for ep in part]
        if low and n_min < self.opts.n0:
            out = [ep for ep in self.low_sweep() if n_min <= ep.n <= n_max] + out
        return sorted(out, key=lambda e: (e.n, e.j))


def label_roots(n: int, roots: list[tuple[complex, int]], seeds: list[complex]) -> list[Eigenpair]:
    """Assign j by distance to the (n,1) prediction; near-ties fall back to ascending Re."""
    if not roots:
        return []
    ordered = sorted(roots, key=lambda r: (r[0].real, r[0].imag))
    ambiguous = False
    if seeds and len(ordered) >= 2:
        target = seeds[0]
        dists = [abs(r[0] - target) for r in ordered]
        first = int(np.argmin(dists))
        rest = sorted(dists[:first] + dists[first + 1:])
        ratio = dists[first] / rest[0] if rest[0] > 0 else 0.0
        if 0.9 <= ratio <= 1.1:
            ambiguous = True
        else:
            ordered = [ordered[first]] + [r for i, r in enumerate(ordered) if i != first]
    return [Eigenpair(n, j + 1, complex(mu), m, ambiguous=ambiguous) for j, (mu, m) in enumerate(ordered)]


def equation_residual(q: Potential, x: np.ndarray, phi: np.ndarray, lam: complex) -> float:
    """max |-phi'' + q phi - lam phi| with a fourth-order interior stencil."""
    h = x[1] - x[0]
    d2 = (-phi[4:] + 16 * phi[3:-1] - 30 * phi[2:-2] + 16 * phi[1:-3] - phi[:-4]) / (12 * h * h)
    xi = x[2:-2]
    res = -d2 + (q(xi) - lam) * phi[2:-2]
    return float(np.max(np.abs(res)))


# ------------------------------------------------------------ functional API

def count_zeros(q: Potential, cbc: CanonicalBC, window: SearchWindow) -> int:
    return SpectralProblem(q, cbc).count_zeros(window)


def solve_window(q: Potential, cbc: CanonicalBC, window: SearchWindow,
                 options: SolverOptions | None = None) -> list[Eigenpair]:
    return SpectralProblem(q, cbc, options).solve_window(window)


def eigenfunction(q: Potential, cbc: CanonicalBC, mu: complex, n: int | None = None,
                  n_out: int = N_OUT):
    prob = SpectralProblem(q, cbc, SolverOptions(n_out=n_out))
    if abs(prob.source_delta(mu)[0]) > tau_eig(mu):
        raise ValueError(f"mu={mu} is not an eigenvalue to tolerance")
    x, phi, _ = prob.eigenfunction(mu, n)
    return x, phi
