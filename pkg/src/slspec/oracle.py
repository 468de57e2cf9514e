"""Finite-difference eigenvalue oracle.

The operator is discretised on x_k = k h, h = 1/N: interior rows use the
three-point second difference of -y'' + q y, and the two boundary rows use
second-order one-sided derivative stencils. Eigenvalues are the zeros of
lambda -> det(A - lambda B), with B the identity on interior rows and zero on
boundary rows.

Two evaluations of the determinant are provided. ``pencil_det`` factorises
the sparse matrix (SuperLU). ``pencil_det_recurrence`` runs the interior
rows as a two-term recurrence for a whole batch of lambda values and takes a
2x2 boundary determinant; it equals det(A - lambda B) up to a factor that
does not depend on lambda, so both have the same zeros and winding numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .contour import Rect, find_zeros
from .flow import _mul
from .errors import SingularFactorization
from .potential import Potential

N_DEFAULT = 2000
DIRICHLET_ROWS = np.array([[0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass
class PencilProblem:
    N: int
    A: sp.csc_matrix
    B: np.ndarray
    rows: np.ndarray
    qk: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return 1.0 / self.N


def _bc_row(r: np.ndarray, N: int, h: float) -> dict[int, complex]:
    """Coefficients of one boundary functional on the nodal values."""
    out: dict[int, complex] = {}

    def add(k, v):
        out[k] = out.get(k, 0) + v

    add(0, -3 * r[0] / (2 * h))
    add(1, 4 * r[0] / (2 * h))
    add(2, -r[0] / (2 * h))
    add(N, 3 * r[1] / (2 * h))
    add(N - 1, -4 * r[1] / (2 * h))
    add(N - 2, r[1] / (2 * h))
    add(0, r[2])
    add(N, r[3])
    return out


def build_pencil(q: Potential, rows: np.ndarray, N: int = N_DEFAULT) -> PencilProblem:
    rows = np.asarray(rows, dtype=complex)
    h = 1.0 / N
    x = np.linspace(0.0, 1.0, N + 1)
    qk = q(x)
    ii, jj, vv = [], [], []
    for k in range(1, N):
        ii += [k, k, k]
        jj += [k - 1, k, k + 1]
        vv += [-1 / h**2, 2 / h**2 + qk[k], -1 / h**2]
    for row_idx, r in ((0, rows[0]), (N, rows[1])):
        for col, v in _bc_row(r, N, h).items():
            ii.append(row_idx)
            jj.append(col)
            vv.append(v)
    A = sp.csc_matrix((np.array(vv, dtype=complex), (ii, jj)), shape=(N + 1, N + 1))
    B = np.ones(N + 1)
    B[0] = B[N] = 0.0
    return PencilProblem(N, A, B, rows, qk)


def _perm_parity(perm: np.ndarray) -> int:
    seen = np.zeros(perm.size, dtype=bool)
    parity = 0
    for i in range(perm.size):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


def pencil_det(prob: PencilProblem, lam: complex) -> complex:
    """log det(A - lam B) as log|det| + i arg(det), from a sparse LU factorisation."""
    M = (prob.A - sp.diags(lam * prob.B)).tocsc()
    try:
        lu = splu(M, permc_spec="NATURAL", diag_pivot_thresh=1.0)
    except RuntimeError as exc:
        raise SingularFactorization(f"exactly singular at lambda={lam}") from exc
    d = lu.U.diagonal()
    if np.any(d == 0):
        raise SingularFactorization(f"exactly singular at lambda={lam}")
    logabs = float(np.sum(np.log(np.abs(d))))
    phase = float(np.sum(np.angle(d)))
    if _perm_parity(lu.perm_r) ^ _perm_parity(lu.perm_c):
        phase += math.pi
    return complex(logabs, phase)


def pencil_det_recurrence(prob: PencilProblem, lam) -> np.ndarray:
    """log of the boundary 2x2 determinant of discrete fundamental solutions.

    Vectorised over ``lam``; differs from :func:`pencil_det` by an additive
    lambda-independent constant.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    N, h = prob.N, prob.h
    w = prob.qk[1:N, None] - lam[None, :]  # (N-1, B)
    # state (y_k, e_{k-1}) with e_{k-1} = (y_k - y_{k-1}) / h:
    #   e_k = e_{k-1} + h w_k y_k,  y_{k+1} = y_k + h e_k,
    # i.e. T_k = I + X_k; products are kept as I + X to avoid losing h^2 w against 1
    x00 = h * h * w
    x01 = np.full_like(w, h)
    x10 = h * w
    x11 = np.zeros_like(w)
    X = _tree_identity_plus((x00, x01, x10, x11))
    g1, gl = w[0], w[-1]
    sols = []
    # solution a: (y0, y1) = (1, 0); solution b: (0, 1)
    for y0, y1 in ((1.0, 0.0), (0.0, 1.0)):
        e0 = (y1 - y0) / h
        e1 = e0 + h * g1 * y1
        yN = y1 + X[0] * y1 + X[1] * e0
        eN1 = e0 + X[2] * y1 + X[3] * e0
        yN1 = yN - h * eN1
        eN2 = eN1 - h * gl * yN1
        sols.append((y0, yN, e0, e1, eN1, eN2))
    dets = []
    for r in prob.rows:
        vals = []
        for y0, yN, e0, e1, eN1, eN2 in sols:
            # one-sided stencils written with the difference quotients e
            d0 = (3 * e0 - e1) / 2
            d1 = (3 * eN1 - eN2) / 2
            vals.append(r[0] * d0 + r[1] * d1 + r[2] * y0 + r[3] * yN)
        dets.append(vals)
    (a0, b0), (a1, b1) = dets
    return np.log(a0 * b1 - b0 * a1)


def _tree_identity_plus(xs):
    """X with I + X = (I + X_{n-1}) ... (I + X_0), reduced pairwise."""
    x = tuple(np.asarray(m) for m in xs)
    while x[0].shape[0] > 1:
        n = x[0].shape[0]
        odd = n % 2
        a = tuple(m[0:n - odd:2] for m in x)   # earlier factor
        b = tuple(m[1:n - odd + 1:2] for m in x)  # later factor
        ba = _mul(b, a)
        comb = tuple(ai + bi + ci for ai, bi, ci in zip(a, b, ba))
        if odd:
            comb = tuple(np.concatenate([cm, m[-1:]], axis=0) for cm, m in zip(comb, x))
        x = comb
    return tuple(m[0] for m in x)


def pencil_logf(prob: PencilProblem, method: str = "recurrence"):
    if method == "recurrence":
        return lambda z: pencil_det_recurrence(prob, z)
    if method == "lu":
        return lambda z: np.array([pencil_det(prob, complex(v)) for v in np.atleast_1d(z)])
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class OracleEigenvalue:
    lam: complex
    error_bar: float
    multiplicity: int = 1


def error_bar(lam: complex, h: float, C: float) -> float:
    return C * h * h * (1 + abs(lam) ** 2)


def oracle_eigs(prob: PencilProblem, region: Rect, count_hint: int | None = None,
                C: float = 1.0, method: str = "recurrence") -> list[OracleEigenvalue]:
    """Pencil eigenvalues inside a lambda-plane rectangle, with O(h^2) error bars."""
    logf = pencil_logf(prob, method)
    zeros, cnt = find_zeros(logf, region, mult_radius=1e-3)
    out = [OracleEigenvalue(complex(z.z), error_bar(z.z, prob.h, C), z.multiplicity) for z in zeros]
    return sorted(out, key=lambda e: (e.lam.real, e.lam.imag))


def closed_form_lambdas(cbc, region: Rect) -> np.ndarray:
    """Eigenvalues of the q = 0 problem inside ``region``, from the closed-form determinant.

    Delta_0(mu) / mu is even in mu, hence an entire function of lambda.
    """
    from .determinant import DeterminantKind, Form, delta_closed

    kind = DeterminantKind(Form.UNPERTURBED, cbc.family, cbc.sigma)

    def logf(lam):
        mu = np.sqrt(np.asarray(lam, dtype=complex))
        small = np.abs(mu) < 1e-8
        mu = np.where(small, 1e-8, mu)
        return np.log(delta_closed(kind, cbc, mu) / mu)

    zeros, _ = find_zeros(logf, region, mult_radius=1e-3)
    lams = np.array([z.z for z in zeros for _ in range(z.multiplicity)], dtype=complex)
    if cbc.adjoint:
        lams = np.conj(lams)
    return np.sort_complex(lams)


def calibrate_constant(cbc, region: Rect, N: int = N_DEFAULT, safety: float = 2.0) -> float:
    """Error-bar constant from the q = 0 problem with the same boundary conditions.

    C = safety * max |lam_fd - lam_exact| / (h^2 (1 + |lam|^2)), where the exact
    eigenvalues come from the closed-form determinant.
    """
    from .potential import zero

    exact = closed_form_lambdas(cbc, region)
    prob = build_pencil(zero(), cbc.source_functionals(), N)
    fd = np.array([e.lam for e in oracle_eigs(prob, region)])
    h = prob.h
    ratios = []
    for lam in exact:
        if fd.size == 0:
            break
        k = int(np.argmin(np.abs(fd - lam)))
        ratios.append(abs(fd[k] - lam) / (h * h * (1 + abs(lam) ** 2)))
    return safety * max(ratios, default=1.0 / 12)


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    j: int
    lam_solver: complex
    lam_oracle: complex
    error_bar: float

    @property
    def diff(self) -> float:
        return abs(self.lam_solver - self.lam_oracle)

    @property
    def agrees(self) -> bool:
        return self.diff <= self.error_bar

    def as_csv(self) -> dict:
        return {
            "n": self.n, "j": self.j,
            "lambda_solver": _cfmt(self.lam_solver), "lambda_oracle": _cfmt(self.lam_oracle),
            "abs_diff": self.diff, "error_bar": self.error_bar,
        }


def _cfmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12e}{z.imag + 0.0:+.12e}j"


def compare_with_solver(eigs, oracle: list[OracleEigenvalue]) -> list[ComparisonRow]:
    """Pair each solver eigenvalue with the nearest unused oracle eigenvalue."""
    pool = list(oracle)
    rows = []
    for e in sorted(eigs, key=lambda e: (e.n, e.j)):
        for _ in range(e.multiplicity):
            if not pool:
                break
            k = int(np.argmin([abs(o.lam - e.lam) for o in pool]))
            o = pool.pop(k)
            rows.append(ComparisonRow(e.n, e.j, complex(e.lam), o.lam, o.error_bar))
    return rows
