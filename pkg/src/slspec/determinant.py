"""Characteristic determinants.

With c, s the cosine/sine-type solutions (c(0)=1, c'(0)=0, s(0)=0, s'(0)=1)
the fundamental pair is y1 = c + i mu s, y2 = c - i mu s and

    Delta(mu) = det [[U1(y1), U1(y2)], [U2(y1), U2(y2)]] = -2 i mu Delta_lambda,
    Delta_lambda = U1(c) U2(s) - U1(s) U2(c).

Delta_lambda is entire in lambda = mu^2; Delta is odd in mu with a trivial
zero at mu = 0 that is not an eigenvalue. For q = 0 this normalisation
reproduces the closed forms below with no extra constant.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bc_model import CanonicalBC, Family
from .errors import KindMismatch
from .flow import TransferSolver
from .potential import Potential, TrigMoment, trig_moments_many


def apply_rows(rows: np.ndarray, mono) -> tuple[np.ndarray, ...]:
    """U_i(c) and U_i(s) for boundary rows over (y'(0), y'(1), y(0), y(1))."""
    c, s, dc, ds = mono
    r = np.asarray(rows, dtype=complex)
    u1c = r[0, 1] * dc + r[0, 2] + r[0, 3] * c
    u1s = r[0, 0] + r[0, 1] * ds + r[0, 3] * s
    u2c = r[1, 1] * dc + r[1, 2] + r[1, 3] * c
    u2s = r[1, 0] + r[1, 1] * ds + r[1, 3] * s
    return u1c, u1s, u2c, u2s


@dataclass
class DeterminantContext:
    """Evaluation context (q, boundary rows) shared by every root-finding stage.

    ``rows`` defaults to the canonical functionals of ``cbc``.
    """

    q: Potential
    cbc: CanonicalBC
    tol: float = 1e-11
    rows: np.ndarray | None = None
    solver: TransferSolver = field(init=False)

    def __post_init__(self):
        self.solver = TransferSolver(self.q, tol=self.tol)
        if self.rows is None:
            self.rows = self.cbc.functionals()

    def delta_lambda(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        mu = np.sqrt(lam.ravel())
        u1c, u1s, u2c, u2s = apply_rows(self.rows, self.solver.monodromy(mu))
        return (u1c * u2s - u1s * u2c).reshape(lam.shape)

    def delta(self, mu) -> np.ndarray:
        mu = np.asarray(mu, dtype=complex)
        flat = mu.ravel()
        u1c, u1s, u2c, u2s = apply_rows(self.rows, self.solver.monodromy(flat))
        return (-2j * flat * (u1c * u2s - u1s * u2c)).reshape(mu.shape)

    __call__ = delta


def delta_exact(q: Potential, cbc: CanonicalBC, mu, ctx: DeterminantContext | None = None):
    ctx = ctx or DeterminantContext(q, cbc)
    out = ctx.delta(mu)
    return complex(out) if np.ndim(mu) == 0 else out


def delta_lambda(q: Potential, cbc: CanonicalBC, lam, ctx: DeterminantContext | None = None):
    ctx = ctx or DeterminantContext(q, cbc)
    out = ctx.delta_lambda(lam)
    return complex(out) if np.ndim(lam) == 0 else out


class Form(str, enum.Enum):
    EXACT = "Exact"
    UNPERTURBED = "Unperturbed"
    LEADING = "Leading"


@dataclass(frozen=True)
class DeterminantKind:
    tag: Form
    family: Family
    sigma: int

    @classmethod
    def for_bc(cls, tag: Form | str, cbc: CanonicalBC) -> "DeterminantKind":
        return cls(Form(tag), cbc.family, cbc.sigma)


def delta_closed(kind: DeterminantKind, cbc: CanonicalBC, mu, moments: TrigMoment | None = None):
    """Closed-form unperturbed (q = 0) or leading-order determinant.

    The leading form replaces the r coefficient by r +- (p +- 1)/2 c_mu.
    """
    if kind.family is not cbc.family or kind.sigma != cbc.sigma:
        raise KindMismatch(f"kind {kind.family.value}^{kind.sigma} vs bc {cbc.family.value}^{cbc.sigma}")
    if kind.tag is Form.EXACT:
        raise KindMismatch("the exact determinant has no closed form; use delta_exact")
    mu = np.asarray(mu, dtype=complex)
    p, r = cbc.p, cbc.r
    c_mu = 0.0
    if kind.tag is Form.LEADING:
        if moments is None:
            raise ValueError("the leading determinant needs trig moments")
        c_mu = moments.c_mu
    e = np.exp(1j * mu)
    em = np.exp(-1j * mu)
    if kind.family is Family.T1 and kind.sigma == 1:
        rr = r - (p + 1) / 2 * c_mu
        out = (1 - em) * (1j * mu * (p - 1) * (e - 1) + rr * (e + 1))
    elif kind.family is Family.T1:
        rr = r + (1 - p) / 2 * c_mu
        out = (1 + em) * (1j * mu * (p + 1) * (e + 1) + rr * (e - 1))
    elif kind.sigma == 1:
        rr = r - (p + 1) / 2 * c_mu
        out = (1 - em) * (1j * mu * (1 - p) * (e - 1) + rr * (e + 1))
    else:
        rr = r + (p - 1) / 2 * c_mu
        out = (1 + em) * (1j * mu * (1 + p) * (e + 1) + rr * (e - 1))
    return complex(out) if out.ndim == 0 else out


def perturbation_coefficient(cbc: CanonicalBC) -> complex:
    """Coefficient of s_mu cos(mu) in the two-term determinant model."""
    p = cbc.p
    if cbc.family is Family.T1:
        return 1j * (p + 1) if cbc.sigma == 1 else 1j * (p - 1)
    return 1j * (p + 1) if cbc.sigma == 1 else 1j * (1 - p)


def delta_perturbation(q: Potential, cbc: CanonicalBC, mu):
    """Leading determinant plus the s_mu cos(mu) correction (diagnostic model)."""
    mu_arr = np.atleast_1d(np.asarray(mu, dtype=complex))
    c, s = trig_moments_many(q, mu_arr)
    kind = DeterminantKind(Form.LEADING, cbc.family, cbc.sigma)
    out = np.array([
        delta_closed(kind, cbc, m, TrigMoment(m, ci, si)) for m, ci, si in zip(mu_arr, c, s)
    ])
    out = out + perturbation_coefficient(cbc) * s * np.cos(mu_arr)
    return complex(out[0]) if np.ndim(mu) == 0 else out


def trace_rows(ctx: DeterminantContext, mus) -> list[dict]:
    """Determinant samples for plotting: Re mu, Im mu, Re Delta, Im Delta."""
    mus = np.asarray(mus, dtype=complex)
    vals = ctx.delta(mus)
    return [
        {"re_mu": m.real, "im_mu": m.imag, "re_delta": v.real, "im_delta": v.imag}
        for m, v in zip(mus, vals)
    ]
