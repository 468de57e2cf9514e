"""Two-point boundary conditions for -y'' + q y on [0, 1].

Every boundary functional is stored as a row of coefficients over the
boundary data ``(y'(0), y'(1), y(0), y(1))``. The raw input form is

    a1 y'(0) + b1 y'(1) + a0 y(0) + b0 y(1) = 0
    c0 y(0)  + d0 y(1)                      = 0

and the reduced families are

    T1:  y'(0) + p y'(1) + r y(1) = 0,   y(0) + (-1)^sigma y(1) = 0
    T2:  p y'(0) + y'(1) + r y(1) = 0,   y(0) + (-1)^sigma y(1) = 0

Inputs whose derivative row is proportional to ``y'(0) +- y'(1)`` (but whose
value row is not ``y(0) +- y(1)``) reduce to one of two "alpha" forms that
are the adjoints of T1/T2; see :class:`AdjointBC`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateBC, NotReducible, ViolatesRegularity

TAU_ALG = 1e-10


class Family(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"


class BCCase(str, enum.Enum):
    STRONGLY_REGULAR = "StronglyRegular"
    CASE_A = "CaseA"
    CASE_B = "CaseB"
    CASE_C = "CaseC"
    GENERAL = "General"
    NOT_REGULAR = "NotRegular"


@dataclass(frozen=True)
class GeneralBC:
    a1: complex
    b1: complex
    a0: complex
    b0: complex
    c0: complex
    d0: complex

    def __post_init__(self):
        for name in ("a1", "b1", "a0", "b0", "c0", "d0"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def functionals(self) -> np.ndarray:
        return np.array(
            [[self.a1, self.b1, self.a0, self.b0], [0, 0, self.c0, self.d0]],
            dtype=complex,
        )

    def scaled(self, row1: complex = 1.0, row2: complex = 1.0) -> "GeneralBC":
        return GeneralBC(
            self.a1 * row1, self.b1 * row1, self.a0 * row1, self.b0 * row1,
            self.c0 * row2, self.d0 * row2,
        )


@dataclass(frozen=True)
class ThetaTriple:
    theta_minus1: complex
    theta_0: complex
    theta_1: complex

    @property
    def discriminant(self) -> complex:
        return self.theta_0**2 - 4 * self.theta_1 * self.theta_minus1


@dataclass(frozen=True)
class CanonicalBC:
    """Reduced boundary conditions of family T1 or T2.

    ``p`` is the derivative-row ratio (beta1 for T1, beta3 for T2) and ``r``
    the coefficient of y(1) (beta2 / beta4). ``adjoint`` marks a form that
    was obtained as the adjoint of the user's conditions: its spectrum is the
    complex conjugate of the user's operator spectrum.
    """

    family: Family
    sigma: int
    p: complex
    r: complex
    adjoint: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.sigma not in (0, 1):
            raise ValueError(f"sigma must be 0 or 1, got {self.sigma!r}")
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "r", complex(self.r))
        if abs(self.p + self.eps) <= TAU_ALG:
            raise ViolatesRegularity(
                f"p = {self.p} equals -(-1)^sigma; conditions are not regular"
            )

    @property
    def eps(self) -> int:
        return -1 if self.sigma == 1 else 1

    def functionals(self) -> np.ndarray:
        if self.family is Family.T1:
            row1 = [1.0, self.p, 0.0, self.r]
        else:
            row1 = [self.p, 1.0, 0.0, self.r]
        return np.array([row1, [0.0, 0.0, 1.0, self.eps]], dtype=complex)

    def source_functionals(self) -> np.ndarray:
        """Functionals of the operator the user asked about."""
        if self.adjoint:
            return adjoint_of(self).functionals()
        return self.functionals()

    def to_general(self) -> GeneralBC:
        if self.family is Family.T1:
            return GeneralBC(1.0, self.p, 0.0, self.r, 1.0, self.eps)
        return GeneralBC(self.p, 1.0, 0.0, self.r, 1.0, self.eps)

    def describe(self) -> str:
        names = ("beta1", "beta2") if self.family is Family.T1 else ("beta3", "beta4")
        tag = " [adjoint form]" if self.adjoint else ""
        return (
            f"{self.family.value}^{self.sigma}: {names[0]}={_fmt(self.p)}, "
            f"{names[1]}={_fmt(self.r)}{tag}"
        )


@dataclass(frozen=True)
class AdjointBC:
    """The two alpha-parameterised forms adjoint to T1/T2.

    form 6 (adjoint of T1): y'(0) + e y'(1) + a_row y(0) = 0,  a_val y(0) + y(1) = 0
    form 5 (adjoint of T2): y'(0) + e y'(1) + a_row y(1) = 0,  y(0) + a_val y(1) = 0
    with e = (-1)^sigma.
    """

    form: int
    sigma: int
    a_row: complex
    a_val: complex

    def __post_init__(self):
        if self.form not in (5, 6):
            raise ValueError("form must be 5 or 6")
        object.__setattr__(self, "a_row", complex(self.a_row))
        object.__setattr__(self, "a_val", complex(self.a_val))

    @property
    def eps(self) -> int:
        return -1 if self.sigma == 1 else 1

    def functionals(self) -> np.ndarray:
        e = self.eps
        if self.form == 6:
            rows = [[1.0, e, self.a_row, 0.0], [0.0, 0.0, self.a_val, 1.0]]
        else:
            rows = [[1.0, e, 0.0, self.a_row], [0.0, 0.0, 1.0, self.a_val]]
        return np.array(rows, dtype=complex)

    def to_general(self) -> GeneralBC:
        e = self.eps
        if self.form == 6:
            return GeneralBC(1.0, e, self.a_row, 0.0, self.a_val, 1.0)
        return GeneralBC(1.0, e, 0.0, self.a_row, 1.0, self.a_val)


def _fmt(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"({z.real:.12g}{z.imag:+.12g}j)"


def _check_nondegenerate(bc: GeneralBC) -> None:
    scale = max(abs(v) for v in (bc.a1, bc.b1, bc.a0, bc.b0, bc.c0, bc.d0))
    if scale == 0:
        raise DegenerateBC("all coefficients vanish")
    if abs(bc.a1) + abs(bc.b1) <= TAU_ALG * scale:
        raise DegenerateBC("first row carries no derivative terms")
    if abs(bc.c0) + abs(bc.d0) <= TAU_ALG * scale:
        raise DegenerateBC("second row is identically zero")


def compute_theta(bc: GeneralBC) -> ThetaTriple:
    """Birkhoff theta coefficients with the overall normalising constant set to 1."""
    t1 = bc.b1 * bc.c0 + bc.a1 * bc.d0
    t0 = 2 * (bc.a1 * bc.c0 + bc.b1 * bc.d0)
    return ThetaTriple(theta_minus1=t1, theta_0=t0, theta_1=t1)


def _scale(bc: GeneralBC) -> float:
    return (abs(bc.a1) + abs(bc.b1)) * (abs(bc.c0) + abs(bc.d0))


def is_regular(bc: GeneralBC) -> bool:
    _check_nondegenerate(bc)
    return abs(compute_theta(bc).theta_1) > TAU_ALG * _scale(bc)


def is_regular_not_strongly(bc: GeneralBC) -> bool:
    _check_nondegenerate(bc)
    if not is_regular(bc):
        return False
    ref = _scale(bc)
    return abs(compute_theta(bc).discriminant) <= TAU_ALG * ref * ref


def _close(x: complex, y: complex, ref: float) -> bool:
    return abs(x - y) <= TAU_ALG * max(ref, 1e-300)


def reduce_to_canonical(bc: GeneralBC) -> CanonicalBC:
    _check_nondegenerate(bc)
    if not is_regular(bc):
        raise ViolatesRegularity("b1*c0 + a1*d0 vanishes")
    value_ref = abs(bc.c0) + abs(bc.d0)
    deriv_ref = abs(bc.a1) + abs(bc.b1)

    # value row proportional to y(0) + e y(1): reduce straight to T1 / T2
    for sigma in (1, 0):
        e = -1 if sigma == 1 else 1
        if _close(bc.d0, e * bc.c0, value_ref):
            # eliminate y(0) = -e y(1) from the derivative row
            tail = bc.b0 - e * bc.a0
            if abs(bc.a1) > TAU_ALG * deriv_ref:
                return CanonicalBC(Family.T1, sigma, bc.b1 / bc.a1, tail / bc.a1)
            return CanonicalBC(Family.T2, sigma, bc.a1 / bc.b1, tail / bc.b1)

    # derivative row proportional to y'(0) + e y'(1): alpha forms, solved via the adjoint
    for sigma in (1, 0):
        e = -1 if sigma == 1 else 1
        if _close(bc.b1, e * bc.a1, deriv_ref):
            if abs(bc.c0) >= abs(bc.d0):
                a_val = bc.d0 / bc.c0
                a_row = bc.b0 / bc.a1 - bc.a0 * bc.d0 / (bc.a1 * bc.c0)
                alpha = AdjointBC(5, sigma, a_row, a_val)
            else:
                a_val = bc.c0 / bc.d0
                a_row = bc.a0 / bc.a1 - bc.b0 * bc.c0 / (bc.a1 * bc.d0)
                alpha = AdjointBC(6, sigma, a_row, a_val)
            return replace(adjoint_of(alpha), adjoint=True)

    raise NotReducible("neither row has the +-1 proportionality; conditions are strongly regular")


def classify_case(cbc: CanonicalBC) -> BCCase:
    r_zero = abs(cbc.r) <= TAU_ALG
    p_sym = abs(cbc.p - cbc.eps) <= TAU_ALG
    if r_zero and p_sym:
        return BCCase.CASE_A
    if p_sym:
        return BCCase.CASE_B
    if r_zero:
        return BCCase.CASE_C
    return BCCase.GENERAL


def classify(bc: GeneralBC) -> BCCase:
    """Full taxonomy of raw conditions, including the non-reducible tags."""
    if not is_regular(bc):
        return BCCase.NOT_REGULAR
    if not is_regular_not_strongly(bc):
        return BCCase.STRONGLY_REGULAR
    return classify_case(reduce_to_canonical(bc))


def adjoint_of(bc):
    """Adjoint boundary conditions.

    Maps a T1 form to alpha form 6 and a T2 form to alpha form 5, and back,
    so ``adjoint_of(adjoint_of(x)) == x`` up to the ``adjoint`` flag.
    """
    if isinstance(bc, CanonicalBC):
        e = bc.eps
        if bc.family is Family.T1:
            return AdjointBC(6, bc.sigma, -e * np.conj(bc.r), np.conj(bc.p))
        return AdjointBC(5, bc.sigma, e * np.conj(bc.r), np.conj(bc.p))
    if isinstance(bc, AdjointBC):
        e = bc.eps
        if bc.form == 6:
            return CanonicalBC(Family.T1, bc.sigma, np.conj(bc.a_val), -e * np.conj(bc.a_row))
        return CanonicalBC(Family.T2, bc.sigma, np.conj(bc.a_val), e * np.conj(bc.a_row))
    raise TypeError(f"cannot take the adjoint of {type(bc).__name__}")


_TEST_FUNCTION_DATA = np.array(
    [
        # columns: 1, x, exp(ix), exp(-ix); rows: y'(0), y'(1), y(0), y(1)
        [0, 1, 1j, -1j],
        [0, 1, 1j * np.exp(1j), -1j * np.exp(-1j)],
        [1, 0, 1, 1],
        [1, 1, np.exp(1j), np.exp(-1j)],
    ],
    dtype=complex,
)


def same_solution_set(rows_a: np.ndarray, rows_b: np.ndarray, tol: float = 1e-9) -> bool:
    """True when two pairs of boundary functionals differ by an invertible 2x2 mixing.

    Both pairs are evaluated on the test functions 1, x, e^{ix}, e^{-ix};
    the stacked 4x4 evaluation matrix must have rank 2.
    """
    fa = np.asarray(rows_a) @ _TEST_FUNCTION_DATA
    fb = np.asarray(rows_b) @ _TEST_FUNCTION_DATA
    fa = fa / np.abs(fa).max(axis=1, keepdims=True)
    fb = fb / np.abs(fb).max(axis=1, keepdims=True)

    def rank(m):
        s = np.linalg.svd(m, compute_uv=False)
        return int(np.sum(s > tol * s[0]))

    return rank(fa) == 2 and rank(fb) == 2 and rank(np.vstack([fa, fb])) == 2


def canonical_from_params(family, sigma: int, p, r) -> CanonicalBC:
    return CanonicalBC(Family(family), int(sigma), complex(p), complex(r))
