import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slspec.bc_model import (AdjointBC, BCCase, CanonicalBC, Family, GeneralBC, TAU_ALG, adjoint_of,
                             classify, classify_case, compute_theta, is_regular,
                             is_regular_not_strongly, reduce_to_canonical, same_solution_set)
from slspec.errors import DegenerateBC, NotReducible, ViolatesRegularity

PROPERTY_EXAMPLES = 120


def gbc(a1, b1, a0, b0, c0, d0):
    return GeneralBC(*(complex(v) for v in (a1, b1, a0, b0, c0, d0)))


# ---------------------------------------------------------------- examples

@pytest.mark.parametrize("coeffs, theta", [
    ((1, 1, 0, 0, 1, 1), (2, 4, 2)),
    ((1, 0, 0, 0, 0, 1), (1, 0, 1)),   # theta_0 = 2(a1 c0 + b1 d0) = 0
    ((2, 1, 0, 0, 1, 3), (7, 10, 7)),
])
def test_theta_examples(coeffs, theta):
    th = compute_theta(gbc(*coeffs))
    assert (th.theta_minus1, th.theta_0, th.theta_1) == theta


def test_theta_examples_discriminant():
    assert compute_theta(gbc(1, 1, 5, -2, 1, 1)).discriminant == 0
    assert compute_theta(gbc(2, 1, 0, 0, 1, 3)).discriminant == 100 - 196


@pytest.mark.parametrize("coeffs, expected", [
    ((1, -1, 0, 0, 1, -1), True),    # periodic
    ((1, 0, 0, 0, 0, 1), False),     # strongly regular
    ((1, 1, 0, 0, 1, 0), True),
])
def test_regular_not_strongly(coeffs, expected):
    assert is_regular_not_strongly(gbc(*coeffs)) is expected


def test_degenerate_rows_raise():
    with pytest.raises(DegenerateBC):
        is_regular(gbc(0, 0, 1, 1, 1, 1))
    with pytest.raises(DegenerateBC):
        is_regular(gbc(1, 1, 0, 0, 0, 0))


def test_reduce_examples():
    c = reduce_to_canonical(gbc(1, 2, 0, 3, 1, -1))
    assert (c.family, c.sigma, c.p, c.r, c.adjoint) == (Family.T1, 1, 2, 3, False)
    c = reduce_to_canonical(gbc(1, -1, 0, 0, 1, -1))
    assert (c.family, c.sigma, c.p, c.r) == (Family.T1, 1, -1, 0)
    assert classify_case(c) is BCCase.CASE_A
    c = reduce_to_canonical(gbc(0, 1, 0, 1, 1, -1))
    assert (c.family, c.sigma, c.p, c.r) == (Family.T2, 1, 0, 1)


def test_reduce_adjoint_form_is_flagged():
    bc = gbc(1, 1, 0, 0, 1, 2)
    c = reduce_to_canonical(bc)
    assert c.adjoint
    assert same_solution_set(c.source_functionals(), bc.functionals())


def test_reduce_errors():
    with pytest.raises(NotReducible):
        reduce_to_canonical(gbc(1, 2, 0, 0, 1, 3))
    with pytest.raises(ViolatesRegularity):
        CanonicalBC("T1", 1, 1, 2)
    with pytest.raises(ViolatesRegularity):
        reduce_to_canonical(gbc(1, 1, 0, 2, 1, -1))


@pytest.mark.parametrize("cbc, case", [
    (CanonicalBC("T1", 1, -1, 0), BCCase.CASE_A),
    (CanonicalBC("T1", 1, -1, 5), BCCase.CASE_B),
    (CanonicalBC("T1", 1, 2, 1), BCCase.GENERAL),
    (CanonicalBC("T1", 0, 2, 0), BCCase.CASE_C),
])
def test_classify_case_examples(cbc, case):
    assert classify_case(cbc) is case


def test_classify_taxonomy():
    assert classify(gbc(1, 0, 0, 0, 0, 1)) is BCCase.STRONGLY_REGULAR
    assert classify(gbc(1, 0, 0, 0, 1, 0)) is BCCase.NOT_REGULAR
    assert classify(gbc(1, 3, 0, 2, 1, -1)) is BCCase.GENERAL


def test_adjoint_examples():
    a = adjoint_of(CanonicalBC("T1", 1, 2.5, 0))
    assert a.form == 6 and a.a_row == 0 and a.a_val == 2.5
    a = adjoint_of(CanonicalBC("T1", 0, 1j, 1 + 1j))
    assert a.a_row == pytest.approx(-(1 - 1j))
    assert a.a_val == pytest.approx(-1j)


def _inner(f, g, x):
    from scipy.integrate import simpson
    return simpson(f * np.conj(g), x=x)


def test_adjoint_green_identity():
    """<Tu, v> = <u, T* v> for q = 0 with u, v satisfying the respective conditions."""
    rng = np.random.default_rng(3)
    x = np.linspace(0, 1, 4001)
    for family in ("T1", "T2"):
        for sigma in (0, 1):
            cbc = CanonicalBC(family, sigma, 2 + 0.5j, 1 - 0.3j)
            rows_u = cbc.functionals()
            rows_v = adjoint_of(cbc).functionals()

            def fit(rows):
                # polynomial of degree 5 with random coefficients, projected onto the conditions
                coef = rng.normal(size=6) + 1j * rng.normal(size=6)
                basis = [np.polynomial.Polynomial([0] * k + [1]) for k in range(6)]
                data = np.array([[b.deriv()(0), b.deriv()(1), b(0), b(1)] for b in basis]).T
                m = rows @ data
                # remove the component violating the conditions (least-norm correction)
                coef = coef - np.linalg.pinv(m) @ (m @ coef)
                poly = sum(c * b for c, b in zip(coef, basis))
                return poly

            u, v = fit(rows_u), fit(rows_v)
            lhs = _inner(-u.deriv(2)(x), v(x), x)
            rhs = _inner(u(x), -v.deriv(2)(x), x)
            assert abs(lhs - rhs) < 1e-8 * (1 + abs(lhs))


# ---------------------------------------------------------------- properties

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
nonzero = cplx.filter(lambda z: abs(z) > 0.1)


@st.composite
def regular_not_strongly(draw):
    """Raw conditions that are regular but not strongly regular."""
    sigma = draw(st.sampled_from([0, 1]))
    e = -1 if sigma == 1 else 1
    a1, a0, b0 = draw(nonzero), draw(cplx), draw(cplx)
    c0 = draw(nonzero)
    if draw(st.booleans()):
        b1 = draw(cplx)
        d0 = e * c0                       # value row y(0) + e y(1)
        if abs(b1 + e * a1) < 0.1 * abs(a1):   # keep away from the regularity boundary
            b1 = b1 + 1
    else:
        b1 = e * a1                       # derivative row y'(0) + e y'(1)
        d0 = draw(cplx)
        if abs(d0 + e * c0) < 0.1 * abs(c0):
            d0 = d0 + 1
    return GeneralBC(a1, b1, a0, b0, c0, d0)


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(regular_not_strongly())
def test_theta_identity(bc):
    th = compute_theta(bc)
    assert is_regular_not_strongly(bc)
    assert abs(th.discriminant) <= 1e-9 * max(1.0, abs(th.theta_0) ** 2)


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(regular_not_strongly())
def test_reduction_row_equivalent(bc):
    cbc = reduce_to_canonical(bc)
    assert same_solution_set(cbc.source_functionals(), bc.functionals(), tol=1e-8)


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(st.sampled_from(["T1", "T2"]), st.sampled_from([0, 1]), cplx, cplx)
def test_adjoint_involution(family, sigma, p, r):
    eps = -1 if sigma == 1 else 1
    if abs(p + eps) < 1e-3:
        p = p + 1
    cbc = CanonicalBC(family, sigma, p, r)
    back = adjoint_of(adjoint_of(cbc))
    assert (back.family, back.sigma) == (cbc.family, cbc.sigma)
    assert back.p == cbc.p and back.r == cbc.r


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(regular_not_strongly(), nonzero, nonzero)
def test_classification_scale_invariant(bc, s1, s2):
    scaled = bc.scaled(s1, s2)
    assert classify(scaled) is classify(bc)
    c1, c2 = reduce_to_canonical(bc), reduce_to_canonical(scaled)
    assert (c1.family, c1.sigma, c1.adjoint) == (c2.family, c2.sigma, c2.adjoint)
    assert abs(c1.p - c2.p) <= 1e-9 * (1 + abs(c1.p))
    assert abs(c1.r - c2.r) <= 1e-9 * (1 + abs(c1.r))
