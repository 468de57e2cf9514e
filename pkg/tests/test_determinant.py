import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slspec import potential as P
from slspec.bc_model import CanonicalBC
from slspec.determinant import (DeterminantContext, DeterminantKind, Form, delta_closed, delta_exact,
                                delta_perturbation)
from slspec.errors import KindMismatch
from slspec.flow import TransferSolver, fundamental_pair
from slspec.potential import TrigMoment

PROPERTY_EXAMPLES = 120
FAMILIES = [(f, s) for f in ("T1", "T2") for s in (1, 0)]


def test_fundamental_pair_q0_exact():
    mu = 20 * np.pi
    fp = fundamental_pair(P.zero(), mu)
    assert np.max(np.abs(fp.y1 - np.exp(1j * mu * fp.x))) < 1e-9
    assert np.max(np.abs(fp.y2 - np.exp(-1j * mu * fp.x))) < 1e-9


def test_wronskian_q0():
    fp = fundamental_pair(P.zero(), 2 * np.pi)
    assert np.allclose(fp.wronskian(), -4j * np.pi, atol=1e-12)


def test_wronskian_cosine_and_rk_crosscheck():
    mu = 20 * np.pi
    fp = fundamental_pair(P.cosine(), mu)
    w = fp.wronskian()
    assert np.max(np.abs(w - w[0])) <= 1e-8 * abs(w[0])
    rk = fundamental_pair(P.cosine(), mu, method="rk")
    assert np.max(np.abs(rk.y1 - fp.y1)) < 1e-8


def test_rejects_large_imaginary_part():
    with pytest.raises(ValueError):
        fundamental_pair(P.cosine(), 3 + 12j)


def test_delta_unperturbed_roots():
    cbc = CanonicalBC("T1", 1, 3, 2)
    q = P.zero()
    for n in (3, 10, 25):
        assert abs(delta_exact(q, cbc, 2 * np.pi * n)) < 1e-10
    n = 10
    m = 2 * np.pi * n + 2 / (2 * np.pi * n)
    vals = delta_exact(q, cbc, np.array([m - 0.01, m + 0.01]))
    assert abs(delta_exact(q, cbc, m)) < 0.05 * abs(vals).max()


@pytest.mark.parametrize("family, sigma", FAMILIES)
def test_delta_exact_matches_closed_form_q0(family, sigma):
    cbc = CanonicalBC(family, sigma, 3, 2)
    kind = DeterminantKind(Form.UNPERTURBED, cbc.family, sigma)
    for n in (1, 10, 40):
        c = 2 * np.pi * n if sigma == 1 else (2 * n + 1) * np.pi
        mus = c + (np.pi / 2) * (np.random.default_rng(n).uniform(-1, 1, 20)
                                 + 1j * np.random.default_rng(n + 1).uniform(-1, 1, 20))
        ex = delta_exact(P.zero(), cbc, mus)
        cl = delta_closed(kind, cbc, mus)
        assert np.max(np.abs(ex - cl) / np.abs(cl)) < 1e-8


def test_closed_form_zeros():
    cbc = CanonicalBC("T1", 1, 3, 2)
    assert abs(delta_closed(DeterminantKind.for_bc("Unperturbed", cbc), cbc, 2 * np.pi * 7)) < 1e-12
    cbc0 = CanonicalBC("T1", 0, 3, 2)
    assert abs(delta_closed(DeterminantKind.for_bc("Unperturbed", cbc0), cbc0, 15 * np.pi)) < 1e-12


def test_leading_with_zero_moment_is_unperturbed():
    cbc = CanonicalBC("T2", 0, 2.5, 1.5)
    mus = np.linspace(3, 40, 7) + 0.3j
    lead = np.array([delta_closed(DeterminantKind.for_bc("Leading", cbc), cbc, m, TrigMoment(m, 0, 0))
                     for m in mus])
    assert np.allclose(lead, delta_closed(DeterminantKind.for_bc("Unperturbed", cbc), cbc, mus))


def test_kind_mismatch():
    cbc = CanonicalBC("T1", 1, 3, 2)
    with pytest.raises(KindMismatch):
        delta_closed(DeterminantKind(Form.UNPERTURBED, cbc.family, 0), cbc, 1.0)
    with pytest.raises(KindMismatch):
        delta_closed(DeterminantKind(Form.EXACT, cbc.family, 1), cbc, 1.0)
    with pytest.raises(ValueError):
        delta_closed(DeterminantKind(Form.LEADING, cbc.family, 1), cbc, 1.0)


def test_perturbation_model_q0_and_trend():
    cbc = CanonicalBC("T1", 1, 3, 2)
    mus = np.array([20.0, 33.0 + 0.5j])
    assert np.allclose(delta_perturbation(P.zero(), cbc, mus),
                       delta_closed(DeterminantKind.for_bc("Unperturbed", cbc), cbc, mus))
    q = P.cosine()
    ctx = DeterminantContext(q, cbc)
    ns = np.arange(10, 41, 5)
    mus = 2 * np.pi * ns + 0.3
    diff = np.abs(ctx.delta(mus) - delta_perturbation(q, cbc, mus))
    # o(1/mu) remainder: n * diff decreases
    assert (ns * diff)[-1] < 0.5 * (ns * diff)[0]


def test_perturbation_term_sawtooth():
    cbc = CanonicalBC("T1", 1, 3, 2)
    q = P.sawtooth()
    for n in (10, 20, 40):
        mu = 2 * np.pi * n
        _, s = P.trig_moments_many(q, np.array([mu], dtype=complex))
        term = 1j * (cbc.p + 1) * s[0] * np.cos(mu)
        assert term == pytest.approx(1j * (cbc.p + 1) * (q.q0 - q.q1) / (2 * mu), rel=1e-10)


def test_tolerance_halving_stable():
    cbc = CanonicalBC("T2", 1, 2, 1)
    q = P.smoothed_step(0.1)
    mus = np.array([5.0, 40.0 + 0.4j, 180.0 - 0.2j])
    a = DeterminantContext(q, cbc, tol=1e-10).delta(mus)
    b = DeterminantContext(q, cbc, tol=5e-11).delta(mus)
    assert np.all(np.abs(a - b) <= 10 * 1e-10 * np.abs(a) + 1e-12 * (1 + np.abs(mus) ** 2))


# ---------------------------------------------------------------- properties

_SOLVERS: dict = {}


def _ctx(q_name, family, sigma):
    key = (q_name, family, sigma)
    if key not in _SOLVERS:
        q = {"cosine": P.cosine(), "sawtooth": P.sawtooth(), "step": P.step()}[q_name]
        _SOLVERS[key] = DeterminantContext(q, CanonicalBC(family, sigma, 2.5, 1.5))
    return _SOLVERS[key]


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(st.sampled_from(["cosine", "sawtooth", "step"]), st.floats(0.5, 150.0), st.floats(-3.0, 3.0))
def test_wronskian_constant(q_name, re_mu, im_mu):
    q = {"cosine": P.cosine(), "sawtooth": P.sawtooth(), "step": P.step()}[q_name]
    mu = complex(re_mu, im_mu)
    solver = _ctx(q_name, "T1", 1).solver
    fp = fundamental_pair(q, mu, solver=solver)
    w = fp.wronskian()
    assert np.max(np.abs(w - (-2j * mu))) <= 1e-9 * abs(mu) * np.exp(2 * abs(im_mu))


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(st.sampled_from(FAMILIES), st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4),
       st.floats(0.3, 250.0), st.floats(-4.0, 4.0))
def test_q0_closed_form_match(fs, pr, pi_, rr, ri, re_mu, im_mu):
    family, sigma = fs
    p = complex(pr, pi_)
    eps = -1 if sigma == 1 else 1
    if abs(p + eps) < 1e-2:
        p += 1
    cbc = CanonicalBC(family, sigma, p, complex(rr, ri))
    mu = complex(re_mu, im_mu)
    ex = delta_exact(P.zero(), cbc, mu)
    cl = delta_closed(DeterminantKind.for_bc("Unperturbed", cbc), cbc, mu)
    scale = (1 + abs(mu)) * (1 + abs(p) + abs(cbc.r)) * np.exp(2 * abs(im_mu))
    assert abs(ex - cl) <= 1e-11 * scale


@settings(max_examples=PROPERTY_EXAMPLES, deadline=None)
@given(st.sampled_from(["cosine", "sawtooth", "step"]), st.sampled_from(FAMILIES),
       st.floats(1.0, 120.0), st.floats(-2.0, 2.0))
def test_cauchy_riemann(q_name, fs, re_mu, im_mu):
    ctx = _ctx(q_name, *fs)
    z = complex(re_mu, im_mu)
    h = 1e-5 * (1 + abs(z))
    f = ctx.delta(np.array([z + h, z - h, z + 1j * h, z - 1j * h]))
    dx = (f[0] - f[1]) / (2 * h)
    dy = (f[2] - f[3]) / (2 * h)
    # analytic: df/dy = i df/dx
    assert abs(dy - 1j * dx) <= 1e-5 * (abs(dx) + abs(ctx.delta(np.array([z]))[0]) + 1)
