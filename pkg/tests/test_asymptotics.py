import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slspec import potential as P
from slspec.asymptotics import (Discriminant, Regime, _ac_offset, auto_regime, check_regime, discriminant,
                                predict, predict_pair, principal_sqrt, residual_table,
                                simplicity_report, window_center)
from slspec.bc_model import CanonicalBC, Family
from slspec.eig_solver import Eigenpair
from slspec.errors import ConditionViolated


def test_unperturbed_prediction_example():
    cbc = CanonicalBC("T1", 1, 3, 2)
    p1, p2 = predict_pair(cbc, Regime.UNPERTURBED, None, 10)
    assert p1.mu_pred == pytest.approx(62.83185, abs=1e-5)
    assert p2.mu_pred == pytest.approx(62.83185307 + 2 / (2 * np.pi * 10), abs=1e-8)


def test_ac_prediction_sawtooth():
    cbc = CanonicalBC("T1", 1, 2, 1)
    q = P.sawtooth()
    d = discriminant(cbc, q.q0, q.q1)
    assert d.name == "D" and d.value == pytest.approx(2)
    n = 12
    p1, p2 = predict_pair(cbc, Regime.AC, q, n, check=True)
    c = 2 * np.pi * n
    assert p1.mu_pred == pytest.approx(c + (2 - 1j * math.sqrt(2)) / (4 * np.pi * n))
    assert p2.mu_pred == pytest.approx(c + (2 + 1j * math.sqrt(2)) / (4 * np.pi * n))


def test_ac_prediction_cosine_collapses():
    cbc = CanonicalBC("T1", 1, 2, 1)
    q = P.cosine()
    d = discriminant(cbc, q.q0, q.q1)
    assert d.value == pytest.approx(-4) and d.sqrt_value == pytest.approx(2j)
    p1, p2 = predict_pair(cbc, Regime.AC, q, 7)
    c = 2 * np.pi * 7
    assert {round((p1.mu_pred - c).real * 1e12), round((p2.mu_pred - c).real * 1e12)} == \
        {0, round(1 / (np.pi * 7) * 1e12)}


def test_discriminant_names():
    q0, q1 = 0.3, -0.2
    names = {discriminant(CanonicalBC(f, s, 2, 1), q0, q1).name
             for f in ("T1", "T2") for s in (0, 1)}
    assert names == {"D", "D2", "D3", "D4"}


def test_discriminant_variants_sigma0():
    cbc = CanonicalBC("T1", 0, 2, 1)
    printed = discriminant(cbc, -0.5, 0.5, "printed")
    corrected = discriminant(cbc, -0.5, 0.5, "corrected")
    assert printed.value == pytest.approx(-4)            # q0 + q1 = 0
    assert corrected.value == pytest.approx(2)           # q0 - q1 = -1
    s1 = CanonicalBC("T1", 1, 2, 1)
    assert discriminant(s1, -0.5, 0.5, "printed").value == discriminant(s1, -0.5, 0.5, "corrected").value


def test_check_regime():
    cbc = CanonicalBC("T1", 1, 3, 2)
    check_regime(cbc, Regime.L1, P.cosine())
    with pytest.raises(ConditionViolated):
        check_regime(cbc, Regime.L1, P.sawtooth())
    with pytest.raises(ConditionViolated):
        check_regime(cbc, Regime.AC, P.step())
    with pytest.raises(ConditionViolated):
        check_regime(cbc, Regime.AC, P.sawtooth())    # D = 0 configuration


def test_auto_regime():
    assert auto_regime(P.sawtooth(), CanonicalBC("T1", 1, 2, 1))[0] is Regime.AC
    assert auto_regime(P.step(), CanonicalBC("T1", 1, 2, 1))[0] is not Regime.AC
    reg, note = auto_regime(P.sawtooth(), CanonicalBC("T1", 1, 3, 2))
    assert reg is Regime.UNPERTURBED and "unperturbed" in note


def test_predict_rejects_bad_index():
    cbc = CanonicalBC("T1", 1, 3, 2)
    with pytest.raises(ValueError):
        predict(cbc, "Unperturbed", None, 0, 1)
    with pytest.raises(ValueError):
        predict(cbc, "Unperturbed", None, 3, 3)


def _ep(n, j, mu, m=1):
    return Eigenpair(n, j, complex(mu), m)


def test_residual_table_identity():
    cbc = CanonicalBC("T1", 1, 3, 2)
    preds = [p for n in range(5, 12) for p in predict_pair(cbc, "Unperturbed", None, n)]
    eigs = [_ep(p.n, p.j, p.mu_pred) for p in preds]
    tab = residual_table(eigs, preds)
    assert all(r.r == 0 for r in tab.rows)
    assert set(tab.rows[0].as_csv()) == {"n", "j", "regime", "re_mu", "re_mu_pred", "abs_r", "n_abs_r", "n2_abs_r"}


def test_simplicity_report_examples():
    cbc = CanonicalBC("T1", 1, 3, 2)
    preds = predict_pair(cbc, "Unperturbed", None, 10)
    eigs = [_ep(10, 1, 2 * np.pi * 10), _ep(10, 2, 2 * np.pi * 10 + 1 / (10 * np.pi))]
    (g,) = simplicity_report(eigs, preds)
    assert g.gap == pytest.approx(1 / (10 * np.pi), rel=1e-12) and g.simple
    (g,) = simplicity_report([_ep(11, 1, 69.1, m=2)])
    assert not g.simple


def test_predictions_inside_windows():
    for fam in ("T1", "T2"):
        for sigma in (0, 1):
            cbc = CanonicalBC(fam, sigma, 3, 2)
            for n in range(2, 41):
                for p in predict_pair(cbc, "Unperturbed", None, n):
                    assert abs(p.mu_pred - window_center(sigma, n)) < np.pi / 2


@settings(max_examples=120, deadline=None)
@given(st.sampled_from([("T1", 1), ("T1", 0), ("T2", 1), ("T2", 0)]), st.floats(1.5, 5), st.floats(0.1, 3),
       st.floats(-2, 2), st.floats(-2, 2), st.integers(2, 60))
def test_branch_identities(fs, p, r, q0, q1, n):
    family, sigma = fs
    cbc = CanonicalBC(family, sigma, p, r)
    q = P.Potential(lambda x: q0 + (q1 - q0) * x, name="lin", values=np.array([q0, q1]), nodes=np.array([0.0, 1.0]))
    d = discriminant(cbc, q0, q1)
    assert d.sqrt_value ** 2 == pytest.approx(d.value, abs=1e-9 * (1 + abs(d.value)))
    p1, p2 = predict_pair(cbc, Regime.AC, q, n)
    diff = p2.mu_pred - p1.mu_pred
    c = window_center(sigma, n)
    if family == "T1" and sigma == 1:
        assert diff == pytest.approx(2j * d.sqrt_value / (4 * (p - 1) * math.pi * n))
    # the other square-root branch swaps the pair exactly
    other = Discriminant(d.name, d.value, -d.sqrt_value)
    assert c + _ac_offset(cbc, n, other, 1) == pytest.approx(p2.mu_pred, abs=1e-12 * c)
    assert c + _ac_offset(cbc, n, other, 2) == pytest.approx(p1.mu_pred, abs=1e-12 * c)
