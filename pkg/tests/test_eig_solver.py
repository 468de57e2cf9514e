import math

import numpy as np
import pytest
from scipy.integrate import simpson

from slspec import potential as P
from slspec.bc_model import CanonicalBC, GeneralBC, reduce_to_canonical
from slspec.eig_solver import (SearchWindow, SolverOptions, SpectralProblem, count_zeros, eigenfunction,
                               solve_window)


def test_count_examples(t1s1):
    assert count_zeros(P.zero(), t1s1, SearchWindow.for_index(1, 10)) == 2
    assert count_zeros(P.zero(), t1s1, SearchWindow(complex(20 * np.pi + np.pi), np.pi / 4, 10)) == 0
    assert count_zeros(P.cosine(), t1s1, SearchWindow.for_index(1, 10)) == 2


def test_window_roots_q0(t1s1):
    eps = solve_window(P.zero(), t1s1, SearchWindow.for_index(1, 10))
    assert [e.j for e in eps] == [1, 2]
    assert eps[0].mu == pytest.approx(62.83185307179586, abs=1e-9)
    assert eps[1].mu.real == pytest.approx(62.8637, abs=1e-4)
    assert all(e.multiplicity == 1 for e in eps)


def test_window_roots_q0_sigma0():
    cbc = CanonicalBC("T1", 0, 3, 2)
    eps = solve_window(P.zero(), cbc, SearchWindow.for_index(0, 10))
    c = 21 * np.pi
    assert eps[0].mu == pytest.approx(c, abs=1e-9)
    assert eps[1].mu.real == pytest.approx(c + 2 * 2 / (4 * c), abs=1e-3)


def test_window_sawtooth_ac():
    cbc = CanonicalBC("T1", 1, 2, 1)
    opts = SolverOptions(regime="AC")
    eps = solve_window(P.sawtooth(), cbc, SearchWindow.for_index(1, 15), opts)
    n = 15
    preds = [2 * np.pi * n + (2 - 1j * math.sqrt(2)) / (4 * np.pi * n),
             2 * np.pi * n + (2 + 1j * math.sqrt(2)) / (4 * np.pi * n)]
    for e, p in zip(eps, preds):
        assert e.multiplicity == 1
        assert n * abs(e.mu - p) < 0.02


def test_eigenfunction_q0(t1s1):
    k = 12 * np.pi
    x, phi = eigenfunction(P.zero(), t1s1, k, 6)
    # exact eigenfunction: cos kx + b sin kx with (1 + p) k b + r = 0
    y = np.cos(k * x) - t1s1.r.real / ((1 + t1s1.p.real) * k) * np.sin(k * x)
    y /= math.sqrt(simpson(y * y, x=x))
    assert np.max(np.abs(phi - y)) < 1e-8
    assert np.max(np.abs(phi - math.sqrt(2) * np.cos(k * x))) < 2 / 6
    assert simpson(np.abs(phi) ** 2, x=x) == pytest.approx(1, abs=1e-10)
    with pytest.raises(ValueError):
        eigenfunction(P.zero(), t1s1, 2 * np.pi * 6 + 0.1, 6)


def test_eigenfunction_second_branch_close_to_cosine(t1s1):
    prob = SpectralProblem(P.cosine(), t1s1, SolverOptions(regime="L1"))
    for e in prob.solve_window(SearchWindow.for_index(1, 20)):
        dist = math.sqrt(simpson(np.abs(e.phi - math.sqrt(2) * np.cos(40 * np.pi * e.x)) ** 2, x=e.x))
        assert dist <= 5 / 20
        inner = simpson(e.phi * math.sqrt(2) * np.cos(40 * np.pi * e.x), x=e.x)
        assert inner.real >= 0 and abs(inner.imag) < 1e-10


def test_solve_with_low_sweep_residuals(t1s1):
    prob = SpectralProblem(P.cosine(), t1s1)
    eigs = prob.solve(0, 7)
    assert {e.n for e in eigs} == set(range(0, 8))
    assert all(e.mu.real >= 0 for e in eigs)
    for e in eigs:
        assert e.det_residual <= 1e-8 * (1 + abs(e.mu) ** 2)
        assert e.bc_residual <= 1e-8 * (1 + abs(e.mu) ** 2) * (1 + abs(e.mu))
        assert e.fn_residual < 1e-3 * (1 + abs(e.lam))


def test_adjoint_form_eigenvalues_are_conjugates():
    # derivative-row form; its adjoint is a complex T1 problem
    raw = GeneralBC(1, 1, 0.3 + 0.2j, 0, 1, 2 - 1j)
    cbc = reduce_to_canonical(raw)
    assert cbc.adjoint
    q = P.cosine()
    eigs = SpectralProblem(q, cbc).solve(5, 7, low=False)
    for e in eigs:
        assert e.bc_residual < 1e-6
    direct = SpectralProblem(q, reduce_to_canonical(raw).__class__(cbc.family, cbc.sigma, cbc.p, cbc.r))
    adj = sorted(direct.solve(5, 7, low=False), key=lambda e: (e.n, e.j))
    got = sorted(np.conj([e.mu for e in eigs]), key=lambda z: (z.real, z.imag))
    want = sorted([e.mu for e in adj], key=lambda z: (z.real, z.imag))
    assert np.allclose(got, want, atol=1e-9)


def test_stable_under_tolerance_and_sampling(t1s1):
    q = P.smoothed_step(0.1)
    a = SpectralProblem(q, t1s1, SolverOptions(tol_ode=1e-11, functions=False)).solve(5, 9, low=False)
    b = SpectralProblem(q, t1s1, SolverOptions(tol_ode=5e-12, functions=False)).solve(5, 9, low=False)
    for x, y in zip(a, b):
        assert abs(x.lam - y.lam) <= 1e-8 * abs(x.lam)


def test_threads_give_identical_results(t1s1):
    q = P.cosine()
    a = SpectralProblem(q, t1s1, SolverOptions(functions=False)).solve(5, 12, low=False, threads=1)
    b = SpectralProblem(q, t1s1, SolverOptions(functions=False)).solve(5, 12, low=False, threads=3)
    assert [e.mu for e in a] == [e.mu for e in b]
