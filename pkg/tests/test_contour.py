import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slspec.contour import Rect, circle_winding, count_zeros_rect, find_zeros, newton_log
from slspec.errors import BoundaryZero


def poly_log(roots):
    roots = np.asarray(roots, dtype=complex)
    return lambda z: np.sum(np.log(np.asarray(z, dtype=complex)[..., None] - roots), axis=-1)


def test_count_and_find_simple():
    roots = [0.3 + 0.2j, -0.4 - 0.1j, 0.1 - 0.5j, 2.0 + 2.0j]
    rect = Rect(-1, 1, -1, 1)
    assert count_zeros_rect(poly_log(roots), rect).count == 3
    zeros, _ = find_zeros(poly_log(roots), rect)
    got = sorted((z.z for z in zeros), key=lambda z: (z.real, z.imag))
    want = sorted(roots[:3], key=lambda z: (z.real, z.imag))
    assert np.allclose(got, want, atol=1e-10)


def test_multiplicity():
    logf = poly_log([0.25j, 0.25j, -0.5])
    zeros, _ = find_zeros(logf, Rect(-1, 1, -1, 1), mult_radius=1e-4)
    mult = {round(z.z.real, 6) + 1j * round(z.z.imag, 6): z.multiplicity for z in zeros}
    assert sum(mult.values()) == 3
    assert circle_winding(logf, 0.25j, 1e-3) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_boundary_zero_inflates():
    res = count_zeros_rect(poly_log([1.0 + 0.0j]), Rect(-1, 1, -1, 1))
    assert res.inflations >= 1 and res.count == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_boundary_zero_raises_without_inflation():
    with pytest.raises(BoundaryZero):
        count_zeros_rect(poly_log([1.0 + 0.0j]), Rect(-1, 1, -1, 1), max_inflations=0)


def test_empty_region():
    zeros, cnt = find_zeros(poly_log([5.0]), Rect(-1, 1, -1, 1))
    assert zeros == [] and cnt.count == 0


def test_many_zeros_need_subdivision():
    roots = [complex(a, b) for a in (-0.6, -0.2, 0.2, 0.6) for b in (-0.5, 0.5)]
    zeros, _ = find_zeros(poly_log(roots), Rect(-1, 1, -1, 1))
    assert len(zeros) == 8
    for r in roots:
        assert min(abs(z.z - r) for z in zeros) < 1e-10


def test_newton_deflation():
    logf = poly_log([0.5, -0.5])
    z, ok = newton_log(logf, 0.45, known=[(0.5, 1)])
    assert ok and abs(z + 0.5) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9)), min_size=1, max_size=5))
def test_random_polynomials(pts):
    roots = [complex(a, b) for a, b in pts]
    if min((abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]), default=1) < 1e-2:
        return
    zeros, cnt = find_zeros(poly_log(roots), Rect(-1, 1, -1, 1))
    assert cnt.count == len(roots)
    assert sum(z.multiplicity for z in zeros) == len(roots)
