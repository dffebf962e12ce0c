import numpy as np
import pytest
from hypothesis import given, strategies as st

from unifact import linalg as la
from unifact.errors import EmptyBand, InvalidInput, ZeroMargin
from unifact.fields import (GridDomain, HomotopyField, MatrixField, ScalarField, cell_distance, dilate,
                            make_cutoff, physical_distance, vanish_order)


def brute_cell_distance(mask, periodic):
    idx = np.argwhere(mask)
    out = np.empty(mask.shape)
    n = np.array(mask.shape)
    for p in np.ndindex(mask.shape):
        d = np.abs(idx - np.array(p))
        for ax, per in enumerate(periodic):
            if per:
                d[:, ax] = np.minimum(d[:, ax], n[ax] - d[:, ax])
        out[p] = np.sqrt((d ** 2).sum(1)).min()
    return out


def test_domain_json_roundtrip():
    for dom in (GridDomain.interval(-1, 1, 11), GridDomain.circle(16), GridDomain.rectangle(0, 1, 0, 2, 5, 7)):
        assert GridDomain.from_json(dom.to_json()) == dom
    assert GridDomain.circle(16).periodic == (True,) or list(GridDomain.circle(16).periodic) == [True]


@given(st.lists(st.booleans(), min_size=12, max_size=12).filter(any), st.booleans())
def test_cell_distance_1d_brute(bits, periodic):
    dom = GridDomain.circle(12) if periodic else GridDomain.interval(0, 1, 12)
    mask = np.array(bits)
    assert np.allclose(cell_distance(dom, mask), brute_cell_distance(mask, [periodic]))


def test_cell_distance_2d_brute(rng):
    dom = GridDomain.rectangle(0, 1, 0, 1, 9, 7)
    mask = rng.random(dom.shape) < 0.08
    mask[0, 0] = True
    assert np.allclose(cell_distance(dom, mask), brute_cell_distance(mask, [False, False]))


def test_physical_distance_periodic():
    dom = GridDomain.circle(64)
    mask = np.zeros(64, bool)
    mask[0] = True
    d = physical_distance(dom, mask)
    h = 2 * np.pi / 64
    assert d[63] == pytest.approx(h) and d[1] == pytest.approx(h)


def test_cutoff_clauses():
    dom = GridDomain.interval(0, 1, 101)
    x = dom.coords()[0]
    inner = x <= 0.2 + 1e-12
    outer = x < 0.6
    chi = make_cutoff(dom, inner, outer)
    assert chi.check()
    assert np.all(chi.values[inner] == 0) and np.all(chi.values[~outer] == 1)
    assert np.all(np.diff(chi.values) >= -1e-15)
    mid = np.argmin(np.abs(x - 0.4))
    assert 0.3 < chi.values[mid] < 0.7


def test_cutoff_errors_and_degenerate_cases():
    dom = GridDomain.interval(0, 1, 21)
    a = np.zeros(21, bool)
    a[5:8] = True
    with pytest.raises(ZeroMargin):
        make_cutoff(dom, a, np.zeros(21, bool))
    with pytest.raises(ZeroMargin):
        make_cutoff(dom, a, a)
    assert np.all(make_cutoff(dom, a, np.ones(21, bool)).values == 0)
    assert np.all(make_cutoff(dom, np.zeros(21, bool), a).values == 1)


def test_dilate_ball():
    dom = GridDomain.interval(0, 1, 21)
    a = np.zeros(21, bool)
    a[10] = True
    assert dilate(dom, a, 3).sum() == 7


def test_vanish_order():
    dom = GridDomain.interval(-1, 1, 401)
    f = dom.coords()[0]
    rep = vanish_order(f ** 4, f, 4, 0.3)
    assert rep.passed and rep.order == pytest.approx(4.0, abs=1e-6)
    rep3 = vanish_order(2 * f ** 3, f, 4, 0.3)
    assert not rep3.passed and rep3.order == pytest.approx(3.0, abs=1e-6)
    assert np.isinf(vanish_order(0 * f, f, 4, 0.3).order)
    with pytest.raises(EmptyBand):
        vanish_order(f, f, 4, 0.0)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return la.from_entries(c, -s, s, c)


def test_homotopy_geodesic_interpolation():
    dom = GridDomain.interval(0, 1, 3)
    H = HomotopyField.from_callable(dom, lambda t: rotation(np.pi * t * np.ones(3)), np.linspace(0, 1, 5))
    for t in (0.1, 0.33, 0.9):
        assert np.abs(H.at(t) - rotation(np.pi * t * np.ones(3))).max() < 1e-14
    tt = np.array([0.0, 0.5, 1.0])
    assert np.abs(H.at(tt) - rotation(np.pi * tt)).max() < 1e-14
    assert np.allclose(H.gaps(), 2 * np.sin(np.pi / 8))
    R = H.refine(0.25)
    assert R.gaps().max() <= 0.25
    with pytest.raises(InvalidInput):
        H.at(1.5)


def test_homotopy_validation():
    dom = GridDomain.interval(0, 1, 3)
    with pytest.raises(InvalidInput):
        HomotopyField(dom, np.array([0.0, 0.7]), np.stack([la.eye_like((3,))] * 2))


def test_field_json_roundtrips(rng):
    dom = GridDomain.rectangle(0, 1, 0, 1, 4, 3)
    s = ScalarField(dom, rng.normal(size=dom.shape) + 1j * rng.normal(size=dom.shape))
    assert np.array_equal(ScalarField.from_json(s.to_json()).values, s.values)
    m = MatrixField(dom, rng.normal(size=dom.shape + (2, 2)))
    assert np.array_equal(MatrixField.from_json(m.to_json()).values, m.values)
    H = HomotopyField.from_callable(dom, lambda t: la.expm(t * m.values), [0, 0.5, 1])
    H2 = HomotopyField.from_json(H.to_json())
    assert np.array_equal(H2.frames, H.frames) and np.array_equal(H2.times, H.times)
    with pytest.raises(InvalidInput):
        ScalarField.from_json(m.to_json())
