import numpy as np
import pytest

from unifact import linalg as la
from unifact.bundle import (Chart, ChartBundle, NilpotentPair, Replica, SectionPair, build_pair,
                            exp_nilpotent, replica_eval, standard_pair, unipotent_log)
from unifact.errors import InvalidInput, NotUnipotent, UnboundedQuotient
from unifact.examples import two_chart_bundle, two_chart_pair
from unifact.fields import GridDomain


def test_standard_pair():
    dom = GridDomain.circle(8)
    p = standard_pair(ChartBundle.trivial(dom))
    assert np.allclose(p.N("-", "0"), la.from_entries(0, 0, 1, 0))
    assert np.allclose(p.N("+", "0"), la.from_entries(0, 1, 0, 0))
    assert p.invariants()["passed"]


def test_two_chart_lower_nilpotent():
    b = two_chart_bundle(201)
    p = two_chart_pair(b)
    x = b.domain.coords()[0]
    m = b.masks["0"]
    want = la.from_entries(x ** 2, -x ** 2, x ** 2, -x ** 2)
    assert np.abs(p.N("-", "0")[m] - want[m]).max() < 1e-14
    inv = p.invariants()
    assert inv["passed"]
    # N^- s1 = x s2 and (N^-)^2 = 0
    s1 = p.sections.s1["0"]
    s2 = p.sections.s2["0"]
    assert np.allclose(np.einsum("...ab,...b->...a", p.N("-", "0"), s1)[m], (x[:, None] * s2)[m])
    assert inv["0"]["square_zero"] < 1e-14


def test_two_chart_compatibility():
    b = two_chart_bundle(201)
    p = two_chart_pair(b)
    assert b.check_cocycle()["passed"]
    ov = b.overlap("0", "1")
    g = b.g("0", "1")[ov]
    for s in ("+", "-"):
        lhs = p.N(s, "0")[ov]
        rhs = g @ p.N(s, "1")[ov] @ la.inverse(g)
        assert np.abs(lhs - rhs).max() < 1e-13


def test_bundle_requires_transition_on_overlap():
    dom = GridDomain.interval(0, 1, 21)
    with pytest.raises(InvalidInput):
        ChartBundle(dom, [Chart("a", [[0, 15]]), Chart("b", [[5, 21]])])
    with pytest.raises(InvalidInput):
        ChartBundle(dom, [Chart("a", [[0, 10]])])


def test_bundle_json_roundtrip():
    b = two_chart_bundle(41)
    b2 = ChartBundle.from_json(b.to_json())
    assert b2.ids == b.ids
    assert np.array_equal(b2.g("1", "0")[b.overlap("0", "1")], b.g("1", "0")[b.overlap("0", "1")])
    p = two_chart_pair(b)
    p2 = NilpotentPair.from_json(p.to_json(), b2)
    assert np.allclose(p2.N("-", "1"), p.N("-", "1"))


def test_unbounded_quotient():
    dom = GridDomain.interval(-1, 1, 41)
    b = ChartBundle.trivial(dom)
    x = dom.coords()[0].astype(complex)
    one = np.ones_like(x)
    s1 = np.stack([one, 0 * x], -1)
    s2 = np.stack([x, x], -1)           # det S = x
    with pytest.raises(UnboundedQuotient):
        build_pair(b, SectionPair({"0": s1}, {"0": s2}), one)

def test_unbounded_quotient_is_resolution_dependent():
    # det S = x^2 against f = x: f/det S grows like 1/x, visible once the
    # grid resolves it past the safety factor
    for n, raises in ((41, False), (401, True)):
        dom = GridDomain.interval(-1, 1, n)
        b = ChartBundle.trivial(dom)
        x = dom.coords()[0].astype(complex)
        s1 = np.stack([np.ones_like(x), 0 * x], -1)
        s2 = np.stack([x, x ** 2], -1)
        sec = SectionPair({"0": s1}, {"0": s2})
        if raises:
            with pytest.raises(UnboundedQuotient):
                build_pair(b, sec, x)
        else:
            build_pair(b, sec, x)


def test_replica_and_nilpotent_log_exp(rng):
    dom = GridDomain.circle(16)
    p = standard_pair(ChartBundle.trivial(dom))
    h = rng.normal(size=16) + 0j
    U = replica_eval(Replica("0", "+", h), p, "0")
    assert np.allclose(U, la.upper(h))
    Ui = replica_eval(Replica("0", "+", h).inverse(), p, "0")
    assert np.allclose(U @ Ui, la.eye_like((16,)))
    N = unipotent_log(U)
    assert np.array_equal(exp_nilpotent(N), U)
    with pytest.raises(NotUnipotent):
        unipotent_log(2 * la.eye_like(()))
