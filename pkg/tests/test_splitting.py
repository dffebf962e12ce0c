import numpy as np
import pytest

from unifact import linalg as la
from unifact.errors import CommonZero, InvalidInput, ZeroSetsIntersect
from unifact.examples import square_field, square_functions
from unifact.fields import GridDomain, HomotopyField
from unifact.splitting import reconstruction_residual, split_general, split_plan, split_two, upgrade_divisibility


def square_case(n, m, frames=9):
    dom = GridDomain.rectangle(0.0, 1.0, 0.0, 1.0, n, n)
    H = HomotopyField.from_callable(dom, lambda t: square_field(dom, t), np.linspace(0, 1, frames))
    fs = square_functions(dom, m)
    return dom, {"0": H.end.copy()}, {"0": H}, fs


@pytest.mark.parametrize("m", [2, 3])
def test_split_square(m):
    dom, F, Ft, fs = square_case(128, m)
    masks = [np.abs(f) <= 1e-12 for f in fs]
    factors = split_general(F, Ft, masks)
    assert len(factors) == m
    rr = reconstruction_residual(factors, F, Ft)
    assert rr["end"] <= m * 1e-12 and rr["frames"] <= m * 1e-12
    for g in factors:
        assert g.strong_nullity() <= 1e-12
        assert la.dist_to_identity(g.homotopy["0"].frames[0]).max() <= 1e-12


def test_split_two_wrapper_and_identity_pieces():
    dom = GridDomain.interval(0, 1, 101)
    x = dom.coords()[0]
    H = HomotopyField.from_callable(dom, lambda t: la.expm(t * la.from_entries(0 * x, x + 1, 0 * x, 0 * x)),
                                    np.linspace(0, 1, 5))
    a, b = split_two(H.end, H, x == 0, x == 1)
    assert np.abs(a.G["0"] @ b.G["0"] - H.end).max() <= 1e-14
    assert a.strong_nullity() == 0 and b.strong_nullity() == 0
    # alpha is Id near the first zero set, beta is Id away from it
    assert np.array_equal(a.G["0"][:3], la.eye_like((3,)))
    assert np.array_equal(b.G["0"][-3:], la.eye_like((3,)))


def test_split_rejects_intersections():
    dom = GridDomain.rectangle(0, 1, 0, 1, 17, 17)
    x, y = dom.coords()
    with pytest.raises(ZeroSetsIntersect):
        split_plan(dom, [x == 0, y == 0])
    with pytest.raises(CommonZero):
        split_plan(dom, [x == 0, y == 0, (x + y) == 0])
    with pytest.raises(InvalidInput):
        split_plan(dom, [])


def test_split_rejects_non_homotopy():
    dom, F, Ft, fs = square_case(16, 2)
    bad = {"0": 2 * F["0"]}
    with pytest.raises(InvalidInput):
        split_general(bad, Ft, [np.abs(f) <= 1e-12 for f in fs])


def test_upgrade_reports_vacuous_and_order_inf():
    dom, F, Ft, fs = square_case(48, 3)
    masks = [np.abs(f) <= 1e-12 for f in fs]
    factors = split_general(F, Ft, masks)
    up, reports = upgrade_divisibility(factors, fs)
    assert [r.index for r in reports] == [0, 1, 2]
    for r, g in zip(reports, up):
        assert r.status in ("vacuous", "order inf", "tapered") or r.status.endswith("(decay)")
        js = r.to_json()
        assert js["index"] == r.index
    rr = reconstruction_residual(up, F, Ft)
    assert rr["end"] <= 1e-10


def test_upgrade_tapers_and_preserves_product():
    dom = GridDomain.interval(-1, 1, 401)
    x = dom.coords()[0]
    K = np.array([[0.2, 1.0], [0.3, -0.2]])
    # vanishes only to first order at x = 0, the taper must add the rest
    H1 = HomotopyField.from_callable(dom, lambda t: la.expm(t * x[:, None, None] * K), np.linspace(0, 1, 5))
    H2 = HomotopyField(dom, H1.times, np.stack([la.eye_like((401,))] * 5))
    from unifact.splitting import SuitableFactor
    g1 = SuitableFactor({"0": H1.end}, {"0": H1}, 0, x == 0)
    g2 = SuitableFactor({"0": H2.end}, {"0": H2}, 1, np.zeros(401, bool))
    up, rep = upgrade_divisibility([g1, g2], [x, 2.5 + 0 * x])
    assert rep[0].status == "tapered" and rep[0].order >= 4
    P = up[0].G["0"] @ up[1].G["0"]
    assert np.abs(P - H1.end).max() <= 1e-12
