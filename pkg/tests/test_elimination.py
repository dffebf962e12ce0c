from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from unifact import linalg as la
from unifact.bundle import ChartBundle, standard_pair
from unifact.elimination import (eliminate_array, eliminate_four, eliminate_four_divisible,
                                 factor_near_identity, last_entry_check, localize_to_identity,
                                 random_last_entry_instance, reduce_to_su2, replicas_product,
                                 subdivide_homotopy, symbolic_divisible_quad, verify_divisibility_lemmas,
                                 whitehead_diag, whitehead_printed, whitehead_standard)
from unifact.errors import CannotSatisfy, NotIdentityNearZeroSet, PivotVanishes, SmallPivot
from unifact.exact import ExactComplex
from unifact.fields import GridDomain, HomotopyField
from unifact.polynomial import Polynomial

from conftest import random_sl2


def quad_product(q):
    return la.lower(q[0]) @ la.upper(q[1]) @ la.lower(q[2]) @ la.upper(q[3])


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------

def test_eliminate_four_frozen_values():
    q = eliminate_four(la.Mat2.from_rows([[2, 1], [1, 1]]))
    assert q.as_tuple() == (0, 1, 1, 0)
    q = eliminate_four(la.Mat2.from_rows([[2, 0], [0, Fraction(1, 2)]]))
    assert q.as_tuple() == (Fraction(-1, 2), 1, 1, Fraction(-1, 2))
    assert q.product() == la.Mat2.from_rows([[2, 0], [0, Fraction(1, 2)]])


def test_eliminate_four_identity_is_exact_zero():
    q = eliminate_four(la.Mat2.identity(True))
    assert q.is_zero() and all(z == 0 for z in q.as_tuple())
    qf = eliminate_four(la.Mat2.identity(False))
    assert all(z == 0 for z in qf.as_tuple())


def test_eliminate_four_small_pivot():
    with pytest.raises(SmallPivot):
        eliminate_four(la.Mat2.from_rows([[0, 1], [-1, 0]]))


def test_eliminate_four_random_reconstruction(rng):
    A = random_sl2(rng, 4000)
    A = A[np.abs(A[:, 0, 0]) >= 0.5]
    z = eliminate_array(A)
    assert la.op_norm(quad_product(z) - A).max() <= 1e-11


def test_eliminate_pivot_continuity():
    a = 1 + np.logspace(-12, -1, 30) * np.exp(0.7j)
    z2, z3 = eliminate_array(la.from_entries(a, 0, 0, 1 / a))[1:3]
    assert np.allclose(np.abs(z3), np.sqrt(np.abs(a - 1)))
    assert np.all(np.diff(np.abs(z3)) > 0)


def test_whitehead_frozen_values():
    assert whitehead_diag(1).is_zero()
    assert whitehead_diag(2).as_tuple() == (Fraction(-1, 2), 1, 1, Fraction(-1, 2))
    r2 = np.sqrt(2)
    q = np.array(whitehead_diag(-1).as_tuple(), dtype=complex)
    assert np.allclose(q, [-r2, r2, -r2, r2], atol=1e-15)
    assert np.allclose(quad_product(q), -np.eye(2), atol=1e-14)
    with pytest.raises(Exception):
        whitehead_diag(0)


def test_whitehead_exact_gaussian():
    lam = ExactComplex(Fraction(1, 4), 1)       # lam - 1 = -3/4 + i, |.| = 5/4: irrational root
    with pytest.raises(Exception):
        whitehead_diag(lam)
    lam = ExactComplex(Fraction(7, 25) + 1, Fraction(24, 25))  # |lam - 1| = 1
    q = whitehead_diag(lam)
    P = q.product()
    inv = ExactComplex(1) / lam
    assert P == la.Mat2(lam, 0, 0, inv) or P == la.Mat2.from_rows([[lam, 0], [0, inv]])


def test_whitehead_random_consistency(rng):
    lam = rng.uniform(0.2, 3, 100) * np.exp(1j * rng.uniform(-np.pi, np.pi, 100))
    lam = lam[np.abs(lam - 1) >= 1e-3]
    for l in lam:
        q = np.array(whitehead_diag(complex(l)).as_tuple())
        assert np.abs(quad_product(q) - np.diag([l, 1 / l])).max() <= 1e-12
        e = np.array(eliminate_four(la.Mat2(complex(l), 0j, 0j, 1 / complex(l))).as_tuple())
        assert np.abs(q - e).max() <= 1e-12


def test_whitehead_printed_form_is_off():
    q = whitehead_printed(2.0)
    P = q.product().to_array()
    assert P[1, 0] == pytest.approx(-1.0, abs=1e-15)      # -(sqrt|2-1|)^3
    assert np.abs(P - np.diag([2, 0.5])).max() == pytest.approx(1.0)


def test_whitehead_standard():
    for lam in (2, Fraction(-3, 5), ExactComplex(0, 1)):
        q = whitehead_standard(lam)
        inv = ExactComplex(1) / ExactComplex.coerce(lam)
        assert q.product() == la.Mat2.from_rows([[lam, 0], [0, inv]]).to_exact()
    assert not whitehead_standard(1).is_zero()


# ---------------------------------------------------------------------------
# divisible variant
# ---------------------------------------------------------------------------

def divisible_product(q, f):
    return quad_product(f * np.array(q.as_tuple()))


def test_divisible_zero_and_small_t():
    f = np.array([0.0, 1e-3, 0.05])
    z = np.zeros(3)
    assert eliminate_four_divisible(z, z, z, z, f, np.ones(3)).is_zero()
    q = eliminate_four_divisible(1 + z, z, z, z, f, np.ones(3))
    P = divisible_product(q, f)
    assert np.abs(P[:, 0, 0] - (1 + f ** 3)).max() <= 1e-12


def test_divisible_reconstruction(rng):
    n = 400
    f = rng.uniform(-0.5, 0.5, n)
    fi = rng.uniform(0.5, 2, n) + 0j
    a, b, c = (rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(3))
    p = 1 + f ** 3 * fi * a
    d = (f ** 3 * fi * b * c - a) / p                # det of target = 1
    q = eliminate_four_divisible(a, b, c, d, f, fi)
    T = la.eye_like((n,)) + (f ** 3 * fi)[:, None, None] * la.from_entries(a, b, c, d)
    assert np.abs(divisible_product(q, f) - T).max() <= 1e-10
    assert np.allclose(q.z2 * q.z3, a * fi * f)


def test_divisible_pivot():
    with pytest.raises(PivotVanishes):
        eliminate_four_divisible(-1.0, 0, 0, 0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# divisibility lemmas (exact)
# ---------------------------------------------------------------------------

def test_divisibility_lemmas_symbolic():
    x, y = Polynomial.symbols("x", "y")
    for f, fi in ((x, Polynomial.const(1, ("x", "y"))), (x * y - 1, x + 2), (x + y, x * x + 1)):
        a, b, c = x * y + 3, y - 2 * x, x * x
        rep = verify_divisibility_lemmas(symbolic_divisible_quad(a, b, c, f, fi))
        assert rep["passed"], rep


def test_divisibility_lemmas_negative_control():
    # dropping the f^2 f_i weight on b breaks f^2 f_i | (z2 + z4)
    x, y = Polynomial.symbols("x", "y")
    q = symbolic_divisible_quad(x + 1, y, x, x, Polynomial.const(1, ("x", "y")))
    q.z4p = q.b - q.sigma
    rep = verify_divisibility_lemmas(q)
    assert not rep["f^2*fi | p*(z2+z4)"] and not rep["passed"]


def test_last_entry_inference(rng):
    x, y = Polynomial.symbols("x", "y")
    f = x
    p, q, r = x + y, y * y - 1, 3 * x
    # Id + f [[f^2 p, f q, f r, s]] with det 1: build from elementary factors
    a11, a12, a21, a22, g = random_last_entry_instance(rng)
    assert last_entry_check(a11, a12, a21, a22, g)["passed"]
    for _ in range(20):
        assert last_entry_check(*random_last_entry_instance(rng))["passed"]
    bad = last_entry_check(f * p, f * q, f * r, Polynomial.const(1, ("x", "y")), f)
    assert not bad["passed"]


# ---------------------------------------------------------------------------
# field stages
# ---------------------------------------------------------------------------

K = np.array([[0.3, 1.0], [0.5, -0.3]])


def f4_problem(n=201):
    dom = GridDomain.interval(-1, 1, n)
    b = ChartBundle.trivial(dom)
    x = dom.coords()[0]
    pair = standard_pair(b, x + 0j)
    H = HomotopyField.from_callable(dom, lambda t: la.expm(t * (x ** 4)[:, None, None] * K), np.linspace(0, 1, 5))
    return b, pair, H


def test_localize_single_chart():
    b, pair, H = f4_problem()
    res = localize_to_identity({"0": H.end}, {"0": H}, b, pair, radius=3)
    assert res.omega.any() and res.omega[100]
    assert np.array_equal(res.G["0"][res.omega], la.eye_like((int(res.omega.sum()),)))
    assert res.snap_residual <= 1e-10
    # G = G' * (localization product)
    P = replicas_product(res.replicas, pair, "0")
    assert np.abs(res.G["0"] @ P - H.end).max() < 1e-13
    assert all(np.all(r.h[pair.zero_mask()] == 0) for r in res.replicas)
    assert all(d["passed"] for d in res.divisibility)


def test_localize_identity_input():
    b, pair, H = f4_problem()
    I = HomotopyField.constant_identity(b.domain)
    res = localize_to_identity({"0": I.end}, {"0": I}, b, pair)
    assert all(not np.any(r.h) for r in res.replicas)
    assert np.array_equal(res.G["0"], la.eye_like(b.domain.shape))


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return la.from_entries(c, -s, s, c)


def test_subdivision_rotation_seven_steps():
    dom = GridDomain.interval(0, 1, 2)
    H = HomotopyField.from_callable(dom, lambda t: rotation(np.pi * t * np.ones(2)), np.linspace(0, 1, 1025))
    sub = subdivide_homotopy(H, 0.5)
    assert sub.n_steps == 7
    assert np.all(sub.closeness <= 0.5)
    assert np.diff(sub.breakpoints).max() <= 2 / np.pi * np.arcsin(0.25) + 1e-12


def test_subdivision_trivial_cases():
    dom = GridDomain.interval(0, 1, 3)
    assert subdivide_homotopy(HomotopyField.constant_identity(dom)).n_steps == 1
    H = HomotopyField.from_callable(dom, lambda t: rotation(np.pi * t * np.ones(3)), np.linspace(0, 1, 9))
    assert subdivide_homotopy(H, 2.0).n_steps == 1
    coarse = HomotopyField.from_callable(dom, lambda t: rotation(np.pi * t * np.ones(3)), [0, 0.5, 1])
    with pytest.raises(CannotSatisfy):
        subdivide_homotopy(coarse, 0.5)


def test_near_identity_two_step_rotation():
    # grids need two samples per axis; both carry the same point value
    dom = GridDomain.interval(0, 1, 2)
    H = HomotopyField.from_callable(dom, lambda t: rotation(0.8 * t * np.ones(2)), [0, 0.5, 1])
    sub = subdivide_homotopy(H, 0.5)
    assert sub.n_steps == 2
    f = np.ones(2)
    reps = factor_near_identity(H, sub, f, np.zeros(2, bool))
    assert len(reps) == 8
    pair = standard_pair(ChartBundle.trivial(dom))
    assert np.abs(replicas_product(reps, pair, "0") - H.end).max() <= 1e-10


def test_reduce_to_su2():
    dom = GridDomain.interval(-1, 1, 41)
    x = dom.coords()[0]
    f = x.astype(complex)
    inner = np.abs(x) <= 0.1 + 1e-12
    target = np.where(inner[:, None, None], la.eye_like((41,)), np.array([[2, 1], [1, 1]]))
    H = HomotopyField(dom, [0, 1], np.stack([la.eye_like((41,)), target]))
    red = reduce_to_su2(H, f, inner)
    assert red.su2_defect <= 1e-10
    pair = standard_pair(ChartBundle.trivial(dom), f)
    P = red.unitary.end @ replicas_product(red.replicas, pair, "0")
    assert np.abs(P - target).max() <= 1e-10
    assert all(np.all(r.h[inner] == 0) for r in red.replicas)
    # already unitary: no replicas with nonzero parameters
    U = HomotopyField.from_callable(dom, lambda t: rotation(t * x), [0, 1])
    red2 = reduce_to_su2(U, f, inner & (x == 0))
    assert all(not np.any(r.h) for r in red2.replicas)
    bad = HomotopyField(dom, [0, 1], np.stack([la.eye_like((41,)), la.upper(np.ones(41))]))
    with pytest.raises(NotIdentityNearZeroSet):
        reduce_to_su2(bad, f, inner)


cplx = st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False)


@given(cplx, cplx, cplx)
def test_eliminate_four_property(a, b, c):
    # any det-1 matrix with |a| >= 1/2 is a lower/upper/lower/upper product
    if abs(a) < 0.5:
        a = a + 0.5 if a.real >= 0 else a - 0.5
    d = (1 + b * c) / a
    A = np.array([[a, b], [c, d]])
    z = np.array(eliminate_four(la.Mat2(a, b, c, d)).as_tuple(), dtype=complex)
    scale = 1 + np.abs(A).max() ** 2
    assert np.abs(quad_product(z) - A).max() <= 1e-12 * scale


@given(st.floats(0.1, 3), st.floats(-np.pi, np.pi))
def test_whitehead_property(r, phi):
    lam = r * np.exp(1j * phi)
    if abs(lam - 1) < 1e-3:
        return
    q = np.array(whitehead_diag(complex(lam)).as_tuple())
    assert np.abs(quad_product(q) - np.diag([lam, 1 / lam])).max() <= 1e-11
