from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from unifact.errors import NotDivisible

from conftest import to_sympy
from unifact.exact import ExactComplex, exact_sqrt_abs, normalize
from unifact.polynomial import Polynomial, divide_exact, is_divisible, random_polynomial


VARS = ("x", "y", "f")
small = st.integers(-4, 4)
monos = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
polys = st.dictionaries(monos, small, max_size=5).map(lambda t: Polynomial(VARS, t))


def test_exact_complex_arithmetic():
    a = ExactComplex(1, 2)
    b = ExactComplex(Fraction(1, 2), -1)
    assert a * b == ExactComplex(Fraction(5, 2), 0)
    assert normalize(a * b) == Fraction(5, 2)
    assert (a / a) == 1
    assert ExactComplex.from_json(a.to_json()) == a


def test_exact_sqrt_abs():
    assert exact_sqrt_abs(Fraction(9, 4)) == Fraction(3, 2)
    assert exact_sqrt_abs(ExactComplex(0, 4)) == 2
    assert exact_sqrt_abs(ExactComplex(7, 24)) == 5
    assert exact_sqrt_abs(ExactComplex(Fraction(7, 4), 6)) == Fraction(5, 2)
    for bad in (2, ExactComplex(3, 4)):
        with pytest.raises(ValueError):
            exact_sqrt_abs(bad)


def test_basic_product():
    x, y, f = Polynomial.symbols(*VARS)
    assert (1 + f) * (1 - f) == 1 - f * f
    assert ((x + y) ** 2).terms == (x * x + 2 * x * y + y * y).terms


def test_partial_and_substitute():
    z2, z3, z5 = Polynomial.symbols("z2", "z3", "z5")
    p = z2 * z3 + z2 * z5
    assert p.partial("z2") == z3 + z5
    assert p.substitute({"z2": 2}) == 2 * z3 + 2 * z5
    assert p.evaluate({"z2": 1, "z3": 2, "z5": 5}) == 7


def test_divide_exact_and_failure():
    z2, z3, f = Polynomial.symbols("z2", "z3", "f")
    q = divide_exact(z2 * z3 * f * f, f, 2)
    assert q == z2 * z3
    with pytest.raises(NotDivisible) as err:
        divide_exact(f, f, 2)
    assert err.value.remainder == f


def test_json_roundtrip(rng):
    p = random_polynomial(rng, VARS, 6, 3, complex_coefs=True)
    assert Polynomial.from_json(p.to_json()) == p


@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p + q == q + p
    assert (p - p).is_zero()


@given(polys, polys)
def test_product_matches_sympy(p, q):
    assert sympy.expand(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0


@given(polys, st.integers(1, 3))
def test_division_roundtrip(p, k):
    f = Polynomial.var("f", VARS)
    assert divide_exact(p * f ** k, f, k) == p
    g = Polynomial.var("x", VARS) + 2 * f
    assert divide_exact(p * g, g) == p


@given(polys)
def test_divisibility_by_f_iff_no_f0_terms(p):
    f = Polynomial.var("f", VARS)
    assert is_divisible(p, f) == p.coefficient("f", 0).is_zero()
