import numpy as np
import pytest
import sympy
from hypothesis import settings

from unifact.exact import ExactComplex

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sl2(rng, n, scale=1.0):
    """n random complex SL(2) matrices."""
    A = scale * (rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2)))
    d = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    return A / np.sqrt(d)[:, None, None]


def to_sympy(p):
    """Polynomial -> expanded sympy expression (test oracle)."""
    syms = sympy.symbols(p.vars)
    out = 0
    for e, c in p.terms.items():
        c = ExactComplex.coerce(c)
        term = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)
        for s, k in zip(syms, e):
            term *= s ** k
        out += term
    return sympy.expand(out)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
