"""Sparse multivariate polynomials with exact Gaussian-rational coefficients.

A polynomial is a mapping ``exponent tuple -> coefficient`` over an ordered
tuple of variable names.  Zero coefficients are never stored.  Operands with
different variable tuples are first lifted to the union of their variables
(first operand's order, then the newcomers in order of appearance).

Monomials are compared lexicographically on the exponent tuple, which is the
order used by :meth:`Polynomial.divmod`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import NotDivisible
from .exact import ExactComplex, exact, normalize, to_json_coef


def _merge_vars(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
    return a + tuple(v for v in b if v not in a)


class Polynomial:
    __slots__ = ("vars", "terms")

    def __init__(self, vars: Iterable[str], terms: Mapping[tuple, object] | None = None):
        self.vars = tuple(vars)
        clean = {}
        for e, c in (terms or {}).items():
            c = normalize(c)
            if c != 0:
                if len(e) != len(self.vars):
                    raise ValueError(f"exponent {e} does not match variables {self.vars}")
                clean[tuple(e)] = c
        self.terms = clean

    # constructors ---------------------------------------------------------
    @classmethod
    def const(cls, c, vars: Iterable[str] = ()) -> "Polynomial":
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): exact(c)})

    @classmethod
    def var(cls, name: str, vars: Iterable[str] | None = None) -> "Polynomial":
        vars = tuple(vars) if vars is not None else (name,)
        if name not in vars:
            vars = vars + (name,)
        e = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, {e: 1})

    @classmethod
    def symbols(cls, *names: str) -> tuple["Polynomial", ...]:
        return tuple(cls.var(n, names) for n in names)

    # structure ------------------------------------------------------------
    def lift(self, vars: tuple[str, ...]) -> "Polynomial":
        if vars == self.vars:
            return self
        missing = [v for v in self.vars if v not in vars]
        if missing:
            raise ValueError(f"cannot drop variables {missing}")
        idx = [self.vars.index(v) if v in self.vars else -1 for v in vars]
        terms = {tuple(e[i] if i >= 0 else 0 for i in idx): c for e, c in self.terms.items()}
        out = Polynomial.__new__(Polynomial)
        out.vars, out.terms = vars, terms
        return out

    def _coerce(self, other) -> tuple["Polynomial", "Polynomial"]:
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other, self.vars)
        vars = _merge_vars(self.vars, other.vars)
        return self.lift(vars), other.lift(vars)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        if name not in self.vars:
            return 0 if self.terms else -1
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def leading(self) -> tuple[tuple, object]:
        e = max(self.terms)
        return e, self.terms[e]

    def __len__(self):
        return len(self.terms)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "Polynomial":
        a, b = self._coerce(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            s = terms.get(e, 0) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = normalize(s)
        out = Polynomial.__new__(Polynomial)
        out.vars, out.terms = a.vars, terms
        return out

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        out = Polynomial.__new__(Polynomial)
        out.vars, out.terms = self.vars, {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other) -> "Polynomial":
        return self + (-other if isinstance(other, Polynomial) else -exact(other))

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c0 = exact(other)
            out = Polynomial.__new__(Polynomial)
            out.vars = self.vars
            out.terms = {} if c0 == 0 else {e: normalize(c * c0) for e, c in self.terms.items()}
            return out
        a, b = self._coerce(other)
        terms: dict = {}
        get = terms.get
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = get(e, 0) + ca * cb
        return Polynomial(a.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("non-negative integer powers only")
        out = Polynomial.const(1, self.vars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other, self.vars)
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # calculus / substitution ---------------------------------------------
    def partial(self, name: str) -> "Polynomial":
        if name not in self.vars:
            return Polynomial(self.vars, {})
        i = self.vars.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                terms[e2] = c * e[i]
        return Polynomial(self.vars, terms)

    def substitute(self, mapping: Mapping[str, object]) -> "Polynomial":
        """Replace variables by polynomials or exact constants.

        Substituted variables remain in ``vars`` (with exponent zero) so the
        result stays comparable with the input.
        """
        subs = {}
        for name, val in mapping.items():
            if name not in self.vars:
                continue
            subs[self.vars.index(name)] = val if isinstance(val, Polynomial) else Polynomial.const(val, self.vars)
        if not subs:
            return self
        out = Polynomial(self.vars, {})
        cache: dict = {}
        for e, c in self.terms.items():
            keep = tuple(0 if i in subs else x for i, x in enumerate(e))
            term = Polynomial(self.vars, {keep: c})
            for i, val in subs.items():
                if e[i]:
                    key = (i, e[i])
                    if key not in cache:
                        cache[key] = val ** e[i]
                    term = term * cache[key]
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, object]):
        """Numerically evaluate; values may be numbers or numpy arrays.

        Exact inputs (ints, Fractions, ExactComplex) give an exact result.
        """
        missing = [v for v, _ in zip(self.vars, range(len(self.vars)))
                   if v not in values and any(e[self.vars.index(v)] for e in self.terms)]
        if missing:
            raise KeyError(f"no value for {missing}")
        vals = [values.get(v, 0) for v in self.vars]
        numeric = any(isinstance(v, (float, complex, np.ndarray, np.generic)) for v in vals)
        total = 0
        for e, c in self.terms.items():
            term = complex(c) if numeric else c
            for v, k in zip(vals, e):
                if k:
                    term = term * v ** k
            total = total + term
        return total if numeric else normalize(total)

    def coefficient(self, name: str, power: int) -> "Polynomial":
        """Coefficient of name**power, as a polynomial in the remaining variables."""
        i = self.vars.index(name)
        return Polynomial(self.vars, {e[:i] + (0,) + e[i + 1:]: c
                                      for e, c in self.terms.items() if e[i] == power})

    def truncate(self, name: str, below: int) -> "Polynomial":
        """Keep only the terms with degree in ``name`` strictly below ``below``."""
        i = self.vars.index(name)
        return Polynomial(self.vars, {e: c for e, c in self.terms.items() if e[i] < below})

    # division -------------------------------------------------------------
    def divmod(self, g: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """Multivariate division by a single divisor (lex order).

        Returns (q, r) with self = q*g + r and no term of r divisible by
        the leading term of g.  For one divisor the remainder is zero iff
        g divides self.
        """
        p, g = self._coerce(g)
        if g.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        vars = p.vars
        lg_e, lg_c = g.leading()
        inv_lc = ExactComplex(1) / lg_c
        if g.is_monomial():
            q, r = {}, {}
            for e, c in p.terms.items():
                if all(x >= y for x, y in zip(e, lg_e)):
                    q[tuple(x - y for x, y in zip(e, lg_e))] = c * inv_lc
                else:
                    r[e] = c
            return Polynomial(vars, q), Polynomial(vars, r)
        work = dict(p.terms)
        q: dict = {}
        r: dict = {}
        g_rest = [(e, c) for e, c in g.terms.items() if e != lg_e]
        while work:
            e = max(work)
            c = work.pop(e)
            if all(x >= y for x, y in zip(e, lg_e)):
                shift = tuple(x - y for x, y in zip(e, lg_e))
                k = normalize(c * inv_lc)
                q[shift] = normalize(q.get(shift, 0) + k)
                for eg, cg in g_rest:
                    e2 = tuple(x + y for x, y in zip(eg, shift))
                    s = normalize(work.get(e2, 0) - k * cg)
                    if s == 0:
                        work.pop(e2, None)
                    else:
                        work[e2] = s
            else:
                r[e] = c
        return Polynomial(vars, q), Polynomial(vars, r)

    # presentation ---------------------------------------------------------
    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(self.vars, e) if k)
            if not mono:
                parts.append(repr(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c!r}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "format": "poly-v1",
            "vars": list(self.vars),
            "terms": [{"exps": list(e), "coef": to_json_coef(self.terms[e])}
                      for e in sorted(self.terms)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Polynomial":
        if data.get("format", "poly-v1") != "poly-v1":
            raise ValueError(f"expected poly-v1, got {data.get('format')}")
        vars = tuple(data["vars"])
        return cls(vars, {tuple(t["exps"]): normalize(ExactComplex.from_json(t["coef"]))
                          for t in data["terms"]})


def divide_exact(p: Polynomial, f: Polynomial, k: int = 1) -> Polynomial:
    """q with q * f**k == p; raises NotDivisible reporting the remainder."""
    g = f ** k
    q, r = p.divmod(g)
    if not r.is_zero():
        shown = sorted(r.terms)[:8]
        raise NotDivisible(
            f"{len(r)} remainder monomial(s) after dividing by ({f!r})^{k}: "
            + ", ".join(repr(Polynomial(r.vars, {e: r.terms[e]})) for e in shown),
            remainder=r,
        )
    return q


def is_divisible(p: Polynomial, f: Polynomial, k: int = 1) -> bool:
    try:
        divide_exact(p, f, k)
    except NotDivisible:
        return False
    return True


def random_polynomial(rng: np.random.Generator, vars: tuple[str, ...], n_terms: int = 4,
                      max_degree: int = 2, coef_range: int = 5, complex_coefs: bool = False) -> Polynomial:
    """Small random polynomial with integer (or Gaussian-integer) coefficients."""
    terms = {}
    for _ in range(n_terms):
        e = tuple(int(x) for x in rng.integers(0, max_degree + 1, size=len(vars)))
        re = int(rng.integers(-coef_range, coef_range + 1))
        im = int(rng.integers(-coef_range, coef_range + 1)) if complex_coefs else 0
        terms[e] = normalize(terms.get(e, 0) + ExactComplex(Fraction(re), Fraction(im)))
    return Polynomial(vars, terms)
