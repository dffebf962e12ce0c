"""Exact identities behind the fibration of unipotent products.

Q^k is the product U(z2 f) L(z3 f) ... U(z_{2k} f) L(z_{2k+1} f) of
elementary matrices; its entries have simple closed forms modulo f^3.
A full word of length 2n factors as

    psi(z) = L(z1 f) Q^{n-1}(z2..z_{2n-1}) U(z_{2n} f)

so, with the target written Id + f^2 [[a, b], [c, d]], the boundary
variables z1, z_{2n} are solved linearly and only the (1,1) entry survives
as an equation:  Qt := (Q^{n-1}_11 - 1) / f^2 = a.

Everything symbolic here is exact (Gaussian rationals).  The numeric
helpers (psi_eval, fiber_check, solve_boundary_vars) work on sampled fields.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .bundle import NilpotentPair, Replica, replica_eval
from .errors import InvalidInput, PivotVanishes, SizeGuard
from .fields import MatrixField, ScalarField
from .polynomial import Polynomial, divide_exact

MAX_K = 8


def zname(i: int) -> str:
    return f"z{i}"


def _digest(p: Polynomial) -> str:
    blob = json.dumps(p.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _poly_matmul(A, B):
    return [[A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]],
            [A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]]]


# ---------------------------------------------------------------------------
# Q^k
# ---------------------------------------------------------------------------

@dataclass
class QMatrix:
    k: int
    vars: tuple
    entries: list          # 2x2 nested list of Polynomial

    @property
    def f(self) -> Polynomial:
        return Polynomial.var("f", self.vars)

    def __getitem__(self, ij) -> Polynomial:
        i, j = ij
        return self.entries[i][j]

    def det(self) -> Polynomial:
        E = self.entries
        return E[0][0] * E[1][1] - E[0][1] * E[1][0]

    def evaluate(self, values: dict) -> np.ndarray:
        return la.from_entries(*(self.entries[i][j].evaluate(values) for i in (0, 1) for j in (0, 1)))


def q_vars(k: int) -> tuple:
    return tuple(zname(i) for i in range(2, 2 * k + 2)) + ("f",)


def q_expand(k: int) -> QMatrix:
    """Exact product U(z2 f) L(z3 f) ... U(z_{2k} f) L(z_{2k+1} f)."""
    if not 1 <= k <= MAX_K:
        raise SizeGuard(f"k={k} outside 1..{MAX_K}")
    vars = q_vars(k)
    one = Polynomial.const(1, vars)
    zero = Polynomial(vars, {})
    f = Polynomial.var("f", vars)
    M = [[one, zero], [zero, one]]
    for i in range(1, k + 1):
        u = Polynomial.var(zname(2 * i), vars) * f
        l = Polynomial.var(zname(2 * i + 1), vars) * f
        M = _poly_matmul(M, [[one, u], [zero, one]])
        M = _poly_matmul(M, [[one, zero], [l, one]])
    return QMatrix(k, vars, M)


def q_closed_forms(k: int) -> list:
    """The four entries of Q^k truncated below f^3."""
    vars = q_vars(k)
    z = {i: Polynomial.var(zname(i), vars) for i in range(2, 2 * k + 2)}
    f = Polynomial.var("f", vars)
    one = Polynomial.const(1, vars)
    zero = Polynomial(vars, {})
    s11, s22, s12, s21 = zero, zero, zero, zero
    for i in range(1, k + 1):
        s12 = s12 + z[2 * i]
        s21 = s21 + z[2 * i + 1]
        for j in range(1, k + 1):
            if i <= j:
                s11 = s11 + z[2 * i] * z[2 * j + 1]
            else:
                s22 = s22 + z[2 * i] * z[2 * j + 1]
    f2 = f * f
    return [[one + f2 * s11, f * s12], [f * s21, one + f2 * s22]]


def q_mod_f3_check(k: int) -> dict:
    """Entry minus closed form, divided exactly by f^3; cofactors and digests."""
    Q = q_expand(k)
    closed = q_closed_forms(k)
    f = Q.f
    entries = []
    cofactors = {}
    for i in (0, 1):
        for j in (0, 1):
            rem = Q[i, j] - closed[i][j]
            name = f"Q{i + 1}{j + 1}"
            try:
                cof = divide_exact(rem, f, 3)
                ok = True
            except Exception:
                cof, ok = rem, False
            cofactors[name] = cof
            entries.append({"name": f"{name} mod f^3", "passed": ok, "terms": len(cof),
                            "remainder_digest": _digest(cof)})
    det_rem = Q.det() - Polynomial.const(1, Q.vars)
    entries.append({"name": "det - 1", "passed": det_rem.is_zero(), "terms": len(det_rem),
                    "remainder_digest": _digest(det_rem)})
    f2_12 = Q[0, 1].coefficient("f", 2)
    entries.append({"name": "Q12 f^2 coefficient", "passed": f2_12.is_zero(), "terms": len(f2_12),
                    "remainder_digest": _digest(f2_12)})
    return {"k": k, "passed": all(e["passed"] for e in entries), "identities": entries,
            "cofactors": cofactors}


# ---------------------------------------------------------------------------
# reduced equation and its singular set
# ---------------------------------------------------------------------------

@dataclass
class ReducedEquation:
    n: int
    Qt: Polynomial           # (Q^{n-1}_11 - 1) / f^2
    Q: QMatrix
    target: object = None    # value of a at the base point, when known

    def mid_vars(self) -> list:
        return [zname(i) for i in range(2, 2 * self.n)]

    def at_zero_set(self) -> Polynomial:
        return self.Qt.substitute({"f": 0})

    def check(self) -> bool:
        f = self.Q.f
        return (f * f * self.Qt + Polynomial.const(1, self.Q.vars) - self.Q[0, 0]).is_zero()


def reduced_equation(n: int, target=None) -> ReducedEquation:
    if n < 2:
        raise InvalidInput(f"n must be >= 2, got {n}")
    Q = q_expand(n - 1)
    Qt = divide_exact(Q[0, 0] - Polynomial.const(1, Q.vars), Q.f, 2)
    return ReducedEquation(n, Qt, Q, target)


def _single_linear(p: Polynomial):
    """(variable, coefficient) if p is c * var with c != 0, else None."""
    if len(p) != 1:
        return None
    (e, c), = p.terms.items()
    if sum(e) != 1:
        return None
    return p.vars[e.index(1)], c


def gradient_singularity_check(n: int, samples: int = 1000, rng: np.random.Generator | None = None,
                               coef_range: int = 3) -> dict:
    """At f = 0: grad Qt = 0 iff z2 = ... = z_{2n-1} = 0.

    Symbolic part: the partials are homogeneous linear; the even partials
    are solved for the odd variables from z_{2n-1} downwards, the odd
    partials for the even variables from z2 upwards, each step leaving a
    single nonzero monomial.  Random part: exact Gaussian-integer samples
    with at least one nonzero coordinate must give a nonzero gradient.
    """
    red = reduced_equation(n)
    P = red.at_zero_set()
    mids = red.mid_vars()
    grads = {v: P.partial(v) for v in mids}
    m = n - 1
    steps = []
    ok = True

    # closed forms of the partials
    for k in range(1, m + 1):
        want_even = sum((Polynomial.var(zname(2 * l + 1), P.vars) for l in range(k, m + 1)),
                        Polynomial(P.vars, {}))
        want_odd = sum((Polynomial.var(zname(2 * i), P.vars) for i in range(1, k + 1)),
                       Polynomial(P.vars, {}))
        ok &= (grads[zname(2 * k)] - want_even).is_zero()
        ok &= (grads[zname(2 * k + 1)] - want_odd).is_zero()

    # every partial vanishes at the origin (homogeneous linear)
    for v, g in grads.items():
        ok &= all(sum(e) == 1 for e in g.terms)

    # triangular back-substitution, odd variables
    known = {}
    for k in range(m, 0, -1):
        g = grads[zname(2 * k)].substitute(known)
        hit = _single_linear(g)
        good = hit is not None and hit[0] == zname(2 * k + 1)
        steps.append({"partial": zname(2 * k), "reduces_to": repr(g), "forces": hit[0] if good else None})
        ok &= good
        if good:
            known[hit[0]] = 0
    # even variables
    known = {}
    for k in range(1, m + 1):
        g = grads[zname(2 * k + 1)].substitute(known)
        hit = _single_linear(g)
        good = hit is not None and hit[0] == zname(2 * k)
        steps.append({"partial": zname(2 * k + 1), "reduces_to": repr(g), "forces": hit[0] if good else None})
        ok &= good
        if good:
            known[hit[0]] = 0

    # random exact samples
    rng = rng if rng is not None else np.random.default_rng(0)
    from .exact import ExactComplex
    n_zero_grad = 0
    for _ in range(samples):
        while True:
            re = rng.integers(-coef_range, coef_range + 1, size=len(mids))
            im = rng.integers(-coef_range, coef_range + 1, size=len(mids))
            if np.any(re) or np.any(im):
                break
        vals = {v: ExactComplex(int(a), int(b)) for v, a, b in zip(mids, re, im)}
        vals["f"] = 0
        if all(g.evaluate(vals) == 0 for g in grads.values()):
            n_zero_grad += 1
    origin = {v: 0 for v in mids}
    origin["f"] = 0
    origin_zero = all(g.evaluate(origin) == 0 for g in grads.values())

    return {
        "n": n,
        "symbolic_passed": bool(ok),
        "steps": steps,
        "samples": samples,
        "samples_with_zero_gradient": n_zero_grad,
        "origin_gradient_zero": origin_zero,
        "passed": bool(ok) and n_zero_grad == 0 and origin_zero,
    }


# ---------------------------------------------------------------------------
# numeric fibre checks
# ---------------------------------------------------------------------------

def _values(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, ScalarField) else x, dtype=complex)


def psi_eval(z: list, pair: NilpotentPair, chart: str | None = None) -> MatrixField:
    """U^-(z1) U^+(z2) ... U^+(z_{2n}) in one chart of the pair."""
    if len(z) % 2:
        raise InvalidInput(f"psi needs an even number of parameters, got {len(z)}")
    if chart is None:
        chart = next(iter(pair.N_plus))
    out = la.eye_like(pair.domain.shape)
    for i, h in enumerate(z):
        sign = "-" if i % 2 == 0 else "+"
        out = out @ replica_eval(Replica(pair.id, sign, _values(h)), pair, chart)
    return MatrixField(pair.domain, out)


def psi_standard(z: list, f) -> np.ndarray:
    """L(z1 f) U(z2 f) ... U(z_{2n} f) for arrays of parameters."""
    f = np.asarray(f, dtype=complex)
    out = la.eye_like(np.shape(f))
    for i, h in enumerate(z):
        w = _values(h) * f
        out = out @ (la.lower(w) if i % 2 == 0 else la.upper(w))
    return out


def fiber_check(G, z: list, pair: NilpotentPair, chart: str | None = None, tol: float = 1e-12) -> dict:
    """Pointwise residual of psi(z) against G and the singular-set marker."""
    G = np.asarray(G.values if isinstance(G, MatrixField) else G, dtype=complex)
    P = psi_eval(z, pair, chart).values
    res = la.op_norm(P - G)
    mids = [_values(h) for h in z[1:-1]]
    if mids:
        sing = np.all([np.abs(m) <= tol for m in mids], axis=0)
    else:
        sing = np.ones(pair.domain.shape, dtype=bool)
    return {
        "residual": res,
        "max_residual": float(res.max(initial=0.0)),
        "singular": sing,
        "singular_fraction": float(sing.mean()),
        "length": len(z),
    }


def _scaled_products(z_mid: list, f: np.ndarray):
    """Q^{n-1} plus Q12 / f and Q21 / f computed without dividing by f.

    With D = diag(1, f):  U(x f) L(y f) = D^-1 U(x) L(y f^2) D, so Q12 / f is
    the (1,2) entry of the product with the f moved onto the lower factors;
    symmetrically for Q21 / f.
    """
    shape = np.shape(f)
    Q = la.eye_like(shape)
    P = la.eye_like(shape)
    Pp = la.eye_like(shape)
    f2 = f * f
    for i, h in enumerate(z_mid):
        w = _values(h)
        if i % 2 == 0:
            Q = Q @ la.upper(w * f)
            P = P @ la.upper(w)
            Pp = Pp @ la.upper(w * f2)
        else:
            Q = Q @ la.lower(w * f)
            P = P @ la.lower(w * f2)
            Pp = Pp @ la.lower(w)
    return Q, P[..., 0, 1], Pp[..., 1, 0]


def solve_boundary_vars(z_mid: list, a, b, c, f, delta: float = 1e-12) -> dict:
    """z1 and z_{2n} from the off-diagonal equations; report (1) and (4).

    Target Id + f^2 [[a, b], [c, d]] with d fixed by det = 1.  Solving the
    (2,1) and (1,2) entries of L(z1 f) Q U(z_{2n} f) with pivot 1 + f^2 a:
        z1     = (f c - Q21 / f) / (1 + f^2 a)
        z_{2n} = (f b - Q12 / f) / (1 + f^2 a)
    """
    if len(z_mid) % 2:
        raise InvalidInput("z_mid must hold z2..z_{2n-1} (even length)")
    f = np.asarray(_values(f))
    a, b, c = (_values(x) for x in (a, b, c))
    pivot = 1.0 + f * f * a
    if np.any(np.abs(pivot) <= delta):
        raise PivotVanishes(f"|1 + f^2 a| <= {delta:g} at {int(np.sum(np.abs(pivot) <= delta))} sample(s)")
    Q, q12_f, q21_f = _scaled_products(z_mid, f)
    z1 = (f * c - q21_f) / pivot
    z2n = (f * b - q12_f) / pivot
    f2 = f * f
    T = la.from_entries(pivot, f2 * b, f2 * c, (1.0 + f2 * f2 * b * c) / pivot)
    lhs = la.lower(-z1 * f) @ T @ la.upper(-z2n * f)
    res = {
        "eq1": np.abs(lhs[..., 0, 0] - Q[..., 0, 0]),
        "eq2": np.abs(lhs[..., 0, 1] - Q[..., 0, 1]),
        "eq3": np.abs(lhs[..., 1, 0] - Q[..., 1, 0]),
        "eq4": np.abs(lhs[..., 1, 1] - Q[..., 1, 1]),
    }
    return {"z1": z1, "z2n": z2n, "residuals": res,
            "max": {k: float(v.max(initial=0.0)) for k, v in res.items()}}


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    k_max: int
    q_checks: list = field(default_factory=list)
    gradient_checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(q["passed"] for q in self.q_checks) and all(g["passed"] for g in self.gradient_checks)

    def to_json(self) -> dict:
        return {
            "format": "identity-report-v1",
            "k_max": self.k_max,
            "passed": self.passed,
            "q_mod_f3": [{"k": q["k"], "passed": q["passed"], "identities": q["identities"]}
                         for q in self.q_checks],
            "singular_set": [{kk: v for kk, v in g.items()} for g in self.gradient_checks],
        }


def identity_report(k_max: int = 6, samples: int = 1000, seed: int = 0) -> IdentityReport:
    rep = IdentityReport(k_max)
    for k in range(1, k_max + 1):
        rep.q_checks.append(q_mod_f3_check(k))
    rng = np.random.default_rng(seed)
    for n in range(2, min(k_max + 1, MAX_K) + 1):
        rep.gradient_checks.append(gradient_singularity_check(n, samples, rng))
    return rep
