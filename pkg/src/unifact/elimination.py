"""Explicit factorization kernels.

Scalar kernels
    eliminate_four, eliminate_four_divisible, whitehead_diag (+ variants):
    parameters (z1, z2, z3, z4) with  L(z1) U(z2) L(z3) U(z4) = target.
    All of them return exact zeros when the target is Id.

Field stages (run on one suitable factor G with its homotopy G_t)
    localize_to_identity -> flatten_homotopy -> to_section_frame
    -> reduce_to_su2 -> subdivide_homotopy -> factor_near_identity

In the frame of the sections, S^-1 U^-(h) S = L(h f) and
S^-1 U^+(h) S = U(h f); an elementary parameter w therefore becomes the
replica parameter h = w / f, extended by 0 across the zero set of f.

Divisibility checks (exact polynomial mode): verify_divisibility_lemmas,
last_entry_check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import linalg as la
from .bundle import ChartBundle, NilpotentPair, Replica, replica_eval
from .errors import (CannotSatisfy, CoverDoesNotContainZeroSet, InvalidInput,
                     NotIdentityNearZeroSet, PivotVanishes, SmallPivot)
from .exact import ExactComplex, exact_sqrt_abs, normalize
from .fields import HomotopyField, cell_distance, dilate, make_cutoff, vanish_order
from .linalg import ElementaryFactor, Mat2
from .polynomial import Polynomial, divide_exact, is_divisible

PIVOT_DELTA = 1e-6
SIGNS = ("-", "+", "-", "+")
R_SNAP = 1e-13


@dataclass
class EliminationQuad:
    z1: Any
    z2: Any
    z3: Any
    z4: Any

    def as_tuple(self) -> tuple:
        return (self.z1, self.z2, self.z3, self.z4)

    def factors(self) -> list[ElementaryFactor]:
        return [ElementaryFactor(k, z) for k, z in zip("LULU", self.as_tuple())]

    def product(self) -> Mat2:
        return la.product(f.matrix() for f in self.factors())

    def product_array(self, scale=1.0) -> np.ndarray:
        """L(s z1) U(s z2) L(s z3) U(s z4) for array-valued parameters."""
        z = [scale * np.asarray(x, dtype=complex) for x in self.as_tuple()]
        return la.lower(z[0]) @ la.upper(z[1]) @ la.lower(z[2]) @ la.upper(z[3])

    def is_zero(self) -> bool:
        return all(np.all(np.asarray(z) == 0) for z in self.as_tuple())


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------

def _root_pair(x):
    """(sqrt|x|, x / sqrt|x|), the second set to 0 where x = 0.  Arrays."""
    x = np.asarray(x, dtype=complex)
    r = np.sqrt(np.abs(x))
    safe = np.where(r == 0, 1.0, r)
    return r + 0j, np.where(r == 0, 0.0, x / safe)


def _exact_root_pair(x):
    if x == 0:
        return 0, 0
    try:
        r = exact_sqrt_abs(x)
    except ValueError as e:
        raise InvalidInput(f"exact backend: {e}; use the float backend") from None
    return normalize(r), normalize(ExactComplex.coerce(x) / r)


def eliminate_array(A, delta: float = PIVOT_DELTA) -> np.ndarray:
    """Batched eliminate_four; returns z with shape (4,) + batch shape."""
    A = np.asarray(A, dtype=complex)
    a, b, c = A[..., 0, 0], A[..., 0, 1], A[..., 1, 0]
    small = np.abs(a) < delta
    if np.any(small):
        raise SmallPivot(f"|a| < {delta:g} at {int(small.sum())} samples (min {np.abs(a).min():.3e})")
    z2, z3 = _root_pair(a - 1)
    z1 = (c - z3) / a
    z4 = (b - z2) / a
    return np.stack([z1, z2, z3, z4])


def eliminate_four(A: Mat2, delta: float = PIVOT_DELTA) -> EliminationQuad:
    """Four-factor solution under a != 0 with the interpolation condition.

    z2 = sqrt|a-1|, z3 = (a-1)/sqrt|a-1| (0 at a = 1), z1 = (c - z3)/a,
    z4 = (b - z2)/a.  Exact inputs give exact output when sqrt|a-1| is
    rational.
    """
    if not isinstance(A, Mat2):
        A = Mat2.from_array(A)
    if A.is_exact:
        a, b, c = A.a11, A.a12, A.a21
        if abs(complex(a)) < delta:
            raise SmallPivot(f"|a| = {abs(complex(a)):.3e} < {delta:g}")
        z2, z3 = _exact_root_pair(a - 1)
        inv_a = ExactComplex(1) / ExactComplex.coerce(a)
        return EliminationQuad(normalize((c - z3) * inv_a), z2, z3, normalize((b - z2) * inv_a))
    z = eliminate_array(A.to_array(), delta)
    return EliminationQuad(*(complex(x) for x in z))


def eliminate_four_divisible(a, b, c, d, f, fi, delta: float = PIVOT_DELTA) -> EliminationQuad:
    """Solve L(f z1) U(f z2) L(f z3) U(f z4) = Id + f^3 f_i [[a, b], [c, d]].

    z2 = sqrt|a f_i f|, z3 = a f_i f / z2 (0 where 0),
    z1 = (f^2 f_i c - z3) / p, z4 = (f^2 f_i b - z2) / p, p = 1 + f^3 f_i a.
    ``d`` only enters through the determinant condition on the target.
    """
    a, b, c, f, fi = (np.asarray(x, dtype=complex) for x in (a, b, c, f, fi))
    p = 1 + f ** 3 * fi * a
    bad = np.abs(p) < delta
    if np.any(bad):
        raise PivotVanishes(f"1 + f^3 f_i a nearly vanishes at {int(bad.sum())} samples")
    z2, z3 = _root_pair(a * fi * f)
    z1 = (f ** 2 * fi * c - z3) / p
    z4 = (f ** 2 * fi * b - z2) / p
    return EliminationQuad(z1, z2, z3, z4)


def whitehead_diag(lam) -> EliminationQuad:
    """diag(lam, 1/lam) as L U L U with zero parameters at lam = 1."""
    if lam == 0:
        raise InvalidInput("whitehead_diag needs lam != 0")
    if isinstance(lam, (int, Fraction, ExactComplex)) and not isinstance(lam, bool):
        try:
            z2, z3 = _exact_root_pair(lam - 1)
        except InvalidInput:
            if not isinstance(lam, int):
                raise
        else:
            inv = ExactComplex(1) / ExactComplex.coerce(lam)
            return EliminationQuad(normalize(-z3 * inv), z2, z3, normalize(-z2 * inv))
    q = whitehead_array(np.asarray(lam, dtype=complex))
    return EliminationQuad(*(complex(x) for x in q))


def whitehead_array(lam) -> np.ndarray:
    """z1 = (1-lam)/(lam sqrt|lam-1|), z2 = sqrt|lam-1|, z3 = (lam-1)/sqrt|lam-1|,
    z4 = -sqrt|lam-1|/lam; shape (4,) + lam.shape."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise InvalidInput("whitehead_diag needs lam != 0")
    z2, z3 = _root_pair(lam - 1)
    return np.stack([-z3 / lam, z2, z3, -z2 / lam])


def whitehead_printed(lam) -> EliminationQuad:
    """Variant whose first parameter lacks the 1/lam factor: (1-lam)/sqrt|lam-1|.

    Kept to demonstrate that its product is not diagonal; the (2,1) entry
    is off by -(sqrt|lam-1|)^3 at real lam > 1.
    """
    lam = complex(lam)
    z2, z3 = (complex(x) for x in _root_pair(lam - 1))
    return EliminationQuad(-z3, z2, z3, -z2 / lam)


def whitehead_standard(lam) -> EliminationQuad:
    """Ring-generic solution L(-1/lam) U(lam-1) L(1) U(1/lam - 1).

    Valid over any ring, but not zero at lam = 1 (no interpolation)."""
    if lam == 0:
        raise InvalidInput("whitehead_standard needs lam != 0")
    if isinstance(lam, (int, Fraction, ExactComplex)) and not isinstance(lam, bool):
        inv = normalize(ExactComplex(1) / ExactComplex.coerce(lam))
        return EliminationQuad(normalize(-inv), normalize(lam - 1), 1, normalize(inv - 1))
    lam = complex(lam)
    return EliminationQuad(-1 / lam, lam - 1, 1 + 0j, 1 / lam - 1)


# ---------------------------------------------------------------------------
# field stages
# ---------------------------------------------------------------------------

def _quad_replicas(pair_id: str, z: np.ndarray, stage: str) -> list[Replica]:
    return [Replica(pair_id, s, np.asarray(h, dtype=complex), stage) for s, h in zip(SIGNS, z)]


def replicas_product(replicas: list[Replica], pair: NilpotentPair, chart: str, scale=1.0) -> np.ndarray:
    out = la.eye_like(pair.domain.shape)
    for r in replicas:
        out = out @ replica_eval(Replica(r.pair, r.sign, scale * r.h), pair, chart)
    return out


def replicas_inverse_product(replicas: list[Replica], pair: NilpotentPair, chart: str, scale=1.0) -> np.ndarray:
    out = la.eye_like(pair.domain.shape)
    for r in reversed(replicas):
        out = out @ replica_eval(Replica(r.pair, r.sign, -scale * r.h), pair, chart)
    return out


@dataclass
class LocalizationResult:
    replicas: list          # in order Q_M ... Q_1 (ready to append after the rest)
    G: dict                 # chart -> G' (Id on omega)
    homotopy: dict          # chart -> HomotopyField of G'_t
    omega: np.ndarray       # union of the Omega_i
    radius: int
    passes: list = field(default_factory=list)
    divisibility: list = field(default_factory=list)
    snap_residual: float = 0.0


def localize_to_identity(G: dict, Gt: dict, bundle: ChartBundle, pair: NilpotentPair,
                         radius: int = 3, delta: float = PIVOT_DELTA, tol: float = 1e-10,
                         band: float | None = None) -> LocalizationResult:
    """Multiply G by replicas so that it becomes Id on a neighbourhood of {f = 0}.

    The cover is automatic: in chart c the zero-set part lying deeper than
    3*radius + 1 cells inside the chart gets Omega_c = its 2*radius dilation
    and Omega~_c = its 3*radius dilation.  Each pass solves the divisible
    elimination on Omega~_c, cuts the parameters off with chi (1 on Omega_c,
    0 off Omega~_c) and divides the four replicas out of G and of its
    homotopy.
    """
    dom = bundle.domain
    A = pair.zero_mask()
    G = {c: np.array(v) for c, v in G.items()}
    frames = {c: np.array(h.frames) for c, h in Gt.items()}
    times = next(iter(Gt.values())).times
    res = LocalizationResult([], G, {}, np.zeros(dom.shape, bool), radius)
    if not A.any():
        res.homotopy = {c: HomotopyField(dom, times, frames[c]) for c in frames}
        return res
    f = pair.f
    f4 = f ** 4
    covered = np.zeros(dom.shape, bool)
    quads = []
    for c in bundle.ids:
        depth = cell_distance(dom, ~bundle.masks[c])
        core = A & (depth > 3 * radius + 1) & ~covered
        if not core.any():
            continue
        om = dilate(dom, core, 2 * radius)
        om_t = dilate(dom, core, 3 * radius)
        chi = 1.0 - make_cutoff(dom, om, om_t).values
        S = pair.S[c]
        M1 = np.zeros(dom.shape + (2, 2), dtype=complex)
        sel = om_t & (np.abs(f) > 0)
        M1[sel] = (G[c][sel] - la.eye_like((int(sel.sum()),))) / f4[sel][:, None, None]
        coef = la.adjugate(S) @ M1 @ S
        z = np.zeros((4,) + dom.shape, dtype=complex)
        q = eliminate_four_divisible(coef[..., 0, 0][om_t], coef[..., 0, 1][om_t],
                                     coef[..., 1, 0][om_t], coef[..., 1, 1][om_t],
                                     f[om_t], pair.f_chart[c][om_t], delta)
        for k, zk in enumerate(q.as_tuple()):
            z[k][om_t] = zk
        reps = _quad_replicas(pair.id, chi * z, "localize")
        for cc in bundle.ids:
            inv = replicas_inverse_product(reps, pair, cc)
            G[cc] = G[cc] @ inv
            for k, t in enumerate(times):
                frames[cc][k] = frames[cc][k] @ replicas_inverse_product(reps, pair, cc, scale=t)
        prod = replicas_product(reps, pair, c)
        diff = la.dist_to_identity(prod)
        if band is None:
            band_c = 0.5 * float(np.abs(f[om_t]).max()) if np.abs(f[om_t]).max() > 0 else 1.0
        else:
            band_c = band
        try:
            rep = vanish_order(diff[om_t], f[om_t], 4, band_c).to_json()
        except Exception as e:  # empty band: nothing to fit
            rep = {"passed": True, "note": str(e)}
        res.divisibility.append({"chart": c, **rep})
        res.passes.append({"chart": c, "core_samples": int(core.sum()),
                           "omega_samples": int(om.sum())})
        quads.append(reps)
        covered |= om
        res.omega |= om
    if np.any(A & ~covered):
        raise CoverDoesNotContainZeroSet(
            f"{int((A & ~covered).sum())} zero-set samples lie too close to chart edges "
            f"(need {3 * radius + 1} cells of depth)")
    # G' must be Id on omega: record the residual, then snap
    for c in bundle.ids:
        m = res.omega & bundle.masks[c]
        if m.any():
            r = float(la.dist_to_identity(G[c][m]).max())
            if r > tol:
                raise NotIdentityNearZeroSet(f"chart {c}: G' deviates from Id by {r:.3e} on the cover")
            res.snap_residual = max(res.snap_residual, r)
            G[c][m] = la.eye_like((int(m.sum()),))
        frames[c][-1] = G[c]
        frames[c][0] = la.eye_like(dom.shape)
    res.homotopy = {c: HomotopyField(dom, times, frames[c]) for c in frames}
    for reps in reversed(quads):
        res.replicas.extend(reps)
    return res


@dataclass
class FlattenResult:
    homotopy: dict
    inner: np.ndarray       # Omega_2: homotopy is Id here for all t
    outer: np.ndarray       # Omega~_2
    max_deviation: float


def flatten_homotopy(Gt: dict, bundle: ChartBundle, pair: NilpotentPair, omega_radius: int) -> FlattenResult:
    """Make the homotopy constant Id near {f = 0}: H_t = exp(chi log G'_t) on the band.

    Omega_2 = dilation by omega_radius//3, Omega~_2 by 2*omega_radius//3;
    chi = 0 on Omega_2 and 1 off Omega~_2.  The end frame is unchanged since
    G' = Id on the whole cover.
    """
    dom = bundle.domain
    A = pair.zero_mask()
    if not A.any():
        return FlattenResult(Gt, np.zeros(dom.shape, bool), np.zeros(dom.shape, bool), 0.0)
    r2 = max(omega_radius // 3, 0)
    inner = dilate(dom, A, r2)
    outer = dilate(dom, A, max(2 * omega_radius // 3, r2 + 1))
    chi = make_cutoff(dom, inner, outer).values
    out = {}
    worst = 0.0
    for c, h in Gt.items():
        F = np.array(h.frames)
        band = outer & bundle.masks[c]
        if band.any():
            Fb = F[:, band]
            dev = float(la.dist_to_identity(Fb).max())
            worst = max(worst, dev)
            if dev > la.LOG_RADIUS:
                raise NotIdentityNearZeroSet(
                    f"chart {c}: homotopy leaves the log radius near the zero set (||G_t - Id|| = {dev:.3f})")
            L = la.log_near_identity(Fb)
            F[:, band] = la.expm(chi[band][None, :, None, None] * L)
            F[:, inner & bundle.masks[c]] = la.eye_like(())
        F[0] = la.eye_like(dom.shape)
        F[-1] = h.frames[-1]
        out[c] = HomotopyField(dom, h.times, F)
    return FlattenResult(out, inner, outer, worst)


def to_section_frame(Ht: dict, bundle: ChartBundle, pair: NilpotentPair, inner: np.ndarray) -> HomotopyField:
    """G^_t = S^-1 H_t S at every sample (home chart), exactly Id on ``inner``."""
    dom = bundle.domain
    times = next(iter(Ht.values())).times
    out = np.empty((times.size,) + dom.shape + (2, 2), dtype=complex)
    for k, c in enumerate(bundle.ids):
        m = (bundle.home == k) & ~inner
        if not m.any():
            continue
        S = pair.S[c][m]
        Sinv = la.inverse(S, tol=0.0)
        out[:, m] = Sinv[None] @ Ht[c].frames[:, m] @ S[None]
    out[:, inner] = la.eye_like(())
    out[0] = la.eye_like(dom.shape)
    return HomotopyField(dom, times, out)


def from_section_frame(Ghat: np.ndarray, bundle: ChartBundle, pair: NilpotentPair, inner: np.ndarray) -> dict:
    """Inverse of to_section_frame for a single field."""
    dom = bundle.domain
    out = {}
    for c in bundle.ids:
        m = bundle.masks[c] & ~inner
        v = la.eye_like(dom.shape)
        S = pair.S[c][m]
        v[m] = S @ Ghat[m] @ la.inverse(S, tol=0.0)
        out[c] = v
    return out


def _to_replica_params(w: np.ndarray, f: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """h = w / f off ``inner`` (and off {f = 0}), 0 on it."""
    h = np.zeros(np.shape(w), dtype=complex)
    ok = ~inner & (f != 0)
    h[..., ok] = w[..., ok] / f[ok]
    return h


@dataclass
class SU2Reduction:
    replicas: list            # whitehead quad for rho, then one upper replica
    unitary: HomotopyField    # U^_t with G^_t = U^_t R_t
    R: np.ndarray             # final-frame R
    su2_defect: float


def reduce_to_su2(Ghat: HomotopyField, f: np.ndarray, inner: np.ndarray, pair_id: str = "0",
                  tol: float = 1e-10) -> SU2Reduction:
    """Peel G^_t = Q_t R_t, R = diag(rho, 1/rho) U(r12/rho).

    The R-part of the final frame is emitted as a whitehead_diag quad (for
    rho) followed by one upper replica; U^_t = Q_t is the SU(2) homotopy.
    R is snapped to Id where it is within 1e-13 of it, so unitary frames emit
    nothing.
    """
    F = Ghat.frames
    if inner.any():
        dev = float(la.dist_to_identity(F[:, inner]).max())
        if dev > 0:
            raise NotIdentityNearZeroSet(f"G^_t differs from Id on the zero-set neighbourhood by {dev:.3e}")
    Q, R = la.qr_su2(F)
    snap = la.dist_to_identity(R) <= R_SNAP
    Q[snap] = F[snap]
    R[snap] = la.eye_like(())
    defect = float(np.max(np.abs(np.conj(np.swapaxes(Q, -1, -2)) @ Q - la.eye_like(())), initial=0.0))
    if defect > tol:
        raise NotIdentityNearZeroSet(f"QR peel left a non-unitary factor (defect {defect:.3e})")
    R1 = R[-1]
    rho = R1[..., 0, 0]
    w = R1[..., 0, 1] / rho
    wq = whitehead_array(rho)
    params = np.concatenate([wq, w[None]])
    h = _to_replica_params(params, f, inner)
    reps = _quad_replicas(pair_id, h[:4], "su2") + [Replica(pair_id, "+", h[4], "su2")]
    return SU2Reduction(reps, HomotopyField(Ghat.domain, Ghat.times, Q), R1, defect)


@dataclass
class SubdivisionResult:
    breakpoints: np.ndarray
    indices: np.ndarray
    closeness: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.breakpoints) - 1

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "closeness": self.closeness.tolist()}


def subdivide_homotopy(U: HomotopyField, eps: float = 0.5) -> SubdivisionResult:
    """Greedy breakpoints on the frame grid with sup||U_j U_i^-1 - Id|| <= eps.

    From the current breakpoint the scan advances while the quotient stays
    within eps and stops before the first frame that leaves it.
    """
    F = U.frames
    n = F.shape[0]
    flat = F.reshape(n, -1, 2, 2)
    inv = la.inverse(flat)
    idx = [0]
    close = []
    i = 0
    while i < n - 1:
        j = i
        best = 0.0
        while j + 1 < n:
            d = float(la.dist_to_identity(flat[j + 1] @ inv[i]).max())
            if d > eps:
                break
            j += 1
            best = d
        if j == i:
            gap = float(la.dist_to_identity(flat[i + 1] @ inv[i]).max())
            raise CannotSatisfy(f"frames {i}->{i + 1} (t = {U.times[i]:.4f}) differ by {gap:.3f} > eps = {eps}",
                                worst_gap=gap, at=float(U.times[i]))
        idx.append(j)
        close.append(best)
        i = j
    idx = np.array(idx)
    return SubdivisionResult(U.times[idx], idx, np.array(close))


def factor_near_identity(U: HomotopyField, sub: SubdivisionResult, f: np.ndarray, inner: np.ndarray,
                         pair_id: str = "0", delta: float = PIVOT_DELTA) -> list[Replica]:
    """Four replicas per quotient U_{t_{i+1}} U_{t_i}^-1, latest quotient first."""
    out = []
    for k in range(sub.n_steps - 1, -1, -1):
        a, b = sub.indices[k], sub.indices[k + 1]
        D = U.frames[b] @ la.inverse(U.frames[a])
        z = eliminate_array(D, delta)
        h = _to_replica_params(z, f, inner)
        out.extend(_quad_replicas(pair_id, h, "near-identity"))
    return out


# ---------------------------------------------------------------------------
# exact divisibility checks
# ---------------------------------------------------------------------------

@dataclass
class SymbolicQuad:
    """Divisible-elimination parameters with the square roots kept symbolic.

    sigma = z2 and tau = z3 satisfy sigma * tau = a f_i f; the pivot
    p = 1 + f^3 f_i a is cleared: z1p = p z1, z4p = p z4.
    """

    a: Polynomial
    b: Polynomial
    c: Polynomial
    f: Polynomial
    fi: Polynomial
    sigma: Polynomial
    tau: Polynomial
    p: Polynomial
    z1p: Polynomial
    z4p: Polynomial

    def reduce(self, q: Polynomial) -> Polynomial:
        """Rewrite sigma*tau -> a f_i f repeatedly."""
        rel = self.sigma * self.tau
        while True:
            quo, rem = q.divmod(rel)
            if quo.is_zero():
                return q
            q = quo * (self.a * self.fi * self.f) + rem


def symbolic_divisible_quad(a, b, c, f, fi) -> SymbolicQuad:
    sigma, tau = Polynomial.symbols("sigma", "tau")
    p = 1 + f ** 3 * fi * a
    return SymbolicQuad(a, b, c, f, fi, sigma, tau, p,
                        f ** 2 * fi * c - tau, f ** 2 * fi * b - sigma)


def verify_divisibility_lemmas(q: SymbolicQuad) -> dict:
    """Exact checks behind the f^4 divisibility of a localized quad.

    * f f_i | z2 z3
    * f^2 f_i | p (z2 + z4)  and  f^2 f_i | p (z1 + z3)
    * f^3 f_i divides p^k times each computed entry of the cut-off product
      L(chi f z1) U(chi f z2) L(chi f z3) U(chi f z4) - Id (chi symbolic)
    """
    f, fi, p = q.f, q.fi, q.p
    chi = Polynomial.var("chi")
    s, t = q.sigma, q.tau
    checks = {}
    checks["f*fi | z2*z3"] = is_divisible(q.reduce(s * t), f * fi)
    checks["f^2*fi | p*(z2+z4)"] = is_divisible(q.reduce(p * s + q.z4p), f ** 2 * fi)
    checks["f^2*fi | p*(z1+z3)"] = is_divisible(q.reduce(q.z1p + p * t), f ** 2 * fi)
    # entries of the cut-off product, scaled by p (z1 and z4 carry 1/p)
    e11 = f ** 2 * s * t * chi ** 2
    e12 = (f * s * chi) * p + f * q.z4p * chi + f ** 3 * s * t * q.z4p * chi ** 3
    e21 = f * q.z1p * chi + (f * t * chi) * p + f ** 3 * q.z1p * s * t * chi ** 3
    g = f ** 3 * fi
    checks["f^3*fi | (1,1)-1"] = is_divisible(q.reduce(e11), g)
    checks["f^3*fi | p*(1,2)"] = is_divisible(q.reduce(e12), g)
    checks["f^3*fi | p*(2,1)"] = is_divisible(q.reduce(e21), g)
    checks["passed"] = all(checks.values())
    return checks


def last_entry_check(a11: Polynomial, a12: Polynomial, a21: Polynomial, a22: Polynomial,
                     g: Polynomial) -> dict:
    """For det [[1+a11, a12], [a21, 1+a22]] = 1 and g | a11, a12, a21: g | a22."""
    det = (1 + a11) * (1 + a22) - a12 * a21
    out = {"det_is_one": det == 1,
           "hypotheses": all(is_divisible(x, g) for x in (a11, a12, a21))}
    try:
        cof = divide_exact(a22, g)
        out["g | a22"] = True
        # explicit cofactor: a22 = g (g t12 t21 - t11 a22 - t11)
        t11, t12, t21 = (divide_exact(x, g) for x in (a11, a12, a21))
        out["cofactor_identity"] = (g * (g * t12 * t21 - t11 * a22 - t11)) == a22 and cof * g == a22
    except Exception:
        out["g | a22"] = False
        out["cofactor_identity"] = False
    out["passed"] = out["det_is_one"] and out["hypotheses"] and out["g | a22"] and out["cofactor_identity"]
    return out


def random_last_entry_instance(rng: np.random.Generator, vars=("x", "y")):
    """Random det-1 polynomial matrix Id + [[a11, a12], [a21, a22]] with g | a11, a12, a21.

    Built as a product of 2 to 4 elementary matrices whose parameters are
    multiples of g; returns (a11, a12, a21, a22, g).
    """
    from .polynomial import random_polynomial
    g = random_polynomial(rng, vars, n_terms=2, max_degree=1, coef_range=3)
    while g.is_zero() or g.total_degree() < 1:
        g = random_polynomial(rng, vars, n_terms=2, max_degree=1, coef_range=3)
    one = Polynomial.const(1, vars)
    zero = Polynomial(vars, {})
    M = [[one, zero], [zero, one]]
    for k in range(int(rng.integers(2, 5))):
        p = g * random_polynomial(rng, vars, n_terms=2, max_degree=1, coef_range=3)
        E = [[one, p], [zero, one]] if k % 2 else [[one, zero], [p, one]]
        M = [[M[0][0] * E[0][0] + M[0][1] * E[1][0], M[0][0] * E[0][1] + M[0][1] * E[1][1]],
             [M[1][0] * E[0][0] + M[1][1] * E[1][0], M[1][0] * E[0][1] + M[1][1] * E[1][1]]]
    return M[0][0] - 1, M[0][1], M[1][0], M[1][1] - 1, g
