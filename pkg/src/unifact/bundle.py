"""Rank-2 bundles given by charts and transition matrices, nilpotent pairs
built from two sections, and their unipotent replicas.

Conventions
-----------
* A chart is a rectangular block of grid indices.  Every sample belongs to
  at least one chart; its *home chart* is the first one listed.
* ``transitions[(i, j)]`` maps chart-``j`` coordinates to chart-``i``
  coordinates: v_i = g_ij v_j, so g_ik = g_ij g_jk on triple overlaps.
  Only the values on the overlap are meaningful; fields are full-domain.
* Automorphisms are dicts ``chart id -> (..., 2, 2) array`` with
  A_i = g_ij A_j g_ij^-1 on overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import linalg as la
from .errors import InvalidInput, NotUnipotent, UnboundedQuotient
from .fields import GridDomain, MatrixField, ScalarField, ZERO_TOL

BOUND_SAFETY = 10.0


@dataclass
class Chart:
    id: str
    region: list  # per axis [lo, hi) index range

    def mask(self, domain: GridDomain) -> np.ndarray:
        if len(self.region) != domain.dim:
            raise InvalidInput(f"chart {self.id}: region needs one range per axis")
        m = np.zeros(domain.shape, dtype=bool)
        sl = []
        for (lo, hi), n in zip(self.region, domain.shape):
            if not 0 <= lo < hi <= n:
                raise InvalidInput(f"chart {self.id}: bad index range [{lo}, {hi}) for axis of {n}")
            sl.append(slice(lo, hi))
        m[tuple(sl)] = True
        return m


class ChartBundle:
    def __init__(self, domain: GridDomain, charts: list[Chart], transitions: dict | None = None):
        self.domain = domain
        self.charts = list(charts)
        ids = [c.id for c in self.charts]
        if len(set(ids)) != len(ids):
            raise InvalidInput("duplicate chart ids")
        self.masks = {c.id: c.mask(domain) for c in self.charts}
        cover = np.zeros(domain.shape, dtype=bool)
        for m in self.masks.values():
            cover |= m
        if not cover.all():
            raise InvalidInput(f"charts leave {int((~cover).sum())} samples uncovered")
        self.transitions: dict[tuple[str, str], np.ndarray] = {}
        for (i, j), g in (transitions or {}).items():
            if i not in self.masks or j not in self.masks:
                raise InvalidInput(f"transition ({i}, {j}) names an unknown chart")
            g = np.asarray(g, dtype=complex)
            domain.check_shape(g, matrix=True)
            self.transitions[(i, j)] = g
            if (j, i) not in (transitions or {}):
                ov = self.overlap(i, j)
                inv = la.eye_like(domain.shape)
                inv[ov] = la.inverse(g[ov])
                self.transitions[(j, i)] = inv
        for i in ids:
            self.transitions.setdefault((i, i), la.eye_like(domain.shape))
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                if self.overlap(ids[a], ids[b]).any() and (ids[a], ids[b]) not in self.transitions:
                    raise InvalidInput(f"charts {ids[a]}, {ids[b]} overlap without a transition")
        # home chart per sample
        self.home = np.full(domain.shape, -1, dtype=int)
        for k in reversed(range(len(ids))):
            self.home[self.masks[ids[k]]] = k

    @classmethod
    def trivial(cls, domain: GridDomain) -> "ChartBundle":
        return cls(domain, [Chart("0", [[0, n] for n in domain.shape])])

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.charts]

    def overlap(self, i: str, j: str) -> np.ndarray:
        return self.masks[i] & self.masks[j]

    def g(self, i: str, j: str) -> np.ndarray:
        return self.transitions[(i, j)]

    def alpha(self, i: str, j: str) -> np.ndarray:
        """Determinant cocycle det g_ij."""
        return la.det(self.g(i, j))

    def check_cocycle(self, tol: float = 1e-10) -> dict:
        """Max cocycle defect and min |det| over overlaps."""
        worst, min_det = 0.0, np.inf
        ids = self.ids
        for i in ids:
            for j in ids:
                ov = self.overlap(i, j)
                if not ov.any():
                    continue
                min_det = min(min_det, float(np.min(np.abs(self.alpha(i, j)[ov]))))
                for k in ids:
                    tri = ov & self.masks[k]
                    if tri.any():
                        d = self.g(i, k)[tri] - self.g(i, j)[tri] @ self.g(j, k)[tri]
                        worst = max(worst, float(np.max(np.abs(d))))
        return {"cocycle_defect": worst, "min_abs_det": min_det,
                "passed": worst <= tol and min_det > tol}

    def automorphism_defect(self, A: dict) -> float:
        worst = 0.0
        for i in self.ids:
            for j in self.ids:
                ov = self.overlap(i, j)
                if i != j and ov.any():
                    g = self.g(i, j)[ov]
                    d = A[i][ov] - g @ A[j][ov] @ la.inverse(g)
                    worst = max(worst, float(np.max(np.abs(d))))
        return worst

    def to_json(self) -> dict:
        return {
            "format": "bundle-v1",
            "domain": self.domain.to_json(),
            "charts": [{"id": c.id, "region": [list(r) for r in c.region]} for c in self.charts],
            "transitions": [{"to": i, "from": j, "field": MatrixField(self.domain, g).to_json()}
                            for (i, j), g in sorted(self.transitions.items()) if i < j],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ChartBundle":
        if data.get("format") != "bundle-v1":
            raise InvalidInput("expected bundle-v1")
        dom = GridDomain.from_json(data["domain"])
        charts = [Chart(str(c["id"]), [list(map(int, r)) for r in c["region"]]) for c in data["charts"]]
        trans = {}
        for t in data.get("transitions", []):
            mf = MatrixField.from_json(t["field"])
            if mf.domain != dom:
                raise InvalidInput("transition field on a different domain")
            trans[(str(t["to"]), str(t["from"]))] = mf.values
        return cls(dom, charts, trans)


# ---------------------------------------------------------------------------
# sections and nilpotent pairs
# ---------------------------------------------------------------------------

@dataclass
class SectionPair:
    """Per chart, two sections (arrays of shape domain.shape + (2,))."""

    s1: dict
    s2: dict

    def S(self, chart: str) -> np.ndarray:
        """Matrix with the sections as columns."""
        a, b = self.s1[chart], self.s2[chart]
        return la.from_entries(a[..., 0], b[..., 0], a[..., 1], b[..., 1])

    def compatibility_defect(self, bundle: ChartBundle) -> float:
        worst = 0.0
        for i in bundle.ids:
            for j in bundle.ids:
                ov = bundle.overlap(i, j)
                if i != j and ov.any():
                    g = bundle.g(i, j)[ov]
                    for s in (self.s1, self.s2):
                        d = s[i][ov] - np.einsum("...ab,...b->...a", g, s[j][ov])
                        worst = max(worst, float(np.max(np.abs(d))))
        return worst


def _fill_nearest(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Replace invalid samples by the value at the nearest valid sample."""
    if valid.all():
        return values
    if not valid.any():
        return np.zeros_like(values)
    _, idx = ndimage.distance_transform_edt(~valid, return_indices=True)
    return values[tuple(idx)]


@dataclass
class NilpotentPair:
    id: str
    domain: GridDomain
    f: np.ndarray
    sections: SectionPair
    f_chart: dict = field(default_factory=dict)
    S: dict = field(default_factory=dict)
    N_plus: dict = field(default_factory=dict)
    N_minus: dict = field(default_factory=dict)
    masks: dict = field(default_factory=dict)

    def N(self, sign: str, chart: str) -> np.ndarray:
        if sign == "+":
            return self.N_plus[chart]
        if sign == "-":
            return self.N_minus[chart]
        raise InvalidInput(f"sign must be '+' or '-', got {sign!r}")

    def zero_mask(self, tol: float = ZERO_TOL) -> np.ndarray:
        return np.abs(self.f) <= tol

    def invariants(self, tol: float = 1e-10) -> dict:
        """Nilpotency, trace, action on the sections, conjugacy to the standard pair.

        Checked on the samples of each chart.  S^-1 N^+- S equals f times the
        standard nilpotent wherever det S != 0; on the zero set of f the pair
        vanishes wherever the sections are independent.
        """
        out = {}
        for c in self.N_plus:
            m = self.masks.get(c, np.ones(self.domain.shape, bool))
            Np, Nm = self.N_plus[c][m], self.N_minus[c][m]
            s1, s2 = self.sections.s1[c][m], self.sections.s2[c][m]
            mv = lambda A, v: np.einsum("...ab,...b->...a", A, v)
            f = self.f[m]
            checks = {
                "square_zero": max(np.abs(Np @ Np).max(initial=0.0), np.abs(Nm @ Nm).max(initial=0.0)),
                "trace": max(np.abs(la.trace(Np)).max(initial=0.0), np.abs(la.trace(Nm)).max(initial=0.0)),
                "Nm_s1": np.abs(mv(Nm, s1) - f[..., None] * s2).max(initial=0.0),
                "Nm_s2": np.abs(mv(Nm, s2)).max(initial=0.0),
                "Np_s2": np.abs(mv(Np, s2) - f[..., None] * s1).max(initial=0.0),
                "Np_s1": np.abs(mv(Np, s1)).max(initial=0.0),
            }
            S = self.S[c][m]
            indep = np.abs(la.det(S)) > tol
            ok = indep & (np.abs(f) > tol)
            if ok.any():
                Sinv = la.inverse(S[ok])
                std_p = Sinv @ Np[ok] @ S[ok] / f[ok][..., None, None]
                std_m = Sinv @ Nm[ok] @ S[ok] / f[ok][..., None, None]
                checks["standard_conjugacy"] = max(
                    np.abs(std_p - la.from_entries(0, 1, 0, 0)).max(),
                    np.abs(std_m - la.from_entries(0, 0, 1, 0)).max())
            z = (np.abs(f) <= ZERO_TOL) & indep
            if z.any():
                checks["degenerate_on_zero_set"] = max(np.abs(Np[z]).max(), np.abs(Nm[z]).max())
            out[c] = {k: float(v) for k, v in checks.items()}
        out["passed"] = all(v <= tol for c in self.N_plus for v in out[c].values())
        return out

    def to_json(self) -> dict:
        dom = self.domain
        sf = lambda v: ScalarField(dom, v).to_json()
        mf = lambda v: MatrixField(dom, v).to_json()
        return {
            "format": "pair-v1",
            "id": self.id,
            "f": sf(self.f),
            "sections": [{"chart": c, "s1": [sf(self.sections.s1[c][..., k]) for k in range(2)],
                          "s2": [sf(self.sections.s2[c][..., k]) for k in range(2)]}
                         for c in self.sections.s1],
            "derived": {"f_chart": {c: sf(v) for c, v in self.f_chart.items()},
                        "N_plus": {c: mf(v) for c, v in self.N_plus.items()},
                        "N_minus": {c: mf(v) for c, v in self.N_minus.items()}},
        }

    @classmethod
    def from_json(cls, data: dict, bundle: ChartBundle) -> "NilpotentPair":
        if data.get("format") != "pair-v1":
            raise InvalidInput("expected pair-v1")
        f = ScalarField.from_json(data["f"])
        if f.domain != bundle.domain:
            raise InvalidInput("pair function lives on a different domain than the bundle")
        s1, s2 = {}, {}
        for blk in data["sections"]:
            c = str(blk["chart"])
            s1[c] = np.stack([ScalarField.from_json(b).values for b in blk["s1"]], axis=-1)
            s2[c] = np.stack([ScalarField.from_json(b).values for b in blk["s2"]], axis=-1)
        return build_pair(bundle, SectionPair(s1, s2), f.values, str(data.get("id", "0")))


def build_pair(bundle: ChartBundle, sections: SectionPair, f, pair_id: str = "0",
               safety: float = BOUND_SAFETY, compat_tol: float = 1e-8) -> NilpotentPair:
    """N- = S [[0,0],[f_i,0]] S^#,  N+ = S [[0,f_i],[0,0]] S^#,  f_i = f / det S.

    f_i is checked to be bounded on samples: |f_i| may not exceed ``safety``
    times its maximum over the well-conditioned part of the chart
    (|det S| >= 10% of its chart maximum).  Where det S = f = 0 the quotient is
    filled from the nearest sample with det S != 0.
    """
    dom = bundle.domain
    f = np.asarray(f, dtype=complex)
    dom.check_shape(f)
    missing = [c for c in bundle.ids if c not in sections.s1 or c not in sections.s2]
    if missing:
        raise InvalidInput(f"sections missing for charts {missing}")
    d = sections.compatibility_defect(bundle)
    if d > compat_tol:
        raise InvalidInput(f"sections are not compatible across charts (defect {d:.2e})")
    pair = NilpotentPair(pair_id, dom, f, sections)
    for c in bundle.ids:
        m = bundle.masks[c]
        S = sections.S(c)
        dS = la.det(S)
        adS = np.abs(dS)
        valid = adS > ZERO_TOL
        bad = m & ~valid & (np.abs(f) > ZERO_TOL)
        if bad.any():
            raise UnboundedQuotient(
                f"pair {pair_id}, chart {c}: det S = 0 but f != 0 at {int(bad.sum())} samples")
        fi = np.zeros(dom.shape, dtype=complex)
        fi[valid] = f[valid] / dS[valid]
        fi = _fill_nearest(fi, valid)
        if m.any() and valid[m].any():
            ref_sel = m & (adS >= 0.1 * adS[m].max())
            ref = float(np.abs(fi[ref_sel]).max()) if ref_sel.any() else 0.0
            worst = float(np.abs(fi[m]).max())
            if worst > safety * ref + ZERO_TOL:
                raise UnboundedQuotient(
                    f"pair {pair_id}, chart {c}: |f/det S| reaches {worst:.3e}, "
                    f"more than {safety:g}x its well-conditioned maximum {ref:.3e}")
        fi = np.where(m, fi, 0.0)
        adj = la.adjugate(S)
        zero = np.zeros(dom.shape)
        pair.f_chart[c] = fi
        pair.masks[c] = m
        pair.S[c] = S
        pair.N_minus[c] = S @ la.from_entries(zero, zero, fi, zero) @ adj
        pair.N_plus[c] = S @ la.from_entries(zero, fi, zero, zero) @ adj
    return pair


def standard_pair(bundle: ChartBundle, f=None, pair_id: str = "0") -> NilpotentPair:
    """s1 = e1, s2 = e2 in every chart (trivial bundles only)."""
    dom = bundle.domain
    f = np.ones(dom.shape, dtype=complex) if f is None else f
    e1 = np.zeros(dom.shape + (2,), dtype=complex)
    e1[..., 0] = 1
    e2 = np.zeros(dom.shape + (2,), dtype=complex)
    e2[..., 1] = 1
    return build_pair(bundle, SectionPair({c: e1 for c in bundle.ids}, {c: e2 for c in bundle.ids}), f, pair_id)


# ---------------------------------------------------------------------------
# replicas
# ---------------------------------------------------------------------------

@dataclass
class Replica:
    pair: str
    sign: str
    h: np.ndarray
    stage: str = ""

    def inverse(self) -> "Replica":
        return Replica(self.pair, self.sign, -self.h, self.stage)


def replica_eval(r: Replica, pair: NilpotentPair, chart: str) -> np.ndarray:
    """Id + h N^sign in the given chart."""
    return la.eye_like(pair.domain.shape) + r.h[..., None, None] * pair.N(r.sign, chart)


def unipotent_log(U, tol: float = 1e-10) -> np.ndarray:
    """log U = U - Id, valid because (U - Id)^2 = 0."""
    N = np.asarray(U, dtype=complex) - la.eye_like(np.shape(U)[:-2])
    sq = np.abs(N @ N).max(initial=0.0)
    if sq > tol:
        raise NotUnipotent(f"||(U - Id)^2|| = {sq:.3e} > {tol:.1e}")
    return N


def exp_nilpotent(N, tol: float = 1e-10) -> np.ndarray:
    """exp N = Id + N for square-zero N."""
    N = np.asarray(N, dtype=complex)
    sq = np.abs(N @ N).max(initial=0.0)
    if sq > tol:
        raise NotUnipotent(f"||N^2|| = {sq:.3e} > {tol:.1e}; not square-zero")
    return la.eye_like(N.shape[:-2]) + N
