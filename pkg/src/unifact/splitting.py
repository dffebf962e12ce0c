"""Split a null-homotopic F into suitable factors F = G_1 ... G_m.

Every factor homotopy has the closed form

    (G_j)_t(x) = F_{t a_j(x)}(x)^-1  F_{t b_j(x)}(x)

for two time-rescaling fields a_j, b_j with values in [0, 1]; the list of
(a_j, b_j) is the *plan*.  It depends only on the zero sets, so it is
computed once and applied chart by chart.  The products telescope, so
prod_j (G_j)_t = F_t, and G_j is Id wherever a_j = b_j.

Recursion on m (time field tau, initially 1):
    B   = common zeros of f_1..f_{m-1} where tau > 0
    chi = 0 on the r-dilation U of B, 1 off the 2r-dilation U0, and U0
          must miss the zeros of f_m
    G_m = (tau chi, tau); recurse on f_1..f_{m-1} with tau chi.
    B empty: G_m = Id and recurse with tau unchanged.
    m = 1: G_1 = (0, tau).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import CannotTaper, CommonZero, InvalidInput, NoSeparatingNeighborhood, ZeroSetsIntersect
from .fields import GridDomain, HomotopyField, cell_distance, dilate, make_cutoff, vanish_order

DEFAULT_RADIUS = 3


@dataclass
class SuitableFactor:
    G: dict                   # chart -> (..., 2, 2)
    homotopy: dict            # chart -> HomotopyField
    index: int                # which function's zero set it respects
    zero_mask: np.ndarray
    plan: tuple | None = None  # (a, b) time fields
    note: str = ""

    def strong_nullity(self) -> float:
        """max over t and the zero set of ||(G)_t - Id||."""
        if not self.zero_mask.any():
            return 0.0
        return max(float(la.dist_to_identity(h.frames[:, self.zero_mask]).max())
                   for h in self.homotopy.values())


@dataclass
class SplitPlan:
    pieces: list              # (a, b) per factor, in product order
    radii: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _separation_radius(domain: GridDomain, B: np.ndarray, Am: np.ndarray, radius: int) -> int:
    """Largest r <= radius with the 2r-dilation of B missing Am."""
    if not Am.any():
        return radius
    d = float(cell_distance(domain, B)[Am].min())
    r = min(radius, int(np.ceil(d / 2.0)) - 1)
    if r < 1:
        raise NoSeparatingNeighborhood(
            f"zero sets are {d:.2f} cells apart; no separating neighbourhood at this grid resolution")
    return r


def split_plan(domain: GridDomain, zero_masks: list, radius: int = DEFAULT_RADIUS) -> SplitPlan:
    m = len(zero_masks)
    if m == 0:
        raise InvalidInput("need at least one function")
    common = np.logical_and.reduce([np.asarray(z, bool) for z in zero_masks])
    if m >= 2 and common.any():
        err = ZeroSetsIntersect if m == 2 else CommonZero
        raise err(f"the functions vanish simultaneously at {int(common.sum())} samples")
    plan = SplitPlan([])
    tau = np.ones(domain.shape)
    rev = []
    for k in range(m, 1, -1):
        live = tau > 0
        B = np.logical_and.reduce([zero_masks[i] for i in range(k - 1)]) & live
        if not B.any():
            rev.append((np.zeros(domain.shape), np.zeros(domain.shape)))
            plan.notes.append(f"factor {k}: no common zeros of the others, set to Id")
            continue
        Am = zero_masks[k - 1] & live
        r = _separation_radius(domain, B, Am, radius)
        chi = make_cutoff(domain, dilate(domain, B, r), dilate(domain, B, 2 * r)).values
        plan.radii.append(r)
        rev.append((tau * chi, tau.copy()))
        tau = tau * chi
    rev.append((np.zeros(domain.shape), tau))
    plan.pieces = rev[::-1]
    return plan


def apply_plan(plan: SplitPlan, Ft: HomotopyField) -> list[HomotopyField]:
    """Factor homotopies on the time grid of Ft (one chart)."""
    out = []
    T = Ft.times
    for a, b in plan.pieces:
        same = a == b
        frames = np.empty_like(Ft.frames)
        for k, t in enumerate(T):
            Fb = Ft.frames[k] if np.all(b == 1) else Ft.at(t * b)
            if np.all(a == 0):
                G = Fb.copy()
            else:
                G = la.inverse(Ft.at(t * a)) @ Fb
            G[same] = la.eye_like(())
            frames[k] = G
        frames[0] = la.eye_like(Ft.domain.shape)
        out.append(HomotopyField(Ft.domain, T, frames))
    return out


def _check_homotopy(F: np.ndarray, Ft: HomotopyField, tol: float):
    d0 = float(la.dist_to_identity(Ft.frames[0]).max())
    d1 = float(np.abs(Ft.frames[-1] - F).max())
    if d0 > tol or d1 > tol:
        raise InvalidInput(f"not a null-homotopy of F: |F_0 - Id| = {d0:.2e}, |F_1 - F| = {d1:.2e}")


def split_general(F: dict, Ft: dict, zero_masks: list, radius: int = DEFAULT_RADIUS,
                  tol: float = 1e-10, plan: SplitPlan | None = None) -> list[SuitableFactor]:
    """Suitable factors G_1..G_m (charts as dict keys) with prod G_j = F."""
    charts = list(F)
    dom = Ft[charts[0]].domain
    for c in charts:
        _check_homotopy(F[c], Ft[c], tol)
    if len(zero_masks) == 1:
        A = np.asarray(zero_masks[0], bool)
        dev = max(float(la.dist_to_identity(Ft[c].frames[:, A]).max(initial=0.0)) for c in charts) if A.any() else 0.0
        if dev > tol:
            raise InvalidInput(f"single factor is not strongly null on its zero set (deviation {dev:.2e})")
    plan = plan or split_plan(dom, zero_masks, radius)
    per_chart = {c: apply_plan(plan, Ft[c]) for c in charts}
    out = []
    for j in range(len(plan.pieces)):
        homs = {c: per_chart[c][j] for c in charts}
        G = {c: np.array(h.frames[-1]) for c, h in homs.items()}
        out.append(SuitableFactor(G, homs, j, np.asarray(zero_masks[j], bool), plan.pieces[j]))
    return out


def split_two(F, Ft, f1_mask, f2_mask, radius: int = DEFAULT_RADIUS, tol: float = 1e-10):
    """alpha = F_chi, beta = F_chi^-1 F; single-chart convenience wrapper."""
    wrap = not isinstance(F, dict)
    Fd = {"0": F} if wrap else F
    Ftd = {"0": Ft} if wrap else Ft
    alpha, beta = split_general(Fd, Ftd, [f1_mask, f2_mask], radius, tol)
    return alpha, beta


def reconstruction_residual(factors: list[SuitableFactor], F: dict, Ft: dict | None = None) -> dict:
    """max |prod G_j - F| at the end frame and across all time frames."""
    end = 0.0
    frames = 0.0
    for c in F:
        P = la.eye_like(F[c].shape[:-2])
        for g in factors:
            P = P @ g.G[c]
        end = max(end, float(np.abs(P - F[c]).max()))
        if Ft is not None:
            Pt = la.eye_like(Ft[c].frames.shape[:-2])
            for g in factors:
                Pt = Pt @ g.homotopy[c].frames
            frames = max(frames, float(np.abs(Pt - Ft[c].frames).max()))
    return {"end": end, "frames": frames}


# ---------------------------------------------------------------------------
# divisibility upgrade
# ---------------------------------------------------------------------------

@dataclass
class UpgradeReport:
    index: int
    status: str               # "vacuous", "order inf", "order 4 exact", "order k (decay)", "tapered"
    order: float | None = None

    def to_json(self) -> dict:
        o = self.order
        return {"index": self.index, "status": self.status,
                "order": None if o is None else ("inf" if np.isinf(o) else float(o))}


def _identity_near(G: SuitableFactor, A: np.ndarray, domain: GridDomain) -> bool:
    nb = dilate(domain, A, 1)
    return all(np.all(h.frames[:, nb] == la.eye_like(())) for h in G.homotopy.values())


def upgrade_divisibility(factors: list[SuitableFactor], fs: list[np.ndarray], k: int = 4,
                         band: float | None = None, rho: float | None = None,
                         sep_radius: int = DEFAULT_RADIUS, polys: list | None = None):
    """Make every G_i - Id vanish to order k along {f_i = 0}.

    Polynomial mode (``polys`` = list of (entries, f_i) Polynomials) checks
    exact divisibility of every entry of G_i - Id by f_i^k.  Sampled mode:
    factors that are Id on a whole neighbourhood of the zero set are left
    alone (order inf); factors passing the decay test are left alone;
    otherwise G_i is tapered to exp(w log G_i) with w = min(|f_i|/rho, 1)^3
    (raised to 1 near the next zero set) and the remainder
    exp((1-w) log G_i) is pushed into a neighbouring factor.
    """
    from .polynomial import divide_exact
    from .errors import NotDivisible
    reports = []
    if polys is not None:
        for i, (entries, fp) in enumerate(polys):
            for e in entries:
                try:
                    divide_exact(e, fp, k)
                except NotDivisible as err:
                    raise NotDivisible(f"factor {i}: {err}", remainder=err.remainder) from None
            reports.append(UpgradeReport(i, f"order {k} exact", float(k)))
        return factors, reports
    factors = list(factors)
    dom = next(iter(factors[0].homotopy.values())).domain
    for i, G in enumerate(factors):
        f = np.asarray(fs[i])
        A = np.abs(f) <= 1e-12
        if not A.any():
            reports.append(UpgradeReport(i, "vacuous"))
            continue
        if _identity_near(G, A, dom):
            reports.append(UpgradeReport(i, "order inf", np.inf))
            continue
        b = band if band is not None else 0.25 * float(np.abs(f).max())
        dev = np.max([la.dist_to_identity(h.frames).max(axis=0) for h in G.homotopy.values()], axis=0)
        rep = vanish_order(dev, f, k, b)
        if rep.passed:
            reports.append(UpgradeReport(i, f"order {rep.order:.2f} (decay)", rep.order))
            continue
        if len(factors) < 2:
            raise CannotTaper(f"factor {i} decays at order {rep.order:.2f} < {k} and has no neighbour to absorb a taper")
        j = i + 1 if i + 1 < len(factors) else i - 1
        r = rho if rho is not None else b
        w = np.minimum(np.abs(f) / r, 1.0) ** 3
        Aj = np.abs(np.asarray(fs[j])) <= 1e-12
        if Aj.any():
            # keep the neighbour's zero set out of the taper region
            near_j = dilate(dom, Aj, sep_radius)
            if np.any(near_j & (w < 1)):
                near_i = dilate(dom, A, sep_radius)
                if np.any(near_i & near_j):
                    raise CannotTaper(f"zero sets of factors {i} and {j} are within {2 * sep_radius} cells")
                chi = make_cutoff(dom, near_i, ~near_j).values
                w = np.maximum(w, chi)
        newG, newH = {}, {}
        nbG, nbH = {}, {}
        for c, h in G.homotopy.items():
            taper = w < 1
            Fr = np.array(h.frames)
            sub = Fr[:, taper]
            if sub.size and float(la.dist_to_identity(sub).max()) > la.LOG_RADIUS:
                raise CannotTaper(f"factor {i} is too far from Id where the taper acts")
            L = la.log_near_identity(sub) if sub.size else sub
            wt = w[taper][None, :, None, None]
            Fr[:, taper] = la.expm(wt * L)
            C = la.eye_like(Fr.shape[:-2])
            C[:, taper] = la.expm((1 - wt) * L)
            nb = factors[j].homotopy[c].frames
            nbF = C @ nb if j > i else nb @ C
            newH[c] = HomotopyField(dom, h.times, Fr)
            nbH[c] = HomotopyField(dom, h.times, nbF)
            newG[c] = Fr[-1]
            nbG[c] = nbF[-1]
        factors[i] = SuitableFactor(newG, newH, G.index, G.zero_mask, G.plan, "tapered")
        factors[j] = SuitableFactor(nbG, nbH, factors[j].index, factors[j].zero_mask, factors[j].plan,
                                    "absorbed taper")
        dev = np.max([la.dist_to_identity(hh.frames).max(axis=0) for hh in newH.values()], axis=0)
        after = vanish_order(dev, f, k, b)
        if not after.passed:
            raise CannotTaper(f"tapered factor {i} still decays at order {after.order:.2f} < {k}")
        reports.append(UpgradeReport(i, "tapered", after.order))
    return factors, reports
