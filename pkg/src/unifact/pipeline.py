"""End-to-end factorization of a null-homotopic special automorphism.

    split -> per factor: upgrade -> localize -> flatten -> section frame
          -> SU(2) peel -> subdivide -> near-identity quads
    -> padding word U^-(1) U^+(0) U^-(-1) U^+(0) for the first pair

The result is a certificate: the ordered replica list (pair, sign, h) plus
residuals and per-stage provenance.  Certificates are plain JSON
("cert-v1"), deterministic for a given input and config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg as la
from .bundle import ChartBundle, NilpotentPair, Replica, exp_nilpotent, replica_eval
from .elimination import (factor_near_identity, flatten_homotopy, localize_to_identity,
                          reduce_to_su2, subdivide_homotopy, to_section_frame)
from .errors import CannotSatisfy, InvalidInput, SizeGuard, StageError
from .fields import GridDomain, HomotopyField, MatrixField, ScalarField
from .splitting import split_general, upgrade_divisibility

PADDING = ((0, "-", 1.0), (1, "+", 0.0), (2, "-", -1.0), (3, "+", 0.0))


@dataclass
class RunConfig:
    tol: float = 1e-10
    epsilon: float = 0.5
    delta: float = 1e-6
    radius: int = 3
    max_factors: int = 100000
    backend: str = "float"
    max_frames: int = 4097
    padding: bool = True
    merge: bool = True

    def check(self) -> "RunConfig":
        if self.backend not in ("float", "exact"):
            raise InvalidInput(f"backend must be 'float' or 'exact', got {self.backend!r}")
        for k in ("tol", "epsilon", "delta", "radius", "max_factors"):
            if not getattr(self, k) > 0:
                raise InvalidInput(f"config {k} must be positive")
        if self.epsilon > 0.5:
            raise InvalidInput("epsilon above 1/2 loses the pivot bound |a| >= 1/2")
        return self

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict | None) -> "RunConfig":
        data = dict(data or {})
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise InvalidInput(f"unknown config keys {sorted(extra)}")
        return cls(**data).check()


# ---------------------------------------------------------------------------
# problem container
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    bundle: ChartBundle
    pairs: list
    F: dict                   # chart -> (..., 2, 2)
    Ft: dict                  # chart -> HomotopyField
    name: str = ""

    @property
    def domain(self) -> GridDomain:
        return self.bundle.domain

    def pair(self, pid: str) -> NilpotentPair:
        for p in self.pairs:
            if p.id == pid:
                return p
        raise InvalidInput(f"unknown pair id {pid!r}")

    def to_json(self) -> dict:
        dom = self.domain
        return {
            "format": "problem-v1",
            "name": self.name,
            "bundle": self.bundle.to_json(),
            "pairs": [p.to_json() for p in self.pairs],
            "F": {c: MatrixField(dom, v).to_json() for c, v in self.F.items()},
            "homotopy": {c: h.to_json() for c, h in self.Ft.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Problem":
        if data.get("format") != "problem-v1":
            raise InvalidInput("expected problem-v1")
        bundle = ChartBundle.from_json(data["bundle"])
        pairs = [NilpotentPair.from_json(p, bundle) for p in data["pairs"]]
        F = {str(c): MatrixField.from_json(v).values for c, v in data["F"].items()}
        Ft = {str(c): HomotopyField.from_json(v) for c, v in data.get("homotopy", {}).items()}
        missing = [c for c in bundle.ids if c not in F or c not in Ft]
        if missing:
            raise InvalidInput(f"F / homotopy missing for charts {missing}")
        return cls(bundle, pairs, F, Ft, data.get("name", ""))


def _canon(a) -> bytes:
    # + 0j folds -0.0 into 0.0 in both parts, so JSON round trips hash the same
    return np.ascontiguousarray(np.asarray(a, dtype=complex) + 0j).tobytes()


def input_digest(problem: Problem, config: RunConfig) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(problem.bundle.to_json(), sort_keys=True).encode())
    for p in problem.pairs:
        h.update(p.id.encode())
        h.update(_canon(p.f))
        for c in sorted(p.S):
            h.update(_canon(p.S[c]))
    for c in sorted(problem.F):
        h.update(_canon(problem.F[c]))
        h.update(np.ascontiguousarray(problem.Ft[c].times, dtype=float).tobytes())
        h.update(_canon(problem.Ft[c].frames))
    h.update(json.dumps(config.to_json(), sort_keys=True).encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass
class FactorizationCertificate:
    digest: str
    domain: GridDomain
    factors: list             # Replica list, product order
    provenance: dict
    config: RunConfig
    residual: float = 0.0
    det_drift: float = 0.0
    unipotent_defect: float = 0.0
    interpolation_defect: float = 0.0
    kind: str = "replica"     # or "exponential"

    @property
    def K(self) -> int:
        return len(self.factors)

    @property
    def tolerance(self) -> float:
        return self.config.tol * max(self.K, 1)

    @property
    def passed(self) -> bool:
        return (self.residual <= self.tolerance and self.unipotent_defect <= self.config.tol
                and self.interpolation_defect <= self.config.tol)

    def to_json(self) -> dict:
        return {
            "format": "cert-v1",
            "kind": self.kind,
            "input_digest": self.digest,
            "domain": self.domain.to_json(),
            "config": self.config.to_json(),
            "K": self.K,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "det_drift": self.det_drift,
            "unipotent_defect": self.unipotent_defect,
            "interpolation_defect": self.interpolation_defect,
            "provenance": self.provenance,
            "factors": [{"pair": r.pair, "sign": r.sign, "stage": r.stage,
                         "h": ScalarField(self.domain, r.h).to_json()["values"]} for r in self.factors],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, data: dict) -> "FactorizationCertificate":
        if data.get("format") != "cert-v1":
            raise InvalidInput("expected cert-v1")
        dom = GridDomain.from_json(data["domain"])
        reps = []
        for r in data["factors"]:
            h = ScalarField.from_json({"format": "field-v1", "domain": data["domain"], "values": r["h"]}).values
            reps.append(Replica(str(r["pair"]), r["sign"], h, r.get("stage", "")))
        cert = cls(data["input_digest"], dom, reps, data.get("provenance", {}),
                   RunConfig.from_json(data["config"]), float(data["residual"]),
                   float(data.get("det_drift", 0.0)), float(data.get("unipotent_defect", 0.0)),
                   float(data.get("interpolation_defect", 0.0)), data.get("kind", "replica"))
        return cert


def _factor_matrix(r: Replica, pair: NilpotentPair, chart: str, kind: str) -> np.ndarray:
    if kind == "exponential":
        return exp_nilpotent(r.h[..., None, None] * pair.N(r.sign, chart))
    return replica_eval(r, pair, chart)


def replay(factors: list, pairs: dict, bundle: ChartBundle, kind: str = "replica") -> dict:
    """Chart -> product of the factors (valid on that chart's samples)."""
    out = {}
    for c in bundle.ids:
        P = la.eye_like(bundle.domain.shape)
        for r in factors:
            P = P @ _factor_matrix(r, pairs[r.pair], c, kind)
        out[c] = P
    return out


def _chart_sup(vals: dict, bundle: ChartBundle) -> tuple[float, dict]:
    worst, where = 0.0, {}
    for c in bundle.ids:
        m = bundle.masks[c]
        if not m.any():
            continue
        v = np.where(m, vals[c], 0.0)
        k = int(np.argmax(v))
        if v.flat[k] > worst or not where:
            worst = max(worst, float(v.flat[k]))
            where = {"chart": c, "index": [int(i) for i in np.unravel_index(k, v.shape)] if v.ndim else []}
    return worst, where


def audit(factors: list, F: dict, pairs: dict, bundle: ChartBundle, tol: float,
          kind: str = "replica") -> dict:
    P = replay(factors, pairs, bundle, kind)
    res = {c: la.op_norm(P[c] - F[c]) for c in bundle.ids}
    detd = {c: np.abs(la.det(P[c]) - 1.0) for c in bundle.ids}
    residual, where = _chart_sup(res, bundle)
    drift, _ = _chart_sup(detd, bundle)
    unip = 0.0
    violations = []
    for k, r in enumerate(factors):
        pair = pairs[r.pair]
        for c in bundle.ids:
            m = bundle.masks[c]
            N = r.h[..., None, None] * pair.N(r.sign, c)
            unip = max(unip, float(np.abs((N @ N)[m]).max(initial=0.0)))
        if r.stage == "padding":
            continue
        A = pair.zero_mask()
        if A.any():
            bad = np.abs(r.h[A]) > tol
            if bad.any():
                violations.append({"factor": k, "pair": r.pair, "samples": int(bad.sum()),
                                   "max_h": float(np.abs(r.h[A]).max())})
    interp = max((v["max_h"] for v in violations), default=0.0)
    return {"residual": residual, "worst_sample": where, "det_drift": drift,
            "unipotent_defect": unip, "interpolation_defect": interp, "violations": violations}


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

def _compress(reps: list) -> list:
    """Drop identically-zero replicas and merge neighbours with equal pair and sign."""
    out = []
    for r in reps:
        if r.stage != "padding" and not np.any(r.h):
            continue
        if out and out[-1].pair == r.pair and out[-1].sign == r.sign and "padding" not in (r.stage, out[-1].stage):
            prev = out.pop()
            h = prev.h + r.h
            if np.any(h):
                out.append(Replica(r.pair, r.sign, h, prev.stage if prev.stage == r.stage else f"{prev.stage}+{r.stage}"))
            continue
        out.append(r)
    return out


def _det_drift(G: dict, bundle: ChartBundle) -> float:
    return max(float(np.abs(la.det(G[c][bundle.masks[c]]) - 1).max(initial=0.0)) for c in bundle.ids)


def _stage(name: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError as e:
        raise e.tagged(name) from None


def factor_one(G, pair: NilpotentPair, bundle: ChartBundle, config: RunConfig) -> tuple[list, dict]:
    """Replicas of a single suitable factor, in product order, plus provenance."""
    prov = {"pair": pair.id}
    loc = _stage("localize", localize_to_identity, G.G, G.homotopy, bundle, pair,
                 config.radius, config.delta, config.tol)
    prov["localize"] = {"passes": loc.passes, "divisibility": loc.divisibility,
                        "replicas": len(loc.replicas), "snap_residual": loc.snap_residual,
                        "det_drift": _det_drift(loc.G, bundle)}
    flat = _stage("flatten", flatten_homotopy, loc.homotopy, bundle, pair, 2 * config.radius)
    prov["flatten"] = {"max_deviation": flat.max_deviation, "inner_samples": int(flat.inner.sum())}
    Ghat = _stage("section-frame", to_section_frame, flat.homotopy, bundle, pair, flat.inner)
    su2 = _stage("su2", reduce_to_su2, Ghat, pair.f, flat.inner, pair.id, config.tol)
    prov["su2"] = {"su2_defect": su2.su2_defect}
    U = su2.unitary
    refinements = 0
    while True:
        try:
            sub = subdivide_homotopy(U, config.epsilon)
            break
        except CannotSatisfy as e:
            if U.times.size * 2 > config.max_frames:
                raise e.tagged("subdivision") from None
            U = U.refine(max_gap=config.epsilon / 2, max_frames=config.max_frames)
            refinements += 1
    prov["subdivision"] = {"steps": sub.n_steps, "frames": int(U.times.size), "refinements": refinements,
                           "breakpoints": sub.breakpoints.tolist(), "closeness": sub.closeness.tolist()}
    near = _stage("near-identity", factor_near_identity, U, sub, pair.f, flat.inner, pair.id, config.delta)
    return near + su2.replicas + loc.replicas, prov


def factor_automorphism(problem: Problem, config: RunConfig | None = None) -> FactorizationCertificate:
    config = (config or RunConfig()).check()
    if config.backend == "exact":
        raise InvalidInput("the field pipeline runs on the float backend; the exact backend is "
                           "available for scalar kernels and symbolic checks")
    bundle, F, Ft = problem.bundle, problem.F, problem.Ft
    dom = bundle.domain
    pairs = {p.id: p for p in problem.pairs}
    digest = input_digest(problem, config)
    drift0 = _det_drift(F, bundle)
    if drift0 > config.tol:
        raise InvalidInput(f"F is not special: |det F - 1| reaches {drift0:.3e}")
    prov = {"input_det_drift": drift0}

    if all(np.array_equal(F[c][bundle.masks[c]], la.eye_like((int(bundle.masks[c].sum()),)))
           for c in bundle.ids):
        prov["note"] = "F = Id; empty factorization"
        return FactorizationCertificate(digest, dom, [], prov, config)

    if not problem.pairs:
        raise InvalidInput("at least one nilpotent pair is required")
    masks = [p.zero_mask() for p in problem.pairs]
    factors = _stage("split", split_general, F, Ft, masks, config.radius, config.tol)
    prov["split"] = {"factors": len(factors)}
    factors, ups = _stage("upgrade", upgrade_divisibility, factors, [p.f for p in problem.pairs], 4)
    prov["upgrade"] = [u.to_json() for u in ups]

    reps = []
    per = []
    for G, pair in zip(factors, problem.pairs):
        r, p = factor_one(G, pair, bundle, config)
        reps.extend(r)
        p["replicas"] = len(r)
        per.append(p)
    prov["factors"] = per
    if config.padding:
        p0 = problem.pairs[0]
        for _, sign, v in PADDING:
            reps.append(Replica(p0.id, sign, np.full(dom.shape, v, dtype=complex), "padding"))
    if config.merge:
        reps = _compress(reps)
    if len(reps) > config.max_factors:
        raise SizeGuard(f"{len(reps)} factors exceed max_factors = {config.max_factors}").tagged("assemble")
    a = audit(reps, F, pairs, bundle, config.tol)
    prov["worst_sample"] = a["worst_sample"]
    stages = {}
    for r in reps:
        stages[r.stage] = stages.get(r.stage, 0) + 1
    prov["replicas_by_stage"] = dict(sorted(stages.items()))
    return FactorizationCertificate(digest, dom, reps, prov, config, a["residual"], a["det_drift"],
                                    a["unipotent_defect"], a["interpolation_defect"])


def verify_certificate(problem: Problem, cert: FactorizationCertificate, tol: float | None = None) -> dict:
    """Replay the certificate against F; pass/fail at the certificate tolerance."""
    if cert.domain != problem.domain:
        raise InvalidInput("certificate and problem live on different domains")
    pairs = {p.id: p for p in problem.pairs}
    unknown = sorted({r.pair for r in cert.factors} - set(pairs))
    if unknown:
        raise InvalidInput(f"certificate references unknown pair ids {unknown}")
    ztol = cert.config.tol if tol is None else tol
    a = audit(cert.factors, problem.F, pairs, problem.bundle, ztol, cert.kind)
    bound = cert.tolerance
    a["tolerance"] = bound
    a["K"] = cert.K
    a["digest_matches"] = cert.digest == input_digest(problem, cert.config)
    a["passed"] = (a["residual"] <= bound and not a["violations"]
                   and a["unipotent_defect"] <= cert.config.tol)
    return a


def exponentialize(cert: FactorizationCertificate) -> FactorizationCertificate:
    """Same factor list read as exp(h N): identical product since (h N)^2 = 0."""
    prov = dict(cert.provenance)
    prov["exponentialized_from"] = cert.kind
    return FactorizationCertificate(cert.digest, cert.domain, list(cert.factors), prov, cert.config,
                                    cert.residual, cert.det_drift, cert.unipotent_defect,
                                    cert.interpolation_defect, kind="exponential")


def exponent_fields(cert: FactorizationCertificate, pairs: dict, chart: str) -> list:
    """The nilpotent exponents a_k = h_k N_k in one chart."""
    return [r.h[..., None, None] * pairs[r.pair].N(r.sign, chart) for r in cert.factors]
