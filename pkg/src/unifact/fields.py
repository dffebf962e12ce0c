"""Functions on sampled grid domains.

Scalar fields are complex arrays of shape ``domain.shape``; matrix fields are
arrays of shape ``domain.shape + (2, 2)``.  The wrappers below only add the
domain and (de)serialization; every algorithm works on the raw arrays.

Neighbourhoods are measured in grid cells (index space, Euclidean), with
wrap-around on periodic axes.  Cutoffs use physical distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from . import linalg as la
from .errors import EmptyBand, InvalidInput, ZeroMargin

ZERO_TOL = 1e-12


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

class GridDomain:
    """Tensor grid in dimension 1 or 2, optionally periodic per axis."""

    def __init__(self, axes: Sequence, periodic: Sequence[bool] | None = None,
                 periods: Sequence[float | None] | None = None):
        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        if not 1 <= len(self.axes) <= 2:
            raise InvalidInput("grid domains have dimension 1 or 2")
        for a in self.axes:
            if a.ndim != 1 or a.size < 2:
                raise InvalidInput("each axis needs at least 2 samples")
            if np.any(np.diff(a) <= 0):
                raise InvalidInput("axis coordinates must be strictly increasing")
        self.periodic = tuple(bool(p) for p in (periodic or [False] * len(self.axes)))
        if len(self.periodic) != len(self.axes):
            raise InvalidInput("one periodic flag per axis")
        if periods is None:
            periods = [None] * len(self.axes)
        self.periods = tuple(
            (float(p) if p is not None else float(a[-1] - a[0] + (a[1] - a[0]))) if per else None
            for a, per, p in zip(self.axes, self.periodic, periods)
        )

    # constructors
    @classmethod
    def interval(cls, a: float, b: float, n: int) -> "GridDomain":
        return cls([np.linspace(a, b, n)])

    @classmethod
    def circle(cls, n: int) -> "GridDomain":
        return cls([2 * np.pi * np.arange(n) / n], [True], [2 * np.pi])

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, nx: int, ny: int) -> "GridDomain":
        return cls([np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)])

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def points(self) -> np.ndarray:
        return np.stack([c.ravel() for c in self.coords()], axis=-1)

    def __eq__(self, other):
        return (isinstance(other, GridDomain) and self.periodic == other.periodic
                and self.shape == other.shape
                and all(np.array_equal(a, b) for a, b in zip(self.axes, other.axes)))

    def __repr__(self):
        kinds = ["periodic" if p else "open" for p in self.periodic]
        return f"GridDomain(shape={self.shape}, {kinds})"

    def to_json(self) -> dict:
        out = {"axes": [a.tolist() for a in self.axes], "periodic": list(self.periodic)}
        if any(self.periodic):
            out["periods"] = list(self.periods)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GridDomain":
        return cls(data["axes"], data.get("periodic"), data.get("periods"))

    def check_shape(self, values: np.ndarray, matrix: bool = False):
        want = self.shape + ((2, 2) if matrix else ())
        if values.shape != want:
            raise InvalidInput(f"field has shape {values.shape}, domain expects {want}")


# ---------------------------------------------------------------------------
# neighbourhoods and cutoffs
# ---------------------------------------------------------------------------

def zero_mask(f: np.ndarray, tol: float = ZERO_TOL) -> np.ndarray:
    return np.abs(f) <= tol


def cell_distance(domain: GridDomain, mask: np.ndarray) -> np.ndarray:
    """Euclidean distance (in grid cells) to the nearest True sample."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(domain.shape, np.inf)
    pad = [(n, n) if p else (0, 0) for n, p in zip(domain.shape, domain.periodic)]
    big = np.pad(~mask, pad, mode="wrap")
    d = ndimage.distance_transform_edt(big)
    sl = tuple(slice(lo, lo + n) for (lo, _), n in zip(pad, domain.shape))
    return d[sl]


def dilate(domain: GridDomain, mask: np.ndarray, radius: float) -> np.ndarray:
    """Samples within ``radius`` cells of ``mask`` (closed ball)."""
    return cell_distance(domain, mask) <= radius + 1e-9


def _neighbour_of(domain: GridDomain, mask: np.ndarray) -> np.ndarray:
    """Samples adjacent (axis neighbours) to a True sample, excluding the mask."""
    out = np.zeros(domain.shape, dtype=bool)
    for ax, per in enumerate(domain.periodic):
        for step in (1, -1):
            shifted = np.roll(mask, step, axis=ax)
            if not per:
                idx = [slice(None)] * domain.dim
                idx[ax] = 0 if step == 1 else -1
                shifted[tuple(idx)] = False
            out |= shifted
    return out & ~mask


def _tree(domain: GridDomain, pts: np.ndarray) -> cKDTree:
    shift = np.array([a[0] for a in domain.axes])
    box = np.array([p if per else 4 * (a[-1] - a[0]) + 1.0
                    for a, per, p in zip(domain.axes, domain.periodic, domain.periods)])
    x = pts - shift
    for i, per in enumerate(domain.periodic):
        if per:
            x[:, i] = np.mod(x[:, i], box[i])
    return cKDTree(x, boxsize=box)


def physical_distance(domain: GridDomain, mask: np.ndarray) -> np.ndarray:
    """Distance from every sample to the nearest True sample (inf if none)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(domain.shape, np.inf)
    pts = domain.points()
    tree = _tree(domain, pts[mask.ravel()])
    shift = np.array([a[0] for a in domain.axes])
    q = pts - shift
    for i, (per, p) in enumerate(zip(domain.periodic, domain.periods)):
        if per:
            q[:, i] = np.mod(q[:, i], p)
    d, _ = tree.query(q)
    return d.reshape(domain.shape)


def smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass
class CutoffFunction:
    domain: GridDomain
    values: np.ndarray
    inner: np.ndarray
    outer: np.ndarray

    def check(self) -> bool:
        v = self.values
        return bool(np.all((v >= 0) & (v <= 1)) and np.all(v[self.inner] == 0)
                    and np.all(v[~self.outer] == 1))


def make_cutoff(domain: GridDomain, inner: np.ndarray, outer: np.ndarray) -> CutoffFunction:
    """chi = 0 on ``inner``, 1 off ``outer``, smoothstep in between.

    The profile coordinate is s = d_in / (d_in + d_out), with d_in the
    distance to ``inner`` and d_out the distance to the outer rim (samples of
    ``outer`` next to its complement).  Rim samples therefore also get 1.
    """
    inner = np.asarray(inner, dtype=bool)
    outer = np.asarray(outer, dtype=bool)
    if np.any(inner & ~outer):
        raise ZeroMargin("inner region is not contained in the outer region")
    rim = _neighbour_of(domain, ~outer) & outer
    if np.any(rim & inner):
        raise ZeroMargin("inner region touches the complement of the outer region")
    if outer.all():
        return CutoffFunction(domain, np.zeros(domain.shape), inner, outer)
    if not inner.any():
        return CutoffFunction(domain, np.ones(domain.shape), inner, outer)
    d_in = physical_distance(domain, inner)
    d_out = physical_distance(domain, rim | ~outer)
    s = d_in / (d_in + d_out)
    chi = smoothstep(s)
    chi[inner] = 0.0
    chi[~outer] = 1.0
    return CutoffFunction(domain, chi, inner, outer)


# ---------------------------------------------------------------------------
# divisibility diagnostics
# ---------------------------------------------------------------------------

@dataclass
class VanishReport:
    order: float
    k: int
    passed: bool
    n_points: int
    band: float

    def to_json(self) -> dict:
        return {"order": "inf" if np.isinf(self.order) else float(self.order),
                "k": self.k, "passed": self.passed, "n_points": self.n_points,
                "band": self.band}


def vanish_order(g: np.ndarray, f: np.ndarray, k: int, band: float) -> VanishReport:
    """Least-squares decay exponent of log|g| against log|f| on 0 < |f| < band.

    Samples where g is exactly zero are treated as infinitely flat and left
    out of the fit; g identically zero on the band gives order inf.
    """
    g = np.abs(np.asarray(g))
    af = np.abs(np.asarray(f))
    sel = (af > 0) & (af < band)
    n = int(np.count_nonzero(sel))
    if n == 0:
        raise EmptyBand(f"no samples with 0 < |f| < {band}")
    gs, fs = g[sel], af[sel]
    nz = gs > 0
    if not nz.any():
        return VanishReport(np.inf, k, True, n, band)
    x, y = np.log(fs[nz]), np.log(gs[nz])
    if np.ptp(x) == 0:
        raise EmptyBand("band holds a single |f| level; cannot fit a slope")
    slope = float(np.polyfit(x, y, 1)[0])
    return VanishReport(slope, k, slope >= k - 0.25, n, band)


# ---------------------------------------------------------------------------
# field wrappers
# ---------------------------------------------------------------------------

def _cplx_to_json(v: np.ndarray) -> list:
    v = np.asarray(v, dtype=complex).ravel()
    # + 0.0 folds -0.0 into 0.0 so a reload serializes identically
    return [[float(x.real) + 0.0, float(x.imag) + 0.0] for x in v]


def _cplx_from_json(vals) -> np.ndarray:
    arr = np.asarray(vals, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInput("complex values must be [re, im] pairs")
    out = np.empty(arr.shape[0], dtype=complex)
    out.real, out.imag = arr[:, 0], arr[:, 1]
    return out


@dataclass
class ScalarField:
    domain: GridDomain
    values: np.ndarray
    poly: object = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.domain.check_shape(self.values)

    @classmethod
    def from_polynomial(cls, domain: GridDomain, poly, names: Sequence[str]) -> "ScalarField":
        vals = poly.evaluate(dict(zip(names, domain.coords())))
        vals = np.broadcast_to(np.asarray(vals, dtype=complex), domain.shape).copy()
        return cls(domain, vals, poly)

    def zero_mask(self, tol: float = ZERO_TOL) -> np.ndarray:
        return zero_mask(self.values, tol)

    def to_json(self) -> dict:
        return {"format": "field-v1", "domain": self.domain.to_json(),
                "values": _cplx_to_json(self.values)}

    @classmethod
    def from_json(cls, data: dict) -> "ScalarField":
        if data.get("format", "field-v1") != "field-v1" or "shape" in data:
            raise InvalidInput("expected a scalar field-v1 block")
        dom = GridDomain.from_json(data["domain"])
        return cls(dom, _cplx_from_json(data["values"]).reshape(dom.shape))


@dataclass
class MatrixField:
    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.domain.check_shape(self.values, matrix=True)

    @classmethod
    def identity(cls, domain: GridDomain) -> "MatrixField":
        return cls(domain, la.eye_like(domain.shape))

    def entry(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.domain, self.values[..., i, j])

    def is_sl2(self, tol: float = 1e-10) -> np.ndarray:
        return la.is_sl2(self.values, tol)

    def to_json(self) -> dict:
        return {"format": "field-v1", "shape": [2, 2], "domain": self.domain.to_json(),
                "values": _cplx_to_json(self.values)}

    @classmethod
    def from_json(cls, data: dict) -> "MatrixField":
        if data.get("format", "field-v1") != "field-v1" or list(data.get("shape", [])) != [2, 2]:
            raise InvalidInput("expected a matrix field-v1 block with shape [2, 2]")
        dom = GridDomain.from_json(data["domain"])
        return cls(dom, _cplx_from_json(data["values"]).reshape(dom.shape + (2, 2)))


@dataclass
class HomotopyField:
    """Matrix fields at times 0 = t_0 < ... < t_m = 1.

    Between frames the path is the geodesic F_k exp(s log(F_k^-1 F_{k+1})),
    which keeps determinant 1 and keeps Id wherever both frames are Id.
    """

    domain: GridDomain
    times: np.ndarray
    frames: np.ndarray
    _logs: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.frames = np.asarray(self.frames, dtype=complex)
        if self.times.ndim != 1 or self.times.size < 2:
            raise InvalidInput("a homotopy needs at least two time samples")
        if self.times[0] != 0.0 or self.times[-1] != 1.0 or np.any(np.diff(self.times) <= 0):
            raise InvalidInput("homotopy times must increase strictly from 0 to 1")
        if self.frames.shape != (self.times.size,) + self.domain.shape + (2, 2):
            raise InvalidInput(f"homotopy frames have shape {self.frames.shape}")

    @classmethod
    def from_callable(cls, domain: GridDomain, fn: Callable[[float], np.ndarray],
                      times) -> "HomotopyField":
        times = np.asarray(times, dtype=float)
        return cls(domain, times, np.stack([np.broadcast_to(fn(t), domain.shape + (2, 2)) for t in times]))

    @classmethod
    def constant_identity(cls, domain: GridDomain) -> "HomotopyField":
        return cls(domain, np.array([0.0, 1.0]), np.stack([la.eye_like(domain.shape)] * 2))

    @property
    def start(self) -> np.ndarray:
        return self.frames[0]

    @property
    def end(self) -> np.ndarray:
        return self.frames[-1]

    def steps(self) -> np.ndarray:
        """Per-interval log(F_k^-1 F_{k+1}); cached."""
        if self._logs is None:
            F = self.frames
            self._logs = la.logm_sl2(la.inverse(F[:-1]) @ F[1:])
        return self._logs

    def gaps(self) -> np.ndarray:
        """sup over the domain of ||F_{k+1} F_k^-1 - Id|| per interval."""
        F = self.frames
        q = F[1:] @ la.inverse(F[:-1])
        return la.dist_to_identity(q).reshape(len(F) - 1, -1).max(axis=1)

    def at(self, t) -> np.ndarray:
        """Frame at time t; t may be a scalar or an array of per-sample times."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > 1):
            raise InvalidInput("homotopy time outside [0, 1]")
        T = np.broadcast_to(t, self.domain.shape)
        k = np.clip(np.searchsorted(self.times, T, side="right") - 1, 0, self.times.size - 2)
        s = (T - self.times[k]) / (self.times[k + 1] - self.times[k])
        idx = np.indices(self.domain.shape)
        base = self.frames[(k,) + tuple(idx)]
        L = self.steps()[(k,) + tuple(idx)]
        out = base @ la.expm(s[..., None, None] * L)
        # exact frames where the requested time is a sample
        hit = s == 0
        out[hit] = base[hit]
        top = s == 1
        out[top] = self.frames[(k + 1,) + tuple(idx)][top]
        return out

    def refine(self, max_gap: float = 0.25, max_frames: int = 4097) -> "HomotopyField":
        """Insert geodesic midpoints until every neighbouring-frame gap is <= max_gap."""
        h = self
        while True:
            g = h.gaps()
            bad = np.nonzero(g > max_gap)[0]
            if bad.size == 0:
                return h
            if h.times.size + bad.size > max_frames:
                raise InvalidInput(f"refinement exceeds {max_frames} frames (worst gap {g.max():.3f})")
            new_t = 0.5 * (h.times[bad] + h.times[bad + 1])
            times = np.sort(np.concatenate([h.times, new_t]))
            frames = np.stack([h.at(t) for t in times])
            h = HomotopyField(h.domain, times, frames)

    def with_times(self, times) -> "HomotopyField":
        times = np.asarray(times, dtype=float)
        return HomotopyField(self.domain, times, np.stack([self.at(t) for t in times]))

    def to_json(self) -> dict:
        return {"format": "homotopy-v1", "times": self.times.tolist(),
                "frames": [MatrixField(self.domain, F).to_json() for F in self.frames]}

    @classmethod
    def from_json(cls, data: dict) -> "HomotopyField":
        frames = [MatrixField.from_json(b) for b in data["frames"]]
        if not frames:
            raise InvalidInput("homotopy without frames")
        dom = frames[0].domain
        if any(fr.domain != dom for fr in frames):
            raise InvalidInput("homotopy frames live on different domains")
        return cls(dom, np.asarray(data["times"], dtype=float), np.stack([fr.values for fr in frames]))
