"""Ready-made problems used by the tests, the acceptance run and the CLI."""

from __future__ import annotations

import numpy as np

from . import linalg as la
from .bundle import Chart, ChartBundle, SectionPair, build_pair, standard_pair
from .fields import GridDomain, HomotopyField
from .pipeline import Problem


def circle_phase(theta: np.ndarray) -> np.ndarray:
    return 1.5 * np.sin(theta) + 0.7 * np.cos(3 * theta)


def circle_problem(n: int = 256, frames: int = 65) -> Problem:
    """Trivial bundle over a sampled circle, f = 1, F = diag(e^{ig}, e^{-ig})."""
    dom = GridDomain.circle(n)
    bundle = ChartBundle.trivial(dom)
    pair = standard_pair(bundle, None, "0")
    g = circle_phase(dom.coords()[0])

    def Ft(t):
        e = np.exp(1j * t * g)
        return la.from_entries(e, 0.0, 0.0, 1.0 / e)

    H = HomotopyField.from_callable(dom, Ft, np.linspace(0.0, 1.0, frames))
    c = bundle.ids[0]
    return Problem(bundle, [pair], {c: H.end.copy()}, {c: H}, "circle")


TWO_CHART_K = np.array([[0.3, 1.0], [0.5, -0.3]])


def two_chart_bundle(n: int = 201) -> ChartBundle:
    """[-1, 1] with charts [-1, 0.25] and [-0.25, 1]; v_0 = g_01 v_1."""
    dom = GridDomain.interval(-1.0, 1.0, n)
    x = dom.coords()[0]
    lo = int(np.searchsorted(x, -0.25 - 1e-12))
    hi = int(np.searchsorted(x, 0.25 + 1e-12))
    charts = [Chart("0", [[0, hi]]), Chart("1", [[lo, n]])]
    return ChartBundle(dom, charts, {("0", "1"): two_chart_transition(x)})


def two_chart_transition(x) -> np.ndarray:
    """g_01 on all of [-1, 1] (the bundle stores it on the overlap)."""
    return la.from_entries(2.0 + 0 * x, x, 0 * x, 1.0 + 0 * x)


def two_chart_pair(bundle: ChartBundle, pair_id: str = "0"):
    """s1 = (1, 0), s2 = (x, x) in chart 0, f = x; det S = x vanishes with f."""
    dom = bundle.domain
    x = dom.coords()[0].astype(complex)
    s1 = np.stack([np.ones_like(x), np.zeros_like(x)], axis=-1)
    s2 = np.stack([x, x], axis=-1)
    g10 = la.inverse(two_chart_transition(dom.coords()[0]))
    sec = SectionPair({"0": s1, "1": (g10 @ s1[..., None])[..., 0]},
                      {"0": s2, "1": (g10 @ s2[..., None])[..., 0]})
    return build_pair(bundle, sec, x, pair_id)


def two_chart_problem(n: int = 201, frames: int = 9, scale: float = 1.0) -> Problem:
    """F_t = exp(t x^4 K) in chart 0, transported to chart 1."""
    bundle = two_chart_bundle(n)
    pair = two_chart_pair(bundle)
    dom = bundle.domain
    x = dom.coords()[0]
    K = scale * TWO_CHART_K
    times = np.linspace(0.0, 1.0, frames)
    F0 = np.stack([la.expm(t * (x ** 4)[:, None, None] * K) for t in times])
    g01 = two_chart_transition(x)
    F1 = la.inverse(g01)[None] @ F0 @ g01[None]
    Ft = {"0": HomotopyField(dom, times, F0), "1": HomotopyField(dom, times, F1)}
    F = {c: h.end.copy() for c, h in Ft.items()}
    return Problem(bundle, [pair], F, Ft, "two-chart")


def square_functions(dom: GridDomain, m: int = 3) -> list:
    x, y = dom.coords()
    fs = [x, y, 1.0 - x - y] if m == 3 else [x, 1.0 - x]
    out = []
    for f in fs:
        f = np.array(f, dtype=float)
        f[np.abs(f) < 1e-12] = 0.0
        out.append(f)
    return out


def square_field(dom: GridDomain, t: float) -> np.ndarray:
    x, y = dom.coords()
    L = la.from_entries(0.4 * np.sin(np.pi * x) * y, 0.8 * x + 0.3 * y * y,
                        0.6 * np.cos(2 * y) - 0.2 * x, -0.4 * np.sin(np.pi * x) * y)
    return la.expm(t * L)


def square_problem(n: int = 128, m: int = 3, frames: int = 9) -> Problem:
    """Trivial bundle on [0,1]^2, standard pairs with f = x, y, 1-x-y (or x, 1-x)."""
    dom = GridDomain.rectangle(0.0, 1.0, 0.0, 1.0, n, n)
    bundle = ChartBundle.trivial(dom)
    pairs = [standard_pair(bundle, f, str(i)) for i, f in enumerate(square_functions(dom, m))]
    H = HomotopyField.from_callable(dom, lambda t: square_field(dom, t), np.linspace(0, 1, frames))
    c = bundle.ids[0]
    return Problem(bundle, pairs, {c: H.end.copy()}, {c: H}, f"square-{m}")


EXAMPLES = {
    "circle": circle_problem,
    "two-chart": two_chart_problem,
    "square": square_problem,
}
