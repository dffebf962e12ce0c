"""Static SVG figures for the CLI report path."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import linalg as la  # noqa: E402

plt.rcParams.update({"font.size": 9, "axes.grid": True, "grid.alpha": 0.3,
                     "svg.hashsalt": "unifact", "svg.fonttype": "none"})


def _save(fig, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _axis(domain):
    x = domain.coords()[0]
    return x


def _field_plot(ax, domain, v, label=None, log=False):
    v = np.asarray(v, dtype=float)
    if domain.dim == 1:
        y = np.maximum(v, 1e-18) if log else v
        ax.plot(_axis(domain), y, lw=1, label=label)
        if log:
            ax.set_yscale("log")
        return None
    x, y = domain.coords()
    z = np.log10(np.maximum(v, 1e-18)) if log else v
    return ax.pcolormesh(x, y, z, shading="auto", cmap="viridis")


def plot_residual(problem, cert, out_dir: str) -> str:
    """Pointwise ||prod factors - F|| on each chart."""
    from .pipeline import replay
    pairs = {p.id: p for p in problem.pairs}
    P = replay(cert.factors, pairs, problem.bundle, cert.kind)
    dom = problem.domain
    fig, ax = plt.subplots(figsize=(5, 3.2))
    res = np.zeros(dom.shape)
    for c in problem.bundle.ids:
        m = problem.bundle.masks[c]
        r = la.op_norm(P[c] - problem.F[c])
        res[m] = np.maximum(res[m], r[m])
    im = _field_plot(ax, dom, res, log=True)
    if im is not None:
        fig.colorbar(im, ax=ax, label="log10 residual")
    else:
        ax.set_ylabel("residual")
    ax.set_title(f"reconstruction residual, K = {cert.K}")
    return _save(fig, out_dir, "residual.svg")


def plot_factors(cert, out_dir: str, limit: int = 12) -> str:
    """|h| of the first ``limit`` non-padding replicas (1-D) or max |h| (2-D)."""
    dom = cert.domain
    reps = [r for r in cert.factors if r.stage != "padding"]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if dom.dim == 1:
        for k, r in enumerate(reps[:limit]):
            _field_plot(ax, dom, np.abs(r.h), label=f"{k}:{r.sign}{r.stage}")
        if reps:
            ax.legend(fontsize=6, ncol=2)
        ax.set_ylabel("|h|")
    else:
        hmax = np.max([np.abs(r.h) for r in reps], axis=0) if reps else np.zeros(dom.shape)
        im = _field_plot(ax, dom, hmax)
        fig.colorbar(im, ax=ax, label="max |h|")
    ax.set_title("replica parameters")
    return _save(fig, out_dir, "factors.svg")


def plot_subdivision(cert, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for f in cert.provenance.get("factors", []):
        sub = f.get("subdivision", {})
        bp = np.asarray(sub.get("breakpoints", []))
        cl = np.asarray(sub.get("closeness", []))
        if bp.size > 1:
            ax.step(bp[1:], cl, where="pre", label=f"pair {f['pair']}")
    ax.axhline(cert.config.epsilon, color="k", lw=0.8, ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("sup ||U_j U_i^-1 - Id||")
    ax.set_title("subdivision quotients")
    if cert.provenance.get("factors"):
        ax.legend(fontsize=7)
    return _save(fig, out_dir, "subdivision.svg")


def plot_split(factors, domain, out_dir: str) -> str:
    """Per-factor sup_t ||G_t - Id|| for a splitting."""
    m = len(factors)
    fig, axes = plt.subplots(1, m, figsize=(3 * m, 2.8), squeeze=False)
    for ax, G in zip(axes[0], factors):
        dev = np.max([la.dist_to_identity(h.frames).max(axis=0) for h in G.homotopy.values()], axis=0)
        im = _field_plot(ax, domain, dev)
        if im is not None:
            fig.colorbar(im, ax=ax)
        ax.set_title(f"G_{G.index + 1}")
    fig.tight_layout()
    return _save(fig, out_dir, "split.svg")


def plot_identities(report, out_dir: str) -> str:
    """Cofactor sizes of the mod f^3 identities against k."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ks = [q["k"] for q in report.q_checks]
    for name in ("Q11", "Q12", "Q21", "Q22"):
        ax.plot(ks, [len(q["cofactors"][name]) for q in report.q_checks], marker="o", lw=1, label=name)
    ax.set_xlabel("k")
    ax.set_ylabel("terms in f^3 cofactor")
    ax.legend(fontsize=7)
    ax.set_title("Q^k entries mod f^3")
    return _save(fig, out_dir, "identities.svg")


def plot_elimination(A, quad, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(4, 2.8))
    z = np.array([complex(v) for v in quad.as_tuple()])
    ax.bar(["z1", "z2", "z3", "z4"], np.abs(z))
    ax.set_ylabel("|z|")
    ax.set_title("elimination quad")
    return _save(fig, out_dir, "elimination.svg")


def write_tsv(rows: list, out_dir: str, name: str = "summary.tsv") -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        for k, v in rows:
            fh.write(f"{k}\t{v}\n")
    return path
