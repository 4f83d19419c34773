"""Figures written next to the textual reports of the command line."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import bounds  # noqa: E402
from .flowgraph import Cut, FlowGraph  # noqa: E402


def _finish(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_tradeoff(p: bounds.SystemParams, path, lp: bounds.LPResult | None = None) -> Path:
    """Cut constraints in the (beta1, beta2) plane with the LP optimum."""
    lp = lp or bounds.optimal_tradeoff_lp(p)
    b1_opt, b2_opt = (float(x) for x in lp.point)
    B = float(p.B)
    xmax = max(2.5 * b1_opt, 1.0)
    ymax = max(3.0 * b2_opt, 1.0)
    xs = np.linspace(0, xmax, 400)

    fig, ax = plt.subplots(figsize=(6, 4.5))
    grid_x, grid_y = np.meshgrid(xs, np.linspace(0, ymax, 300))
    feasible = np.ones_like(grid_x, dtype=bool)
    for c in lp.constraints:
        feasible &= c.a * grid_x + c.b * grid_y >= B - 1e-9
    ax.contourf(grid_x, grid_y, feasible, levels=[0.5, 1.5], colors=["#dde8f5"])

    special = [c.cut_type for c in bounds.special_constraints(p.k, p.d, p.r)]
    for c in lp.constraints:
        if c.cut_type in special:
            style = dict(lw=1.6, color=f"C{special.index(c.cut_type) + 1}")
        else:
            style = dict(lw=0.6, alpha=0.5, color="0.5")
        label = str(c.cut_type) if c.cut_type in special else None
        if c.b:
            ax.plot(xs, (B - c.a * xs) / c.b, **style, label=label)
        else:
            ax.axvline(B / c.a, **style, label=label)
    if p.r > 1:
        g = float(lp.gamma)
        ax.plot(xs, (g - p.d * xs) / (p.r - 1), "k--", lw=1, label=f"gamma = {bounds.render(lp.gamma)}")
    ax.plot([b1_opt], [b2_opt], "ro", label=f"optimum ({lp.beta1}, {lp.beta2})")
    ax.set_xlim(0, xmax)
    ax.set_ylim(0, ymax)
    ax.set_xlabel("beta1 (per survivor link)")
    ax.set_ylabel("beta2 (per newcomer link)")
    ax.set_title(f"B={p.B}, k={p.k}, d={p.d}, r={p.r}")
    ax.legend(fontsize=8, loc="upper right")
    return _finish(fig, path)


def _positions(g: FlowGraph) -> dict[str, tuple[float, float]]:
    pos = {}
    for v in g.vertices:
        stage, kind, idx = v.split(":")
        stage, idx = int(stage), int(idx)
        if kind == "S":
            pos[v] = (-1.0, (g.params.n + 1) / 2)
        elif kind == "DC":
            pos[v] = (g.stages + 1.0, (g.params.n + 1) / 2)
        else:
            shift = {"in": -0.3, "mid": 0.0, "out": 0.3}[kind] if stage > 0 else 0.0
            pos[v] = (stage + shift, float(idx))
    return pos


def plot_flowgraph(g: FlowGraph, path, cut: Cut | None = None) -> Path:
    """Stage-by-stage drawing; far-side vertices of ``cut`` are highlighted."""
    pos = _positions(g)
    fig, ax = plt.subplots(figsize=(2.2 * (g.stages + 3), 0.9 * g.params.n + 2))
    colors = {"alpha": "0.4", "beta1": "tab:blue", "beta2": "tab:orange", "in-mid": "0.7", "dc": "tab:green"}
    for e in g.edges:
        (x0, y0), (x1, y1) = pos[e.u], pos[e.v]
        crossing = cut is not None and e.u in cut.near and e.v in cut.far
        ax.annotate(
            "", xy=(x1, y1), xytext=(x0, y0),
            arrowprops=dict(arrowstyle="->", color="red" if crossing else colors.get(e.kind, "0.5"),
                            lw=1.8 if crossing else 0.8, shrinkA=6, shrinkB=6),
        )
    for v, (x, y) in pos.items():
        far = cut is not None and v in cut.far
        ax.plot(x, y, "o", ms=9, color="tab:red" if far else "white", mec="black")
        ax.text(x, y + 0.22, v, fontsize=6, ha="center")
    ax.set_axis_off()
    title = f"n={g.params.n}, k={g.params.k}, d={g.params.d}, r={g.params.r}, DC on {list(g.dc)}"
    if cut is not None and cut.cut_type:
        title += f", cut type {cut.cut_type}"
    ax.set_title(title, fontsize=9)
    return _finish(fig, path)


def plot_simulation(report, path) -> Path:
    """Per-round bandwidth received by each newcomer against the lower bound."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    rounds = [r.round for r in report.rounds]
    worst = [max(r.received.values()) for r in report.rounds]
    best = [min(r.received.values()) for r in report.rounds]
    if rounds:
        ax.vlines(rounds, best, worst, color="tab:blue", lw=2)
        ax.plot(rounds, worst, "o", ms=3, color="tab:blue", label="received per newcomer")
    ax.axhline(float(report.gamma_bound), color="red", ls="--", label=f"lower bound {report.gamma_bound}")
    ax.set_xlabel("round")
    ax.set_ylabel("packets per stripe")
    ax.set_title(f"n={report.params.n}, k={report.params.k}, r={report.params.r}, seed={report.seed}")
    ax.legend(fontsize=8)
    return _finish(fig, path)
