"""Matplotlib figures for solver reports."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .game import Game, Play, Reachability, Safety  # noqa: E402

UNSAFE = "#e06666"
TARGET = "#93c47d"
PLAIN = "#f3f3f3"
REGION = "#3d85c6"
PATH = "#e69138"


def _layout(G: Game, states):
    A = G.system
    procs = A.alphabet.processes
    if len(procs) == 2:
        # grid: first process on the vertical axis, second on the horizontal
        return {s: (A.local_key(procs[1], s[1]), -A.local_key(procs[0], s[0])) for s in states}
    n = len(states)
    return {s: (math.cos(2 * math.pi * k / max(n, 1)), math.sin(2 * math.pi * k / max(n, 1)))
            for k, s in enumerate(states)}


def _passes_over(pos, s, s2) -> bool:
    (x1, y1), (x2, y2) = pos[s], pos[s2]
    for u, (x, y) in pos.items():
        if u in (s, s2):
            continue
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        inside = min(x1, x2) - 1e-9 <= x <= max(x1, x2) + 1e-9 and min(y1, y2) - 1e-9 <= y <= max(y1, y2) + 1e-9
        if abs(cross) < 1e-9 and inside:
            return True
    return False


def draw_global_graph(ax, G: Game, region=None, play: Play | None = None, title: str | None = None):
    A = G.system
    states = sorted(A.reachable(G.initial), key=A.state_key)
    pos = _layout(G, states)
    cond = G.condition
    region = set(region or ())
    visited = set(play.rho.values()) if play is not None else set()
    along = play.states_along() if play is not None else []
    path_edges = set(zip(along, along[1:]))

    for s in states:
        for a in A.enabled(s):
            for s2 in A.global_successors(s, a):
                hot = (s, s2) in path_edges
                (x1, y1), (x2, y2) = pos[s], pos[s2]
                dx, dy = x2 - x1, y2 - y1
                # bend edges that would run straight through another node
                rad = 0.35 if _passes_over(pos, s, s2) else 0.0
                ax.annotate("", xy=pos[s2], xytext=pos[s],
                            arrowprops=dict(arrowstyle="->", color=PATH if hot else "0.55",
                                            lw=2.2 if hot else 0.9, shrinkA=14, shrinkB=14,
                                            connectionstyle=f"arc3,rad={rad}"))
                mx = (x1 + x2) / 2 + 0.5 * rad * dy
                my = (y1 + y2) / 2 - 0.5 * rad * dx
                ax.text(mx, my, a, fontsize=7, color="0.3", ha="center", va="center",
                        bbox=dict(boxstyle="round,pad=0.1", fc="white", ec="none"), zorder=5)
    for s in states:
        face = PLAIN
        if isinstance(cond, Safety) and s in cond.unsafe:
            face = UNSAFE
        elif isinstance(cond, Reachability) and s in cond.target:
            face = TARGET
        edge = REGION if s in region else "0.2"
        width = 2.5 if s in region else 0.8
        if s in visited:
            edge, width = PATH, 2.5
        ax.scatter(*pos[s], s=900, c=face, edgecolors=edge, linewidths=width, zorder=3)
        ax.text(*pos[s], ",".join(s), fontsize=7, ha="center", va="center", zorder=4)
    if G.initial in pos:
        x, y = pos[G.initial]
        ax.scatter(x, y, s=1400, facecolors="none", edgecolors="0.2", linewidths=0.8, zorder=2)
    if title:
        ax.set_title(title, fontsize=9)
    ax.set_axis_off()
    ax.margins(0.2)


def plot_winning_region(G: Game, region, path: str):
    fig, ax = plt.subplots(figsize=(5, 5))
    draw_global_graph(ax, G, region=region, title="global states (blue ring: winning region)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_refutations(G: Game, refutations, path: str, limit: int = 8):
    """One panel per refuted response table, showing its losing play."""
    shown = refutations[:limit] or [({}, None)]
    cols = min(len(shown), 4)
    rows = math.ceil(len(shown) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.6 * cols, 3.6 * rows), squeeze=False)
    for k, (table, play) in enumerate(shown):
        ax = axes[k // cols][k % cols]
        label = "; ".join(f"{' '.join(key)}->{','.join(v)}" for key, v in sorted(table.items())[:3])
        draw_global_graph(ax, G, play=play, title=f"table {k + 1}: {label}" if table else None)
    for k in range(len(shown), rows * cols):
        axes[k // cols][k % cols].set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
