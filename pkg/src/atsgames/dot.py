"""Graphviz DOT export for traces and global-state graphs."""

from __future__ import annotations

from .game import Game, Reachability, Safety
from .traces import Trace


def _q(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def _state(s) -> str:
    return "(" + ",".join(s) + ")"


def trace_to_dot(t: Trace, name: str = "trace") -> str:
    """Hasse diagram: one node per event, one arrow per covering pair."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for i, a in enumerate(t.labels):
        lines.append(f"  e{i} [label={_q(f'{i}:{a}')}];")
    for i, j in sorted(t.covering):
        lines.append(f"  e{i} -> e{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def global_graph_to_dot(G: Game, name: str = "ats") -> str:
    """Reachable global states; one edge per non-deterministic choice."""
    A = G.system
    states = sorted(A.reachable(G.initial), key=A.state_key)
    ids = {s: k for k, s in enumerate(states)}
    cond = G.condition
    lines = [f"digraph {name} {{", "  node [shape=ellipse];"]
    for s in states:
        attrs = [f"label={_q(_state(s))}"]
        if s == G.initial:
            attrs.append("peripheries=2")
        if isinstance(cond, Safety) and s in cond.unsafe:
            attrs.append('style=filled fillcolor="#e06666"')
        if isinstance(cond, Reachability) and s in cond.target:
            attrs.append('style=filled fillcolor="#93c47d"')
        lines.append(f"  s{ids[s]} [{' '.join(attrs)}];")
    for s in states:
        for a in A.enabled(s):
            for s2 in A.global_successors(s, a):
                lines.append(f"  s{ids[s]} -> s{ids[s2]} [label={_q(a)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
