"""Plain-text game files, strategy files and play transcripts.

Game file layout (section headers start in column 0, their content lines are
indented; ``#`` starts a comment)::

    processes: q r
    alphabet:
      a: q
      b: r
    partition:                 # optional; makes the file an asynchronous game
      controllable: a
      uncontrollable: b
    states:
      q: q0 q1 q2
      r: r0 r1 r2
    initial: (q0, r0)
    transitions:
      a: (q0) -> (q1)
      b: (r0) -> (r1)
    condition: safety unsafe = {(q1, r0)}

Tuples list local states in process declaration order (for ``initial`` and
conditions) or in ``loc(a)`` order (for transitions).  The condition is either
``safety unsafe = {...}`` or ``reach target = {...}``.
"""

from __future__ import annotations

import re
from typing import Iterable

from .ats import AsyncTransitionSystem
from .errors import ParseError
from .game import Game, Play, Reachability, Safety, play_from_transcript
from .reduction import AsynGame
from .solvers import SequentialStrategy
from .strategy import DistributedStrategy
from .traces import DistributedAlphabet

SECTIONS = ("processes", "alphabet", "partition", "states", "initial", "transitions", "condition")
NAME = re.compile(r"[A-Za-z0-9_.'\[\]+]+\Z")
TUPLE = re.compile(r"\(([^()]*)\)")


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def _check_name(name: str, line: int, col: int, what: str) -> str:
    if not NAME.match(name):
        raise ParseError(f"invalid {what} name {name!r}", line, col)
    return name


def _parse_tuple(text: str, line: int, col: int) -> tuple:
    m = TUPLE.fullmatch(text.strip())
    if not m:
        raise ParseError(f"expected a state tuple like (s1, s2), got {text.strip()!r}", line, col)
    body = m.group(1).strip()
    if not body:
        return ()
    return tuple(_check_name(x.strip(), line, col, "state") for x in body.split(","))


def _parse_tuple_set(text: str, line: int, col: int) -> list[tuple]:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError("expected a set of state tuples in braces", line, col)
    inner = text[1:-1]
    rest = TUPLE.sub("", inner)
    if rest.replace(",", "").strip():
        raise ParseError(f"unexpected text {rest.strip()!r} in state set", line, col)
    return [_parse_tuple(m.group(0), line, col) for m in TUPLE.finditer(inner)]


def _split_sections(text: str):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        if not line[0].isspace():
            head, sep, rest = line.partition(":")
            head = head.strip()
            if not sep:
                raise ParseError(f"expected a section header 'name:', got {line.strip()!r}", lineno, 1)
            if head not in SECTIONS:
                raise ParseError(f"unknown section {head!r}", lineno, 1)
            if head in sections:
                what = "duplicate condition" if head == "condition" else f"duplicate section {head!r}"
                raise ParseError(what, lineno, 1)
            current = head
            sections[head] = []
            if rest.strip():
                sections[head].append((lineno, len(head) + 2, rest.strip()))
        else:
            if current is None:
                raise ParseError("indented line outside any section", lineno, 1)
            col = len(line) - len(line.lstrip()) + 1
            sections[current].append((lineno, col, line.strip()))
    return sections


def _keyed_lines(entries, what):
    out = []
    for lineno, col, body in entries:
        key, sep, rest = body.partition(":")
        if not sep:
            raise ParseError(f"expected '{what}: ...'", lineno, col)
        out.append((lineno, col, _check_name(key.strip(), lineno, col, what), rest.strip()))
    return out


def parse_game(text: str) -> Game | AsynGame:
    if not any(_strip_comment(line).strip() for line in text.splitlines()):
        raise ParseError("empty game file", 1, 1)
    sec = _split_sections(text)
    for need in ("processes", "alphabet", "states", "initial", "transitions", "condition"):
        if need not in sec:
            raise ParseError(f"missing section {need!r}", len(text.splitlines()) + 1, 1)

    procs = []
    for lineno, col, body in sec["processes"]:
        for name in body.split():
            _check_name(name, lineno, col, "process")
            if name in procs:
                raise ParseError(f"duplicate process {name!r}", lineno, col)
            procs.append(name)
    if not procs:
        raise ParseError("no processes declared")

    locations = {}
    for lineno, col, a, rest in _keyed_lines(sec["alphabet"], "action"):
        if a in locations:
            raise ParseError(f"duplicate action {a!r}", lineno, col)
        parts = rest.replace(",", " ").split()
        if not parts:
            raise ParseError(f"action {a!r} has no participating process", lineno, col)
        for p in parts:
            if p not in procs:
                raise ParseError(f"action {a!r} names unknown process {p!r}", lineno, col)
        locations[a] = parts
    alphabet = DistributedAlphabet.from_locations(locations, procs)

    states = {}
    for lineno, col, p, rest in _keyed_lines(sec["states"], "process"):
        if p not in procs:
            raise ParseError(f"states declared for unknown process {p!r}", lineno, col)
        if p in states:
            raise ParseError(f"duplicate states line for {p!r}", lineno, col)
        names = rest.split()
        for n in names:
            _check_name(n, lineno, col, "state")
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate local state for {p!r}", lineno, col)
        if not names:
            raise ParseError(f"process {p!r} has no local states", lineno, col)
        states[p] = names
    for p in procs:
        if p not in states:
            raise ParseError(f"no states declared for process {p!r}")

    def resolve_global(tup, lineno, col):
        if len(tup) != len(procs):
            raise ParseError(f"global state {tup} needs {len(procs)} components", lineno, col)
        for p, s in zip(procs, tup):
            if s not in states[p]:
                raise ParseError(f"unknown state {s!r} for process {p!r}", lineno, col)
        return tup

    if len(sec["initial"]) != 1:
        raise ParseError("initial must be a single state tuple")
    lineno, col, body = sec["initial"][0]
    initial = resolve_global(_parse_tuple(body, lineno, col), lineno, col)

    transitions = {}
    for lineno, col, a, rest in _keyed_lines(sec["transitions"], "action"):
        if a not in locations:
            raise ParseError(f"transition for unknown action {a!r}", lineno, col)
        lhs, sep, rhs = rest.partition("->")
        if not sep:
            raise ParseError("expected '(src) -> (dst)'", lineno, col)
        src = _parse_tuple(lhs, lineno, col)
        dst = _parse_tuple(rhs, lineno, col)
        loc = locations[a]
        order = [p for p in procs if p in loc]
        for tup in (src, dst):
            if len(tup) != len(order):
                raise ParseError(f"arity mismatch: {a} involves {len(order)} process(es) {order}, got {tup}",
                                 lineno, col)
            for p, s in zip(order, tup):
                if s not in states[p]:
                    raise ParseError(f"unknown state {s!r} for process {p!r}", lineno, col)
        transitions.setdefault(a, []).append((src, dst, lineno))

    cond_text = " ".join(body for _, _, body in sec["condition"])
    lineno, col, _ = sec["condition"][0] if sec["condition"] else (None, None, None)
    m = re.fullmatch(r"\s*(safety\s+unsafe|reach\s+target)\s*=\s*(\{.*\})\s*", cond_text, re.S)
    if not m:
        raise ParseError("condition must be 'safety unsafe = {...}' or 'reach target = {...}'", lineno, col)
    cstates = [resolve_global(s, lineno, col) for s in _parse_tuple_set(m.group(2), lineno, col)]
    condition = Safety(cstates) if m.group(1).startswith("safety") else Reachability(cstates)

    pairs = {a: [(s, d) for s, d, _ in ts] for a, ts in transitions.items()}
    if "partition" in sec:
        parts = {}
        for ln, c, kind, rest in _keyed_lines(sec["partition"], "partition"):
            if kind not in ("controllable", "uncontrollable"):
                raise ParseError(f"partition lines are 'controllable:' or 'uncontrollable:', got {kind!r}", ln, c)
            if kind in parts:
                raise ParseError(f"duplicate {kind} line", ln, c)
            acts = rest.replace(",", " ").split()
            for a in acts:
                if a not in locations:
                    raise ParseError(f"partition names unknown action {a!r}", ln, c)
            parts[kind] = acts
        ctrl = set(parts.get("controllable", ()))
        unctrl = set(parts.get("uncontrollable", ()))
        if ctrl & unctrl:
            raise ParseError(f"actions {sorted(ctrl & unctrl)} are both controllable and uncontrollable")
        missing = set(locations) - ctrl - unctrl
        if missing:
            raise ParseError(f"actions {sorted(missing)} are missing from the partition")
        for a, ts in transitions.items():
            seen = {}
            for s, d, ln in ts:
                if s in seen and seen[s] != d:
                    raise ParseError(f"non-functional transition: {a} from {s} has two targets", ln, 1)
                seen[s] = d
        return AsynGame(alphabet, ctrl, unctrl, states, pairs, initial, condition)
    system = AsyncTransitionSystem(alphabet, states, pairs)
    return Game(system, initial, condition)


def _tuple(t: Iterable[str]) -> str:
    return "(" + ", ".join(t) + ")"


def format_game(G: Game | AsynGame) -> str:
    A = G.system
    alpha = A.alphabet
    lines = [f"# tuples list local states in process declaration order: {' '.join(alpha.processes)}",
             f"processes: {' '.join(alpha.processes)}",
             "alphabet:"]
    lines += [f"  {a}: {' '.join(alpha.loc(a))}" for a in alpha.actions]
    if isinstance(G, AsynGame):
        lines += ["partition:",
                  f"  controllable: {' '.join(sorted(G.controllable))}".rstrip(),
                  f"  uncontrollable: {' '.join(sorted(G.uncontrollable))}".rstrip()]
    lines.append("states:")
    lines += [f"  {p}: {' '.join(A.local_states[p])}" for p in alpha.processes]
    lines.append(f"initial: {_tuple(G.initial)}")
    lines.append("transitions:")
    for a, pairs in A.transitions.items():
        lines += [f"  {a}: {_tuple(s)} -> {_tuple(d)}" for s, d in pairs]
    cond = G.condition
    body = ", ".join(_tuple(s) for s in sorted(cond.states, key=A.state_key))
    kind = "safety unsafe" if isinstance(cond, Safety) else "reach target"
    lines.append(f"condition: {kind} = {{{body}}}")
    return "\n".join(lines) + "\n"


# -- strategies ---------------------------------------------------------------

def format_strategy(sigma: DistributedStrategy) -> str:
    alpha = sigma.game.alphabet
    lines = ["# distributed strategy: canonical prime trace -> states of its last action's participants",
             f"# processes: {' '.join(alpha.processes)}"]
    for key, resp in sigma.items():
        lines.append(f"{' '.join(key)} -> {_tuple(resp)}")
    return "\n".join(lines) + "\n"


def parse_strategy(text: str, G: Game) -> DistributedStrategy:
    table = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        lhs, sep, rhs = line.partition("->")
        if not sep:
            raise ParseError("expected 'actions -> (states)'", lineno, 1)
        key = tuple(lhs.split())
        if not key:
            raise ParseError("a prime trace has at least one action", lineno, 1)
        for a in key:
            if a not in G.alphabet:
                raise ParseError(f"unknown action {a!r}", lineno, 1)
        resp = _parse_tuple(rhs, lineno, len(lhs) + 3)
        loc = G.alphabet.loc(key[-1])
        if len(resp) != len(loc):
            raise ParseError(f"arity mismatch: {key[-1]} involves {len(loc)} process(es)", lineno, 1)
        if key in table:
            raise ParseError(f"duplicate response for [{' '.join(key)}]", lineno, 1)
        table[key] = resp
    return DistributedStrategy(G, table)


def format_sequential(G: Game, strat: SequentialStrategy, states=None) -> str:
    A = G.system
    lines = ["# sequential strategy: (global state) action -> (next global state)"]
    keys = sorted(strat.choices, key=lambda sa: (A.state_key(sa[0]), sa[1]))
    if states is not None:
        keep = set(states)
        keys = [k for k in keys if k[0] in keep]
    for s, a in keys:
        lines.append(f"{_tuple(s)} {a} -> {_tuple(strat.choices[(s, a)])}")
    return "\n".join(lines) + "\n"


def parse_sequential(text: str) -> SequentialStrategy:
    choices = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = re.fullmatch(r"(\([^()]*\))\s*(\S+)\s*->\s*(\([^()]*\))", line)
        if not m:
            raise ParseError("expected '(state) action -> (state)'", lineno, 1)
        choices[(_parse_tuple(m.group(1), lineno, 1), m.group(2))] = _parse_tuple(m.group(3), lineno, 1)
    return SequentialStrategy(choices)


# -- plays --------------------------------------------------------------------

def format_play(p: Play, title: str = "play") -> str:
    lines = [f"{title}:", f"  start {_tuple(p.run.initial)}"]
    lines += [f"  {a} -> {_tuple(s)}" for a, s in p.transcript()]
    return "\n".join(lines) + "\n"


def parse_play(text: str, G: Game) -> Play:
    steps = []
    started = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line or line.endswith(":") and " " not in line:
            continue
        if line.startswith("start"):
            s = _parse_tuple(line[len("start"):], lineno, 7)
            if s != G.initial:
                raise ParseError(f"play starts at {s}, game starts at {G.initial}", lineno, 1)
            started = True
            continue
        lhs, sep, rhs = line.partition("->")
        if not sep:
            raise ParseError("expected 'action -> (state)'", lineno, 1)
        steps.append((lhs.strip(), _parse_tuple(rhs, lineno, len(lhs) + 3)))
    if not started:
        raise ParseError("play transcript has no 'start' line")
    return play_from_transcript(G, steps)
