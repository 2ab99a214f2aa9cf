"""Non-deterministic asynchronous transition systems and their trace runs."""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .errors import ExplosionCap, InitialStateMismatch, UnknownAction
from .traces import Configuration, DistributedAlphabet, Trace, configurations

GlobalState = tuple  # one local state name per process, in process order
DEFAULT_RUN_CAP = 10**6


class AsyncTransitionSystem:
    """Local state sets plus one relation ``delta_a`` over a-states per action.

    An a-state is a tuple of local states for ``alphabet.loc(a)`` in process
    declaration order.  ``transitions`` maps each action to an iterable of
    ``(src, dst)`` a-state pairs; actions without an entry get an empty
    relation.
    """

    def __init__(self, alphabet: DistributedAlphabet, local_states: Mapping[str, Sequence[str]],
                 transitions: Mapping[str, Iterable[tuple[tuple, tuple]]]):
        self.alphabet = alphabet
        self.local_states = {p: tuple(local_states[p]) for p in alphabet.processes}
        for p, states in self.local_states.items():
            if not states:
                raise ValueError(f"process {p!r} has no local states")
            if len(set(states)) != len(states):
                raise ValueError(f"process {p!r} has duplicate local state names")
        self._order = {p: {s: k for k, s in enumerate(self.local_states[p])} for p in alphabet.processes}
        for a in transitions:
            if a not in alphabet:
                raise UnknownAction(a)
        self._succ: dict[str, dict[tuple, tuple]] = {}
        for a in alphabet.actions:
            loc = alphabet.loc(a)
            table: dict[tuple, set] = {}
            for src, dst in transitions.get(a, ()):
                src, dst = tuple(src), tuple(dst)
                for st in (src, dst):
                    if len(st) != len(loc):
                        raise ValueError(f"{a}-state {st} does not match loc({a}) = {loc}")
                    for p, s in zip(loc, st):
                        if s not in self._order[p]:
                            raise ValueError(f"{s!r} is not a local state of process {p!r}")
                table.setdefault(src, set()).add(dst)
            self._succ[a] = {src: tuple(sorted(dsts, key=lambda d, a=a: self.astate_key(a, d)))
                             for src, dsts in table.items()}

    # -- orderings -------------------------------------------------------

    def local_key(self, process: str, s: str) -> int:
        return self._order[process][s]

    def astate_key(self, a: str, st: tuple) -> tuple:
        return tuple(self._order[p][s] for p, s in zip(self.alphabet.loc(a), st))

    def state_key(self, s: GlobalState) -> tuple:
        return tuple(self._order[p][x] for p, x in zip(self.alphabet.processes, s))

    # -- relations -------------------------------------------------------

    @property
    def transitions(self) -> dict[str, list[tuple[tuple, tuple]]]:
        out = {}
        for a in self.alphabet.actions:
            pairs = [(src, dst) for src, dsts in self._succ[a].items() for dst in dsts]
            out[a] = sorted(pairs, key=lambda sd, a=a: (self.astate_key(a, sd[0]), self.astate_key(a, sd[1])))
        return out

    def local_successors(self, a: str, src: tuple) -> tuple:
        """``delta_a(src)`` in canonical order."""
        if a not in self._succ:
            raise UnknownAction(a)
        return self._succ[a].get(tuple(src), ())

    def domain(self, a: str) -> list[tuple]:
        return sorted(self._succ[a], key=lambda st: self.astate_key(a, st))

    def restrict(self, s: GlobalState, a: str) -> tuple:
        return tuple(s[i] for i in self.alphabet.loc_indices(a))

    def embed(self, s: GlobalState, a: str, ast: tuple) -> GlobalState:
        out = list(s)
        for i, x in zip(self.alphabet.loc_indices(a), ast):
            out[i] = x
        return tuple(out)

    def global_successors(self, s: GlobalState, a: str) -> list[GlobalState]:
        return [self.embed(s, a, d) for d in self.local_successors(a, self.restrict(s, a))]

    def enabled(self, s: GlobalState) -> list[str]:
        return [a for a in self.alphabet.actions if self.restrict(s, a) in self._succ[a]]

    def is_complete(self) -> bool:
        # enabledness of a depends only on s_a, so iterate over S_a per action
        for a in self.alphabet.actions:
            spaces = [self.local_states[p] for p in self.alphabet.loc(a)]
            for st in itertools.product(*spaces):
                if st not in self._succ[a]:
                    return False
        return True

    def global_states(self):
        return itertools.product(*(self.local_states[p] for p in self.alphabet.processes))

    def is_global_state(self, s) -> bool:
        return (isinstance(s, tuple) and len(s) == len(self.alphabet.processes)
                and all(x in self._order[p] for p, x in zip(self.alphabet.processes, s)))

    def reachable(self, initial: GlobalState) -> list[GlobalState]:
        seen = {initial}
        order = [initial]
        k = 0
        while k < len(order):
            s = order[k]
            k += 1
            for a in self.enabled(s):
                for s2 in self.global_successors(s, a):
                    if s2 not in seen:
                        seen.add(s2)
                        order.append(s2)
        return order

    def __repr__(self):
        n = sum(len(v) for v in self._succ.values())
        return f"AsyncTransitionSystem({self.alphabet!r}, {n} local-relation sources)"


class TraceRun:
    """A run of an ATS over a trace.

    The run is stored by the a-state chosen at each event (``choices[e]``);
    the state of any configuration ``c`` is then fixed: process ``i`` sits in
    the component chosen at ``max_i(c)``, or in its initial state.
    """

    __slots__ = ("trace", "initial", "choices", "_final")

    def __init__(self, trace: Trace, initial: GlobalState, choices: Sequence[tuple]):
        self.trace = trace
        self.initial = tuple(initial)
        self.choices = tuple(tuple(c) for c in choices)
        self._final = None

    def state_at(self, c: Configuration | int) -> GlobalState:
        mask = c.mask if isinstance(c, Configuration) else c
        t = self.trace
        alpha = t.alphabet
        out = list(self.initial)
        filled = 0
        k = len(alpha.processes)
        # walk events from the top; the first event seen for process i is max_i
        for e in range(mask.bit_length() - 1, -1, -1):
            if not mask >> e & 1:
                continue
            for idx, comp in zip(alpha.loc_indices(t.labels[e]), self.choices[e]):
                if not filled >> idx & 1:
                    out[idx] = comp
                    filled |= 1 << idx
            if filled == (1 << k) - 1:
                break
        return tuple(out)

    @property
    def final(self) -> GlobalState:
        if self._final is None:
            self._final = self.state_at(self.trace.full_mask)
        return self._final

    def labeling(self) -> dict[Configuration, GlobalState]:
        return {c: self.state_at(c) for c in configurations(self.trace)}

    def key(self) -> tuple:
        """Identity of the run up to renumbering of events."""
        return tuple((self.trace.labels[e], self.choices[e]) for e in self.trace.canonical_order())

    def __eq__(self, other):
        if not isinstance(other, TraceRun):
            return NotImplemented
        return self.initial == other.initial and self.trace.alphabet == other.trace.alphabet and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"TraceRun({' '.join(f'{a}->{c}' for a, c in self.key()) or '<empty>'})"


def is_trace_run(A: AsyncTransitionSystem, run: TraceRun) -> bool:
    """Check the run conditions over every configuration of the trace."""
    t = run.trace
    if not A.is_global_state(run.initial):
        return False
    rho = run.labeling()
    for c, s in rho.items():
        for i in range(len(t)):
            if c.mask >> i & 1:
                continue
            if (t.down[i] & ~(1 << i)) & ~c.mask:
                continue
            a = t.labels[i]
            s2 = rho[Configuration._raw(t, c.mask | 1 << i)]
            if s2 not in A.global_successors(s, a):
                return False
    return True


def trace_runs(A: AsyncTransitionSystem, t: Trace, s0: GlobalState, cap: int = DEFAULT_RUN_CAP) -> list[TraceRun]:
    """All runs of ``A`` over ``t`` from ``s0``, choosing event by event in canonical order."""
    s0 = tuple(s0)
    if not A.is_global_state(s0):
        raise InitialStateMismatch(f"{s0} is not a global state of the system")
    order = t.canonical_order()
    runs: list[TraceRun] = []
    choices: list = [None] * len(t)

    def rec(k, state):
        if k == len(order):
            if len(runs) >= cap:
                raise ExplosionCap("trace runs", cap)
            runs.append(TraceRun(t, s0, choices))
            return
        e = order[k]
        a = t.labels[e]
        for dst in A.local_successors(a, A.restrict(state, a)):
            choices[e] = dst
            rec(k + 1, A.embed(state, a, dst))
        choices[e] = None

    rec(0, s0)
    return runs
