"""Solvers: bounded search for distributed strategies, and the sequential
full-information fixed points."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Iterator

from .ats import GlobalState
from .errors import ExplosionCap, Truncated
from .game import DEFAULT_PLAY_CAP, Game, Play, Safety, extend, reaches_target, violates_safety
from .strategy import DistributedStrategy, Outcome, Verdict, prime_key
from .traces import append_event

_PLAY, _MOVE = 0, 1
_LOST, _WON, _OPEN, _CUT = range(4)


class _Search:
    """AND-OR backtracking over response tables shared by all branches.

    Environment moves are AND-nodes; the first time a prime trace is met, the
    response is an OR-choice over ``delta_a`` successors in canonical order.
    With ``backjump`` the search returns the set of table keys a refutation
    depends on and skips sibling choices that cannot matter.
    """

    def __init__(self, G: Game, horizon: int, cap: int, backjump: bool, stop_on_loss: bool = True,
                 keep_refutations: bool = True):
        self.G = G
        self.A = G.system
        self.horizon = horizon
        self.cap = cap
        self.backjump = backjump
        self.stop_on_loss = stop_on_loss
        self.keep_refutations = keep_refutations
        self.safety = isinstance(G.condition, Safety)
        self.nodes = 0
        self.leaves = 0
        self.refutations = []
        self.winning_table = None
        self.tables = []

    def classify(self, p: Play):
        G = self.G
        if self.safety:
            if violates_safety(G, p):
                return _LOST
        elif G.initial in G.condition.target:
            return _WON
        if not self.A.enabled(p.final):
            return _WON if self.safety or reaches_target(G, p) else _LOST
        if len(p) >= self.horizon:
            return _CUT
        return _OPEN

    def _count(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise ExplosionCap("strategy search", self.cap,
                               {"tables_examined": self.leaves, "plays_visited": self.nodes})

    def deps(self, p: Play) -> frozenset:
        t = p.trace
        return frozenset(prime_key(t, e) for e in range(len(t)))

    def run(self, queue: list, table: dict, seen: set, truncated: bool):
        """Returns (outcome, conflict keys or None)."""
        pos = 0
        while pos < len(queue):
            item = queue[pos]
            pos += 1
            if item[0] == _PLAY:
                p = item[1]
                if not self.stop_on_loss:
                    # enumeration unfolds every conforming play to its end
                    if not self.A.enabled(p.final):
                        continue
                    if len(p) >= self.horizon:
                        truncated = True
                        continue
                    queue[pos:pos] = [(_MOVE, p, a) for a in self.A.enabled(p.final)]
                    continue
                status = self.classify(p)
                if status == _LOST:
                    self.leaves += 1
                    if self.keep_refutations:
                        self.refutations.append((dict(table), p))
                    return Outcome.ENVIRONMENT_WINS, self.deps(p)
                if status == _WON:
                    continue
                if status == _CUT:
                    truncated = True
                    continue
                queue[pos:pos] = [(_MOVE, p, a) for a in self.A.enabled(p.final)]
                continue
            _, p, a = item
            grown = append_event(p.trace, a)
            t2, e = grown
            key = prime_key(t2, e.id)
            if key in table:
                self._push(queue, seen, extend(self.G, p, a, table[key], grown))
                continue
            choices = self.A.local_successors(a, self.A.restrict(p.final, a))
            rest = queue[pos:]
            results = []
            conflict = set()
            for dst in choices:
                table2 = dict(table)
                table2[key] = dst
                queue2 = list(rest)
                seen2 = set(seen)
                self._push(queue2, seen2, extend(self.G, p, a, dst, grown))
                outcome, conf = self.run(queue2, table2, seen2, truncated)
                if outcome is Outcome.SYSTEM_WINS and self.stop_on_loss:
                    return outcome, None
                results.append(outcome)
                if self.backjump and outcome is Outcome.ENVIRONMENT_WINS:
                    if key not in conf:
                        # the refutation never looked at this choice: siblings fail alike
                        if Outcome.UNKNOWN in results:
                            return Outcome.UNKNOWN, None
                        return outcome, conf
                    conflict |= conf - {key}
            if all(r is Outcome.ENVIRONMENT_WINS for r in results):
                if self.backjump:
                    # the choices offered here depend on the past of this event
                    conflict |= self.deps_of_past(t2, e.id)
                return Outcome.ENVIRONMENT_WINS, frozenset(conflict)
            if Outcome.SYSTEM_WINS in results:
                return Outcome.SYSTEM_WINS, None
            return Outcome.UNKNOWN, None
        self.leaves += 1
        if not self.stop_on_loss:
            self.tables.append((dict(table), truncated))
        if truncated:
            return Outcome.UNKNOWN, None
        if self.winning_table is None:
            self.winning_table = dict(table)
        return Outcome.SYSTEM_WINS, None

    def deps_of_past(self, t, e):
        below = t.down[e] & ~(1 << e)
        return {prime_key(t, i) for i in range(len(t)) if below >> i & 1}

    def _push(self, queue, seen, child):
        k = child.trace.canonical_form()
        if k not in seen:
            seen.add(k)
            self._count()
            queue.append((_PLAY, child))


def _recursion_guard():
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)


def solve_distributed(G: Game, horizon: int, cap: int = DEFAULT_PLAY_CAP, backjump: bool = False) -> Verdict:
    """Horizon-bounded search for a distributed winning strategy.

    SystemWins carries a complete response table; EnvironmentWins carries one
    losing conforming play per refuted table; Unknown means some table could
    not be refuted within the horizon.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    _recursion_guard()
    search = _Search(G, horizon, cap, backjump)
    root = Play.empty(G)
    outcome, _ = search.run([(_PLAY, root)], {}, {()}, False)
    stats = {"tables_examined": search.leaves, "plays_visited": search.nodes + 1}
    if outcome is Outcome.SYSTEM_WINS:
        return Verdict(outcome, witness=DistributedStrategy(G, search.winning_table), stats=stats)
    if outcome is Outcome.ENVIRONMENT_WINS:
        first = search.refutations[0][1] if search.refutations else None
        return Verdict(outcome, counterexample=first, refutations=search.refutations,
                       reason="every response table has a losing conforming play", stats=stats)
    return Verdict(outcome, refutations=search.refutations, reason="horizon exhausted", stats=stats)


def enumerate_distributed_strategies(G: Game, horizon: int, cap: int = DEFAULT_PLAY_CAP) -> Iterator[DistributedStrategy]:
    """Every complete response table, each closed under its own play unfolding."""
    _recursion_guard()
    search = _Search(G, horizon, cap, backjump=False, stop_on_loss=False, keep_refutations=False)
    search.run([(_PLAY, Play.empty(G))], {}, {()}, False)
    for table, truncated in search.tables:
        if truncated:
            raise Truncated(f"some conforming play does not end within {horizon} events")
    for table, _ in search.tables:
        yield DistributedStrategy(G, table)


@dataclass
class SequentialStrategy:
    """Positional full-information strategy: (global state, action) -> next state."""

    choices: dict

    def choose(self, s: GlobalState, a: str) -> GlobalState:
        return self.choices[(tuple(s), a)]

    def reachable(self, G: Game) -> list[GlobalState]:
        """States met by plays following the strategy, for every schedule."""
        seen = {G.initial}
        order = [G.initial]
        k = 0
        while k < len(order):
            s = order[k]
            k += 1
            for a in G.system.enabled(s):
                s2 = self.choices[(s, a)]
                if s2 not in seen:
                    seen.add(s2)
                    order.append(s2)
        return order


SEQUENTIAL_STATE_LIMIT = 10**5


def _universe(G: Game):
    A = G.system
    size = 1
    for p in A.alphabet.processes:
        size *= len(A.local_states[p])
    states = list(A.global_states()) if size <= SEQUENTIAL_STATE_LIMIT else A.reachable(G.initial)
    return sorted(states, key=A.state_key)


def solve_sequential(G: Game) -> Verdict:
    """Winning region of the full-information game by a fixed point."""
    A = G.system
    states = _universe(G)
    succ = {s: {a: A.global_successors(s, a) for a in A.enabled(s)} for s in states}
    # every state gets a default move so the strategy is total
    choices = {(s, a): ss[0] for s in states for a, ss in succ[s].items()}
    if isinstance(G.condition, Safety):
        win = {s for s in states if G.condition.is_safe(s)}
        changed = True
        while changed:
            changed = False
            for s in states:
                if s in win and not all(any(s2 in win for s2 in ss) for ss in succ[s].values()):
                    win.discard(s)
                    changed = True
        for s in win:
            for a, ss in succ[s].items():
                choices[(s, a)] = next(s2 for s2 in ss if s2 in win)
    else:
        rank = {s: 0 for s in states if s in G.condition.target}
        level = 0
        while True:
            level += 1
            new = [s for s in states if s not in rank and succ[s]
                   and all(any(s2 in rank for s2 in ss) for ss in succ[s].values())]
            if not new:
                break
            for s in new:
                rank[s] = level
        win = set(rank)
        for s in win:
            if rank[s] > 0:
                for a, ss in succ[s].items():
                    choices[(s, a)] = min((s2 for s2 in ss if s2 in rank),
                                          key=lambda x: (rank[x], A.state_key(x)))
    region = [s for s in states if s in win]
    strat = SequentialStrategy(choices)
    if G.initial in win:
        return Verdict(Outcome.SYSTEM_WINS, witness=strat, winning_region=region)
    return Verdict(Outcome.ENVIRONMENT_WINS, winning_region=region,
                   reason="initial state outside the winning region")
