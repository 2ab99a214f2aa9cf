"""Compiling asynchronous control games into ATS games.

Each process gets a local choice action.  From a pure local state ``s`` the
choice action moves to an augmented state ``s[X]`` where ``X`` holds every
locally enabled uncontrollable action plus any subset of the locally enabled
controllable ones.  A regular action then fires from augmented states only,
and only if it belongs to the chosen set of every participant.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .ats import AsyncTransitionSystem, GlobalState
from .errors import ExplosionCap, InvalidPlay, InvalidStrategy, MissingResponse, Truncated
from .game import DEFAULT_PLAY_CAP, Game, Play, Reachability, Safety, WinningCondition, every_chain_hits
from .strategy import DistributedStrategy, Outcome, Verdict, strategy_outcomes
from .traces import DistributedAlphabet, Trace, configurations, i_view, trace_from_word, full_configuration


def _subsets(items: Sequence[str]) -> list[frozenset]:
    items = sorted(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


class AsynGame:
    """A game on a deterministic asynchronous automaton with a controllable /
    uncontrollable action partition."""

    def __init__(self, alphabet: DistributedAlphabet, controllable: Iterable[str], uncontrollable: Iterable[str],
                 local_states: Mapping[str, Sequence[str]],
                 transitions: Mapping[str, Iterable[tuple[tuple, tuple]]],
                 initial: GlobalState, condition: WinningCondition):
        self.controllable = frozenset(controllable)
        self.uncontrollable = frozenset(uncontrollable)
        if self.controllable & self.uncontrollable:
            raise ValueError(f"actions {sorted(self.controllable & self.uncontrollable)} are in both parts")
        if self.controllable | self.uncontrollable != set(alphabet.actions):
            missing = set(alphabet.actions) - self.controllable - self.uncontrollable
            extra = (self.controllable | self.uncontrollable) - set(alphabet.actions)
            raise ValueError(f"partition does not cover the alphabet (missing {sorted(missing)}, extra {sorted(extra)})")
        pairs = {a: [(tuple(s), tuple(d)) for s, d in ps] for a, ps in transitions.items()}
        for a, ps in pairs.items():
            srcs = [s for s, _ in ps]
            if len(set(srcs)) != len(set(ps)):
                raise ValueError(f"transitions of {a} are not a partial function")
        self.system = AsyncTransitionSystem(alphabet, local_states, pairs)
        self.initial = tuple(initial)
        if not self.system.is_global_state(self.initial):
            raise ValueError(f"{self.initial} is not a global state")
        self.condition = condition
        self.game = Game(self.system, self.initial, condition)

    @property
    def alphabet(self) -> DistributedAlphabet:
        return self.system.alphabet

    def delta(self, a: str, src: tuple) -> tuple | None:
        succ = self.system.local_successors(a, src)
        return succ[0] if succ else None

    def locally_enabled(self, process: str, s: str, actions: Iterable[str]) -> list[str]:
        """Actions whose domain contains an a-state extending ``process`` at ``s``."""
        out = []
        for a in sorted(actions):
            loc = self.alphabet.loc(a)
            if process not in loc:
                continue
            k = loc.index(process)
            if any(src[k] == s for src in self.system.domain(a)):
                out.append(a)
        return out

    def env_enabled(self, process: str, s: str) -> list[str]:
        return self.locally_enabled(process, s, self.uncontrollable)

    def sys_enabled(self, process: str, s: str) -> list[str]:
        return self.locally_enabled(process, s, self.controllable)

    def run_state(self, word: Iterable[str], start: GlobalState | None = None) -> GlobalState | None:
        """State reached by the deterministic automaton, or None if it blocks."""
        s = self.initial if start is None else start
        A = self.system
        for a in word:
            d = self.delta(a, A.restrict(s, a))
            if d is None:
                return None
            s = A.embed(s, a, d)
        return s

    def __repr__(self):
        return (f"AsynGame(controllable={sorted(self.controllable)}, "
                f"uncontrollable={sorted(self.uncontrollable)})")


class AsynStrategy:
    """Per-process maps from canonical views to allowed controllable actions."""

    def __init__(self, tables: Mapping[str, Mapping[tuple, Iterable[str]]] | None = None):
        self.tables = {p: {tuple(k): frozenset(v) for k, v in t.items()} for p, t in (tables or {}).items()}

    def allowed(self, process: str, view: tuple) -> frozenset:
        try:
            return self.tables[process][tuple(view)]
        except KeyError:
            raise MissingResponse(view) from None

    def has(self, process: str, view: tuple) -> bool:
        return tuple(view) in self.tables.get(process, {})

    def set(self, process: str, view: tuple, actions: Iterable[str]):
        self.tables.setdefault(process, {})[tuple(view)] = frozenset(actions)

    def restricted_to(self, other: "AsynStrategy") -> "AsynStrategy":
        """This strategy on the views where ``other`` is defined."""
        out = AsynStrategy()
        for p, t in other.tables.items():
            for k in t:
                if self.has(p, k):
                    out.set(p, k, self.allowed(p, k))
        return out

    def __eq__(self, other):
        if not isinstance(other, AsynStrategy):
            return NotImplemented
        mine = {p: t for p, t in self.tables.items() if t}
        theirs = {p: t for p, t in other.tables.items() if t}
        return mine == theirs

    def __repr__(self):
        return f"AsynStrategy({sum(len(t) for t in self.tables.values())} entries)"


def augmented_name(s: str, allowed: Iterable[str]) -> str:
    return f"{s}[{'+'.join(sorted(allowed))}]"


class Reduction:
    """The ATS game built from an asynchronous game, with the bookkeeping
    needed to translate plays and strategies in both directions."""

    def __init__(self, source: AsynGame, game: Game, choice: dict[str, str],
                 augmented: dict[tuple[str, str], tuple[str, frozenset]]):
        self.source = source
        self.game = game
        self.choice = choice
        self.choice_process = {c: p for p, c in choice.items()}
        self.augmented = augmented

    def is_choice(self, action: str) -> bool:
        return action in self.choice_process

    def pure(self, process: str, q: str) -> str:
        aug = self.augmented.get((process, q))
        return q if aug is None else aug[0]

    def project_state(self, s: GlobalState) -> GlobalState:
        return tuple(self.pure(p, q) for p, q in zip(self.source.alphabet.processes, s))

    def chosen_set(self, process: str, q: str) -> frozenset | None:
        aug = self.augmented.get((process, q))
        return None if aug is None else aug[1]


def _fresh_choice_names(alphabet: DistributedAlphabet) -> dict[str, str]:
    taken = set(alphabet.actions)
    out = {}
    for p in alphabet.processes:
        name = f"c_{p}"
        while name in taken:
            name += "_"
        taken.add(name)
        out[p] = name
    return out


def build_ats_game(Ga: AsynGame, prune: bool = True) -> Reduction:
    alpha = Ga.alphabet
    procs = alpha.processes
    choice = _fresh_choice_names(alpha)
    local_actions = {p: set(alpha.local_actions[p]) | {choice[p]} for p in procs}
    alpha2 = DistributedAlphabet(local_actions, procs)

    offers = {}  # (process, pure state) -> admissible chosen sets
    for p in procs:
        for s in Ga.system.local_states[p]:
            env = frozenset(Ga.env_enabled(p, s))
            offers[(p, s)] = [env | y for y in _subsets(Ga.sys_enabled(p, s))]

    augmented = {}
    states = {}
    for p in procs:
        qs = []
        local_sigma = sorted(alpha.local_actions[p])
        for s in Ga.system.local_states[p]:
            qs.append(s)
            for x in _subsets(local_sigma):
                name = augmented_name(s, x)
                augmented[(p, name)] = (s, x)
                qs.append(name)
        names = set(qs)
        if len(names) != len(qs):
            raise ValueError(f"augmented state names clash with local states of {p!r}")
        states[p] = qs

    trans: dict[str, list] = {}
    for p in procs:
        trans[choice[p]] = [((s,), (augmented_name(s, x),))
                            for s in Ga.system.local_states[p] for x in offers[(p, s)]]
    for a in alpha.actions:
        pairs = []
        loc = alpha.loc(a)
        for src in Ga.system.domain(a):
            dst = Ga.delta(a, src)
            options = [[augmented_name(s, x) for x in offers[(p, s)] if a in x] for p, s in zip(loc, src)]
            for combo in itertools.product(*options):
                pairs.append((tuple(combo), dst))
        trans[a] = pairs

    system = AsyncTransitionSystem(alpha2, states, trans)
    initial = Ga.initial
    reachable = system.reachable(initial)
    if prune:
        keep = {p: set() for p in procs}
        for s in reachable:
            for p, q in zip(procs, s):
                keep[p].add(q)
        states = {p: [q for q in states[p] if q in keep[p]] for p in procs}
        trans = {a: [(src, dst) for src, dst in ps
                     if all(q in keep[p] for p, q in zip(alpha2.loc(a) * 2, src + dst))]
                 for a, ps in trans.items()}
        augmented = {k: v for k, v in augmented.items() if k[1] in keep[k[0]]}
        system = AsyncTransitionSystem(alpha2, states, trans)

    red = Reduction(Ga, None, choice, augmented)
    cond = Ga.condition
    if isinstance(cond, Safety):
        cond2 = Safety(s for s in reachable if red.project_state(s) in cond.unsafe)
    else:
        cond2 = Reachability(s for s in reachable if red.project_state(s) in cond.target)
    red.game = Game(system, initial, cond2)
    return red


def lift_play(red: Reduction, w: Trace | Iterable[str]) -> Trace:
    Ga = red.source
    word = w.canonical_form() if isinstance(w, Trace) else tuple(w)
    if Ga.run_state(word) is None:
        raise InvalidPlay(f"[{' '.join(word)}] has no run in the asynchronous game")
    out = []
    for a in word:
        out.extend(red.choice[p] for p in Ga.alphabet.loc(a))
        out.append(a)
    return trace_from_word(out, red.game.alphabet)


def project_play(red: Reduction, p: Play | Trace) -> Trace:
    t = p.trace if isinstance(p, Play) else p
    word = [a for a in t.canonical_form() if not red.is_choice(a)]
    return trace_from_word(word, red.source.alphabet)


def _view_key(Ga: AsynGame, word: Sequence[str]) -> tuple:
    return trace_from_word(word, Ga.alphabet).canonical_form()


class LiftedStrategy(DistributedStrategy):
    """Strategy on the ATS game derived from an asynchronous strategy.

    Responses are computed on demand and cached in ``responses``.
    """

    def __init__(self, red: Reduction, sigma: AsynStrategy):
        super().__init__(red.game, {})
        self.red = red
        self.sigma = sigma

    def response(self, key) -> tuple:
        key = tuple(key)
        if key in self.responses:
            return self.responses[key]
        red = self.red
        Ga = red.source
        last = key[-1]
        past = [a for a in key[:-1] if not red.is_choice(a)]
        state = Ga.run_state(past)
        if state is None:
            raise InvalidPlay(f"[{' '.join(past)}] has no run in the asynchronous game")
        if red.is_choice(last):
            p = red.choice_process[last]
            s = state[Ga.alphabet.index(p)]
            allowed = self.sigma.allowed(p, _view_key(Ga, past))
            if not allowed <= set(Ga.sys_enabled(p, s)):
                raise InvalidStrategy(f"{p} allows {sorted(allowed)} at {s}, beyond its enabled controllable actions")
            resp = (augmented_name(s, set(Ga.env_enabled(p, s)) | allowed),)
        else:
            resp = Ga.delta(last, Ga.system.restrict(state, last))
            if resp is None:
                raise InvalidPlay(f"{last} is not enabled after [{' '.join(past)}]")
        self.responses[key] = resp
        return resp


def lift_strategy(red: Reduction, sigma: AsynStrategy, horizon: int | None = None) -> LiftedStrategy:
    """Translate an asynchronous strategy; with ``horizon`` the response table
    is filled for every conforming play within that many events."""
    lifted = LiftedStrategy(red, sigma)
    if horizon is not None:
        strategy_outcomes(red.game, lifted, horizon)
    return lifted


def project_strategy(red: Reduction, sigma: DistributedStrategy) -> AsynStrategy:
    out = AsynStrategy()
    Ga = red.source
    for key, resp in sigma.items():
        last = key[-1]
        if not red.is_choice(last):
            continue
        p = red.choice_process[last]
        chosen = red.chosen_set(p, resp[0])
        if chosen is None:
            raise InvalidStrategy(f"response {resp} at a choice event is not an augmented state")
        past = [a for a in key[:-1] if not red.is_choice(a)]
        out.set(p, _view_key(Ga, past), chosen & Ga.controllable)
    return out


def lifted_horizon(Ga: AsynGame, horizon: int) -> int:
    """Events needed in the ATS game to cover asynchronous plays of ``horizon`` events."""
    k = len(Ga.alphabet.processes)
    widest = max((len(Ga.alphabet.loc(a)) for a in Ga.alphabet.actions), default=0)
    return horizon * (1 + widest) + k


# -- brute-force oracle on the asynchronous game itself ------------------------

class _AsynPlay:
    __slots__ = ("word", "trace", "state")

    def __init__(self, word, trace, state):
        self.word = word
        self.trace = trace
        self.state = state


def _visited(Ga: AsynGame, t: Trace) -> set:
    out = set()
    for c in configurations(t):
        out.add(Ga.run_state(t.canonical_form(c.mask)))
    return out


def _reaches(Ga: AsynGame, t: Trace) -> bool:
    target = Ga.condition.target
    return every_chain_hits(t, lambda m: Ga.run_state(t.canonical_form(m)) in target)


class _AsynSearch:
    def __init__(self, Ga: AsynGame, horizon: int, cap: int, fixed: AsynStrategy | None):
        self.Ga = Ga
        self.horizon = horizon
        self.cap = cap
        self.fixed = fixed
        self.safety = isinstance(Ga.condition, Safety)
        self.nodes = 0
        self.leaves = 0
        self.refutations = []
        self.winner = None

    def view(self, play, p):
        return i_view(full_configuration(play.trace), p).canonical_form()

    def consistent_children(self, play, table):
        """Consistent one-action extensions; None if a decision is missing."""
        Ga = self.Ga
        A = Ga.system
        out = []
        for a in Ga.alphabet.actions:
            d = Ga.delta(a, A.restrict(play.state, a))
            if d is None:
                continue
            if a in Ga.controllable:
                ok = True
                for p in Ga.alphabet.loc(a):
                    k = (p, self.view(play, p))
                    if k not in table:
                        return None, k
                    if a not in table[k]:
                        ok = False
                if not ok:
                    continue
            word = play.word + (a,)
            t = trace_from_word(word, Ga.alphabet)
            out.append(_AsynPlay(t.canonical_form(), t, A.embed(play.state, a, d)))
        return out, None

    def b_enabled(self, play):
        A = self.Ga.system
        return any(self.Ga.delta(a, A.restrict(play.state, a)) is not None for a in self.Ga.alphabet.actions)

    def run(self, queue, table, seen, truncated):
        pos = 0
        Ga = self.Ga
        while pos < len(queue):
            play = queue[pos]
            if self.safety and _visited(Ga, play.trace) & Ga.condition.unsafe:
                self.leaves += 1
                self.refutations.append((dict(table), play))
                return Outcome.ENVIRONMENT_WINS
            if not self.safety and Ga.initial in Ga.condition.target:
                pos += 1
                continue
            if len(play.word) >= self.horizon:
                if self.b_enabled(play):
                    truncated = True
                    pos += 1
                    continue
            children, missing = self.consistent_children(play, table)
            if missing is not None:
                if self.fixed is not None:
                    p, view = missing
                    table[missing] = self.fixed.allowed(p, view)
                    continue
                p, view = missing
                s = play.state[Ga.alphabet.index(p)]
                results = []
                for allowed in _subsets(Ga.sys_enabled(p, s)):
                    t2 = dict(table)
                    t2[missing] = allowed
                    r = self.run(list(queue[pos:]), t2, set(seen), truncated)
                    if r is Outcome.SYSTEM_WINS:
                        return r
                    results.append(r)
                if all(r is Outcome.ENVIRONMENT_WINS for r in results):
                    return Outcome.ENVIRONMENT_WINS
                return Outcome.UNKNOWN
            pos += 1
            if not children:
                if not self.safety and not _reaches(Ga, play.trace):
                    self.leaves += 1
                    self.refutations.append((dict(table), play))
                    return Outcome.ENVIRONMENT_WINS
                continue
            if len(play.word) >= self.horizon:
                truncated = True
                continue
            for c in children:
                if c.word not in seen:
                    seen.add(c.word)
                    self.nodes += 1
                    if self.nodes > self.cap:
                        raise ExplosionCap("asynchronous strategy search", self.cap)
                    queue.append(c)
        self.leaves += 1
        if truncated:
            return Outcome.UNKNOWN
        if self.winner is None:
            self.winner = dict(table)
        return Outcome.SYSTEM_WINS


def _table_to_strategy(table) -> AsynStrategy:
    out = AsynStrategy()
    for (p, view), allowed in sorted(table.items()):
        out.set(p, view, allowed)
    return out


def _complete_table(Ga: AsynGame, table: dict, horizon: int) -> dict:
    """Give every view met by a consistent play a decision.

    The search only records decisions it had to make; views that were never
    consulted get the empty set, which changes no consistent play.
    """
    table = dict(table)
    search = _AsynSearch(Ga, horizon, DEFAULT_PLAY_CAP, None)
    level = [_AsynPlay((), trace_from_word((), Ga.alphabet), Ga.initial)]
    seen = {()}
    for depth in range(horizon + 1):
        nxt = []
        for play in level:
            for p in Ga.alphabet.processes:
                table.setdefault((p, search.view(play, p)), frozenset())
            if depth == horizon:
                continue
            children, _ = search.consistent_children(play, table)
            for c in children:
                if c.word not in seen:
                    seen.add(c.word)
                    nxt.append(c)
        level = nxt
    return table


def _asyn_verdict(Ga, horizon, cap, fixed):
    import sys
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)
    search = _AsynSearch(Ga, horizon, cap, fixed)
    t0 = trace_from_word((), Ga.alphabet)
    outcome = search.run([_AsynPlay((), t0, Ga.initial)], {}, {()}, False)
    stats = {"tables_examined": search.leaves, "plays_visited": search.nodes + 1}
    if outcome is Outcome.SYSTEM_WINS:
        witness = _table_to_strategy(_complete_table(Ga, search.winner, horizon))
        return Verdict(outcome, witness=witness, stats=stats)
    if outcome is Outcome.ENVIRONMENT_WINS:
        return Verdict(outcome, counterexample=search.refutations[0][1].trace, refutations=search.refutations,
                       reason="every strategy has a losing consistent play", stats=stats)
    return Verdict(outcome, reason="horizon exhausted", stats=stats)


def solve_asyn_bruteforce(Ga: AsynGame, horizon: int, cap: int = DEFAULT_PLAY_CAP) -> Verdict:
    """Search over per-process strategy tables directly on the asynchronous game."""
    return _asyn_verdict(Ga, horizon, cap, None)


def asyn_is_winning(Ga: AsynGame, sigma: AsynStrategy, horizon: int, cap: int = DEFAULT_PLAY_CAP) -> Verdict:
    v = _asyn_verdict(Ga, horizon, cap, sigma)
    if v.outcome is Outcome.SYSTEM_WINS:
        v.witness = sigma
    return v


def asyn_maximal_plays(Ga: AsynGame, sigma: AsynStrategy, horizon: int) -> list[Trace]:
    """Maximal plays consistent with ``sigma`` (all of them must end within ``horizon``)."""
    search = _AsynSearch(Ga, horizon, DEFAULT_PLAY_CAP, sigma)
    t0 = trace_from_word((), Ga.alphabet)
    level = [_AsynPlay((), t0, Ga.initial)]
    seen = {()}
    out = []
    table = {}
    while level:
        nxt = []
        for play in level:
            while True:
                children, missing = search.consistent_children(play, table)
                if missing is None:
                    break
                table[missing] = sigma.allowed(*missing)
            if not children:
                out.append(play.trace)
                continue
            if len(play.word) >= horizon:
                raise Truncated(f"consistent plays continue past {horizon} events")
            for c in children:
                if c.word not in seen:
                    seen.add(c.word)
                    nxt.append(c)
        level = nxt
    return sorted(out, key=lambda t: t.canonical_form())
