"""Random instances for property tests and the acceptance suite.

All generators take a ``random.Random`` so runs are reproducible.
"""

from __future__ import annotations

import itertools
import random

from .ats import AsyncTransitionSystem
from .game import Game, Play, Reachability, Safety
from .reduction import AsynGame, AsynStrategy, _subsets
from .errors import MissingResponse
from .strategy import DistributedStrategy, prime_key, sigma_eval
from .traces import DistributedAlphabet, append_event, trace_from_word


def random_alphabet(rng: random.Random, max_processes: int = 4, max_actions: int = 6,
                    max_width: int | None = None, min_processes: int = 1) -> DistributedAlphabet:
    k = rng.randint(min(min_processes, max_processes), max_processes)
    procs = [f"p{i}" for i in range(k)]
    n = rng.randint(1, max_actions)
    width = k if max_width is None else min(k, max_width)
    locations = {}
    for j in range(n):
        size = rng.randint(1, width)
        locations[chr(ord("a") + j)] = rng.sample(procs, size)
    return DistributedAlphabet.from_locations(locations, procs)


def random_word(rng: random.Random, alphabet: DistributedAlphabet, max_len: int = 8) -> list[str]:
    return [rng.choice(alphabet.actions) for _ in range(rng.randint(0, max_len))]


def _monotone_targets(src_idx, sizes):
    """Index tuples that never decrease and increase somewhere."""
    ranges = [range(i, n) for i, n in zip(src_idx, sizes)]
    return [d for d in itertools.product(*ranges) if d != tuple(src_idx)]


def random_system(rng: random.Random, alphabet: DistributedAlphabet, max_states: int = 3,
                  density: float = 0.6, max_choices: int = 2, acyclic: bool = False,
                  deterministic: bool = False) -> AsyncTransitionSystem:
    states = {p: [f"{p}s{i}" for i in range(rng.randint(1, max_states))] for p in alphabet.processes}
    trans = {}
    for a in alphabet.actions:
        loc = alphabet.loc(a)
        sizes = [len(states[p]) for p in loc]
        pairs = []
        for src_idx in itertools.product(*(range(n) for n in sizes)):
            if rng.random() > density:
                continue
            if acyclic:
                pool = _monotone_targets(src_idx, sizes)
            else:
                pool = list(itertools.product(*(range(n) for n in sizes)))
            if not pool:
                continue
            count = 1 if deterministic else rng.randint(1, max_choices)
            for dst_idx in rng.sample(pool, min(count, len(pool))):
                src = tuple(states[p][i] for p, i in zip(loc, src_idx))
                dst = tuple(states[p][i] for p, i in zip(loc, dst_idx))
                pairs.append((src, dst))
        trans[a] = pairs
    return AsyncTransitionSystem(alphabet, states, trans)


def random_condition(rng: random.Random, system: AsyncTransitionSystem, initial, reach: bool = False,
                     ratio: float = 0.25):
    others = [s for s in system.global_states() if s != initial]
    chosen = [s for s in others if rng.random() < ratio]
    return Reachability(chosen) if reach else Safety(chosen)


def random_game(rng: random.Random, max_processes: int = 3, max_actions: int = 4, max_states: int = 3,
                acyclic: bool = True, reach_probability: float = 0.25, **kw) -> Game:
    alphabet = random_alphabet(rng, max_processes, max_actions, max_width=kw.pop("max_width", None),
                               min_processes=kw.pop("min_processes", 1))
    system = random_system(rng, alphabet, max_states, acyclic=acyclic, **kw)
    initial = tuple(system.local_states[p][0] for p in alphabet.processes)
    cond = random_condition(rng, system, initial, reach=rng.random() < reach_probability)
    return Game(system, initial, cond)


def random_strategy(rng: random.Random, G: Game, horizon: int) -> DistributedStrategy:
    """A response table covering every conforming play up to ``horizon`` events."""
    A = G.system
    table = {}
    level = [Play.empty(G)]
    from .game import extend

    for _ in range(horizon):
        nxt = {}
        for p in level:
            for a in A.enabled(p.final):
                grown = append_event(p.trace, a)
                t2, e = grown
                key = prime_key(t2, e.id)
                if key not in table:
                    table[key] = rng.choice(A.local_successors(a, A.restrict(p.final, a)))
                q = extend(G, p, a, table[key], grown)
                nxt.setdefault(q.trace.canonical_form(), q)
        level = list(nxt.values())
    return DistributedStrategy(G, table)


class LazyRandomStrategy(DistributedStrategy):
    """A random strategy whose responses are drawn on first use.

    Each response depends only on ``seed`` and the prime trace, so the
    strategy is a fixed function however it is queried.
    """

    def __init__(self, game: Game, seed: int):
        super().__init__(game, {})
        self.seed = seed

    def response(self, key) -> tuple:
        key = tuple(key)
        if key not in self.responses:
            A = self.game.system
            t = trace_from_word(key, A.alphabet)
            last = len(t) - 1
            a = key[-1]
            before = sigma_eval(self, t, t.full_mask & ~(1 << last))
            options = A.local_successors(a, A.restrict(before, a))
            if not options:
                raise MissingResponse(key)
            rng = random.Random(f"{self.seed}:{' '.join(key)}")
            self.responses[key] = rng.choice(options)
        return self.responses[key]


def random_asyn_game(rng: random.Random, max_processes: int = 3, max_states: int = 3,
                     max_controllable: int = 2, max_uncontrollable: int = 2, density: float = 0.6,
                     max_width: int = 2, reach_probability: float = 0.0) -> AsynGame:
    k = rng.randint(1, max_processes)
    procs = [f"p{i}" for i in range(k)]
    n_c = rng.randint(0, max_controllable)
    n_u = rng.randint(1, max_uncontrollable)
    names = [f"c{i}" for i in range(n_c)] + [f"u{i}" for i in range(n_u)]
    locations = {a: rng.sample(procs, rng.randint(1, min(k, max_width))) for a in names}
    alphabet = DistributedAlphabet.from_locations(locations, procs)
    system = random_system(rng, alphabet, max_states, density=density, acyclic=True, deterministic=True)
    initial = tuple(system.local_states[p][0] for p in procs)
    cond = random_condition(rng, system, initial, reach=rng.random() < reach_probability)
    return AsynGame(alphabet, [a for a in names if a.startswith("c")], [a for a in names if a.startswith("u")],
                    system.local_states, system.transitions, initial, cond)


def random_asyn_strategy(rng: random.Random, Ga: AsynGame, horizon: int) -> AsynStrategy:
    """Random allowed sets for every view met by consistent plays within ``horizon``."""
    from .reduction import _AsynPlay, _AsynSearch
    from .traces import trace_from_word

    search = _AsynSearch(Ga, horizon, 10**6, None)
    strat = AsynStrategy()
    table = {}
    level = [_AsynPlay((), trace_from_word((), Ga.alphabet), Ga.initial)]
    seen = {()}
    for depth in range(horizon + 1):
        nxt = []
        for play in level:
            # decide the current view of every process, even if never consulted
            for p in Ga.alphabet.processes:
                k = (p, search.view(play, p))
                if k not in table:
                    s = play.state[Ga.alphabet.index(p)]
                    table[k] = rng.choice(_subsets(Ga.sys_enabled(p, s)))
                    strat.set(p, k[1], table[k])
            children, missing = search.consistent_children(play, table)
            assert missing is None
            if depth == horizon:
                continue
            for c in children:
                if c.word not in seen:
                    seen.add(c.word)
                    nxt.append(c)
        level = nxt
    return strat
