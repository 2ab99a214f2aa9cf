"""ATS games: winning conditions, plays and one-step dynamics."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .ats import AsyncTransitionSystem, GlobalState, TraceRun
from .errors import ExplosionCap, InitialStateMismatch
from .traces import append_event, configurations, trace_from_word

DEFAULT_PLAY_CAP = 10**6


class Player(enum.Enum):
    SYSTEM = "System"
    ENVIRONMENT = "Environment"


@dataclass(frozen=True)
class Safety:
    """The system must never visit a state in ``unsafe``."""

    unsafe: frozenset

    def __init__(self, unsafe: Iterable[GlobalState]):
        object.__setattr__(self, "unsafe", frozenset(tuple(s) for s in unsafe))

    @classmethod
    def from_safe(cls, safe: Iterable[GlobalState], system: AsyncTransitionSystem) -> "Safety":
        safe = {tuple(s) for s in safe}
        return cls(s for s in system.global_states() if s not in safe)

    def is_safe(self, s: GlobalState) -> bool:
        return s not in self.unsafe

    @property
    def states(self):
        return self.unsafe


@dataclass(frozen=True)
class Reachability:
    """Every linearization of the play must pass through a state in ``target``."""

    target: frozenset

    def __init__(self, target: Iterable[GlobalState]):
        object.__setattr__(self, "target", frozenset(tuple(s) for s in target))

    @property
    def states(self):
        return self.target


WinningCondition = Safety | Reachability


class Game:
    def __init__(self, system: AsyncTransitionSystem, initial: GlobalState, condition: WinningCondition):
        initial = tuple(initial)
        if not system.is_global_state(initial):
            raise InitialStateMismatch(f"{initial} is not a global state of the system")
        for s in condition.states:
            if not system.is_global_state(s):
                raise ValueError(f"winning condition mentions {s}, which is not a global state")
        self.system = system
        self.initial = initial
        self.condition = condition

    @property
    def alphabet(self):
        return self.system.alphabet

    def __repr__(self):
        return f"Game(initial={self.initial}, condition={type(self.condition).__name__})"


class Play:
    """A play is a single trace run from the game's initial state.

    The labeling of every configuration (keyed by bitmask) is built lazily and
    extended incrementally by :func:`step`.
    """

    __slots__ = ("run", "_rho")

    def __init__(self, run: TraceRun, rho: dict | None = None):
        self.run = run
        self._rho = rho

    @classmethod
    def empty(cls, G: Game) -> "Play":
        return cls(TraceRun(trace_from_word((), G.alphabet), G.initial, ()), {0: G.initial})

    @property
    def trace(self):
        return self.run.trace

    @property
    def final(self) -> GlobalState:
        return self.run.final

    @property
    def rho(self) -> dict[int, GlobalState]:
        """Configuration bitmask -> global state, over all configurations."""
        if self._rho is None:
            self._rho = {c.mask: self.run.state_at(c) for c in configurations(self.run.trace)}
        return self._rho

    def __len__(self):
        return len(self.run.trace)

    def key(self):
        return self.run.key()

    def transcript(self) -> list[tuple[str, GlobalState]]:
        """The canonical linearization with the global state after each step."""
        t = self.run.trace
        out = []
        mask = 0
        for e in t.canonical_order():
            mask |= 1 << e
            out.append((t.labels[e], self.run.state_at(mask)))
        return out

    def states_along(self) -> list[GlobalState]:
        return [self.run.initial] + [s for _, s in self.transcript()]

    def __eq__(self, other):
        if not isinstance(other, Play):
            return NotImplemented
        return self.run == other.run

    def __hash__(self):
        return hash(self.run)

    def __repr__(self):
        return f"Play({' '.join(a for a, _ in self.key()) or '<empty>'} -> {self.final})"


def play_from_transcript(G: Game, steps: Iterable[tuple[str, GlobalState]]) -> Play:
    """Rebuild a play from ``(action, state after)`` steps, checking each move."""
    from .errors import InvalidPlay

    p = Play.empty(G)
    for a, s in steps:
        s = tuple(s)
        for q in step(G, p, a):
            if q.final == s:
                p = q
                break
        else:
            raise InvalidPlay(f"move {a} -> {s} is not available at {p.final}")
    return p


def extend(G: Game, p: Play, a: str, dst: tuple, grown=None) -> Play:
    """Extend ``p`` by an ``a``-event whose participants move to ``dst``.

    ``grown`` may pass a precomputed ``append_event(p.trace, a)``.  The caller
    is responsible for ``dst`` being a legal ``delta_a`` successor.
    """
    A = G.system
    t2, e = grown if grown is not None else append_event(p.trace, a)
    bit = 1 << e.id
    below = t2.down[e.id] & ~bit
    idx = A.alphabet.loc_indices(a)
    rho = p.rho
    rho2 = dict(rho)
    # new configurations are exactly c + e for configurations c containing the past of e
    for mask, s in rho.items():
        if mask & below == below:
            s2 = list(s)
            for i, x in zip(idx, dst):
                s2[i] = x
            rho2[mask | bit] = tuple(s2)
    return Play(TraceRun(t2, p.run.initial, p.run.choices + (tuple(dst),)), rho2)


def step(G: Game, p: Play, a: str) -> list[Play]:
    A = G.system
    grown = append_event(p.trace, a)
    return [extend(G, p, a, dst, grown) for dst in A.local_successors(a, A.restrict(p.final, a))]


def is_maximal(G: Game, p: Play) -> bool:
    return not G.system.enabled(p.final)


def visited_states(p: Play) -> set[GlobalState]:
    """States labeling any configuration of the play."""
    return set(p.rho.values())


def violates_safety(G: Game, p: Play) -> bool:
    unsafe = G.condition.unsafe
    return any(s in unsafe for s in p.rho.values())


def every_chain_hits(t, hit) -> bool:
    """True when every maximal chain of configurations of ``t`` meets ``hit``.

    ``hit`` takes a configuration bitmask.  The chains are exactly the
    linearizations of ``t``.
    """
    full = t.full_mask
    n = len(t)
    escapes = {}

    def escape(mask):
        if mask in escapes:
            return escapes[mask]
        if hit(mask):
            out = False
        elif mask == full:
            out = True
        else:
            out = any(escape(mask | 1 << i) for i in range(n)
                      if not mask >> i & 1 and not (t.down[i] & ~(1 << i)) & ~mask)
        escapes[mask] = out
        return out

    return not escape(0)


def reaches_target(G: Game, p: Play) -> bool:
    """Every linearization of ``p`` visits the target."""
    target = G.condition.target
    rho = p.rho
    return every_chain_hits(p.trace, lambda m: rho[m] in target)


def winner(G: Game, p: Play) -> Player:
    """Winner of a play; states are taken over all configurations."""
    if isinstance(G.condition, Safety):
        return Player.ENVIRONMENT if violates_safety(G, p) else Player.SYSTEM
    return Player.SYSTEM if reaches_target(G, p) else Player.ENVIRONMENT


def winner_by_linearizations(G: Game, p: Play) -> Player:
    """Reference evaluation: walk the state sequence of every linearization.

    Safety holds iff every linearization stays safe; reachability holds iff
    every linearization meets the target.
    """
    t = p.trace
    cond = G.condition
    seqs = []
    n = len(t)

    def rec(done, states):
        if done == t.full_mask:
            seqs.append(list(states))
            return
        for i in range(n):
            if not done >> i & 1 and not (t.down[i] & ~(1 << i)) & ~done:
                states.append(p.run.state_at(done | 1 << i))
                rec(done | 1 << i, states)
                states.pop()

    rec(0, [p.run.initial])
    if isinstance(cond, Safety):
        ok = all(all(s not in cond.unsafe for s in seq) for seq in seqs)
    else:
        ok = all(any(s in cond.target for s in seq) for seq in seqs)
    return Player.SYSTEM if ok else Player.ENVIRONMENT


def play_sort_key(G: Game, p: Play):
    A = G.system
    return (p.trace.canonical_form(), tuple(A.astate_key(a, c) for a, c in p.key()))


def all_maximal_plays(G: Game, horizon: int, cap: int = DEFAULT_PLAY_CAP) -> tuple[list[Play], bool]:
    """Maximal plays with at most ``horizon`` events, and whether unfolding was cut short."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    A = G.system
    level = {(): Play.empty(G)}
    maximal: list[Play] = []
    truncated = False
    total = 1
    for depth in range(horizon + 1):
        nxt = {}
        for p in level.values():
            acts = A.enabled(p.final)
            if not acts:
                maximal.append(p)
                continue
            if depth == horizon:
                truncated = True
                continue
            for a in acts:
                for q in step(G, p, a):
                    k = q.key()
                    if k not in nxt:
                        nxt[k] = q
                        total += 1
                        if total > cap:
                            raise ExplosionCap("play unfolding", cap, {"depth": depth + 1})
        level = nxt
        if not level:
            break
    maximal.sort(key=lambda p: play_sort_key(G, p))
    return maximal, truncated
