"""Distributed strategies with causal memory, conformance and verdicts."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .ats import GlobalState
from .errors import ExplosionCap, InvalidStrategy, MissingResponse
from .game import (DEFAULT_PLAY_CAP, Game, Play, Safety, extend, play_sort_key,
                   reaches_target, violates_safety)
from .traces import Trace, append_event, configurations, trace_from_word


class Outcome(enum.Enum):
    SYSTEM_WINS = "SystemWins"
    ENVIRONMENT_WINS = "EnvironmentWins"
    UNKNOWN = "Unknown"


@dataclass
class Verdict:
    outcome: Outcome
    witness: object = None
    counterexample: Play | None = None
    # (response table, losing conforming play) for every refuted table
    refutations: list = field(default_factory=list)
    reason: str = ""
    stats: dict = field(default_factory=dict)
    winning_region: list | None = None

    @property
    def system_wins(self) -> bool:
        return self.outcome is Outcome.SYSTEM_WINS

    def __repr__(self):
        return f"Verdict({self.outcome.value}{', ' + self.reason if self.reason else ''})"


def prime_key(t: Trace, e: int) -> tuple[str, ...]:
    """Canonical form of the causal past of event ``e``."""
    return t.canonical_form(t.down[e])


class DistributedStrategy:
    """Responses stored at prime traces, assembled per process from views.

    ``responses`` maps the canonical form of a prime trace ``↓e`` to the
    a-state taken by ``loc(λ(e))`` after ``e``.
    """

    def __init__(self, game: Game, responses: Mapping[tuple, tuple] | None = None):
        self.game = game
        self.responses = {tuple(k): tuple(v) for k, v in (responses or {}).items()}

    def response(self, key) -> tuple:
        try:
            return self.responses[tuple(key)]
        except KeyError:
            raise MissingResponse(key) from None

    def __contains__(self, key):
        return tuple(key) in self.responses

    def __len__(self):
        return len(self.responses)

    def items(self):
        """Responses in canonical order (shorter prime traces first)."""
        return sorted(self.responses.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def validate(self) -> None:
        """Check every stored response against ``delta_a`` at ``σ(⇓e)``."""
        A = self.game.system
        for key, resp in self.responses.items():
            if not key:
                raise InvalidStrategy("the empty trace is not prime")
            t = trace_from_word(key, A.alphabet)
            last = len(t) - 1
            if t.down[last] != t.full_mask:
                raise InvalidStrategy(f"[{' '.join(key)}] is not a prime trace")
            a = key[-1]
            before = sigma_eval(self, t, t.full_mask & ~(1 << last))
            if resp not in A.local_successors(a, A.restrict(before, a)):
                raise InvalidStrategy(
                    f"response {resp} at [{' '.join(key)}] is not a {a}-successor of {A.restrict(before, a)}")

    def __eq__(self, other):
        if not isinstance(other, DistributedStrategy):
            return NotImplemented
        return self.responses == other.responses

    def __repr__(self):
        return f"DistributedStrategy({len(self.responses)} responses)"


def sigma_eval(sigma: DistributedStrategy, t: Trace, mask: int | None = None) -> GlobalState:
    """The global state the strategy assigns to ``t`` (or to one of its configurations)."""
    G = sigma.game
    alpha = t.alphabet
    if mask is None:
        mask = t.full_mask
    out = list(G.initial)
    for idx, proc in enumerate(alpha.processes):
        local = mask & t.located(proc)
        if not local:
            continue
        e = local.bit_length() - 1
        a = t.labels[e]
        resp = sigma.response(prime_key(t, e))
        out[idx] = resp[alpha.loc(a).index(proc)]
    return tuple(out)


def conforms(p: Play, sigma: DistributedStrategy) -> bool:
    t = p.trace
    return all(p.rho[c.mask] == sigma_eval(sigma, t, c.mask) for c in configurations(t))


def conforming_move(G: Game, sigma: DistributedStrategy, p: Play, a: str) -> Play:
    """The unique extension of ``p`` by ``a`` that follows ``sigma``."""
    A = G.system
    grown = append_event(p.trace, a)
    t2, e = grown
    dst = sigma.response(prime_key(t2, e.id))
    if dst not in A.local_successors(a, A.restrict(p.final, a)):
        raise InvalidStrategy(f"response {dst} after [{' '.join(prime_key(t2, e.id))}] is not a legal move")
    return extend(G, p, a, dst, grown)


def _unfold(G: Game, sigma: DistributedStrategy, horizon: int, cap: int, stop_on_loss: bool):
    """Breadth-first unfolding of the plays conforming to ``sigma``.

    Returns (maximal plays, first losing play or None, truncated flag).
    """
    A = G.system
    safety = isinstance(G.condition, Safety)
    level = {(): Play.empty(G)}
    maximal = []
    truncated = False
    total = 1
    for depth in range(horizon + 1):
        nxt = {}
        for p in level.values():
            if stop_on_loss:
                if safety and violates_safety(G, p):
                    return maximal, p, truncated
                if not safety and G.initial in G.condition.target:
                    # every linearization of every extension starts in the target
                    continue
            acts = A.enabled(p.final)
            if not acts:
                maximal.append(p)
                if stop_on_loss and not safety and not reaches_target(G, p):
                    return maximal, p, truncated
                continue
            if depth == horizon:
                truncated = True
                continue
            for a in acts:
                q = conforming_move(G, sigma, p, a)
                k = q.trace.canonical_form()
                if k not in nxt:
                    nxt[k] = q
                    total += 1
                    if total > cap:
                        raise ExplosionCap("conforming play unfolding", cap, {"depth": depth + 1})
        level = nxt
        if not level:
            break
    maximal.sort(key=lambda p: play_sort_key(G, p))
    return maximal, None, truncated


def strategy_outcomes(G: Game, sigma: DistributedStrategy, horizon: int,
                      cap: int = DEFAULT_PLAY_CAP) -> tuple[list[Play], bool]:
    maximal, _, truncated = _unfold(G, sigma, horizon, cap, stop_on_loss=False)
    return maximal, truncated


def is_winning_strategy(G: Game, sigma: DistributedStrategy, horizon: int,
                        cap: int = DEFAULT_PLAY_CAP) -> Verdict:
    """Check ``sigma`` against every environment schedule up to ``horizon`` events.

    A conforming play that is unsafe counts as lost even if it is not yet
    maximal: every maximal extension of it is lost as well.
    """
    _, lost, truncated = _unfold(G, sigma, horizon, cap, stop_on_loss=True)
    if lost is not None:
        return Verdict(Outcome.ENVIRONMENT_WINS, counterexample=lost, reason="losing conforming play")
    if truncated:
        return Verdict(Outcome.UNKNOWN, reason="horizon exhausted")
    return Verdict(Outcome.SYSTEM_WINS, witness=sigma)


def strategy_from_play_choices(G: Game, plays: Iterable[Play]) -> DistributedStrategy:
    """Collect the responses used by a set of plays into a table."""
    table = {}
    for p in plays:
        t = p.trace
        for e, choice in enumerate(p.run.choices):
            k = prime_key(t, e)
            if table.setdefault(k, choice) != choice:
                raise InvalidStrategy(f"plays disagree at [{' '.join(k)}]")
    return DistributedStrategy(G, table)
