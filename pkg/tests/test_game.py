import random

import pytest

from atsgames.ats import AsyncTransitionSystem
from atsgames.game import (Game, Play, Player, Reachability, Safety, all_maximal_plays, is_maximal,
                           play_from_transcript, step, winner, winner_by_linearizations)
from atsgames.generate import random_game
from atsgames.traces import DistributedAlphabet

from oracles import maximal_plays_dfs

S00 = ("q0", "r0")


def toy(transitions, condition=None):
    al = DistributedAlphabet.from_locations({"a": ["p"]}, ["p"])
    A = AsyncTransitionSystem(al, {"p": ["s"]}, transitions)
    return Game(A, ("s",), condition or Safety([]))


def identity(G, p):
    seen, out = {}, []
    for a, choice in p.key():
        seen[a] = seen.get(a, 0) + 1
        out.append(((a, seen[a]), choice))
    return p.trace.canonical_form(), frozenset(out)


class TestStep:
    def test_fig1_first_move(self, fig1):
        plays = step(fig1, Play.empty(fig1), "a")
        assert [p.final for p in plays] == [("q1", "r0"), ("q2", "r0")]

    def test_sink(self, fig1):
        p = play_from_transcript(fig1, [("a", ("q1", "r0")), ("b", ("q1", "r1"))])
        assert all(step(fig1, p, a) == [] for a in "ab")

    def test_deterministic(self):
        G = toy({"a": [(("s",), ("s",))]})
        assert len(step(G, Play.empty(G), "a")) == 1


class TestMaximal:
    def test_fig1(self, fig1):
        p = play_from_transcript(fig1, [("a", ("q1", "r0")), ("b", ("q1", "r1"))])
        assert is_maximal(fig1, p)
        assert not is_maximal(fig1, Play.empty(fig1))

    def test_self_loop_never_maximal(self):
        G = toy({"a": [(("s",), ("s",))]})
        p = Play.empty(G)
        for _ in range(4):
            assert not is_maximal(G, p)
            p = step(G, p, "a")[0]


class TestWinner:
    def test_unsafe_after_a(self, fig1):
        p = play_from_transcript(fig1, [("a", ("q1", "r0"))])
        assert winner(fig1, p) is Player.ENVIRONMENT

    def test_q2_r2_is_lost_through_b_first(self, fig1):
        # the state sequence of "ab" is safe, but configuration {b} sits at (q0, r2)
        p = play_from_transcript(fig1, [("a", ("q2", "r0")), ("b", ("q2", "r2"))])
        assert ("q2", "r0") in p.states_along() and p.final == ("q2", "r2")
        assert all(fig1.condition.is_safe(s) for s in p.states_along())
        assert ("q0", "r2") in p.rho.values()
        assert winner(fig1, p) is Player.ENVIRONMENT

    def test_paths_through_unsafe_states_lose(self, fig1):
        p = play_from_transcript(fig1, [("a", ("q1", "r0")), ("b", ("q1", "r1"))])
        assert winner(fig1, p) is Player.ENVIRONMENT
        q = play_from_transcript(fig1, [("b", ("q0", "r1")), ("a", ("q1", "r1"))])
        assert winner(fig1, q) is Player.ENVIRONMENT

    def test_reach_needs_every_linearization(self):
        # a and b are independent; only the configuration {a} is a target
        al = DistributedAlphabet.from_locations({"a": ["p"], "b": ["q"]}, ["p", "q"])
        A = AsyncTransitionSystem(al, {"p": ["p0", "p1"], "q": ["q0", "q1"]},
                                  {"a": [(("p0",), ("p1",))], "b": [(("q0",), ("q1",))]})
        G = Game(A, ("p0", "q0"), Reachability([("p1", "q0")]))
        p = play_from_transcript(G, [("a", ("p1", "q0")), ("b", ("p1", "q1"))])
        assert ("p1", "q0") in p.rho.values()
        assert winner(G, p) is Player.ENVIRONMENT
        G2 = Game(A, ("p0", "q0"), Reachability([("p1", "q0"), ("p0", "q1")]))
        assert winner(G2, p) is Player.SYSTEM

    def test_reach_initial(self):
        G = toy({}, Reachability([("s",)]))
        assert winner(G, Play.empty(G)) is Player.SYSTEM


class TestAllMaximalPlays:
    def test_fig1_horizon_2(self, fig1):
        plays, truncated = all_maximal_plays(fig1, 2)
        oracle, oracle_trunc = maximal_plays_dfs(fig1, 2)
        assert len(plays) == len(oracle) == 4
        assert {identity(fig1, p) for p in plays} == oracle
        assert truncated is oracle_trunc is False

    def test_horizon_0(self, fig1):
        assert all_maximal_plays(fig1, 0) == ([], True)

    def test_stuck_single_state(self):
        G = toy({})
        plays, truncated = all_maximal_plays(G, 3)
        assert len(plays) == 1 and len(plays[0]) == 0 and not truncated

    @pytest.mark.parametrize("horizon", [0, 1, 5])
    def test_complete_game_has_none(self, horizon):
        G = toy({"a": [(("s",), ("s",))]})
        assert G.system.is_complete()
        assert all_maximal_plays(G, horizon) == ([], True)

    def test_negative_horizon(self, fig1):
        with pytest.raises(ValueError):
            all_maximal_plays(fig1, -1)


@pytest.mark.parametrize("seed", range(60))
def test_random_against_dfs(seed):
    G = random_game(random.Random(seed), max_processes=3, max_actions=4, max_states=3, density=0.8,
                    acyclic=seed % 2 == 0)
    plays, truncated = all_maximal_plays(G, 4)
    oracle, oracle_trunc = maximal_plays_dfs(G, 4)
    assert {identity(G, p) for p in plays} == oracle
    assert truncated == oracle_trunc
    A = G.system
    for p in plays:
        assert is_maximal(G, p)
        # every proper configuration still has a move
        assert all(A.enabled(s) for m, s in p.rho.items() if m != p.trace.full_mask)
        assert winner(G, p) is winner_by_linearizations(G, p)


@pytest.mark.parametrize("seed", range(30))
def test_step_nonempty_iff_enabled(seed):
    rng = random.Random(seed)
    G = random_game(rng, density=0.5, acyclic=False)
    p = Play.empty(G)
    for _ in range(5):
        en = set(G.system.enabled(p.final))
        for a in G.alphabet.actions:
            assert bool(step(G, p, a)) == (a in en)
        if not en:
            break
        p = rng.choice(step(G, p, rng.choice(sorted(en))))
