import random

import pytest

from atsgames.ats import AsyncTransitionSystem, trace_runs
from atsgames.errors import ExplosionCap, InvalidStrategy, MissingResponse, Truncated
from atsgames.game import Game, Play, Player, Safety, winner
from atsgames.generate import LazyRandomStrategy, random_game, random_strategy
from atsgames.solvers import enumerate_distributed_strategies, solve_distributed, solve_sequential
from atsgames.strategy import (DistributedStrategy, Outcome, conforming_move, conforms, is_winning_strategy,
                               sigma_eval, strategy_outcomes)
from atsgames.traces import DistributedAlphabet, trace_from_word

S00 = ("q0", "r0")


def fig1_sigma(G, q, r):
    return DistributedStrategy(G, {("a",): (q,), ("b",): (r,)})


def loop_game(initial_enabled=True):
    al = DistributedAlphabet.from_locations({"a": ["p"]}, ["p"])
    trans = {"a": [(("s",), ("s",))]} if initial_enabled else {}
    return Game(AsyncTransitionSystem(al, {"p": ["s"]}, trans), ("s",), Safety([]))


def deterministic_game(unsafe=()):
    al = DistributedAlphabet.from_locations({"a": ["p"], "b": ["p", "q"]}, ["p", "q"])
    A = AsyncTransitionSystem(al, {"p": ["p0", "p1", "p2"], "q": ["q0", "q1"]},
                              {"a": [(("p0",), ("p1",))], "b": [(("p1", "q0"), ("p2", "q1"))]})
    return Game(A, ("p0", "q0"), Safety(list(unsafe)))


class TestSigmaEval:
    def test_examples(self, fig1):
        s = fig1_sigma(fig1, "q1", "r1")
        al = fig1.alphabet
        assert sigma_eval(s, trace_from_word("ab", al)) == ("q1", "r1")
        assert sigma_eval(s, trace_from_word("", al)) == S00
        assert sigma_eval(s, trace_from_word("a", al)) == ("q1", "r0")

    def test_missing(self, fig1):
        with pytest.raises(MissingResponse):
            sigma_eval(DistributedStrategy(fig1, {}), trace_from_word("a", fig1.alphabet))

    def test_validate(self, fig1):
        fig1_sigma(fig1, "q1", "r2").validate()
        with pytest.raises(InvalidStrategy):
            DistributedStrategy(fig1, {("a",): ("q0",)}).validate()


class TestConforms:
    def test_one_of_four_runs(self, fig1):
        s = fig1_sigma(fig1, "q1", "r1")
        runs = trace_runs(fig1.system, trace_from_word("ab", fig1.alphabet), S00)
        ok = [r for r in runs if conforms(Play(r), s)]
        assert len(ok) == 1 and ok[0].final == ("q1", "r1")

    def test_empty_play(self, fig1):
        assert conforms(Play.empty(fig1), DistributedStrategy(fig1, {}))

    def test_conforming_move_rejects_illegal(self, fig1):
        bad = DistributedStrategy(fig1, {("a",): ("q0",)})
        with pytest.raises(InvalidStrategy):
            conforming_move(fig1, bad, Play.empty(fig1), "a")


class TestOutcomes:
    def test_q1_r1(self, fig1):
        plays, truncated = strategy_outcomes(fig1, fig1_sigma(fig1, "q1", "r1"), 4)
        assert not truncated
        assert [p.final for p in plays] == [("q1", "r1")]
        assert ("q1", "r0") in plays[0].rho.values()

    def test_q2_r2(self, fig1):
        plays, _ = strategy_outcomes(fig1, fig1_sigma(fig1, "q2", "r2"), 4)
        assert [p.trace.canonical_form() for p in plays] == [("a", "b")]
        assert ("q0", "r2") in plays[0].rho.values()

    def test_nothing_enabled(self):
        G = loop_game(initial_enabled=False)
        plays, truncated = strategy_outcomes(G, DistributedStrategy(G, {}), 3)
        assert len(plays) == 1 and len(plays[0]) == 0 and not truncated


class TestIsWinning:
    @pytest.mark.parametrize("q", ["q1", "q2"])
    @pytest.mark.parametrize("r", ["r1", "r2"])
    def test_every_fig1_table_loses(self, fig1, q, r):
        v = is_winning_strategy(fig1, fig1_sigma(fig1, q, r), 2)
        assert v.outcome is Outcome.ENVIRONMENT_WINS
        assert conforms(v.counterexample, fig1_sigma(fig1, q, r))

    def test_trivial_safe(self):
        G = loop_game(initial_enabled=False)
        v = is_winning_strategy(G, DistributedStrategy(G, {}), 0)
        assert v.outcome is Outcome.SYSTEM_WINS

    @pytest.mark.parametrize("horizon", [0, 3])
    def test_complete_game_unknown(self, horizon):
        G = loop_game()
        sigma = DistributedStrategy(G, {("a",) * k: ("s",) for k in range(1, horizon + 1)})
        assert is_winning_strategy(G, sigma, horizon).outcome is Outcome.UNKNOWN


class TestSolveDistributed:
    def test_fig1(self, fig1):
        v = solve_distributed(fig1, 2)
        assert v.outcome is Outcome.ENVIRONMENT_WINS
        assert v.stats["tables_examined"] == 4
        refuted = {(t[("a",)], t[("b",)]): p.trace.canonical_form() for t, p in v.refutations}
        assert refuted == {(("q1",), ("r1",)): ("a",), (("q1",), ("r2",)): ("a",),
                           (("q2",), ("r1",)): ("a", "b"), (("q2",), ("r2",)): ("b",)}

    def test_refutations_are_lost_conforming_plays(self, fig1):
        for table, p in solve_distributed(fig1, 2).refutations:
            assert conforms(p, DistributedStrategy(fig1, table))
            assert winner(fig1, p) is Player.ENVIRONMENT

    def test_fig1_without_unsafe(self, fig1):
        G = Game(fig1.system, fig1.initial, Safety([]))
        v = solve_distributed(G, 2)
        assert v.system_wins
        assert is_winning_strategy(G, v.witness, 2).system_wins

    def test_deterministic(self):
        for unsafe in ([], [("p2", "q1")]):
            G = deterministic_game(unsafe)
            v = solve_distributed(G, 4)
            assert v.stats["tables_examined"] == 1
            (only,) = list(enumerate_distributed_strategies(G, 4))
            assert v.outcome is is_winning_strategy(G, only, 4).outcome

    def test_unknown_when_truncated(self):
        assert solve_distributed(loop_game(), 3).outcome is Outcome.UNKNOWN


class TestEnumerate:
    def test_fig1_four(self, fig1):
        strats = list(enumerate_distributed_strategies(fig1, 2))
        assert len(strats) == 4
        assert len({tuple(s.items()) for s in strats}) == 4

    def test_deterministic_one(self):
        assert len(list(enumerate_distributed_strategies(deterministic_game(), 4))) == 1

    def test_nothing_enabled(self):
        (only,) = list(enumerate_distributed_strategies(loop_game(initial_enabled=False), 2))
        assert len(only) == 0

    def test_truncated(self, fig1):
        with pytest.raises(Truncated):
            list(enumerate_distributed_strategies(fig1, 1))


class TestSequential:
    def test_fig1(self, fig1):
        v = solve_sequential(fig1)
        assert v.system_wins
        assert {("q0", "r0"), ("q0", "r1"), ("q2", "r0"), ("q1", "r1"), ("q2", "r2"), ("q1", "r2")} <= set(
            v.winning_region)
        reached = v.witness.reachable(fig1)
        assert not set(reached) & fig1.condition.unsafe
        listed = {(S00, "b"): ("q0", "r1"), (S00, "a"): ("q2", "r0"),
                  (("q0", "r1"), "a"): ("q1", "r1"), (("q2", "r0"), "b"): ("q2", "r2")}
        assert all(v.witness.choose(s, a) == d for (s, a), d in listed.items())

    def test_all_unsafe(self, fig1):
        A = fig1.system
        G = Game(A, fig1.initial, Safety(list(A.global_states())))
        v = solve_sequential(G)
        assert v.outcome is Outcome.ENVIRONMENT_WINS and v.winning_region == []


def _instance(seed):
    rng = random.Random(seed)
    G = random_game(rng, max_processes=3, max_actions=4, max_states=3, density=0.8)
    return rng, G


@pytest.mark.parametrize("seed", range(80))
def test_linearization_invariance_and_step(seed):
    rng = random.Random(seed)
    G = random_game(rng, max_processes=3, max_actions=4, max_states=3, density=0.8, acyclic=False,
                    min_processes=2, max_width=(None, 2, 1)[seed % 3])
    sigma = LazyRandomStrategy(G, seed) if seed % 2 else random_strategy(rng, G, 6)
    A = G.system
    p = Play.empty(G)
    for _ in range(6):
        acts = A.enabled(p.final)
        if not acts:
            break
        a = rng.choice(acts)
        before = sigma_eval(sigma, p.trace)
        q = conforming_move(G, sigma, p, a)
        after = sigma_eval(sigma, q.trace)
        assert after in A.global_successors(before, a)
        assert all(before[i] == after[i] for i in range(len(before)) if i not in A.alphabet.loc_indices(a))
        assert after == q.final
        p = q
    value = sigma_eval(sigma, p.trace)
    for w in p.trace.linearizations():
        assert sigma_eval(sigma, trace_from_word(w, G.alphabet)) == value


def _check_against_enumeration(G, horizon=6):
    """Compare the solver with exhaustive enumeration; False if enumeration is too large."""
    try:
        strats = list(enumerate_distributed_strategies(G, horizon, cap=20000))
    except ExplosionCap:
        return False
    v = solve_distributed(G, horizon)
    verdicts = [is_winning_strategy(G, s, horizon).outcome for s in strats]
    assert Outcome.UNKNOWN not in verdicts
    assert v.system_wins == (Outcome.SYSTEM_WINS in verdicts)
    assert solve_distributed(G, horizon, backjump=True).outcome is v.outcome
    if v.system_wins:
        assert is_winning_strategy(G, v.witness, horizon).system_wins
        assert solve_sequential(G).system_wins
    else:
        assert v.counterexample is v.refutations[0][1]
        for table, p in v.refutations:
            assert conforms(p, DistributedStrategy(G, table))
            assert winner(G, p) is Player.ENVIRONMENT
    return True


def test_solver_agrees_with_enumeration():
    checked = sum(_check_against_enumeration(_instance(seed)[1]) for seed in range(80))
    assert checked >= 75


def test_sequential_strictly_stronger_on_fig1(fig1):
    assert solve_sequential(fig1).system_wins
    assert not solve_distributed(fig1, 2).system_wins
