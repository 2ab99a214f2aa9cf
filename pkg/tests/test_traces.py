import random

import pytest
from hypothesis import given, settings, strategies as st

from atsgames.errors import UnknownAction
from atsgames.generate import random_alphabet, random_word
from atsgames.traces import (Configuration, DistributedAlphabet, action_successors, append_event,
                             configurations, event_successors, full_configuration, i_view, is_configuration,
                             max_event, maxset, p_view, prime_of, trace_from_word)

from oracles import downclosed_subsets, swap_classes


def conf(t, *events):
    return Configuration(t, events)


class TestAlphabet:
    def test_relations_partition(self):
        al = DistributedAlphabet.from_locations({"a": ["p"], "b": ["p", "q"], "c": ["r"]}, ["p", "q", "r"])
        pairs = {(x, y) for x in al.actions for y in al.actions}
        assert al.independence() | al.dependence() == pairs
        assert not al.independence() & al.dependence()
        assert all((x, x) in al.dependence() for x in al.actions)
        assert all((y, x) in al.independence() for x, y in al.independence())

    def test_action_needs_a_process(self):
        with pytest.raises(ValueError):
            DistributedAlphabet.from_locations({"a": []}, ["p"])


class TestTraceFromWord:
    def test_independent_letters_unordered(self, qr):
        t = trace_from_word("ab", qr)
        assert len(t) == 2
        assert t.covering == frozenset()

    def test_commuted_words_equal(self, qr):
        assert trace_from_word("ab", qr) == trace_from_word("ba", qr)

    def test_dependent_letters_form_chain(self, chain):
        t = trace_from_word("aab", chain)
        assert t.covering == {(0, 1), (1, 2)}
        assert t.leq(0, 2)

    def test_unknown_action(self, qr):
        with pytest.raises(UnknownAction):
            trace_from_word("ax", qr)


class TestCanonicalForm:
    def test_empty(self, qr):
        assert trace_from_word("", qr).canonical_form() == ()

    def test_least_linearization(self, qr):
        assert trace_from_word("ba", qr).canonical_form() == ("a", "b")
        assert trace_from_word("ab", qr).canonical_form() == ("a", "b")

    def test_is_minimum_of_linearizations(self):
        rng = random.Random(7)
        for _ in range(50):
            al = random_alphabet(rng)
            t = trace_from_word(random_word(rng, al, 6), al)
            assert t.canonical_form() == min(t.linearizations())


class TestConfigurations:
    def test_antichain(self, qr):
        t = trace_from_word("ab", qr)
        assert {c.members for c in configurations(t)} == {frozenset(), frozenset({0}), frozenset({1}), frozenset({0, 1})}

    def test_chain_prefixes(self, chain):
        assert len(configurations(trace_from_word("aab", chain))) == 4

    def test_fig1_trace(self, fig1):
        assert len(configurations(trace_from_word("ab", fig1.alphabet))) == 4

    def test_rejects_non_downclosed(self, chain):
        t = trace_from_word("aab", chain)
        assert not is_configuration(t, 0b100)
        with pytest.raises(ValueError):
            conf(t, 2)


class TestSuccessors:
    def test_event_successors(self, chain, qr):
        t = trace_from_word("aab", chain)
        assert [e.id for e, _ in event_successors(conf(t))] == [0]
        assert event_successors(full_configuration(t)) == []
        u = trace_from_word("ab", qr)
        assert sorted(e.id for e, _ in event_successors(conf(u))) == [0, 1]

    def test_action_successors(self, chain, qr):
        t = trace_from_word("aab", chain)
        assert action_successors(conf(t), "b") == []
        assert [c.members for c in action_successors(conf(t), "a")] == [{0}]
        assert len(action_successors(conf(trace_from_word("ab", qr)), "a")) == 1


class TestViews:
    def test_empty_view(self, qr):
        t = trace_from_word("ab", qr)
        assert i_view(conf(t), "q").members == frozenset()

    def test_fig1_view(self, fig1):
        t = trace_from_word("ab", fig1.alphabet)
        c = full_configuration(t)
        assert i_view(c, "q").canonical_form() == ("a",)
        assert p_view(c, ["q", "r"]) == c
        assert max_event(c, "q").label == "a"
        assert max_event(conf(t), "q") is None

    def test_chain_view(self, chain):
        t = trace_from_word("aaa", chain)
        c = full_configuration(t)
        assert i_view(c, "q") == c
        assert max_event(c, "q").id == 2

    def test_singleton_p_view_is_i_view(self, fig1):
        t = trace_from_word("ab", fig1.alphabet)
        c = full_configuration(t)
        assert p_view(c, ["r"]) == i_view(c, "r")
        assert {e.label for e in maxset(c)} == {"a", "b"}

    def test_prime(self, chain, qr):
        t = trace_from_word("aab", chain)
        assert prime_of(0, t).members == {0}
        assert prime_of(2, t) == full_configuration(t)
        assert prime_of(1, trace_from_word("ab", qr)).members == {1}


class TestAppend:
    def test_append(self, qr):
        t0 = trace_from_word("", qr)
        t1, e = append_event(t0, "a")
        assert len(t1) == 1 and e.label == "a"
        t2, _ = append_event(t1, "b")
        assert t2.covering == frozenset()
        assert t2 == trace_from_word("ab", qr)


@st.composite
def alphabet_and_word(draw, max_len=8):
    seed = draw(st.integers(0, 10**9))
    rng = random.Random(seed)
    al = random_alphabet(rng, max_processes=4, max_actions=6)
    word = draw(st.lists(st.sampled_from(al.actions), max_size=max_len))
    return al, word


@settings(max_examples=200, deadline=None)
@given(alphabet_and_word())
def test_commutation(case):
    al, w = case
    t = trace_from_word(w, al)
    for i in range(len(w) - 1):
        if al.independent(w[i], w[i + 1]):
            v = w[:i] + [w[i + 1], w[i]] + w[i + 2:]
            assert trace_from_word(v, al) == t


@settings(max_examples=200, deadline=None)
@given(alphabet_and_word())
def test_order_laws(case):
    al, w = case
    t = trace_from_word(w, al)
    for e in range(len(t)):
        for f in range(len(t)):
            if al.dependent(t.labels[e], t.labels[f]):
                assert t.leq(e, f) or t.leq(f, e)
    for e, f in t.covering:
        assert al.dependent(t.labels[e], t.labels[f])


@settings(max_examples=100, deadline=None)
@given(alphabet_and_word())
def test_views_are_prime(case):
    al, w = case
    t = trace_from_word(w, al)
    for c in configurations(t):
        for p in al.processes:
            v = i_view(c, p)
            assert is_configuration(t, v.mask)
            assert v.members <= c.members
            if v.members:
                tops = [e for e in v.members if not any(f != e and t.leq(e, f) for f in v.members)]
                assert len(tops) == 1
                assert p in al.loc(t.labels[tops[0]])
        assert p_view(c, al.processes).members <= c.members
        assert p_view(full_configuration(t), al.processes) == full_configuration(t)


@settings(max_examples=100, deadline=None)
@given(alphabet_and_word())
def test_successor_consistency(case):
    al, w = case
    t = trace_from_word(w, al)
    for c in configurations(t):
        events = event_successors(c)
        for a in al.actions:
            assert set(action_successors(c, a)) == {c2 for e, c2 in events if e.label == a}


@settings(max_examples=100, deadline=None)
@given(alphabet_and_word(max_len=12))
def test_configuration_count(case):
    al, w = case
    t = trace_from_word(w, al)
    assert len(configurations(t)) == downclosed_subsets(t)


@pytest.mark.parametrize("seed", range(6))
def test_trace_count(seed):
    rng = random.Random(seed)
    al = random_alphabet(rng, max_processes=3, max_actions=3)
    for n in range(0, 6):
        forms = {trace_from_word(w, al).canonical_form()
                 for w in __import__("itertools").product(al.actions, repeat=n)}
        assert len(forms) == swap_classes(al, n)
