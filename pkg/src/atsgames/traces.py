"""Mazurkiewicz traces over a distributed alphabet.

A trace is stored as a finite labeled partial order.  Events are numbered in
generation order, which is always a linearization of the order, and every
event keeps the bitmask of its causal past (``down``), so down-closures,
views and configurations are cheap integer operations.

Traces compare equal when they have the same alphabet and the same canonical
form: the lexicographically least linearization, with actions ordered by name.
"""

from __future__ import annotations

from collections import deque
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import UnknownAction


class DistributedAlphabet:
    """A family of local action sets, one per process.

    ``processes`` keeps declaration order; ``loc(a)`` is returned in that
    order, which fixes the component order of every a-state.
    """

    def __init__(self, local_actions: Mapping[str, Iterable[str]], processes: Sequence[str] | None = None):
        if processes is None:
            processes = list(local_actions)
        self.processes = tuple(processes)
        if len(set(self.processes)) != len(self.processes):
            raise ValueError("duplicate process names")
        unknown = set(local_actions) - set(self.processes)
        if unknown:
            raise ValueError(f"actions declared for unknown processes {sorted(unknown)}")
        self.local_actions = {p: frozenset(local_actions.get(p, ())) for p in self.processes}
        self.actions = tuple(sorted(set().union(*self.local_actions.values()))) if self.processes else ()
        self._loc = {
            a: tuple(p for p in self.processes if a in self.local_actions[p]) for a in self.actions
        }
        self._index = {p: i for i, p in enumerate(self.processes)}
        self._dep = {a: frozenset(b for b in self.actions if set(self._loc[a]) & set(self._loc[b]))
                     for a in self.actions}

    @classmethod
    def from_locations(cls, locations: Mapping[str, Iterable[str]], processes: Sequence[str]):
        """Build from ``action -> participants`` instead of ``process -> actions``."""
        local = {p: set() for p in processes}
        for a, procs in locations.items():
            procs = list(procs)
            if not procs:
                raise ValueError(f"action {a!r} has no participating process")
            for p in procs:
                if p not in local:
                    raise ValueError(f"action {a!r} mentions unknown process {p!r}")
                local[p].add(a)
        return cls(local, processes)

    def loc(self, a: str) -> tuple[str, ...]:
        try:
            return self._loc[a]
        except KeyError:
            raise UnknownAction(a) from None

    def loc_indices(self, a: str) -> tuple[int, ...]:
        return tuple(self._index[p] for p in self.loc(a))

    def index(self, process: str) -> int:
        return self._index[process]

    def dependent(self, a: str, b: str) -> bool:
        if a not in self._dep:
            raise UnknownAction(a)
        if b not in self._dep:
            raise UnknownAction(b)
        return b in self._dep[a]

    def independent(self, a: str, b: str) -> bool:
        return not self.dependent(a, b)

    def dependents(self, a: str) -> frozenset[str]:
        try:
            return self._dep[a]
        except KeyError:
            raise UnknownAction(a) from None

    def independence(self) -> set[tuple[str, str]]:
        return {(a, b) for a in self.actions for b in self.actions if b not in self._dep[a]}

    def dependence(self) -> set[tuple[str, str]]:
        return {(a, b) for a in self.actions for b in self._dep[a]}

    def __contains__(self, a) -> bool:
        return a in self._loc

    def __eq__(self, other):
        if not isinstance(other, DistributedAlphabet):
            return NotImplemented
        return self.processes == other.processes and self.local_actions == other.local_actions

    def __hash__(self):
        return hash((self.processes, tuple(self.local_actions[p] for p in self.processes)))

    def __repr__(self):
        body = ", ".join(f"{p}: {{{', '.join(sorted(self.local_actions[p]))}}}" for p in self.processes)
        return f"DistributedAlphabet({body})"


class Event(NamedTuple):
    id: int
    label: str


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Trace:
    """A finite trace, built by :func:`trace_from_word` or :func:`append_event`.

    Direct construction validates the covering relation against the trace
    axioms; event ids must number a linearization (every covering pair goes
    from a lower id to a higher id).
    """

    def __init__(self, alphabet: DistributedAlphabet, labels: Sequence[str], covering: Iterable[tuple[int, int]]):
        labels = tuple(labels)
        for a in labels:
            if a not in alphabet:
                raise UnknownAction(a)
        preds: list[list[int]] = [[] for _ in labels]
        for i, j in covering:
            if not (0 <= i < j < len(labels)):
                raise ValueError(f"covering pair {(i, j)} does not follow generation order")
            preds[j].append(i)
        down = []
        for j, ps in enumerate(preds):
            m = 1 << j
            for i in ps:
                m |= down[i]
            down.append(m)
        self._init(alphabet, labels, tuple(tuple(sorted(p)) for p in preds), tuple(down))
        self._validate()

    @classmethod
    def _raw(cls, alphabet, labels, preds, down) -> "Trace":
        t = cls.__new__(cls)
        t._init(alphabet, labels, preds, down)
        return t

    def _init(self, alphabet, labels, preds, down):
        self.alphabet = alphabet
        self.labels = labels
        self.preds = preds
        self.down = down

    def _validate(self):
        for j, ps in enumerate(self.preds):
            for i in ps:
                if not self.alphabet.dependent(self.labels[i], self.labels[j]):
                    raise ValueError(f"covering pair {(i, j)} joins independent actions")
                others = 0
                for k in ps:
                    if k != i:
                        others |= self.down[k]
                if others >> i & 1:
                    raise ValueError(f"covering pair {(i, j)} is transitively implied")
        for j in range(len(self)):
            for i in range(j):
                if self.alphabet.dependent(self.labels[i], self.labels[j]) and not self.leq(i, j):
                    raise ValueError(f"dependent events {i} and {j} are unordered")

    # -- basic structure -------------------------------------------------

    def __len__(self):
        return len(self.labels)

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(Event(i, a) for i, a in enumerate(self.labels))

    @property
    def covering(self) -> frozenset[tuple[int, int]]:
        return frozenset((i, j) for j, ps in enumerate(self.preds) for i in ps)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.labels)) - 1

    def leq(self, e: int, f: int) -> bool:
        return bool(self.down[f] >> e & 1)

    def located(self, process: str) -> int:
        """Bitmask of events in which ``process`` participates."""
        acts = self.alphabet.local_actions[process]
        m = 0
        for i, a in enumerate(self.labels):
            if a in acts:
                m |= 1 << i
        return m

    def closure(self, mask: int) -> int:
        out = 0
        for i in _bits(mask):
            out |= self.down[i]
        return out

    # -- canonical form --------------------------------------------------

    def canonical_order(self, mask: int | None = None) -> tuple[int, ...]:
        """Event ids of the lexicographically least linearization of ``mask``."""
        if mask is None:
            mask = self.full_mask
        done = 0
        order = []
        remaining = list(_bits(mask))
        while remaining:
            best = None
            for i in remaining:
                if (self.down[i] & ~(1 << i)) & ~done:
                    continue
                if best is None or self.labels[i] < self.labels[best]:
                    best = i
            order.append(best)
            done |= 1 << best
            remaining.remove(best)
        return tuple(order)

    def canonical_form(self, mask: int | None = None) -> tuple[str, ...]:
        if mask is None:
            return self._canonical
        return tuple(self.labels[i] for i in self.canonical_order(mask))

    @cached_property
    def _canonical(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.canonical_order())

    def linearizations(self) -> Iterator[tuple[str, ...]]:
        """Every linearization as a word (exponential; for small traces)."""
        n = len(self)

        def rec(done, word):
            if done == self.full_mask:
                yield tuple(word)
                return
            for i in range(n):
                if not done >> i & 1 and not (self.down[i] & ~(1 << i)) & ~done:
                    word.append(self.labels[i])
                    yield from rec(done | 1 << i, word)
                    word.pop()

        yield from rec(0, [])

    def restrict(self, mask: int) -> "Trace":
        """The sub-trace formed by a down-closed set of events, renumbered."""
        ids = list(_bits(mask))
        new = {old: k for k, old in enumerate(ids)}
        labels = tuple(self.labels[i] for i in ids)
        preds = tuple(tuple(new[p] for p in self.preds[i]) for i in ids)
        down = []
        for k, i in enumerate(ids):
            m = 1 << k
            for p in preds[k]:
                m |= down[p]
            down.append(m)
        return Trace._raw(self.alphabet, labels, preds, tuple(down))

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.alphabet == other.alphabet and self._canonical == other._canonical

    def __hash__(self):
        return hash(self._canonical)

    def __repr__(self):
        return f"Trace({' '.join(self._canonical) or '<empty>'})"


def _extend(alphabet, labels, preds, down, a):
    if a not in alphabet:
        raise UnknownAction(a)
    j = len(labels)
    dep = alphabet.dependents(a)
    candidates = []
    seen = set()
    for i in range(j - 1, -1, -1):
        b = labels[i]
        if b in dep and b not in seen:
            seen.add(b)
            candidates.append(i)
    keep = []
    for i in candidates:
        if not any(k != i and down[k] >> i & 1 for k in candidates):
            keep.append(i)
    m = 1 << j
    for i in keep:
        m |= down[i]
    return labels + (a,), preds + (tuple(sorted(keep)),), down + (m,)


def trace_from_word(word: Iterable[str], alphabet: DistributedAlphabet) -> Trace:
    labels: tuple = ()
    preds: tuple = ()
    down: tuple = ()
    for a in word:
        labels, preds, down = _extend(alphabet, labels, preds, down, a)
    return Trace._raw(alphabet, labels, preds, down)


def append_event(t: Trace, a: str) -> tuple[Trace, Event]:
    labels, preds, down = _extend(t.alphabet, t.labels, t.preds, t.down, a)
    return Trace._raw(t.alphabet, labels, preds, down), Event(len(t), a)


def canonical_form(t: Trace) -> tuple[str, ...]:
    return t.canonical_form()


class Configuration:
    """A down-closed set of events of ``trace``, stored as a bitmask."""

    __slots__ = ("trace", "mask")

    def __init__(self, trace: Trace, members: Iterable[int] | int = 0):
        if isinstance(members, int):
            mask = members
        else:
            mask = 0
            for i in members:
                mask |= 1 << i
        if mask & ~trace.full_mask:
            raise ValueError("configuration mentions events outside the trace")
        if trace.closure(mask) != mask:
            raise ValueError("event set is not down-closed")
        self.trace = trace
        self.mask = mask

    @classmethod
    def _raw(cls, trace, mask):
        c = cls.__new__(cls)
        c.trace = trace
        c.mask = mask
        return c

    @property
    def members(self) -> frozenset[int]:
        return frozenset(_bits(self.mask))

    def __len__(self):
        return bin(self.mask).count("1")

    def __contains__(self, e):
        e = e.id if isinstance(e, Event) else e
        return bool(self.mask >> e & 1)

    def __le__(self, other):
        return self.mask & ~other.mask == 0

    def as_trace(self) -> Trace:
        return self.trace.restrict(self.mask)

    def canonical_form(self) -> tuple[str, ...]:
        return self.trace.canonical_form(self.mask)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.mask == other.mask and (self.trace is other.trace or self.trace == other.trace)

    def __hash__(self):
        return hash(self.mask)

    def __repr__(self):
        return f"Configuration({sorted(self.members)})"


def is_configuration(t: Trace, mask: int) -> bool:
    return mask & ~t.full_mask == 0 and t.closure(mask) == mask


def event_successors(c: Configuration) -> list[tuple[Event, Configuration]]:
    t = c.trace
    out = []
    for i in range(len(t)):
        if not c.mask >> i & 1 and (t.down[i] & ~(1 << i)) & ~c.mask == 0:
            out.append((Event(i, t.labels[i]), Configuration._raw(t, c.mask | 1 << i)))
    return out


def action_successors(c: Configuration, a: str) -> list[Configuration]:
    if a not in c.trace.alphabet:
        raise UnknownAction(a)
    return [c2 for e, c2 in event_successors(c) if e.label == a]


def configurations(t: Trace) -> set[Configuration]:
    """All configurations, found by breadth-first search over event successors."""
    seen = {0}
    queue = deque([0])
    while queue:
        m = queue.popleft()
        for i in range(len(t)):
            if not m >> i & 1 and (t.down[i] & ~(1 << i)) & ~m == 0:
                m2 = m | 1 << i
                if m2 not in seen:
                    seen.add(m2)
                    queue.append(m2)
    return {Configuration._raw(t, m) for m in seen}


def max_event(c: Configuration, i: str) -> Event | None:
    local = c.mask & c.trace.located(i)
    if not local:
        return None
    # ids follow a linearization and i-events form a chain
    top = local.bit_length() - 1
    return Event(top, c.trace.labels[top])


def maxset(c: Configuration) -> set[Event]:
    out = set()
    for p in c.trace.alphabet.processes:
        e = max_event(c, p)
        if e is not None:
            out.add(e)
    return out


def i_view(c: Configuration, i: str) -> Configuration:
    e = max_event(c, i)
    return Configuration._raw(c.trace, 0 if e is None else c.trace.down[e.id])


def p_view(c: Configuration, processes: Iterable[str]) -> Configuration:
    m = 0
    for i in processes:
        m |= i_view(c, i).mask
    return Configuration._raw(c.trace, m)


def prime_of(e: Event | int, t: Trace) -> Configuration:
    idx = e.id if isinstance(e, Event) else e
    return Configuration._raw(t, t.down[idx])


def full_configuration(t: Trace) -> Configuration:
    return Configuration._raw(t, t.full_mask)
