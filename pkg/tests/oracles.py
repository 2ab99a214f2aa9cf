"""Brute-force reference implementations used to cross-check the library."""

import itertools


def downclosed_subsets(t):
    """Count down-closed event sets by filtering every subset."""
    n = len(t)
    count = 0
    for mask in range(1 << n):
        ok = True
        for f in range(n):
            if mask >> f & 1:
                for e in range(n):
                    if t.leq(e, f) and not mask >> e & 1:
                        ok = False
                        break
            if not ok:
                break
        count += ok
    return count


def swap_classes(alphabet, n):
    """Number of words of length n modulo adjacent independent swaps (union-find)."""
    words = list(itertools.product(alphabet.actions, repeat=n))
    index = {w: k for k, w in enumerate(words)}
    parent = list(range(len(words)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for w in words:
        for i in range(n - 1):
            if alphabet.independent(w[i], w[i + 1]):
                v = w[:i] + (w[i + 1], w[i]) + w[i + 2:]
                a, b = find(index[w]), find(index[v])
                if a != b:
                    parent[a] = b
    return len({find(k) for k in range(len(words))})


def paths_along(A, word, s0):
    """All global-state sequences following ``word`` from ``s0``."""
    out = []

    def rec(k, seq):
        if k == len(word):
            out.append(list(seq))
            return
        for s2 in A.global_successors(seq[-1], word[k]):
            seq.append(s2)
            rec(k + 1, seq)
            seq.pop()

    rec(0, [s0])
    return out


def run_identity(A, word, seq):
    """Identify a run by the a-state chosen at each (action, occurrence) event."""
    seen = {}
    out = []
    for a, s in zip(word, seq[1:]):
        seen[a] = seen.get(a, 0) + 1
        out.append(((a, seen[a]), A.restrict(s, a)))
    return frozenset(out)


def maximal_plays_dfs(G, horizon):
    """Maximal plays by depth-first search over schedules.

    Returns (set of identities, truncated). Schedules that differ only by
    commuting independent steps collapse to one identity.
    """
    from atsgames.traces import trace_from_word

    A = G.system
    found = set()
    truncated = False

    def rec(word, seq):
        nonlocal truncated
        acts = A.enabled(seq[-1])
        if not acts:
            found.add((trace_from_word(word, G.alphabet).canonical_form(), run_identity(A, word, seq)))
            return
        if len(word) == horizon:
            truncated = True
            return
        for a in acts:
            for s2 in A.global_successors(seq[-1], a):
                rec(word + [a], seq + [s2])

    rec([], [G.initial])
    return found, truncated
