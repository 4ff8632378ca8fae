"""Slow reference implementations used to cross-check everything else.

Each function follows its definition literally, with memoization as the
only optimization.  Nothing here imports the modules it checks, so a bug
in the fast code cannot leak into its own oracle.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, FrozenSet, Iterable, Optional, Sequence, Set, Tuple

from .errors import ResourceError

Word = Tuple

MAX_NODES = 10_000_000


@dataclass(frozen=True)
class LanguageOracle:
    membership: Callable[[Word], bool]
    alphabet: Tuple
    max_len: int


def words_upto(alphabet: Sequence, max_len: int):
    for n in range(max_len + 1):
        yield from product(tuple(alphabet), repeat=n)


def enumerate_language(o: LanguageOracle) -> Set[Word]:
    """{ w : |w| <= max_len, w in L }"""
    return {w for w in words_upto(o.alphabet, o.max_len) if o.membership(w)}


def prefix_set(words: Iterable) -> Set[Word]:
    """All prefixes, epsilon included, of the given words."""
    out: Set[Word] = set()
    for w in words:
        w = tuple(w)
        out.update(w[:i] for i in range(len(w) + 1))
    return out


def contractible_bruteforce(o: LanguageOracle) -> Optional[Tuple[Word, Word]]:
    """None if every member's one-letter-shorter prefix is a member, else the first failure."""
    for w in words_upto(o.alphabet, o.max_len):
        if w and o.membership(w) and not o.membership(w[:-1]):
            return (w, w[:-1])
    return None


def nfa_member(alphabet, start, final, transitions) -> Callable[[Word], bool]:
    """Membership by searching for an accepting path, no subset construction."""
    edges = {}
    for src, sym, dst in transitions:
        edges.setdefault((src, sym), []).append(dst)
    final = frozenset(final)

    @lru_cache(maxsize=None)
    def run(state, w):
        if not w:
            return state in final
        return any(run(t, w[1:]) for t in edges.get((state, w[0]), ()))

    def member(w):
        w = tuple(w)
        return any(run(s, w) for s in start)

    return member


def nfa_oracle(nfa, max_len: int) -> LanguageOracle:
    """Oracle over an automaton's raw fields."""
    member = nfa_member(nfa.alphabet, nfa.start, nfa.final, nfa.transitions)
    return LanguageOracle(member, tuple(sorted(nfa.alphabet)), max_len)


def cfg_member(grammar) -> Callable[[Word], bool]:
    """Membership by top-down derivation over substrings."""
    rules = {}
    for lhs, rhs in grammar.productions:
        rules.setdefault(lhs, []).append(tuple(rhs))

    @lru_cache(maxsize=None)
    def derives(a, w):
        for rhs in rules.get(a, ()):
            if len(rhs) == 0 and not w:
                return True
            if len(rhs) == 1 and w == rhs:
                return True
            if len(rhs) == 2 and len(w) >= 2:
                if any(derives(rhs[0], w[:i]) and derives(rhs[1], w[i:]) for i in range(1, len(w))):
                    return True
        return False

    return lambda w: derives(grammar.start, tuple(w))


def cfg_words(grammar, max_len: int) -> Set[Word]:
    """Every word of length <= max_len the grammar generates, built bottom-up
    by length from the productions rather than recognized."""
    by_len = {a: [set() for _ in range(max_len + 1)] for a in grammar.nonterminals}
    for lhs, rhs in grammar.productions:
        if len(rhs) == 0:
            by_len[lhs][0].add(())
        elif len(rhs) == 1 and max_len >= 1:
            by_len[lhs][1].add(tuple(rhs))
    binary = [(lhs, tuple(rhs)) for lhs, rhs in grammar.productions if len(rhs) == 2]
    for n in range(2, max_len + 1):
        # in CNF every binary part has length >= 1, so length n only needs shorter parts
        for lhs, (b, c) in binary:
            out = by_len[lhs][n]
            for i in range(1, n):
                for u in by_len[b][i]:
                    for v in by_len[c][n - i]:
                        out.add(u + v)
    return set().union(*by_len[grammar.start])


def prefix_language_bruteforce(member, alphabet, max_len: int, ext_len: int, members=None) -> Set[Word]:
    """Prefixes of length <= max_len of members of length <= ext_len.

    ``members`` may be given directly (e.g. from :func:`cfg_words`) to skip
    enumerating every word up to ``ext_len``.
    """
    if members is None:
        members = {w for w in words_upto(alphabet, ext_len) if member(w)}
    return {p for p in prefix_set(w for w in members if len(w) <= ext_len) if len(p) <= max_len}


def nfa_bounded_prefixes(alphabet, start, final, transitions, max_len: int, ext_len: int) -> Set[Word]:
    """Words p with |p| <= max_len such that pu is accepted for some |pu| <= ext_len.

    Walks words in order carrying the set of states reached, and asks
    whether one of them reaches a final state within the remaining length.
    """
    edges = {}
    for src, sym, dst in transitions:
        edges.setdefault((src, sym), set()).add(dst)
    states = {s for s, _, _ in transitions} | {d for _, _, d in transitions} | set(start) | set(final)
    # finish[k]: states that reach a final state in at most k steps
    finish = [set(final)]
    for _ in range(ext_len):
        prev = finish[-1]
        finish.append(prev | {q for q in states for a in alphabet if edges.get((q, a), set()) & prev})
    out: Set[Word] = set()
    stack = [((), frozenset(start))]
    while stack:
        w, here = stack.pop()
        if len(w) <= ext_len and here & finish[ext_len - len(w)]:
            out.add(w)
        if len(w) < max_len:
            for a in alphabet:
                nxt = frozenset(t for q in here for t in edges.get((q, a), ()))
                if nxt:
                    stack.append((w + (a,), nxt))
    return out


# -- edit distance -------------------------------------------------------------


def _edits(w: Word, alphabet, weights):
    """Every single edit of w: (cost, new word).  Infinite weights are skipped."""
    alpha, beta, gamma, delta = weights
    inf = float("inf")
    if alpha != inf:
        for i, x in enumerate(w):
            for a in alphabet:
                if a != x:
                    yield alpha, w[:i] + (a,) + w[i + 1 :]
    if beta != inf:
        for i in range(len(w) + 1):
            for a in alphabet:
                yield beta, w[:i] + (a,) + w[i:]
    if gamma != inf:
        for i in range(len(w)):
            yield gamma, w[:i] + w[i + 1 :]
    if delta != inf:
        for i in range(len(w) - 1):
            if w[i] != w[i + 1]:
                yield delta, w[:i] + (w[i + 1], w[i]) + w[i + 2 :]


def edit_distance_bruteforce(o: LanguageOracle, weights, w, cost_cap, max_nodes: int = MAX_NODES):
    """Uniform-cost search over words; the first member popped gives the distance.

    ``o`` is the oracle for the target language (pass P(L) for the open
    measure).  Word length is capped at |w| + max insertions affordable
    under ``cost_cap``; exceeding the cap raises ResourceError.
    """
    w = tuple(w)
    cost_cap = Fraction(cost_cap)
    beta = weights[1]
    if beta == float("inf") or beta == 0:
        max_len = len(w) + (0 if beta == float("inf") else o.max_len)
    else:
        max_len = len(w) + int(cost_cap // Fraction(beta))
    frontier = [(Fraction(0), w)]
    best = {w: Fraction(0)}
    nodes = 0
    while frontier:
        cost, u = heapq.heappop(frontier)
        if cost > best.get(u, cost):
            continue
        if o.membership(u):
            return cost
        nodes += 1
        if nodes > max_nodes:
            raise ResourceError("edit oracle ran out of nodes")
        for c, v in _edits(u, o.alphabet, weights):
            nc = cost + c
            if nc > cost_cap or len(v) > max_len:
                continue
            if nc < best.get(v, nc + 1):
                best[v] = nc
                heapq.heappush(frontier, (nc, v))
    raise ResourceError(f"no member of the language within cost {cost_cap}")


# -- consistency -----------------------------------------------------------------


def open_dconsistency_bruteforce(member, domains, support_len_bound: int, alphabet) -> list:
    """Keep d in D(X_i) iff some member of length |X| <= m <= bound has d at i
    and its first |X| letters inside the domains."""
    n = len(domains)
    kept = [set() for _ in range(n)]
    for m in range(n, support_len_bound + 1):
        head_choices = [sorted(d, key=repr) for d in domains]
        for head in product(*head_choices):
            if all(head[i] in kept[i] for i in range(n)):
                continue
            for tail in product(tuple(alphabet), repeat=m - n):
                if member(head + tail):
                    for i in range(n):
                        kept[i].add(head[i])
                    break
    return [frozenset(k) for k in kept]


def domain_consistency_bruteforce(member, domains) -> list:
    """Classic: keep d in D(X_i) iff some member of length exactly |X| has it."""
    n = len(domains)
    kept = [set() for _ in range(n)]
    for word in product(*[sorted(d, key=repr) for d in domains]):
        if member(word):
            for i in range(n):
                kept[i].add(word[i])
    return [frozenset(k) for k in kept]


def open_bconsistent_bounds(member, domains, support_len_bound: int, alphabet) -> list:
    """Bounds (min, max) of the open D-consistent domains, or None on wipeout."""
    kept = open_dconsistency_bruteforce(member, domains, support_len_bound, alphabet)
    return [(min(k), max(k)) if k else None for k in kept]


def nondecreasing_bruteforce(measure, alphabet, max_len: int):
    """First (w, wY) with measure(wY) < measure(w), else None."""
    for w in words_upto(alphabet, max_len - 1):
        mw = measure(w)
        for y in alphabet:
            if measure(w + (y,)) < mw:
                return (w, w + (y,))
    return None
