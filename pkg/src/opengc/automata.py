"""Finite automata: acceptance, determinization and prefix closure.

Words are tuples of symbols.  Plain strings are accepted wherever a word
is expected and are split into single-character symbols.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

from .errors import InputError, ResourceError

Word = Tuple[str, ...]
Transition = Tuple[str, str, str]

DEFAULT_STATE_CAP = 10_000


def as_word(w) -> Word:
    return tuple(w)


@dataclass(frozen=True)
class Nfa:
    """Nondeterministic automaton without epsilon moves.

    State ids are opaque strings.  Instances are immutable; every
    operation returns a new automaton.
    """

    alphabet: FrozenSet[str]
    states: FrozenSet[str]
    start: FrozenSet[str]
    final: FrozenSet[str]
    transitions: FrozenSet[Transition]
    _succ: Dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for name in ("alphabet", "states", "start", "final", "transitions"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if not self.alphabet:
            raise InputError("alphabet must be nonempty")
        if not self.states:
            raise InputError("automaton needs at least one state")
        if not self.start <= self.states:
            raise InputError(f"start states {sorted(self.start - self.states)} are undeclared")
        if not self.final <= self.states:
            raise InputError(f"final states {sorted(self.final - self.states)} are undeclared")
        succ: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
        for src, sym, dst in self.transitions:
            if src not in self.states or dst not in self.states:
                raise InputError(f"transition {(src, sym, dst)} references an undeclared state")
            if sym not in self.alphabet:
                raise InputError(f"transition {(src, sym, dst)} uses symbol outside the alphabet")
            succ[(src, sym)].add(dst)
        object.__setattr__(self, "_succ", {k: frozenset(v) for k, v in succ.items()})

    def step(self, state: str, symbol: str) -> FrozenSet[str]:
        return self._succ.get((state, symbol), frozenset())

    def successors(self, state: str):
        """Yield (symbol, target) pairs leaving ``state``."""
        for sym in sorted(self.alphabet):
            for dst in sorted(self.step(state, sym)):
                yield sym, dst

    def check_word(self, w) -> Word:
        w = as_word(w)
        bad = [s for s in w if s not in self.alphabet]
        if bad:
            raise InputError(f"symbols {bad} are not in the alphabet {sorted(self.alphabet)}")
        return w

    def to_json(self) -> dict:
        return {
            "alphabet": sorted(self.alphabet),
            "states": sorted(self.states),
            "start": sorted(self.start),
            "final": sorted(self.final),
            "transitions": [
                {"from": s, "symbol": a, "to": t} for s, a, t in sorted(self.transitions)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Nfa":
        try:
            trans = [(t["from"], t["symbol"], t["to"]) for t in data.get("transitions", [])]
            return cls(
                alphabet=data["alphabet"],
                states=data["states"],
                start=data["start"],
                final=data["final"],
                transitions=trans,
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed automaton JSON: {exc}") from exc


@dataclass(frozen=True)
class Dfa(Nfa):
    """An Nfa with one start state and at most one move per (state, symbol)."""

    def __post_init__(self):
        super().__post_init__()
        if len(self.start) != 1:
            raise InputError("a DFA needs exactly one start state")
        for targets in self._succ.values():
            if len(targets) > 1:
                raise InputError("a DFA allows at most one transition per (state, symbol)")

    @property
    def initial(self) -> str:
        return next(iter(self.start))

    def delta(self, state: str, symbol: str) -> Optional[str]:
        targets = self.step(state, symbol)
        return next(iter(targets)) if targets else None


def load_automaton(path) -> Nfa:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read automaton {path}: {exc}") from exc
    return Nfa.from_json(data)


def accepts(a: Nfa, w) -> bool:
    """Subset simulation."""
    current = set(a.start)
    for sym in a.check_word(w):
        current = {t for q in current for t in a.step(q, sym)}
        if not current:
            return False
    return bool(current & a.final)


# -- prefix closure ---------------------------------------------------------


@dataclass(frozen=True)
class ClosureReport:
    """What the prefix-closure construction did.

    ``edges_scanned`` records the work of each of the two graph searches so
    callers can confirm the construction stays linear.
    """

    automaton: Nfa
    reachable: FrozenSet[str]
    useful: FrozenSet[str]
    promoted: FrozenSet[str]
    edges_scanned: Tuple[int, int]


def _search(roots: Iterable[str], adjacency: Dict[str, list]) -> Tuple[Set[str], int]:
    # one depth-first traversal; each edge is looked at once
    seen = set(roots)
    stack = list(seen)
    scanned = 0
    while stack:
        q = stack.pop()
        for t in adjacency.get(q, ()):
            scanned += 1
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen, scanned


def prefix_closure_report(a: Nfa) -> ClosureReport:
    forward: Dict[str, list] = defaultdict(list)
    backward: Dict[str, list] = defaultdict(list)
    for src, _, dst in a.transitions:
        forward[src].append(dst)
        backward[dst].append(src)
    reachable, n1 = _search(a.start, forward)
    # backward search only from reachable finals, and only through reachable states
    back_adj = {q: [p for p in backward.get(q, ()) if p in reachable] for q in reachable}
    useful, n2 = _search(a.final & reachable, back_adj)
    promoted = frozenset(useful - a.final)
    closed = type(a)(
        alphabet=a.alphabet,
        states=a.states,
        start=a.start,
        final=a.final | useful,
        transitions=a.transitions,
    )
    return ClosureReport(closed, frozenset(reachable), frozenset(useful), promoted, (n1, n2))


def prefix_closure(a: Nfa) -> Nfa:
    """Automaton for the set of prefixes of L(a).

    Every reachable state from which a final state can be reached becomes
    final.  Same states and transitions; linear time.
    """
    return prefix_closure_report(a).automaton


def is_prefix_closed(d: Dfa) -> bool:
    """Linear-time check for deterministic automata.

    The language is prefix-closed exactly when the closure construction
    promotes no state.  Only valid for DFAs: an NFA can have a promoted
    state and still denote a prefix-closed language.
    """
    if not isinstance(d, Dfa):
        raise InputError("is_prefix_closed needs a Dfa; determinize first")
    return not prefix_closure_report(d).promoted


def determinize(a: Nfa, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Subset construction over reachable subsets.

    Subset states are named ``{q1,q2}`` with members sorted.  The empty
    subset is never materialised, so the result may be partial.
    """

    def name(subset):
        return "{" + ",".join(sorted(subset)) + "}"

    start = frozenset(a.start)
    seen = {start: name(start)}
    queue = deque([start])
    transitions = []
    while queue:
        subset = queue.popleft()
        for sym in sorted(a.alphabet):
            target = frozenset(t for q in subset for t in a.step(q, sym))
            if not target:
                continue
            if target not in seen:
                if len(seen) >= state_cap:
                    raise ResourceError(f"determinization exceeded {state_cap} states")
                seen[target] = name(target)
                queue.append(target)
            transitions.append((seen[subset], sym, seen[target]))
    final = [seen[s] for s in seen if s & a.final]
    return Dfa(
        alphabet=a.alphabet,
        states=seen.values(),
        start=[seen[start]],
        final=final,
        transitions=transitions,
    )


def has_extension(a: Nfa, w, max_extra: Optional[int] = None) -> bool:
    """Does some word ``wu`` belong to L(a)?

    If any extension exists, one of length at most ``|states|`` exists, so
    the default bound makes the answer exact.
    """
    if max_extra is None:
        max_extra = len(a.states)
    current = set(a.start)
    for sym in a.check_word(w):
        current = {t for q in current for t in a.step(q, sym)}
    frontier = set(current)
    seen = set(current)
    for _ in range(max_extra + 1):
        if seen & a.final:
            return True
        frontier = {t for q in frontier for _, t in a.successors(q)} - seen
        if not frontier:
            break
        seen |= frontier
    return bool(seen & a.final)


def from_words(words: Iterable, alphabet: Iterable[str]) -> Nfa:
    """Trie automaton for a finite language; handy for fixtures."""
    states = {_trie_id(())}
    transitions = set()
    final = set()
    for w in map(as_word, words):
        for i, sym in enumerate(w):
            src, dst = _trie_id(w[:i]), _trie_id(w[: i + 1])
            states.add(dst)
            transitions.add((src, sym, dst))
        final.add(_trie_id(w))
    return Nfa(
        alphabet=alphabet,
        states=states,
        start=[_trie_id(())],
        final=final,
        transitions=transitions,
    )


def _trie_id(prefix: Word) -> str:
    return "t:" + "\x1f".join(prefix)
