"""Context-free grammars in Chomsky normal form.

A production is ``(lhs, rhs)`` with ``rhs`` a tuple: two nonterminals, one
terminal, or empty (the start symbol's epsilon rule).  Terminals and
nonterminals must be disjoint so a length-one body is unambiguous.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from itertools import count
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

from .errors import InputError

Production = Tuple[str, Tuple[str, ...]]


@dataclass(frozen=True)
class CnfGrammar:
    nonterminals: FrozenSet[str]
    terminals: FrozenSet[str]
    start: str
    productions: FrozenSet[Production]

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(
            self, "productions", frozenset((lhs, tuple(rhs)) for lhs, rhs in self.productions)
        )
        problems = cnf_violations(self)
        if problems:
            raise InputError("; ".join(problems))

    @property
    def size(self) -> int:
        """Total symbol count: one for each left side plus the body length."""
        return sum(1 + len(rhs) for _, rhs in self.productions)

    def rules_for(self, lhs: str) -> List[Tuple[str, ...]]:
        return sorted(rhs for a, rhs in self.productions if a == lhs)

    def to_json(self) -> dict:
        prods = []
        for lhs, rhs in sorted(self.productions):
            if not rhs:
                body = "eps"
            elif len(rhs) == 1:
                body = rhs[0]
            else:
                body = list(rhs)
            prods.append({"lhs": lhs, "rhs": body})
        return {
            "nonterminals": sorted(self.nonterminals),
            "terminals": sorted(self.terminals),
            "start": self.start,
            "productions": prods,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CnfGrammar":
        try:
            prods = []
            for p in data["productions"]:
                rhs = p["rhs"]
                if rhs == "eps":
                    body: Tuple[str, ...] = ()
                elif isinstance(rhs, str):
                    body = (rhs,)
                else:
                    body = tuple(rhs)
                prods.append((p["lhs"], body))
            return cls(data["nonterminals"], data["terminals"], data["start"], prods)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed grammar JSON: {exc}") from exc


def cnf_violations(g: CnfGrammar) -> List[str]:
    """Every reason ``g`` is not a well-formed CNF grammar (empty if fine)."""
    out = []
    if g.start not in g.nonterminals:
        out.append(f"start symbol {g.start!r} is not a nonterminal")
    if g.nonterminals & g.terminals:
        out.append(f"symbols used as both terminal and nonterminal: {sorted(g.nonterminals & g.terminals)}")
    start_nullable = False
    for lhs, rhs in g.productions:
        if lhs not in g.nonterminals:
            out.append(f"undeclared left side {lhs!r}")
        if len(rhs) == 0:
            if lhs != g.start:
                out.append(f"epsilon rule for non-start symbol {lhs!r}")
            start_nullable = True
        elif len(rhs) == 1:
            if rhs[0] not in g.terminals:
                out.append(f"rule {lhs} -> {rhs[0]} is not a terminal rule")
        elif len(rhs) == 2:
            for sym in rhs:
                if sym not in g.nonterminals:
                    out.append(f"rule {lhs} -> {' '.join(rhs)} has non-nonterminal {sym!r}")
        else:
            out.append(f"rule {lhs} -> {' '.join(rhs)} is too long for CNF")
    if start_nullable and any(g.start in rhs for _, rhs in g.productions if len(rhs) == 2):
        out.append("start symbol has an epsilon rule and appears on a right side")
    return out


def load_grammar(path) -> CnfGrammar:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read grammar {path}: {exc}") from exc
    return CnfGrammar.from_json(data)


def cyk_accepts(g: CnfGrammar, w) -> bool:
    w = tuple(w)
    bad = [s for s in w if s not in g.terminals]
    if bad:
        raise InputError(f"symbols {bad} are not terminals of the grammar")
    n = len(w)
    if n == 0:
        return (g.start, ()) in g.productions
    by_terminal: Dict[str, Set[str]] = defaultdict(set)
    binary = []
    for lhs, rhs in g.productions:
        if len(rhs) == 1:
            by_terminal[rhs[0]].add(lhs)
        elif len(rhs) == 2:
            binary.append((lhs, rhs[0], rhs[1]))
    # table[i][l] = nonterminals deriving w[i:i+l]
    table = [[set() for _ in range(n + 1)] for _ in range(n)]
    for i, sym in enumerate(w):
        table[i][1] = set(by_terminal[sym])
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            cell = table[i][length]
            for split in range(1, length):
                left, right = table[i][split], table[i + split][length - split]
                if not left or not right:
                    continue
                for lhs, b, c in binary:
                    if b in left and c in right:
                        cell.add(lhs)
    return g.start in table[0][n]


def generating(productions: Iterable[Production], nonterminals: Iterable[str]) -> Set[str]:
    nts = set(nonterminals)
    prods = list(productions)
    gen: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in prods:
            if lhs in gen:
                continue
            if all(s in gen or s not in nts for s in rhs):
                gen.add(lhs)
                changed = True
    return gen


def reachable(productions: Iterable[Production], start: str, nonterminals: Iterable[str]) -> Set[str]:
    nts = set(nonterminals)
    by_lhs: Dict[str, List[Tuple[str, ...]]] = defaultdict(list)
    for lhs, rhs in productions:
        by_lhs[lhs].append(rhs)
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for rhs in by_lhs[a]:
            for s in rhs:
                if s in nts and s not in seen:
                    seen.add(s)
                    stack.append(s)
    return seen


def remove_useless(g: CnfGrammar) -> CnfGrammar:
    """Drop non-generating, then unreachable, nonterminals.  Language unchanged."""
    gen = generating(g.productions, g.nonterminals) | {g.start}
    prods = [(l, r) for l, r in g.productions if l in gen and all(s in gen or s in g.terminals for s in r)]
    reach = reachable(prods, g.start, g.nonterminals)
    prods = [(l, r) for l, r in prods if l in reach]
    # unused terminals stay: they are part of the word type
    return CnfGrammar(reach, g.terminals, g.start, prods)


@dataclass(frozen=True)
class PrefixGrammarReport:
    grammar: CnfGrammar
    size_before_units: int
    input_size: int
    intermediate: FrozenSet[Production]


def _fresh(base: str, taken: Set[str]) -> str:
    if base not in taken:
        return base
    for i in count(1):
        cand = f"{base}{i}"
        if cand not in taken:
            return cand
    raise AssertionError("unreachable")


def prefix_closure_cnf_report(g: CnfGrammar) -> PrefixGrammarReport:
    # A -> B C with C non-generating would otherwise let A_p -> B_p
    # produce prefixes of words A never derives
    if g.start not in generating(g.productions, g.nonterminals):
        # no words, so no prefixes either
        empty = CnfGrammar([g.start], g.terminals, g.start, [])
        return PrefixGrammarReport(empty, 0, g.size, frozenset())
    g = remove_useless(g)
    taken = set(g.nonterminals) | set(g.terminals)
    pname: Dict[str, str] = {}
    for a in sorted(g.nonterminals):
        pname[a] = _fresh(a + "_p", taken)
        taken.add(pname[a])
    new_start = _fresh(g.start + "'", taken)
    taken.add(new_start)

    # the old start's epsilon rule is dead once S' takes over; S' -> eps covers it
    rules: Set[Production] = {p for p in g.productions if p[1]}
    rules.add((new_start, ()))
    rules.add((new_start, (pname[g.start],)))
    for lhs, rhs in g.productions:
        if len(rhs) == 1:
            rules.add((pname[lhs], rhs))
        elif len(rhs) == 2:
            b, c = rhs
            rules.add((pname[lhs], (pname[b],)))
            rules.add((pname[lhs], (b, pname[c])))
    nonterminals = set(g.nonterminals) | set(pname.values()) | {new_start}
    size_before = sum(1 + len(r) for _, r in rules)
    intermediate = frozenset(rules)

    rules = _eliminate_units(rules, nonterminals)
    nonterminals = {l for l, _ in rules} | {s for _, r in rules for s in r if s in nonterminals}
    nonterminals.add(new_start)
    out = remove_useless(CnfGrammar(nonterminals, g.terminals, new_start, rules))
    return PrefixGrammarReport(out, size_before, g.size, intermediate)


def prefix_closure_cnf(g: CnfGrammar) -> CnfGrammar:
    """CNF grammar generating every prefix of every word of ``g``, plus epsilon.

    Each nonterminal A gets a twin A_p deriving the nonempty prefixes of
    A's words; a fresh start symbol derives epsilon or S_p.  The unit rules
    A_p -> B_p this introduces are then removed to restore CNF.
    """
    return prefix_closure_cnf_report(g).grammar


def _eliminate_units(rules: Set[Production], nonterminals: Set[str]) -> Set[Production]:
    def is_unit(rhs):
        return len(rhs) == 1 and rhs[0] in nonterminals

    unit_edges: Dict[str, Set[str]] = defaultdict(set)
    for lhs, rhs in rules:
        if is_unit(rhs) and rhs[0] != lhs:
            unit_edges[lhs].add(rhs[0])

    # merge strongly connected groups of unit rules into one representative
    rep = {}
    for comp in _sccs(sorted(nonterminals), unit_edges):
        r = min(comp)
        for a in comp:
            rep[a] = r

    def ren(sym):
        return rep.get(sym, sym)

    merged: Set[Production] = set()
    for lhs, rhs in rules:
        nl, nr = ren(lhs), tuple(ren(s) for s in rhs)
        if is_unit(nr) and nr[0] == nl:
            continue
        merged.add((nl, nr))

    # remaining unit graph is acyclic; expand bodies bottom-up so each
    # representative's non-unit body set is built once and shared
    bodies: Dict[str, Set[Tuple[str, ...]]] = defaultdict(set)
    units: Dict[str, Set[str]] = defaultdict(set)
    for lhs, rhs in merged:
        if is_unit(rhs):
            units[lhs].add(rhs[0])
        else:
            bodies[lhs].add(rhs)

    done: Dict[str, FrozenSet[Tuple[str, ...]]] = {}

    def expand(a):
        if a in done:
            return done[a]
        acc = set(bodies[a])
        for b in sorted(units[a]):
            acc |= expand(b)
        done[a] = frozenset(acc)
        return done[a]

    heads = {l for l, _ in merged}
    out: Set[Production] = set()
    for a in sorted(heads):
        for rhs in expand(a):
            out.add((a, rhs))
    return out


def _sccs(nodes, edges) -> List[List[str]]:
    """Tarjan's algorithm, iterative."""
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    on_stack: Set[str] = set()
    stack: List[str] = []
    result: List[List[str]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(edges.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == v:
                        break
                result.append(comp)
    return result
