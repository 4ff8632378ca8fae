"""Propagation sessions for open global constraints.

A session holds one constraint over a growing sequence of variables.
While open it filters with a contractible approximation of the
constraint; once closed it filters with the constraint itself.

Regular constraints are filtered on a layered state graph: forward
reachability from the start states, backward reachability from the
accepting layer, and a value survives at position i when some edge
labelled with it joins the two.  Catalog constraints are filtered by
enumerating supports over the current domains.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import algebra
from .algebra import ConstraintDef
from .automata import Nfa, prefix_closure
from .errors import InputError, LifecycleError, ResourceError

OPEN, CLOSED, FAILED = "open", "closed", "failed"

ENUMERATION_CAP = 1_000_000


@dataclass(frozen=True)
class Approximation:
    constraint: ConstraintDef
    tight: bool
    note: str


def _kind(c: ConstraintDef) -> str:
    return re.match(r"[a-z_]*", c.name).group(0)


CONTRACTIBLE = {
    "alldifferent",
    "weak_gcc",
    "sequence",
    "sliding_sum",
    "lex_leq",
    "precedence",
    "contiguity",
    "no_peak",
    "true",
}


def registered_approximation(c: ConstraintDef) -> Approximation:
    """The contractible constraint used while the sequence is open."""
    kind = _kind(c)
    vtype = c.vtype
    rel = c.params.get("relation")
    if kind in CONTRACTIBLE:
        return Approximation(c, True, "contractible")
    if kind == "gcc":
        p = c.params
        return Approximation(algebra.weak_gcc(p["values"], p["upper"], vtype), True, "lower bounds dropped")
    if kind == "among":
        p = c.params
        if p["lower"] == 0:
            return Approximation(c, True, "contractible")
        return Approximation(algebra.among(0, p["upper"], p["values"], vtype), True, "lower bound dropped")
    if kind == "sum":
        if rel == "<=":
            return Approximation(c, True, "contractible")
        if rel == "=":
            return Approximation(
                algebra.sum_constraint("<=", c.params["bound"], vtype),
                1 in vtype,
                "upper-bound form",
            )
        return Approximation(algebra.true_constraint(vtype), True, "trivial")
    if kind in ("nvalue", "peak"):
        if rel == "<=":
            return Approximation(c, True, "contractible")
        if rel == "=":
            build = algebra.nvalue if kind == "nvalue" else algebra.peak
            return Approximation(build(c.params["n"], vtype, "<="), True, "upper-bound form")
        return Approximation(algebra.true_constraint(vtype), True, "trivial")
    if kind == "precedence_strict":
        p = c.params
        return Approximation(algebra.precedence(p["s"], p["t"], vtype), True, "occurrence requirement dropped")
    if kind == "lex_lt":
        return Approximation(_lex_lt_prefixes(c), True, "prefix closure")
    if kind == "cfg":
        from .grammar import prefix_closure_cnf

        return Approximation(algebra.cfg(prefix_closure_cnf(c.params["grammar"])), True, "prefix grammar")
    if kind == "regular":
        return Approximation(algebra.regular(prefix_closure(c.params["automaton"])), True, "prefix automaton")
    return Approximation(algebra.true_constraint(vtype), False, "trivial; not certified tight")


def _lex_lt_prefixes(c: ConstraintDef) -> ConstraintDef:
    # w extends to a word below z unless it is already above z, or equals
    # z's prefix with nothing but minimal values left in z
    z = c.params["z"]
    key = {v: i for i, v in enumerate(c.vtype)}

    def pred(w):
        k = min(len(w), len(z))
        a, b = [key[x] for x in w[:k]], [key[x] for x in z[:k]]
        if a != b:
            return a < b
        return any(key[x] > 0 for x in z[len(w) :])

    return ConstraintDef("lex_lt_prefix", pred, c.vtype, params=dict(c.params))


class Session:
    """One open constraint over a growing variable sequence.

    Mutators return the session so calls can be chained.  Propagation is
    never implicit: call :meth:`propagate` after adding or restricting.
    """

    def __init__(self, constraint, approximation: Optional[Approximation] = None):
        if isinstance(constraint, Nfa):
            self.automaton: Optional[Nfa] = constraint
            self.open_automaton: Optional[Nfa] = prefix_closure(constraint)
            self.constraint: Optional[ConstraintDef] = None
            self.approximation: Optional[Approximation] = None
            self.vtype: Tuple = tuple(sorted(constraint.alphabet))
            self.tight = True
        elif isinstance(constraint, ConstraintDef):
            self.automaton = self.open_automaton = None
            self.constraint = constraint
            self.approximation = approximation or registered_approximation(constraint)
            self.vtype = constraint.vtype
            self.tight = self.approximation.tight
        else:
            raise InputError(f"cannot open a session on {type(constraint).__name__}")
        self._order = {v: i for i, v in enumerate(self.vtype)}
        self.phase = OPEN
        self.domains: List[frozenset] = []
        self.trace: List[dict] = []

    # -- lifecycle ----------------------------------------------------------

    def add_variable(self, domain) -> "Session":
        if self.phase != OPEN:
            raise LifecycleError(f"cannot add a variable to a {self.phase} session")
        self.domains.append(self._check_values(domain))
        self._log("add")
        return self

    def restrict_domain(self, index: int, values) -> "Session":
        if self.phase == FAILED:
            raise LifecycleError("session has failed")
        if not 0 <= index < len(self.domains):
            raise InputError(f"no variable at index {index}")
        values = self._check_values(values)
        if not values <= self.domains[index]:
            extra = self._sorted(values - self.domains[index])
            raise InputError(f"restriction adds values {extra} outside the current domain")
        self.domains[index] = values
        self._log("restrict")
        return self

    def close(self) -> "Session":
        if self.phase != OPEN:
            raise LifecycleError(f"cannot close a {self.phase} session")
        self.phase = CLOSED
        self._log("close")
        return self

    # -- filtering ------------------------------------------------------------

    def propagate(self) -> "Session":
        if self.phase == FAILED:
            return self
        if self.automaton is not None:
            nfa = self.open_automaton if self.phase == OPEN else self.automaton
            new = layered_filter(nfa, self.domains)
        else:
            c = self.approximation.constraint if self.phase == OPEN else self.constraint
            new = support_filter(c, self.domains)
        self._install(new)
        self._log("propagate")
        return self

    def propagate_sum_bounds(self) -> "Session":
        """Bounds filtering for Sum(=N) over non-negative integers.

        Open: max(X_i) <= N - sum of the other minima.  Closed: also
        min(X_i) >= N - sum of the other maxima.  Iterated to fixpoint.
        """
        c = self.constraint
        if c is None or _kind(c) != "sum" or c.params.get("relation") != "=":
            raise InputError("sum bounds propagation needs a Sum(=N) constraint")
        if any(not isinstance(v, int) or v < 0 for v in self.vtype):
            raise InputError("sum bounds propagation needs non-negative integer types")
        if self.phase == FAILED:
            return self
        n = c.params["bound"]
        doms = [set(d) for d in self.domains]
        if not self.domains:
            if self.phase == CLOSED and n != 0:
                self.phase = FAILED
            self._log("propagate_sum_bounds")
            return self
        changed = True
        while changed and all(doms):
            changed = False
            lows = [min(d) for d in doms]
            highs = [max(d) for d in doms]
            for i, d in enumerate(doms):
                cap = n - (sum(lows) - lows[i])
                floor = n - (sum(highs) - highs[i]) if self.phase == CLOSED else None
                keep = {v for v in d if v <= cap and (floor is None or v >= floor)}
                if keep != d:
                    doms[i] = keep
                    changed = True
                    break
        self._install([frozenset(d) for d in doms])
        self._log("propagate_sum_bounds")
        return self

    # -- views ------------------------------------------------------------------

    def snapshot(self) -> dict:
        return {"phase": self.phase, "domains": [self._sorted(d) for d in self.domains]}

    @property
    def guarantee(self) -> str:
        if self.phase == OPEN and not self.tight:
            return "sound"
        return "open D-consistent" if self.phase == OPEN else "domain consistent"

    def _install(self, new):
        # None: no variables, and the empty sequence is not accepted
        if new is None:
            self.phase = FAILED
            return
        self.domains = list(new)
        if any(not d for d in self.domains):
            self.phase = FAILED

    def _check_values(self, values) -> frozenset:
        values = frozenset(values)
        bad = [v for v in values if v not in self._order]
        if bad:
            raise InputError(f"values {sorted(map(repr, bad))} are outside the static type {list(self.vtype)}")
        return values

    def _sorted(self, values) -> list:
        return sorted(values, key=self._order.__getitem__)

    def _log(self, op):
        self.trace.append({"op": op, **self.snapshot()})


def layered_filter(nfa: Nfa, domains: Sequence[frozenset]) -> Optional[List[frozenset]]:
    """Domain consistency for L(nfa) on words of length exactly len(domains).

    Returns None when no such word exists and there are no variables to
    empty (the empty-sequence case).
    """
    n = len(domains)
    forward = [set(nfa.start)]
    for d in domains:
        forward.append({t for q in forward[-1] for v in d for t in nfa.step(q, v)})
    backward = [set() for _ in range(n + 1)]
    backward[n] = forward[n] & nfa.final
    for i in range(n - 1, -1, -1):
        backward[i] = {q for q in forward[i] for v in domains[i] if nfa.step(q, v) & backward[i + 1]}
    if n == 0:
        return None if not backward[0] else []
    out = []
    for i, d in enumerate(domains):
        out.append(frozenset(v for v in d if any(nfa.step(q, v) & backward[i + 1] for q in backward[i])))
    return out


def support_filter(c: ConstraintDef, domains: Sequence[frozenset]) -> Optional[List[frozenset]]:
    """Keep each value that appears in some satisfying full assignment."""
    n = len(domains)
    if n == 0:
        return [] if c.predicate(()) else None
    size = 1
    for d in domains:
        size *= max(len(d), 1)
    if size > ENUMERATION_CAP:
        raise ResourceError(f"support enumeration over {size} tuples exceeds {ENUMERATION_CAP}")
    kept = [set() for _ in range(n)]
    for word in product(*[sorted(d, key=repr) for d in domains]):
        if all(word[i] in kept[i] for i in range(n)):
            continue
        if c.predicate(word):
            for i, v in enumerate(word):
                kept[i].add(v)
    return [frozenset(k) for k in kept]


def open_session(spec, base_dir=None) -> Session:
    """Open a session from an automaton, a constraint or a JSON constraint spec."""
    if isinstance(spec, dict):
        if spec.get("kind") == "regular":
            from .automata import load_automaton

            p = Path(spec.get("automaton", ""))
            if base_dir is not None and not p.is_absolute():
                p = Path(base_dir) / p
            return Session(load_automaton(p))
        spec = algebra.from_spec(spec, base_dir)
    return Session(spec)


def run_scenario(data: dict, base_dir=None) -> Tuple[Session, List[dict]]:
    """Replay a scenario; returns the session and one snapshot per event."""
    if not isinstance(data, dict) or "constraint" not in data:
        raise InputError("scenario needs a 'constraint'")
    s = open_session(data["constraint"], base_dir)
    out = []
    for ev in data.get("events", []):
        op = ev.get("op") if isinstance(ev, dict) else None
        if op == "add":
            s.add_variable(ev.get("domain", []))
        elif op == "restrict":
            s.restrict_domain(ev.get("var", -1), ev.get("values", []))
        elif op == "propagate":
            s.propagate()
        elif op == "propagate_sum_bounds":
            s.propagate_sum_bounds()
        elif op == "close":
            s.close()
        else:
            raise InputError(f"unknown scenario event {ev!r}")
        out.append(s.snapshot())
    return s, out
