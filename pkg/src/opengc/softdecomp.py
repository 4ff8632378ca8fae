"""Decomposition-based violation measures.

A decomposition of C over variables X1..Xn introduces auxiliary
variables U and a weighted set of elementary constraints over X and U
whose conjunction, for some value of U, is equivalent to C.  A measure
minimises a combining function of the elementary errors over U.

Variables are named strings ("X1", "A2,1,3", "N1,3", "L2"); integers in
argument positions are constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .costs import INF, Cost, is_inf, scale
from .errors import InputError, ResourceError

Term = Union[str, int]

DEFAULT_BUDGET = 1_000_000
BINARY, AMOUNT = "binary", "amount"


# -- elementary constraints ----------------------------------------------------


@dataclass(frozen=True, order=True)
class Elem:
    """An elementary constraint ``kind(args)``.

    Kinds and their meaning:
      neq(a, b)              a != b
      geq(a, b)              a >= b
      reif_in(A, X, l, u)    A = 1 iff l <= X <= u
      sum_eq(N, A1, ...)     N = A1 + ...
      sum_le(k, A1, ...)     A1 + ... <= k
      split(N, P, Q)         N = P + Q
      ge_const(N, c)         N >= c
      le_const(N, c)         N <= c
      contig(X0, R0, L1, X1, R1, L2, X2)
                             the contiguity window constraint, see below
    """

    kind: str
    args: Tuple[Term, ...]

    def __str__(self):
        return f"{self.kind}({', '.join(map(str, self.args))})"

    def variables(self) -> Tuple[str, ...]:
        return tuple(t for t in self.args if isinstance(t, str))

    def subst(self, theta: Mapping[str, Term]) -> "Elem":
        return Elem(self.kind, tuple(theta.get(t, t) if isinstance(t, str) else t for t in self.args))

    def error(self, v: Mapping[str, int], mode: str = BINARY) -> Fraction:
        vals = [v[t] if isinstance(t, str) else t for t in self.args]
        slack = _SLACK[self.kind](vals)
        if mode == AMOUNT and self.kind in _LINEAR:
            return Fraction(slack)
        return Fraction(1 if slack else 0)


def _contig(vals):
    # L_i: a 1 occurs left of i; R_i: a 1 occurs right of i.  The
    # implications propagate both flags and the last clause forbids a 0
    # with 1s on both sides.
    x0, r0, l1, x1, r1, l2, x2 = vals
    ok = (
        (not x0 or l1)
        and (not l1 or l2)
        and (not x1 or l2)
        and (not x2 or r1)
        and (not r1 or r0)
        and (not x1 or r0)
        and not (l1 and not x1 and r1)
    )
    return 0 if ok else 1


_SLACK: Dict[str, Callable[[list], int]] = {
    "neq": lambda a: 0 if a[0] != a[1] else 1,
    "geq": lambda a: max(0, a[1] - a[0]),
    "reif_in": lambda a: 0 if (a[0] == 1) == (a[2] <= a[1] <= a[3]) else 1,
    "sum_eq": lambda a: abs(a[0] - sum(a[1:])),
    "sum_le": lambda a: max(0, sum(a[1:]) - a[0]),
    "split": lambda a: abs(a[0] - a[1] - a[2]),
    "ge_const": lambda a: max(0, a[1] - a[0]),
    "le_const": lambda a: max(0, a[0] - a[1]),
    "contig": _contig,
}
_LINEAR = {"geq", "sum_eq", "sum_le", "split", "ge_const", "le_const"}


# -- weighted sets ---------------------------------------------------------------


class WeightedSet:
    """A finite set with non-negative weights (``inf`` allowed).

    Items not present weigh 0.  An item may be stored with weight 0, which
    makes the set improper.
    """

    def __init__(self, weights: Union[Mapping, Iterable] = ()):
        if isinstance(weights, Mapping):
            items = weights.items()
        else:
            items = ((s, Fraction(1)) for s in weights)
        self._w: Dict = {}
        for s, wt in items:
            wt = wt if is_inf(wt) else Fraction(wt)
            if wt < 0:
                raise InputError(f"negative weight for {s}")
            self._w[s] = self._w.get(s, Fraction(0)) + wt

    def __getitem__(self, s) -> Cost:
        return self._w.get(s, Fraction(0))

    def __iter__(self):
        return iter(sorted(self._w, key=_sort_key))

    def __len__(self):
        return len(self._w)

    def __contains__(self, s):
        return s in self._w

    def __eq__(self, other):
        return isinstance(other, WeightedSet) and self._w == other._w

    def __repr__(self):
        return "WeightedSet({" + ", ".join(f"{s}: {self._w[s]}" for s in self) + "})"

    def items(self):
        return [(s, self._w[s]) for s in self]

    @property
    def proper(self) -> bool:
        return all(w != 0 for w in self._w.values())

    def union(self, other: "WeightedSet") -> "WeightedSet":
        out = dict(self._w)
        for s, w in other._w.items():
            out[s] = out.get(s, Fraction(0)) + w
        return WeightedSet(out)

    def is_sub_of(self, other: "WeightedSet") -> bool:
        return all(w <= other[s] for s, w in self._w.items())

    def subst(self, theta: Mapping[str, Term]) -> "WeightedSet":
        """Apply a substitution; items it unifies have their weights summed."""
        out: Dict = {}
        for s, w in self._w.items():
            t = s.subst(theta)
            out[t] = out.get(t, Fraction(0)) + w
        return WeightedSet(out)

    def filter(self, keep: Callable) -> "WeightedSet":
        return WeightedSet({s: w for s, w in self._w.items() if keep(s)})


def _sort_key(s):
    if isinstance(s, Elem):
        return (0, s.kind, tuple(map(str, s.args)))
    return (1, repr(s))


# -- combining functions ---------------------------------------------------------


@dataclass(frozen=True)
class CombiningFunction:
    """Aggregates a weighted set of error values into one number."""

    kind: str
    monotonic: bool = True
    disjunctive: bool = True
    unit0: bool = True

    def __call__(self, errors: Mapping[Fraction, Cost]) -> Cost:
        terms = [(x, w) for x, w in errors.items() if w != 0]
        if self.kind == "sum":
            return sum((scale(w, x) for x, w in terms), Fraction(0))
        if self.kind == "max":
            return max((scale(w, x) for x, w in terms), default=Fraction(0))
        if self.kind == "count_nonzero":
            return sum((w for x, w in terms if x != 0), Fraction(0))
        if self.kind == "sum_of_squares":
            return sum((scale(w, x * x) for x, w in terms), Fraction(0))
        raise InputError(f"unknown combining function {self.kind!r}")


COMBINERS = {k: CombiningFunction(k) for k in ("sum", "max", "count_nonzero", "sum_of_squares")}


def combiner(kind: str) -> CombiningFunction:
    try:
        return COMBINERS[kind]
    except KeyError:
        raise InputError(f"unknown combining function {kind!r}; expected one of {sorted(COMBINERS)}") from None


def error_set(items: WeightedSet, v: Mapping[str, int], mode: str = BINARY) -> Dict[Fraction, Cost]:
    """Errors grouped by value, with the weights of equal errors summed."""
    out: Dict[Fraction, Cost] = {}
    for s, w in items.items():
        x = s.error(v, mode)
        out[x] = out.get(x, Fraction(0)) + w
    return out


# -- decompositions --------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """One instance ``(X, U, T', S, w)`` for a fixed length n.

    ``types`` maps every variable to its finite value tuple, or to None for
    the non-negative integers.  ``determine``, when set, computes the aux
    values from the X values; the measure then uses that single extension
    instead of minimising over all of them.
    """

    name: str
    n: int
    xs: Tuple[str, ...]
    aux: Tuple[str, ...]
    types: Mapping[str, Optional[Tuple[int, ...]]] = field(compare=False)
    items: WeightedSet = field(compare=False)
    determine: Optional[Callable[[Dict[str, int]], Dict[str, int]]] = field(default=None, compare=False)

    def valuation(self, word) -> Dict[str, int]:
        word = tuple(word)
        if len(word) != self.n:
            raise InputError(f"{self.name} instance has {self.n} variables, got {len(word)} values")
        v = dict(zip(self.xs, word))
        for x, val in v.items():
            t = self.types[x]
            if t is not None and val not in t:
                raise InputError(f"value {val!r} for {x} is outside its type {list(t)}")
        return v

    def extensions(self, v: Dict[str, int], budget: int = DEFAULT_BUDGET):
        if self.determine is not None:
            yield {**v, **self.determine(v)}
            return
        domains = []
        for u in self.aux:
            t = self.types[u]
            if t is None:
                raise InputError(f"aux variable {u} has an infinite type and no declared determination")
            domains.append(t)
        count = 0
        for vals in product(*domains):
            count += 1
            if count > budget:
                raise ResourceError(f"aux enumeration exceeded {budget} extensions")
            yield {**v, **dict(zip(self.aux, vals))}


def _xs(n):
    return tuple(f"X{i}" for i in range(1, n + 1))


def alldiff_diseq(n: int, d: int = 3) -> Decomposition:
    xs = _xs(n)
    items = WeightedSet(Elem("neq", (xs[i], xs[j])) for i in range(n) for j in range(i + 1, n))
    types = {x: tuple(range(1, d + 1)) for x in xs}
    return Decomposition("alldiff_diseq", n, xs, (), types, items)


def _indicators(n, d):
    return {(i, l, u): f"A{i},{l},{u}" for i in range(1, n + 1) for l in range(1, d + 1) for u in range(l, d + 1)}


def _indicator_values(ind, v):
    return {name: int(l <= v[f"X{i}"] <= u) for (i, l, u), name in ind.items()}


def alldiff_bounds(n: int, d: int = 3) -> Decomposition:
    """Interval decomposition: A_ilu flags X_i in [l, u]; each interval holds at most u-l+1 values."""
    xs = _xs(n)
    ind = _indicators(n, d)
    items = [Elem("reif_in", (a, f"X{i}", l, u)) for (i, l, u), a in ind.items()]
    for l in range(1, d + 1):
        for u in range(l, d + 1):
            items.append(Elem("sum_le", (u - l + 1,) + tuple(ind[(i, l, u)] for i in range(1, n + 1))))
    types = {x: tuple(range(1, d + 1)) for x in xs}
    types.update({a: (0, 1) for a in ind.values()})
    return Decomposition(
        "alldiff_bounds",
        n,
        xs,
        tuple(ind.values()),
        types,
        WeightedSet(items),
        lambda v: _indicator_values(ind, v),
    )


def contiguity_slide(n: int) -> Decomposition:
    """Contiguity over 0/1 as a slide of a 7-ary window constraint on X, L, R."""
    xs = _xs(n)
    ls = tuple(f"L{i}" for i in range(2, n + 1))
    rs = tuple(f"R{i}" for i in range(1, n))
    items = [
        Elem("contig", (f"X{i - 1}", f"R{i - 1}", f"L{i}", f"X{i}", f"R{i}", f"L{i + 1}", f"X{i + 1}"))
        for i in range(2, n)
    ]
    types = {x: (0, 1) for x in xs + ls + rs}
    return Decomposition("contiguity_slide", n, xs, ls + rs, types, WeightedSet(items))


def rising_sawtooth(n: int, d: int = 3) -> Decomposition:
    xs = _xs(n)
    items = _rs_items(n)
    types = {x: tuple(range(1, d + 1)) for x in xs}
    return Decomposition("rising_sawtooth", n, xs, (), types, WeightedSet(items))


def _rs_items(n) -> List[Elem]:
    if n <= 1:
        return []
    if n == 2:
        return [Elem("geq", ("X1", "X2"))]
    if n % 2 == 1:
        return _rs_items(n - 1) + [Elem("geq", (f"X{n}", f"X{n - 1}"))]
    return _rs_items(n - 2) + [Elem("geq", (f"X{n - 1}", f"X{n}")), Elem("geq", (f"X{n}", f"X{n - 2}"))]


def rising_sawtooth_holds(w) -> bool:
    """Even positions non-decreasing; odd positions at least their neighbours."""
    w = tuple(w)
    evens = w[1::2]
    if any(a > b for a, b in zip(evens, evens[1:])):
        return False
    for i in range(0, len(w), 2):
        for j in (i - 1, i + 1):
            if 0 <= j < len(w) and w[i] < w[j]:
                return False
    return True


def gcc_full(n: int, d: int = 4, lower: Sequence[int] = (0, 1, 0, 0), upper: Sequence[int] = (2, 2, 2, 2)) -> Decomposition:
    """Interval-count decomposition of GCC over values 1..d.

    The bound constraint on each N_lu is split into a lower item and an
    upper item so that dropping lower bounds is a plain sub-weighted set.
    """
    if len(lower) != d or len(upper) != d:
        raise InputError("gcc_full needs d lower and d upper bounds")
    xs = _xs(n)
    ind = _indicators(n, d)
    counts = {(l, u): f"N{l},{u}" for l in range(1, d + 1) for u in range(l, d + 1)}
    items = [Elem("reif_in", (a, f"X{i}", l, u)) for (i, l, u), a in ind.items()]
    for (l, u), nv in counts.items():
        items.append(Elem("sum_eq", (nv,) + tuple(ind[(i, l, u)] for i in range(1, n + 1))))
    for u in range(2, d + 1):
        for k in range(1, u):
            items.append(Elem("split", (counts[(1, u)], counts[(1, k)], counts[(k + 1, u)])))
    for (l, u), nv in counts.items():
        items.append(Elem("ge_const", (nv, sum(lower[l - 1 : u]))))
        items.append(Elem("le_const", (nv, sum(upper[l - 1 : u]))))
    types = {x: tuple(range(1, d + 1)) for x in xs}
    types.update({a: (0, 1) for a in ind.values()})
    types.update({nv: None for nv in counts.values()})

    def determine(v):
        a = _indicator_values(ind, v)
        out = dict(a)
        for (l, u), nv in counts.items():
            out[nv] = sum(a[ind[(i, l, u)]] for i in range(1, n + 1))
        return out

    return Decomposition(
        "gcc_full", n, xs, tuple(ind.values()) + tuple(counts.values()), types, WeightedSet(items), determine
    )


DECOMPOSITIONS = {
    "alldiff_diseq": alldiff_diseq,
    "alldiff_bounds": alldiff_bounds,
    "contiguity_slide": contiguity_slide,
    "rising_sawtooth": rising_sawtooth,
    "gcc_full": gcc_full,
}


def decompose(name: str, n: int, **params) -> Decomposition:
    if name not in DECOMPOSITIONS:
        raise InputError(f"unknown decomposition {name!r}; expected one of {sorted(DECOMPOSITIONS)}")
    if n < 0:
        raise InputError("length must be non-negative")
    try:
        return DECOMPOSITIONS[name](n, **params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {name}: {exc}") from exc


def catalog_predicate(name: str, **params) -> Callable:
    """The hard constraint each decomposition stands for."""
    from . import algebra

    if name in ("alldiff_diseq", "alldiff_bounds"):
        return lambda w: len(set(w)) == len(w)
    if name == "contiguity_slide":
        return algebra.contiguity().predicate
    if name == "rising_sawtooth":
        return rising_sawtooth_holds
    if name == "gcc_full":
        d = params.get("d", 4)
        c = algebra.gcc(range(1, d + 1), params.get("lower", (0, 1, 0, 0)), params.get("upper", (2, 2, 2, 2)), range(1, d + 1))
        return c.predicate
    raise InputError(f"unknown decomposition {name!r}")


def weaken(d: Decomposition, keep: Callable[[Elem], bool]) -> Decomposition:
    """Keep only the items ``keep`` accepts; aux variables and types unchanged."""
    return Decomposition(d.name, d.n, d.xs, d.aux, d.types, d.items.filter(keep), d.determine)


def drop_lower_bounds(e: Elem) -> bool:
    return e.kind != "ge_const"


# -- measures --------------------------------------------------------------------


def violation(
    d: Decomposition,
    comb: CombiningFunction,
    word,
    mode: str = BINARY,
    budget: int = DEFAULT_BUDGET,
) -> Cost:
    """Minimum over aux extensions of the combined elementary errors."""
    v = d.valuation(word)
    best = None
    for ext in d.extensions(v, budget):
        x = comb(error_set(d.items, ext, mode))
        if best is None or x < best:
            best = x
            if best == 0:
                break
    return Fraction(0) if best is None else best


class DecompositionMeasure:
    """A measure on words of every length, built from a decomposition family."""

    def __init__(self, name: str, comb: Union[str, CombiningFunction] = "count_nonzero", mode: str = BINARY,
                 keep: Optional[Callable[[Elem], bool]] = None, **params):
        self.name = name
        self.comb = combiner(comb) if isinstance(comb, str) else comb
        self.mode = mode
        self.keep = keep
        self.params = params
        decompose(name, 0, **params)  # validates the name and parameters early

    def instance(self, n: int) -> Decomposition:
        d = decompose(self.name, n, **self.params)
        return weaken(d, self.keep) if self.keep is not None else d

    def __call__(self, word) -> Cost:
        word = tuple(word)
        return violation(self.instance(len(word)), self.comb, word, self.mode)


# -- covering and semantic embedding -------------------------------------------------


@dataclass(frozen=True)
class CoveringVerdict:
    status: str  # "Covered", "NotCovered" or "Indeterminate"
    theta: Optional[Dict[str, Term]] = None
    nodes: int = 0


def _type_ok(t1, t2) -> bool:
    """T2 is a subset of T1, with None meaning the non-negative integers."""
    if t1 is None:
        return t2 is None or all(isinstance(x, int) and x >= 0 for x in t2)
    if t2 is None:
        return False
    return set(t2) <= set(t1)


def covering_check(d1: Decomposition, d2: Decomposition, budget: int = 100_000) -> CoveringVerdict:
    """Search a substitution showing d1 is covered by d2.

    Identity on X; each aux variable of d1 maps to the aux variable of d2
    with the same name, or to a constant of its own type.  Items are
    checked as soon as all their variables are mapped.
    """
    if tuple(d1.xs) != tuple(d2.xs[: len(d1.xs)]):
        return CoveringVerdict("NotCovered")
    s2 = d2.items
    candidates: Dict[str, List[Term]] = {}
    for u in d1.aux:
        opts: List[Term] = []
        if u in d2.aux and _type_ok(d1.types[u], d2.types[u]):
            opts.append(u)
        if d1.types[u] is not None:
            opts.extend(c for c in d1.types[u] if c not in opts)
        candidates[u] = opts
    order = list(d1.aux)
    position = {u: k for k, u in enumerate(order)}
    # bucket items by the last aux variable they mention
    ready: Dict[int, List[Elem]] = {k: [] for k in range(-1, len(order))}
    for s in d1.items:
        ks = [position[t] for t in s.variables() if t in position]
        ready[max(ks, default=-1)].append(s)
    if any(s not in s2 for s in ready[-1]):
        return CoveringVerdict("NotCovered")
    theta: Dict[str, Term] = {}
    nodes = 0

    def search(k):
        nonlocal nodes
        if k == len(order):
            return d1.items.subst(theta).is_sub_of(s2)
        u = order[k]
        for c in candidates[u]:
            nodes += 1
            if nodes > budget:
                raise ResourceError("covering search budget exhausted")
            theta[u] = c
            if all(s.subst(theta) in s2 for s in ready[k]) and search(k + 1):
                return True
            del theta[u]
        return False

    try:
        found = search(0)
    except ResourceError:
        return CoveringVerdict("Indeterminate", None, nodes)
    if found:
        return CoveringVerdict("Covered", dict(theta), nodes)
    return CoveringVerdict("NotCovered", None, nodes)


@dataclass(frozen=True)
class EmbeddingVerdict:
    holds: bool
    reason: str = ""
    counterexample: Optional[Tuple[Elem, Dict[str, int]]] = None


def natural_embedding(d1: Decomposition, d2: Decomposition):
    """Identity substitution, and each item mapped to itself or to its growing counterpart.

    The counterpart of ``sum_eq(N, A...)`` or ``sum_le(k, A...)`` is the
    item of the same kind and first argument whose summands include A.
    """
    theta = {u: u for u in d1.aux if u in d2.aux}
    phi = {}
    for c in d1.items:
        if c in d2.items:
            phi[c] = [c]
            continue
        match = [
            s
            for s in d2.items
            if s.kind == c.kind and s.args[:1] == c.args[:1] and set(c.args[1:]) <= set(s.args[1:])
        ]
        if len(match) == 1:
            phi[c] = match
    return phi, theta


def rs_embedding(d1: Decomposition, d2: Decomposition):
    """The embedding for the rising sawtooth at odd length n: the last item
    X_n >= X_{n-1} goes to the pair X_n >= X_{n+1}, X_{n+1} >= X_{n-1}."""
    phi = {c: [c] for c in d1.items if c in d2.items}
    n = d1.n
    if n >= 3 and n % 2 == 1:
        last = Elem("geq", (f"X{n}", f"X{n - 1}"))
        phi[last] = [Elem("geq", (f"X{n}", f"X{n + 1}")), Elem("geq", (f"X{n + 1}", f"X{n - 1}"))]
    return phi, {}


def semantic_embedding_check(
    d1: Decomposition,
    d2: Decomposition,
    phi: Mapping[Elem, Union[Sequence[Elem], Mapping[Elem, Cost]]],
    theta: Mapping[str, Term],
    comb: CombiningFunction,
    bound: int = 4,
    mode: str = BINARY,
) -> EmbeddingVerdict:
    """Check the three embedding conditions; the inequality by enumeration.

    ``phi`` maps each item of d1 (before substitution) to a part of d2,
    given as a list of items at full weight or as an item-to-weight map.
    Infinite types are enumerated over 0..bound.
    """
    # substitution: identity on X, aux into d2 variables or constants, types narrowing
    for x in d1.xs:
        if theta.get(x, x) != x:
            return EmbeddingVerdict(False, f"substitution moves {x}")
    for u, t in theta.items():
        if u not in d1.aux:
            continue
        if isinstance(t, str):
            if t not in d2.types:
                return EmbeddingVerdict(False, f"{u} maps to unknown variable {t}")
            if not _type_ok(d1.types[u], d2.types[t]):
                return EmbeddingVerdict(False, f"type of {t} is not within the type of {u}")
        elif not _type_ok(d1.types[u], (t,)):
            return EmbeddingVerdict(False, f"constant {t} is outside the type of {u}")
    full_theta = {u: theta.get(u, u) for u in d1.aux}

    # phi: every item mapped; parts jointly fit inside d2
    parts: Dict[Elem, Dict[Elem, Cost]] = {}
    for c in d1.items:
        if c not in phi:
            return EmbeddingVerdict(False, f"{c} has no image")
        img = phi[c]
        parts[c] = dict(img) if isinstance(img, Mapping) else {s: d2.items[s] for s in img}
    used: Dict[Elem, Cost] = {}
    for part in parts.values():
        for s, w in part.items():
            if s not in d2.items:
                return EmbeddingVerdict(False, f"{s} is not an item of the longer decomposition")
            used[s] = used.get(s, Fraction(0)) + w
    for s, w in used.items():
        if w > d2.items[s]:
            return EmbeddingVerdict(False, f"parts use more weight of {s} than it has")

    # inequality, item by item over the variables involved
    grouped: Dict[Elem, Dict[Elem, Cost]] = {}
    img_of: Dict[Elem, Dict[Elem, Cost]] = {}
    for c, w in d1.items.items():
        cs = c.subst(full_theta)
        grouped.setdefault(cs, {})
        grouped[cs][c] = w
        merged = img_of.setdefault(cs, {})
        for s, ws in parts[c].items():
            merged[s] = merged.get(s, Fraction(0)) + ws
    checks = [(cs, sum(origin.values(), Fraction(0)), WeightedSet(img_of[cs])) for cs, origin in grouped.items()]
    for cs, weight, part in checks:
        names = sorted(set(cs.variables()) | {t for s in part for t in s.variables()})
        domains = []
        for nm in names:
            t = d2.types.get(nm)
            domains.append(tuple(range(bound + 1)) if t is None else t)
        for vals in product(*domains):
            v = dict(zip(names, vals))
            lhs = comb({cs.error(v, mode): weight})
            rhs = comb(error_set(part, v, mode))
            if lhs > rhs:
                return EmbeddingVerdict(False, f"{cs} exceeds its image", (cs, v))
    return EmbeddingVerdict(True)
