"""Global constraints as word predicates, and contractibility analysis.

A constraint is a predicate on words (tuples of values) over a finite
static type.  Catalog constructors build the common ones; ``slide``,
``splash`` and ``combine`` build new ones from fixed-arity parts.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, Optional, Sequence, Tuple

from .errors import InputError

Word = Tuple[Any, ...]

DIRECTIONS = ("prefix", "suffix", "subword", "subsequence")


@dataclass(frozen=True)
class ConstraintDef:
    """An executable global constraint.

    ``arity`` is None for constraints over sequences of any length.
    ``vtype`` is the static type shared by every position, in display
    order.  ``extra_support`` bounds how many extra letters a prefix may
    need to reach the language; it feeds the open-support oracles.
    """

    name: str
    predicate: Callable[[Word], bool] = field(compare=False)
    vtype: Tuple[Any, ...] = ()
    arity: Optional[int] = None
    order_free: bool = False
    params: Dict[str, Any] = field(default_factory=dict, compare=False)
    extra_support: int = 0

    def __call__(self, w) -> bool:
        return eval_constraint(self, w)

    def words(self, max_len: int) -> Iterator[Word]:
        """All words over the static type up to ``max_len``, shortlex order."""
        return all_words(self.vtype, max_len)


def all_words(alphabet: Sequence, max_len: int) -> Iterator[Word]:
    alphabet = tuple(alphabet)
    for n in range(max_len + 1):
        yield from product(alphabet, repeat=n)


def eval_constraint(c: ConstraintDef, w) -> bool:
    w = tuple(w)
    if c.vtype:
        bad = [x for x in w if x not in c.vtype]
        if bad:
            raise InputError(f"{c.name}: values {bad} are outside the static type {list(c.vtype)}")
    if c.arity is not None and len(w) != c.arity:
        raise InputError(f"{c.name} has arity {c.arity}, got a word of length {len(w)}")
    return bool(c.predicate(w))


# -- catalog -----------------------------------------------------------------


def alldifferent(vtype) -> ConstraintDef:
    return ConstraintDef("alldifferent", lambda w: len(set(w)) == len(w), tuple(vtype), order_free=True)


def gcc(values, lower, upper, vtype) -> ConstraintDef:
    """Value ``values[i]`` occurs between ``lower[i]`` and ``upper[i]`` times.

    Values outside ``values`` are unconstrained.
    """
    values, lower, upper = tuple(values), tuple(lower), tuple(upper)
    if not len(values) == len(lower) == len(upper):
        raise InputError("gcc needs values, lower and upper of equal length")

    def pred(w):
        counts = Counter(w)
        return all(lo <= counts[v] <= hi for v, lo, hi in zip(values, lower, upper))

    weak = all(lo == 0 for lo in lower)
    return ConstraintDef(
        "weak_gcc" if weak else "gcc",
        pred,
        tuple(vtype),
        order_free=True,
        params={"values": values, "lower": lower, "upper": upper},
        extra_support=sum(lower),
    )


def weak_gcc(values, upper, vtype) -> ConstraintDef:
    return gcc(values, [0] * len(tuple(values)), upper, vtype)


def nvalue(n: int, vtype, relation: str = "=") -> ConstraintDef:
    cmp = _relation(relation)
    return ConstraintDef(
        f"nvalue{relation}{n}",
        lambda w: cmp(len(set(w)), n),
        tuple(vtype),
        order_free=True,
        params={"n": n, "relation": relation},
        extra_support=n,
    )


def among(lo: int, hi: int, values, vtype) -> ConstraintDef:
    vs = frozenset(values)
    return ConstraintDef(
        "among",
        lambda w: lo <= sum(x in vs for x in w) <= hi,
        tuple(vtype),
        order_free=True,
        params={"lower": lo, "upper": hi, "values": sorted(vs, key=repr)},
        extra_support=lo,
    )


def sequence(lo: int, hi: int, k: int, values, vtype) -> ConstraintDef:
    """Every window of k consecutive variables holds lo..hi members of ``values``."""
    vs = frozenset(values)

    def pred(w):
        return all(lo <= sum(x in vs for x in w[i : i + k]) <= hi for i in range(len(w) - k + 1))

    return ConstraintDef(
        "sequence", pred, tuple(vtype), params={"lower": lo, "upper": hi, "k": k, "values": sorted(vs, key=repr)}
    )


def sliding_sum(lo, hi, k: int, vtype) -> ConstraintDef:
    def pred(w):
        return all(lo <= sum(w[i : i + k]) <= hi for i in range(len(w) - k + 1))

    return ConstraintDef("sliding_sum", pred, tuple(vtype), params={"lower": lo, "upper": hi, "k": k})


def sum_constraint(relation: str, bound, vtype) -> ConstraintDef:
    cmp = _relation(relation)
    top = max(vtype) if vtype else 1
    extra = 0
    if relation in ("=", ">=") and top > 0:
        extra = -(-int(bound) // int(top)) if bound > 0 else 0
    return ConstraintDef(
        f"sum{relation}{bound}",
        lambda w: cmp(sum(w), bound),
        tuple(vtype),
        order_free=True,
        params={"relation": relation, "bound": bound},
        extra_support=extra,
    )


def lex_leq(z, vtype) -> ConstraintDef:
    """The word is lexicographically <= the fixed word ``z``, compared on the common prefix."""
    z = tuple(z)
    key = _order_key(vtype)

    def pred(w):
        k = min(len(w), len(z))
        return [key[x] for x in w[:k]] <= [key[x] for x in z[:k]]

    return ConstraintDef("lex_leq", pred, tuple(vtype), params={"z": z})


def lex_lt(z, vtype) -> ConstraintDef:
    """Strictly lexicographically smaller than ``z`` on the common prefix."""
    z = tuple(z)
    key = _order_key(vtype)

    def pred(w):
        k = min(len(w), len(z))
        return [key[x] for x in w[:k]] < [key[x] for x in z[:k]]

    return ConstraintDef("lex_lt", pred, tuple(vtype), params={"z": z}, extra_support=len(z))


def precedence(s, t, vtype, require_t: bool = False) -> ConstraintDef:
    """If t occurs, s occurs at a lower index.  ``require_t`` also demands t occurs."""

    def pred(w):
        if t not in w:
            return not require_t
        return s in w[: w.index(t)]

    return ConstraintDef(
        "precedence_strict" if require_t else "precedence",
        pred,
        tuple(vtype),
        params={"s": s, "t": t},
        extra_support=2 if require_t else 0,
    )


def contiguity() -> ConstraintDef:
    def pred(w):
        ones = [i for i, x in enumerate(w) if x == 1]
        return not ones or ones[-1] - ones[0] + 1 == len(ones)

    return ConstraintDef("contiguity", pred, (0, 1))


def peak_count(w) -> int:
    """Peaks: maximal plateaus strictly higher than both neighbours."""
    # collapse plateaus first
    runs = [x for i, x in enumerate(w) if i == 0 or w[i - 1] != x]
    return sum(1 for i in range(1, len(runs) - 1) if runs[i - 1] < runs[i] > runs[i + 1])


def peak(n: int, vtype, relation: str = "=") -> ConstraintDef:
    cmp = _relation(relation)
    return ConstraintDef(
        f"peak{relation}{n}",
        lambda w: cmp(peak_count(w), n),
        tuple(vtype),
        params={"n": n, "relation": relation},
        extra_support=2 * n + 1,
    )


def no_peak(vtype) -> ConstraintDef:
    c = peak(0, vtype, "<=")
    return ConstraintDef("no_peak", c.predicate, c.vtype, params=c.params)


def average(mean, vtype) -> ConstraintDef:
    from fractions import Fraction

    m = Fraction(mean)
    return ConstraintDef(
        "average",
        lambda w: bool(w) and Fraction(sum(w), len(w)) == m,
        tuple(vtype),
        order_free=True,
        params={"mean": m},
    )


def regular(nfa) -> ConstraintDef:
    from .automata import accepts

    alphabet = tuple(sorted(nfa.alphabet))
    return ConstraintDef(
        "regular",
        lambda w: accepts(nfa, w),
        alphabet,
        params={"automaton": nfa},
        extra_support=len(nfa.states),
    )


def cfg(grammar, extra_support: int = 4) -> ConstraintDef:
    from .grammar import cyk_accepts

    return ConstraintDef(
        "cfg",
        lambda w: cyk_accepts(grammar, w),
        tuple(sorted(grammar.terminals)),
        params={"grammar": grammar},
        extra_support=extra_support,
    )


def true_constraint(vtype) -> ConstraintDef:
    return ConstraintDef("true", lambda w: True, tuple(vtype), order_free=True)


def fixed(name: str, k: int, pred: Callable[..., bool], vtype) -> ConstraintDef:
    """A fixed-arity constraint ``pred(z1, ..., zk)``, for slide/splash."""
    return ConstraintDef(name, lambda w: pred(*w), tuple(vtype), arity=k)


def _relation(rel: str) -> Callable[[Any, Any], bool]:
    table = {
        "=": lambda a, b: a == b,
        "<=": lambda a, b: a <= b,
        ">=": lambda a, b: a >= b,
    }
    try:
        return table[rel]
    except KeyError:
        raise InputError(f"unknown relation {rel!r}") from None


def _order_key(vtype) -> Dict[Any, int]:
    return {v: i for i, v in enumerate(vtype)}


# -- meta-constraints ----------------------------------------------------------


def slide_eval(p: int, j: int, inner: ConstraintDef, w) -> bool:
    """Apply ``inner`` to the windows starting at p, p+j, p+2j, ... (1-based).

    Only windows lying fully inside the word count, so a short word
    satisfies it vacuously.
    """
    if inner.arity is None:
        raise InputError("slide needs a fixed-arity inner constraint")
    if p < 1 or j < 1:
        raise InputError("slide needs p >= 1 and j >= 1")
    w = tuple(w)
    k = inner.arity
    start = p - 1
    while start + k <= len(w):
        if not inner.predicate(w[start : start + k]):
            return False
        start += j
    return True


def splash_eval(inner: ConstraintDef, w) -> bool:
    """Apply ``inner`` to every length-k subsequence of ``w``."""
    if inner.arity is None:
        raise InputError("splash needs a fixed-arity inner constraint")
    w = tuple(w)
    return all(inner.predicate(sub) for sub in combinations(w, inner.arity))


def slide(p: int, j: int, inner: ConstraintDef, vtype=None) -> ConstraintDef:
    vtype = tuple(vtype) if vtype is not None else inner.vtype
    return ConstraintDef(f"slide^{p}_{j}({inner.name})", lambda w: slide_eval(p, j, inner, w), vtype)


def splash(inner: ConstraintDef, vtype=None) -> ConstraintDef:
    vtype = tuple(vtype) if vtype is not None else inner.vtype
    return ConstraintDef(f"splash({inner.name})", lambda w: splash_eval(inner, w), vtype)


def combine(op: str, *parts, position: Optional[int] = None) -> ConstraintDef:
    """Logical combinators that preserve contractibility.

    ``and``/``or`` take two constraints on the same type.  ``exists_at`` and
    ``forall_at`` take one constraint and a 1-based ``position`` whose value
    is quantified over the static type; words too short to have that
    position are judged by the constraint as-is.
    """
    if op in ("and", "or"):
        if len(parts) != 2:
            raise InputError(f"{op} takes two constraints")
        a, b = parts
        if set(a.vtype) != set(b.vtype):
            raise InputError(f"{op} needs both constraints on the same static type")
        fn = all if op == "and" else any
        return ConstraintDef(
            f"({a.name} {op} {b.name})",
            lambda w: fn(c.predicate(w) for c in (a, b)),
            a.vtype,
            order_free=a.order_free and b.order_free,
            extra_support=max(a.extra_support, b.extra_support),
        )
    if op in ("exists_at", "forall_at"):
        if len(parts) != 1 or position is None:
            raise InputError(f"{op} takes one constraint and a position")
        (a,) = parts
        if not a.vtype:
            raise InputError(f"{op} needs a finite static type to quantify over")
        if position < 1:
            raise InputError("positions are 1-based")
        fn = any if op == "exists_at" else all
        i = position - 1

        def pred(w):
            if len(w) <= i:
                return a.predicate(w)
            return fn(a.predicate(w[:i] + (d,) + w[i + 1 :]) for d in a.vtype)

        return ConstraintDef(f"{op}[{position}]({a.name})", pred, a.vtype, extra_support=a.extra_support)
    raise InputError(f"unknown combinator {op!r}")


def negate(c: ConstraintDef) -> ConstraintDef:
    """Complement.  Does not preserve contractibility."""
    return ConstraintDef(f"not({c.name})", lambda w: not c.predicate(w), c.vtype, order_free=c.order_free)


# -- contractibility analysis --------------------------------------------------


@dataclass(frozen=True)
class AccumulationSpec:
    """A constraint of the form ``f(word) <rel> bound``."""

    f: Callable[[Word], Any]
    relation: str
    bound: Any

    def as_constraint(self, vtype, name="accumulation") -> ConstraintDef:
        cmp = _relation(self.relation)
        return ConstraintDef(name, lambda w: cmp(self.f(w), self.bound), tuple(vtype))


@dataclass(frozen=True)
class AccumulationVerdict:
    contractible: bool
    monotonicity: str  # "constant", "nondecreasing", "nonincreasing" or "none"
    witness: Optional[Tuple[Word, Word]]
    max_len: int

    @property
    def label(self) -> str:
        if self.contractible:
            return f"Contractible (up to length {self.max_len})"
        return f"NotContractible (up to length {self.max_len})"


def classify_accumulation(spec: AccumulationSpec, alphabet, max_len: int) -> AccumulationVerdict:
    """Decide contractibility of ``f(X) rel Z`` from the monotonicity of f.

    ``<=`` needs f non-decreasing, ``>=`` non-increasing, ``=`` constant.
    Checked on every (w, wY) pair with ``|wY| <= max_len``; the witness is
    the first pair breaking the needed monotonicity.
    """
    alphabet = tuple(alphabet)
    inc = dec = None  # first witnesses of a strict increase / decrease
    for w in all_words(alphabet, max_len - 1):
        fw = spec.f(w)
        for y in alphabet:
            fwy = spec.f(w + (y,))
            if fwy > fw and inc is None:
                inc = (w, w + (y,))
            if fwy < fw and dec is None:
                dec = (w, w + (y,))
        if inc and dec:
            break
    if not inc and not dec:
        mono = "constant"
    elif not dec:
        mono = "nondecreasing"
    elif not inc:
        mono = "nonincreasing"
    else:
        mono = "none"
    needed = {"<=": dec, ">=": inc, "=": inc or dec}
    if spec.relation not in needed:
        raise InputError(f"unknown relation {spec.relation!r}")
    witness = needed[spec.relation]
    return AccumulationVerdict(witness is None, mono, witness, max_len)


@dataclass(frozen=True)
class ClosureVerdict:
    holds: bool
    direction: str
    max_len: int
    witness: Optional[Tuple[Word, Word]] = None  # (member, reduced non-member)


def reductions(w: Word, direction: str) -> Iterator[Word]:
    """One-letter reductions whose closure generates the given closure order."""
    if not w:
        return
    if direction == "prefix":
        yield w[:-1]
    elif direction == "suffix":
        yield w[1:]
    elif direction == "subword":
        yield w[:-1]
        yield w[1:]
    elif direction == "subsequence":
        for i in range(len(w)):
            yield w[:i] + w[i + 1 :]
    else:
        raise InputError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")


def contractibility_oracle(c: ConstraintDef, alphabet=None, max_len: int = 6, direction: str = "prefix") -> ClosureVerdict:
    """Bounded check that the constraint's language is closed in ``direction``.

    "prefix" is contractibility itself.  A failure witness pairs a member
    with a reduced word outside the language.  Witnesses whose reduced word
    is nonempty are preferred, so the empty-sequence corner case only shows
    up when it is the sole failure.
    """
    if direction not in DIRECTIONS:
        raise InputError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    alphabet = tuple(alphabet) if alphabet is not None else c.vtype
    memo: Dict[Word, bool] = {}

    def member(w):
        if w not in memo:
            memo[w] = bool(c.predicate(w))
        return memo[w]

    fallback = None
    for w in all_words(alphabet, max_len):
        if not member(w):
            continue
        for r in reductions(w, direction):
            if not member(r):
                if r:
                    return ClosureVerdict(False, direction, max_len, (w, r))
                if fallback is None:
                    fallback = (w, r)
    if fallback:
        return ClosureVerdict(False, direction, max_len, fallback)
    return ClosureVerdict(True, direction, max_len)


# -- JSON constraint specs -----------------------------------------------------


def from_spec(spec: dict, base_dir=None) -> ConstraintDef:
    """Build a catalog constraint from its CLI JSON description."""
    from .automata import load_automaton
    from .grammar import load_grammar

    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("constraint spec must be an object with a 'kind'")
    kind = spec["kind"]
    vtype = tuple(spec.get("type", ()))

    def need(key):
        if key not in spec:
            raise InputError(f"constraint kind {kind!r} needs {key!r}")
        return spec[key]

    def path(p):
        p = Path(p)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return p

    builders = {
        "alldifferent": lambda: alldifferent(vtype),
        "gcc": lambda: gcc(need("values"), need("lower"), need("upper"), vtype),
        "weak_gcc": lambda: weak_gcc(need("values"), need("upper"), vtype),
        "nvalue": lambda: nvalue(need("n"), vtype, spec.get("relation", "=")),
        "among": lambda: among(need("lower"), need("upper"), need("values"), vtype),
        "sequence": lambda: sequence(need("lower"), need("upper"), need("k"), need("values"), vtype),
        "sliding_sum": lambda: sliding_sum(need("lower"), need("upper"), need("k"), vtype),
        "sum": lambda: sum_constraint(spec.get("relation", "="), need("bound"), vtype),
        "lex_leq": lambda: lex_leq(need("z"), vtype),
        "lex_lt": lambda: lex_lt(need("z"), vtype),
        "precedence": lambda: precedence(need("s"), need("t"), vtype, spec.get("require_t", False)),
        "contiguity": contiguity,
        "peak": lambda: peak(need("n"), vtype, spec.get("relation", "=")),
        "no_peak": lambda: no_peak(vtype),
        "average": lambda: average(need("mean"), vtype),
        "regular": lambda: regular(load_automaton(path(need("automaton")))),
        "cfg": lambda: cfg(load_grammar(path(need("grammar")))),
    }
    if kind not in builders:
        raise InputError(f"unknown constraint kind {kind!r}")
    if kind not in ("contiguity", "regular", "cfg") and not vtype:
        raise InputError(f"constraint kind {kind!r} needs a finite 'type'")
    c = builders[kind]()
    return c


def load_spec(path) -> ConstraintDef:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read constraint spec {path}: {exc}") from exc
    return from_spec(data, Path(path).parent)
