"""Open edit-based violation measures.

The measure of a word is the cheapest weighted edit (substitute, insert,
delete, adjacent transpose) into the prefix closure of a regular language.

Exact evaluation relies on the normal form of edit sequences: deletions
first, then transpositions, then substitutions, then insertions.  Under
that order an edit is a choice of which source letters survive, the order
they end up in, which of them change symbol, and what gets inserted
between them.  The search builds the target left to right over states
``(letters not yet placed, automaton state)``.  Placing source letter p
costs delta times the number of unplaced letters still in front of it,
which sums to the inversion count of the final order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import permutations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .automata import Nfa, prefix_closure, prefix_closure_report
from .costs import INF, Cost, as_cost, fmt, is_inf, scale
from .errors import InputError, ResourceError

Word = Tuple[str, ...]

DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True)
class EditWeights:
    """Costs of substitution, insertion, deletion and transposition.

    Each is a non-negative Fraction or ``inf``; ``inf`` forbids the operation.
    """

    alpha: Cost
    beta: Cost
    gamma: Cost
    delta: Cost

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            try:
                v = as_cost(getattr(self, name))
            except ValueError as exc:
                raise InputError(f"weight {name}: {exc}") from exc
            if v < 0:
                raise InputError(f"weight {name} must be non-negative")
            object.__setattr__(self, name, v)

    @classmethod
    def parse(cls, text: str) -> "EditWeights":
        parts = [p for p in text.split(",")]
        if len(parts) != 4:
            raise InputError("weights need four comma-separated values: alpha,beta,gamma,delta")
        return cls(*parts)

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)

    def __str__(self):
        return ",".join(fmt(x) for x in self.as_tuple())


# -- scripts -------------------------------------------------------------------


@dataclass(frozen=True)
class EditOp:
    """One edit with 1-based positions.

    ``insert`` puts ``symbol`` before position ``pos`` (``pos`` may be
    len+1); ``transpose`` swaps ``pos`` and ``pos + 1``.
    """

    kind: str
    pos: int
    symbol: Optional[str] = None

    def __str__(self):
        if self.symbol is None:
            return f"{self.kind}({self.pos})"
        return f"{self.kind}({self.pos},{self.symbol})"


def apply_op(word: Sequence, op: EditOp) -> Word:
    w = list(word)
    p = op.pos - 1
    if op.kind == "substitute":
        _check(0 <= p < len(w), op, w)
        w[p] = op.symbol
    elif op.kind == "insert":
        _check(0 <= p <= len(w), op, w)
        w.insert(p, op.symbol)
    elif op.kind == "delete":
        _check(0 <= p < len(w), op, w)
        del w[p]
    elif op.kind == "transpose":
        _check(0 <= p < len(w) - 1, op, w)
        w[p], w[p + 1] = w[p + 1], w[p]
    else:
        raise InputError(f"unknown edit operation {op.kind!r}")
    return tuple(w)


def _check(ok, op, w):
    if not ok:
        raise InputError(f"{op} does not apply to a word of length {len(w)}")


@dataclass(frozen=True)
class EditScript:
    source: Word
    ops: Tuple[EditOp, ...]

    def apply(self) -> Word:
        w = tuple(self.source)
        for op in self.ops:
            w = apply_op(w, op)
        return w

    def counts(self) -> Dict[str, int]:
        c = {"substitute": 0, "insert": 0, "delete": 0, "transpose": 0}
        for op in self.ops:
            c[op.kind] += 1
        return c

    def cost(self, weights: EditWeights) -> Cost:
        c = self.counts()
        return (
            scale(weights.alpha, c["substitute"])
            + scale(weights.beta, c["insert"])
            + scale(weights.gamma, c["delete"])
            + scale(weights.delta, c["transpose"])
        )

    def __str__(self):
        return " ".join(map(str, self.ops)) or "(no edits)"


@dataclass(frozen=True)
class _Plan:
    """An edit in normal form.

    ``items`` is the target word as a list of ``("orig", i, sym)`` for a
    surviving source letter i that ends up as ``sym``, or ``("ins", sym)``.
    """

    source: Word
    deleted: Tuple[int, ...]
    items: Tuple[tuple, ...]

    def script(self) -> EditScript:
        ops: List[EditOp] = [EditOp("delete", i + 1) for i in sorted(self.deleted, reverse=True)]
        kept = [i for i in range(len(self.source)) if i not in set(self.deleted)]
        placed = [it[1] for it in self.items if it[0] == "orig"]
        rank = {i: r for r, i in enumerate(placed)}
        cur = list(kept)
        # bubble sort; the swap count is the inversion count
        changed = True
        while changed:
            changed = False
            for j in range(len(cur) - 1):
                if rank[cur[j]] > rank[cur[j + 1]]:
                    cur[j], cur[j + 1] = cur[j + 1], cur[j]
                    ops.append(EditOp("transpose", j + 1))
                    changed = True
        origs = [it for it in self.items if it[0] == "orig"]
        for j, (_, i, sym) in enumerate(origs):
            if sym != self.source[i]:
                ops.append(EditOp("substitute", j + 1, sym))
        for j, it in enumerate(self.items):
            if it[0] == "ins":
                ops.append(EditOp("insert", j + 1, it[1]))
        return EditScript(tuple(self.source), tuple(ops))


# -- exact evaluation ----------------------------------------------------------


@dataclass(frozen=True)
class EditResult:
    cost: Cost
    script: Optional[EditScript]  # None when no edit reaches the language
    nodes: int = 0


def _int_weights(weights: EditWeights):
    """Scale finite weights to integers so the search avoids Fraction arithmetic."""
    finite = [Fraction(x) for x in weights.as_tuple() if not is_inf(x)]
    den = math.lcm(*(f.denominator for f in finite)) if finite else 1
    out = tuple(INF if is_inf(x) else int(Fraction(x) * den) for x in weights.as_tuple())
    return out, den


def _useful_states(nfa: Nfa) -> frozenset:
    return prefix_closure_report(nfa).useful


def edit_distance(nfa: Nfa, weights: EditWeights, w, budget: int = DEFAULT_BUDGET) -> EditResult:
    """Cheapest edit of ``w`` into L(nfa), exact, with a witnessing script.

    Any symbol may appear in ``w``; those outside the alphabet have no
    transitions, so only deletion or substitution gets rid of them.
    """
    w = tuple(w)
    (alpha, beta, gamma, delta), den = _int_weights(weights)
    useful = _useful_states(nfa)
    if not useful:
        return EditResult(INF, None)
    upper = INF
    if not is_inf(delta) and len(w) > 1:
        # the transposition-free optimum bounds the search from above; its
        # state space is only (|w| + 1) * |states|, so it runs unbudgeted
        upper = _search(nfa, useful, (alpha, beta, gamma, INF), w, INF, None)[0]
    try:
        cost, plan, nodes = _search(nfa, useful, (alpha, beta, gamma, delta), w, upper, budget)
    except ResourceError as exc:
        bound = exc.best_bound
        if bound is None and not is_inf(upper):
            bound = upper
        raise ResourceError(str(exc), None if bound is None else Fraction(bound, den)) from None
    if plan is None:
        return EditResult(INF, None, nodes)
    return EditResult(Fraction(cost, den), plan.script(), nodes)


def _search(nfa, useful, weights, w, upper, budget):
    alpha, beta, gamma, delta = weights
    n = len(w)
    full = (1 << n) - 1
    leftmost_only = is_inf(delta)
    alphabet = sorted(nfa.alphabet)
    final = nfa.final
    dist: Dict[tuple, int] = {}
    parent: Dict[tuple, tuple] = {}
    heap = []
    tick = 0
    for q in sorted(nfa.start & useful):
        key = (full, q)
        dist[key] = 0
        parent[key] = None
        heap.append((0, 0, tick, key))
        tick += 1
    heapq.heapify(heap)
    nodes = 0
    done = set()

    def relax(key, cost, nops, src, action):
        nonlocal tick
        if cost > upper:
            return
        old = dist.get(key)
        if old is not None and old <= cost:
            return
        dist[key] = cost
        parent[key] = (src, action)
        heapq.heappush(heap, (cost, nops, tick, key))
        tick += 1

    while heap:
        cost, nops, _, key = heapq.heappop(heap)
        if key in done or dist.get(key) != cost:
            continue
        done.add(key)
        mask, q = key
        if mask == 0 and q in final:
            return cost, _rebuild(w, parent, key), nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise ResourceError(f"edit search exceeded {budget} nodes", None if is_inf(upper) else upper)
        remaining = [p for p in range(n) if mask >> p & 1]
        candidates = remaining[:1] if leftmost_only else remaining
        for k, p in enumerate(candidates):
            rest = mask & ~(1 << p)
            if not is_inf(gamma):
                relax((rest, q), cost + gamma, nops + 1, key, ("del", p))
            shift = delta * k if k else 0
            if is_inf(shift):
                continue
            for a in alphabet:
                extra = shift
                if a != w[p]:
                    if is_inf(alpha):
                        continue
                    extra = shift + alpha
                for t in sorted(nfa.step(q, a)):
                    if t in useful:
                        relax((rest, t), cost + extra, nops + k + (a != w[p]), key, ("emit", p, a))
        if not is_inf(beta):
            for a, t in nfa.successors(q):
                if t in useful:
                    relax((mask, t), cost + beta, nops + 1, key, ("ins", a))
    return INF, None, nodes


def _rebuild(w, parent, key) -> _Plan:
    actions = []
    while parent[key] is not None:
        key, action = parent[key]
        actions.append(action)
    actions.reverse()
    deleted = tuple(sorted(a[1] for a in actions if a[0] == "del"))
    items = []
    for a in actions:
        if a[0] == "emit":
            items.append(("orig", a[1], a[2]))
        elif a[0] == "ins":
            items.append(("ins", a[1]))
    return _Plan(tuple(w), deleted, tuple(items))


class OpenEditMeasure:
    """Weighted edit distance to the prefix closure of L(language).

    Results are memoized per word.
    """

    def __init__(self, language: Nfa, weights: EditWeights, budget: int = DEFAULT_BUDGET):
        self.language = language
        self.weights = weights
        self.budget = budget
        self.closed = prefix_closure(language)
        self._memo: Dict[Word, EditResult] = {}
        self._approx: Optional["Approximations"] = None

    def evaluate(self, w) -> EditResult:
        w = tuple(w)
        if w not in self._memo:
            self._memo[w] = edit_distance(self.closed, self.weights, w, self.budget)
        return self._memo[w]

    def __call__(self, w) -> Cost:
        return self.evaluate(w).cost

    def reweighted(self, **changes) -> "OpenEditMeasure":
        return OpenEditMeasure(self.language, replace(self.weights, **changes), self.budget)

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return tuple(sorted(self.language.alphabet))


def open_edit_measure(m: OpenEditMeasure, w) -> Tuple[Cost, Optional[EditScript]]:
    r = m.evaluate(w)
    return r.cost, r.script


# -- classification ------------------------------------------------------------


def contractibility_status(weights: EditWeights, order_free: bool = False) -> str:
    """'Guaranteed' under a known sufficient condition, else 'NotGuaranteed'.

    A zero substitution, insertion or deletion weight is covered by the
    min{alpha, beta, gamma} <= delta condition.  A zero transposition weight
    alone is not enough: for L = (abc)* and weights 4,4,4,0 the word b
    costs 4 while ba costs 0.
    """
    a, b, g, d = weights.as_tuple()
    if min(a, b, g) <= d or order_free:
        return "Guaranteed"
    return "NotGuaranteed"


@dataclass(frozen=True)
class ProperVerdict:
    status: str  # "Proper", "Improper" or "Indeterminate"
    case: str
    witness: Optional[Word] = None
    max_len: int = 0


def properness_status(m: OpenEditMeasure, ambient: Nfa, max_len: int = 6) -> ProperVerdict:
    """Is m zero only on P(L)?  Dispatches on which weights are zero.

    With all weights positive the answer is exact.  Otherwise the words of
    the ambient language up to ``max_len`` are searched for a non-member
    of P(L) that the zero-cost edits can repair; finding none gives
    Indeterminate, since longer words are not covered.
    """
    from .automata import accepts

    a, b, g, d = m.weights.as_tuple()
    pl = m.closed
    if min(a, b, g, d) > 0:
        return ProperVerdict("Proper", "all positive", None, max_len)
    if g == 0:
        case, test = "gamma = 0", lambda w: True
    elif a == 0 and b == 0:
        case, test = "alpha = beta = 0", lambda w: _some_length_at_least(pl, len(w))
    elif a == 0:
        case, test = "alpha = 0", lambda w: _some_length_at_least(pl, len(w))
    elif b == 0 and d == 0:
        case, test = "beta = delta = 0", lambda w: _submultiset_of_member(pl, w)
    elif b == 0:
        case, test = "beta = 0", lambda w: _subsequence_of_member(pl, w)
    else:
        case, test = "delta = 0", lambda w: any(accepts(pl, p) for p in sorted(set(permutations(w))))
    alphabet = sorted(ambient.alphabet)
    for n in range(max_len + 1):
        for w in product(alphabet, repeat=n):
            if not accepts(ambient, w) or _accepts_any(pl, w):
                continue
            if test(w):
                return ProperVerdict("Improper", case, w, max_len)
    return ProperVerdict("Indeterminate", case, None, max_len)


def _accepts_any(nfa, w):
    from .automata import accepts

    if any(s not in nfa.alphabet for s in w):
        return False
    return accepts(nfa, w)


def _some_length_at_least(pl: Nfa, n: int) -> bool:
    # P(L) is prefix-closed, so a word of length >= n has a prefix of length n
    layer = set(pl.start) & pl.final
    for _ in range(n):
        layer = {t for q in layer for _, t in pl.successors(q)} & pl.final
        if not layer:
            return False
    return bool(layer)


def _subsequence_of_member(pl: Nfa, w) -> bool:
    current = set(pl.start) & pl.final
    for sym in w:
        reach = _closure(pl, current)
        current = {t for q in reach for t in pl.step(q, sym)} & pl.final
        if not current:
            return False
    return True


def _closure(pl: Nfa, states) -> set:
    seen = set(states)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for _, t in pl.successors(q):
            if t in pl.final and t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def _submultiset_of_member(pl: Nfa, w) -> bool:
    need = tuple(sorted(w))
    start = [(q, need) for q in sorted(pl.start & pl.final)]
    seen = set(start)
    stack = list(start)
    while stack:
        q, rest = stack.pop()
        if not rest:
            return True
        for sym, t in pl.successors(q):
            if t not in pl.final:
                continue
            nxt = rest
            if sym in rest:
                i = rest.index(sym)
                nxt = rest[:i] + rest[i + 1 :]
            if (t, nxt) not in seen:
                seen.add((t, nxt))
                stack.append((t, nxt))
    return False


# -- approximations ------------------------------------------------------------


class MaxMeasure:
    """Pointwise maximum of several measures."""

    def __init__(self, parts: Sequence):
        self.parts = tuple(parts)

    def __call__(self, w) -> Cost:
        return max(p(w) for p in self.parts)


@dataclass(frozen=True)
class Approximations:
    m1: OpenEditMeasure
    m2: OpenEditMeasure
    m3: OpenEditMeasure
    m4: OpenEditMeasure
    m5: MaxMeasure

    def items(self):
        return [("m1", self.m1), ("m2", self.m2), ("m3", self.m3), ("m4", self.m4), ("m5", self.m5)]


def approx_measures(m: OpenEditMeasure) -> Approximations:
    """Four reweighted measures and their pointwise maximum.

    m1..m3 lower one of alpha, beta, gamma to delta and are contractible.
    m4 makes transposition free; it lies below m but need not be
    non-decreasing (b then ba under (abc)*), and so neither need m5.  All
    five lie below m when delta is the smallest weight.
    """
    if m._approx is None:
        d = m.weights.delta
        m1 = m.reweighted(alpha=d)
        m2 = m.reweighted(beta=d)
        m3 = m.reweighted(gamma=d)
        m4 = m.reweighted(delta=0)
        m._approx = Approximations(m1, m2, m3, m4, MaxMeasure([m1, m2, m3, m4]))
    return m._approx


@dataclass(frozen=True)
class MStar:
    value: Cost
    status: str  # "exact" or "upper_bound"
    extension: Word
    max_ext: int


def m_star_bounded(m: OpenEditMeasure, w, max_ext: int) -> MStar:
    """Minimum of m(wu) over extensions u with |u| <= max_ext.

    This bounds the tightest contractible approximation from above.  It is
    reported exact when the value is 0, when m itself is contractible, or
    when it meets :func:`contractible_lower_bound`.
    """
    if max_ext < 0:
        raise InputError("max_ext must be non-negative")
    w = tuple(w)
    best, best_u = None, ()
    for n in range(max_ext + 1):
        for u in product(m.alphabet, repeat=n):
            v = m(w + u)
            if best is None or v < best:
                best, best_u = v, u
        if best == 0:
            break
    status = "upper_bound"
    if best == 0 or contractibility_status(m.weights) == "Guaranteed":
        status = "exact"
    elif best == contractible_lower_bound(m, w):
        status = "exact"
    return MStar(best, status, best_u, max_ext)


def contractible_lower_bound(m: OpenEditMeasure, w) -> Cost:
    """max(m1, m2, m3)(w), a lower bound on the tightest contractible approximation.

    Each of m1..m3 has min{alpha, beta, gamma} <= delta, so is
    non-decreasing, and lies below m; their maximum therefore lies below
    m(wu) for every extension u.  m4 and m5 do not qualify.
    """
    ap = approx_measures(m)
    return max(ap.m1(w), ap.m2(w), ap.m3(w))


# -- normal form ----------------------------------------------------------------


def _plan_of(script: EditScript) -> _Plan:
    # replay with token identities: source tokens are ints, inserted ones are ("ins", k)
    tokens = list(range(len(script.source)))
    syms = {i: s for i, s in enumerate(script.source)}
    deleted = []
    k = 0
    for op in script.ops:
        p = op.pos - 1
        limit = len(tokens) + (op.kind == "insert") - (op.kind == "transpose")
        if not 0 <= p < limit:
            raise InputError(f"{op} does not apply to a word of length {len(tokens)}")
        if op.kind == "substitute":
            syms[tokens[p]] = op.symbol
        elif op.kind == "insert":
            tok = ("ins", k)
            k += 1
            tokens.insert(p, tok)
            syms[tok] = op.symbol
        elif op.kind == "delete":
            tok = tokens.pop(p)
            if isinstance(tok, int):
                deleted.append(tok)
        elif op.kind == "transpose":
            tokens[p], tokens[p + 1] = tokens[p + 1], tokens[p]
    items = tuple(("orig", t, syms[t]) if isinstance(t, int) else ("ins", syms[t]) for t in tokens)
    return _Plan(tuple(script.source), tuple(sorted(deleted)), items)


def normalize_edit_script(script: EditScript, weights: Optional[EditWeights] = None) -> EditScript:
    """Rewrite into normal form with the same result and no higher cost.

    Normal form: deletions, then transpositions, then substitutions, then
    insertions, each letter substituted at most once.  Given weights with
    beta + gamma <= 2 delta, letters are further edited at most once.
    """
    plan = _plan_of(script)
    if weights is not None and not is_inf(weights.delta) and weights.beta + weights.gamma <= 2 * weights.delta:
        plan = _single_edit_plan(plan, weights)
    out = plan.script()
    if weights is not None and out.cost(weights) > script.cost(weights):
        return script
    return out


def _inversions(plan: _Plan) -> Dict[int, List[int]]:
    """For each surviving source letter, the letters it must swap past."""
    placed = [it[1] for it in plan.items if it[0] == "orig"]
    rank = {i: r for r, i in enumerate(placed)}
    out: Dict[int, List[int]] = {i: [] for i in placed}
    for x in placed:
        for y in placed:
            if x < y and rank[x] > rank[y]:
                out[x].append(y)
                out[y].append(x)
    return out


def _drop_to_insertion(plan: _Plan, i: int) -> _Plan:
    items = tuple(("ins", it[2]) if it[0] == "orig" and it[1] == i else it for it in plan.items)
    return _Plan(plan.source, tuple(sorted(plan.deleted + (i,))), items)


def _single_edit_plan(plan: _Plan, weights: EditWeights) -> _Plan:
    # letters moved twice or more become a deletion plus an insertion
    while True:
        inv = _inversions(plan)
        many = [i for i, ys in inv.items() if len(ys) >= 2]
        if not many:
            break
        worst = max(many, key=lambda i: (len(inv[i]), -i))
        plan = _drop_to_insertion(plan, worst)
    # swaps are now disjoint pairs; a swapped pair with a substitution is redone
    inv = _inversions(plan)
    final_sym = {it[1]: it[2] for it in plan.items if it[0] == "orig"}
    for x in sorted(inv):
        if not inv.get(x):
            continue
        y = inv[x][0]
        if x > y:
            continue
        subs = [t for t in (x, y) if final_sym[t] != plan.source[t]]
        if not subs:
            continue
        if weights.alpha <= weights.delta:
            # keep both letters in place and substitute
            # keep both letters in source order and substitute instead
            items = list(plan.items)
            ix = next(k for k, it in enumerate(items) if it[0] == "orig" and it[1] == x)
            iy = next(k for k, it in enumerate(items) if it[0] == "orig" and it[1] == y)
            items[iy] = ("orig", x, final_sym[y])
            items[ix] = ("orig", y, final_sym[x])
            plan = _Plan(plan.source, plan.deleted, tuple(items))
        else:
            plan = _drop_to_insertion(plan, subs[0])
        inv[x], inv[y] = [], []
    return plan


# -- expressibility scan -------------------------------------------------------


def matching_edit_measures(
    targets: Dict[Word, Cost],
    languages: Dict[str, Nfa],
    weight_grid: Iterable,
    budget: int = DEFAULT_BUDGET,
) -> List[Tuple[str, EditWeights]]:
    """Every (language, weights) whose edit distance equals ``targets`` on each probe.

    Probes are tried shortest first, so most candidates are rejected cheaply.
    """
    probes = sorted(targets, key=lambda w: (len(w), w))
    out = []
    for weights in weight_grid:
        ew = weights if isinstance(weights, EditWeights) else EditWeights(*weights)
        for name in sorted(languages):
            lang = languages[name]
            if all(edit_distance(lang, ew, p, budget).cost == targets[p] for p in probes):
                out.append((name, ew))
    return out
