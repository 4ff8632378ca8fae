import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opengc import automata, oracle
from opengc.automata import Nfa
from opengc.costs import INF
from opengc.errors import InputError, ResourceError
from opengc.softedit import (
    EditOp,
    EditScript,
    EditWeights,
    OpenEditMeasure,
    approx_measures,
    contractibility_status,
    edit_distance,
    m_star_bounded,
    normalize_edit_script,
    open_edit_measure,
    properness_status,
)

from conftest import fixture_automaton, random_nfa

W = tuple("bbbabcabcabcca")
ABC = fixture_automaton("abc_star")


@pytest.fixture(scope="module")
def abc():
    return OpenEditMeasure(ABC, EditWeights(4, 4, 4, 1))


def replay_ok(m, w):
    cost, script = open_edit_measure(m, w)
    if cost == INF:
        assert script is None
        return cost
    assert script.source == tuple(w)
    assert automata.accepts(m.closed, script.apply())
    assert script.cost(m.weights) == cost
    return cost


# -- weights and scripts ------------------------------------------------------------


def test_weights_parse():
    w = EditWeights.parse("4,4,4,inf")
    assert w.as_tuple() == (4, 4, 4, INF)
    assert str(EditWeights.parse("1/2,1,2,3")) == "1/2,1,2,3"
    with pytest.raises(InputError):
        EditWeights.parse("1,2,3")
    with pytest.raises(InputError):
        EditWeights(-1, 1, 1, 1)
    with pytest.raises(InputError):
        EditWeights("x", 1, 1, 1)


def test_script_apply_and_cost():
    s = EditScript(tuple("abc"), (EditOp("transpose", 1), EditOp("insert", 4, "d"), EditOp("delete", 1)))
    assert s.apply() == tuple("acd")
    assert s.counts() == {"substitute": 0, "insert": 1, "delete": 1, "transpose": 1}
    assert s.cost(EditWeights(1, 2, 3, INF)) == INF
    assert s.cost(EditWeights(1, 2, 3, 4)) == 9


def test_script_bad_position():
    with pytest.raises(InputError):
        EditScript(tuple("ab"), (EditOp("transpose", 2),)).apply()
    with pytest.raises(InputError):
        EditScript(tuple("ab"), (EditOp("insert", 4, "a"),)).apply()


def test_zero_times_infinity():
    assert EditScript(("a",), (EditOp("substitute", 1, "b"),)).cost(EditWeights(1, INF, INF, INF)) == 1


# -- worked examples ------------------------------------------------------------------


def test_abc_star_values(abc):
    assert abc(W) == 12
    assert abc(W + ("b",)) == 10
    replay_ok(abc, W)
    replay_ok(abc, W + ("b",))


def test_abc_star_approximations(abc):
    ap = approx_measures(abc)
    got = {name: m(W) for name, m in ap.items()}
    assert got == {"m1": 4, "m2": 8, "m3": 4, "m4": 4, "m5": 8}


def test_abc_star_m_star(abc):
    ms = m_star_bounded(abc, W, 1)
    assert ms.value == 10 and ms.extension == ("b",) and ms.status == "upper_bound"


def test_ab_star_a():
    m = OpenEditMeasure(fixture_automaton("ab_star_a"), EditWeights(2, 2, 2, 1))
    assert m(tuple("abba")) == 1
    assert m(tuple("abb")) == 2
    ms = m_star_bounded(m, tuple("abb"), 1)
    assert ms.value == 1 and ms.extension == ("a",)


@pytest.mark.parametrize("a,b,g,d", [(3, 5, 7, 1), (5, 3, 4, 2), (9, 9, 2, 1)])
def test_ab_star_a_symbolic(a, b, g, d):
    m = OpenEditMeasure(fixture_automaton("ab_star_a"), EditWeights(a, b, g, d))
    assert m(tuple("abba")) == d
    assert m(tuple("abb")) == min(a, b, g)


def test_members_cost_nothing(abc):
    for w in ["", "a", "ab", "abcab"]:
        cost, script = open_edit_measure(abc, w)
        assert cost == 0 and script.ops == ()
        assert all(m(tuple(w)) == 0 for _, m in approx_measures(abc).items())
        ms = m_star_bounded(abc, tuple(w), 2)
        assert ms.value == 0 and ms.status == "exact"


def test_foreign_symbols_must_go():
    m = OpenEditMeasure(ABC, EditWeights(4, 4, 3, 1))
    assert m(("d",)) == 3
    assert m(tuple("adc")) == 4  # substitute d to b


def test_infinite_weights():
    m = OpenEditMeasure(fixture_automaton("a_star"), EditWeights(INF, INF, INF, INF))
    assert m(("b",)) == INF
    assert open_edit_measure(m, ("b",))[1] is None
    m = OpenEditMeasure(fixture_automaton("ab_star"), EditWeights(INF, INF, INF, 1))
    assert m(tuple("ba")) == 1


def test_budget_error_carries_bound():
    m = OpenEditMeasure(ABC, EditWeights(4, 4, 4, 1), budget=5)
    with pytest.raises(ResourceError) as exc:
        m(W)
    assert exc.value.best_bound is not None and exc.value.best_bound >= 12


def test_empty_language_measure():
    empty = Nfa(alphabet="ab", states=["q"], start=["q"], final=[], transitions=[])
    m = OpenEditMeasure(empty, EditWeights(1, 1, 1, 1))
    # no word has a prefix in the empty language, so nothing is reachable
    assert m(()) == INF and m(("a", "b")) == INF


# -- classification ----------------------------------------------------------------


def test_contractibility_status():
    assert contractibility_status(EditWeights(1, 1, 1, 1)) == "Guaranteed"
    assert contractibility_status(EditWeights(4, 4, 4, 1)) == "NotGuaranteed"
    assert contractibility_status(EditWeights(0, 4, 4, 1)) == "Guaranteed"
    # a free transposition alone guarantees nothing
    assert contractibility_status(EditWeights(4, 4, 4, 0)) == "NotGuaranteed"
    assert contractibility_status(EditWeights(4, 4, 4, 1), order_free=True) == "Guaranteed"


def test_abc_star_is_not_monotone(abc):
    # the counterexample behind NotGuaranteed
    assert abc(W + ("b",)) < abc(W)


def test_free_transposition_is_not_monotone():
    m = OpenEditMeasure(ABC, EditWeights(4, 4, 4, 0))
    assert m(("b",)) == 4 and m(("b", "a")) == 0


def test_properness_all_positive():
    v = properness_status(OpenEditMeasure(ABC, EditWeights(1, 1, 1, 1)), ABC)
    assert v.status == "Proper"


def sigma_star(alphabet):
    return Nfa(alphabet=alphabet, states=["s"], start=["s"], final=["s"], transitions=[("s", x, "s") for x in alphabet])


def test_properness_gamma_zero():
    m = OpenEditMeasure(ABC, EditWeights(1, 1, 0, 1))
    v = properness_status(m, sigma_star("abc"), 4)
    assert v.status == "Improper" and m(v.witness) == 0
    assert not automata.accepts(m.closed, v.witness)


def test_properness_alpha_zero():
    m = OpenEditMeasure(ABC, EditWeights(0, 1, 1, 1))
    v = properness_status(m, sigma_star("abc"), 6)
    assert v.status == "Improper" and m(v.witness) == 0


def test_properness_indeterminate_when_ambient_is_small():
    m = OpenEditMeasure(ABC, EditWeights(0, 1, 1, 1))
    assert properness_status(m, ABC, 5).status == "Indeterminate"


@pytest.mark.parametrize("weights", [(0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0), (0, 0, 1, 1), (1, 0, 1, 0)])
def test_properness_verdict_agrees_with_zero_set(weights):
    m = OpenEditMeasure(fixture_automaton("ab_star"), EditWeights(*weights))
    amb = sigma_star("ab")
    v = properness_status(m, amb, 4)
    zeros_outside = [w for w in oracle.words_upto("ab", 4) if m(w) == 0 and not automata.accepts(m.closed, w)]
    if v.status == "Improper":
        assert v.witness in zeros_outside
    else:
        assert zeros_outside == []


# -- properties ------------------------------------------------------------------------


def weights_strategy(finite=False):
    vals = st.integers(0, 4).map(Fraction)
    if not finite:
        vals = st.one_of(vals, st.just(INF))
    return st.tuples(vals, vals, vals, vals)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), weights_strategy(), st.lists(st.sampled_from("ab"), max_size=4))
def test_matches_bruteforce(seed, weights, w):
    a = random_nfa(random.Random(seed), max_states=3, max_symbols=2)
    if set(w) - set(a.alphabet):
        return
    m = OpenEditMeasure(a, EditWeights(*weights))
    got = replay_ok(m, w)
    o = oracle.nfa_oracle(m.closed, 8)
    cap = got if got != INF else 6
    try:
        ref = oracle.edit_distance_bruteforce(o, weights, w, cap)
    except ResourceError:
        ref = INF
    assert got == ref


@settings(max_examples=30, deadline=None)
@given(weights_strategy(finite=True), weights_strategy(finite=True), st.lists(st.sampled_from("abc"), max_size=6))
def test_weight_monotonicity(w1, w2, w):
    lo = EditWeights(*[min(x, y) for x, y in zip(w1, w2)])
    hi = EditWeights(*[max(x, y) for x, y in zip(w1, w2)])
    assert OpenEditMeasure(ABC, lo)(w) <= OpenEditMeasure(ABC, hi)(w)


def test_language_monotonicity():
    # (ab)* is inside (ab)* + (ab)*a
    small = OpenEditMeasure(fixture_automaton("ab_star"), EditWeights(2, 3, 1, 1))
    big = OpenEditMeasure(fixture_automaton("ab_star_a"), EditWeights(2, 3, 1, 1))
    for w in oracle.words_upto("ab", 6):
        assert small(w) >= big(w)


def test_approximations_below_and_contractible(abc):
    ap = approx_measures(abc)
    for w in oracle.words_upto("abc", 4):
        m = abc(w)
        for _, mi in ap.items():
            assert mi(w) <= m
    for name in ("m1", "m2", "m3"):
        assert oracle.nondecreasing_bruteforce(getattr(ap, name), "abc", 4) is None, name
    for name in ("m4", "m5"):
        assert oracle.nondecreasing_bruteforce(getattr(ap, name), "abc", 4) == (("b",), ("b", "a")), name


def test_m_star_certificate_is_sound(abc):
    # exact only when the value meets a true lower bound on m*
    for w in oracle.words_upto("abc", 3):
        ms = m_star_bounded(abc, w, 2)
        if ms.status == "exact":
            deeper = m_star_bounded(abc, w, 3)
            assert deeper.value == ms.value


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), weights_strategy(finite=True))
def test_small_delta_gives_nondecreasing_measure(seed, weights):
    a, b, g, d = weights
    if min(a, b, g) > d:
        weights = (a, b, g, min(a, b, g))
    a_ = random_nfa(random.Random(seed), max_states=3, max_symbols=2)
    m = OpenEditMeasure(a_, EditWeights(*weights))
    assert oracle.nondecreasing_bruteforce(m, sorted(a_.alphabet), 4) is None


# -- normal form ------------------------------------------------------------------------


def test_normalize_commutes_disjoint_ops():
    s = EditScript(tuple("abc"), (EditOp("insert", 1, "x"), EditOp("delete", 4)))
    n = normalize_edit_script(s)
    assert n.apply() == s.apply()
    assert [op.kind for op in n.ops] == ["delete", "insert"]
    assert n.cost(EditWeights(1, 1, 1, 1)) == s.cost(EditWeights(1, 1, 1, 1))


def test_normalize_merges_double_substitution():
    s = EditScript(tuple("abc"), (EditOp("substitute", 2, "c"), EditOp("substitute", 2, "a")))
    n = normalize_edit_script(s)
    assert n.apply() == tuple("aac")
    assert n.counts()["substitute"] == 1
    w = EditWeights(1, 1, 1, 1)
    assert n.cost(w) < s.cost(w)


def test_normalize_chained_transpositions():
    s = EditScript(tuple("abc"), (EditOp("transpose", 1), EditOp("transpose", 2)))
    w = EditWeights(5, 1, 1, 1)  # beta + gamma <= 2 delta
    n = normalize_edit_script(s, w)
    assert n.apply() == tuple("bca")
    assert n.counts() == {"substitute": 0, "insert": 1, "delete": 1, "transpose": 0}
    assert n.cost(w) <= s.cost(w)


OPS = st.sampled_from(["substitute", "insert", "delete", "transpose"])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from("abc"), max_size=5), st.lists(st.tuples(OPS, st.integers(1, 7), st.sampled_from("abc")), max_size=6),
       weights_strategy(finite=True))
def test_normalize_preserves_result_and_cost(w, raw, weights):
    ops, cur = [], tuple(w)
    for kind, pos, sym in raw:
        limit = len(cur) + (1 if kind == "insert" else 0) - (1 if kind == "transpose" else 0)
        if limit < 1:
            continue
        op = EditOp(kind, (pos - 1) % limit + 1, sym if kind in ("substitute", "insert") else None)
        ops.append(op)
        cur = EditScript(cur, (op,)).apply()
    s = EditScript(tuple(w), tuple(ops))
    ew = EditWeights(*weights)
    n = normalize_edit_script(s, ew)
    assert n.apply() == s.apply()
    assert n.cost(ew) <= s.cost(ew)
    kinds = [op.kind for op in n.ops]
    order = {"delete": 0, "transpose": 1, "substitute": 2, "insert": 3}
    assert kinds == sorted(kinds, key=order.__getitem__)
    subs = [op.pos for op in n.ops if op.kind == "substitute"]
    assert len(subs) == len(set(subs))


def test_closed_edit_distance():
    r = edit_distance(ABC, EditWeights(1, 1, 1, 1), tuple("ab"))
    assert r.cost == 1 and automata.accepts(ABC, r.script.apply())
