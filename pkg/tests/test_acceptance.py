"""Acceptance criteria, one test each.

Every test records a PASS or FAIL line that is printed in the
"acceptance criteria" section at the end of the pytest run.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import pytest

from opengc import algebra, automata, engine, grammar, oracle
from opengc.automata import Nfa
from opengc.engine import FAILED, Session
from opengc.softdecomp import (
    DecompositionMeasure,
    catalog_predicate,
    combiner,
    covering_check,
    drop_lower_bounds,
    rising_sawtooth,
    rs_embedding,
    semantic_embedding_check,
)
from opengc.softedit import (
    EditWeights,
    OpenEditMeasure,
    approx_measures,
    m_star_bounded,
    matching_edit_measures,
)

from conftest import ACCEPTANCE, AUTOMATA, GRAMMARS, fixture_automaton, fixture_grammar, random_nfa, random_nfas

INF = float("inf")
ABC_WORD = tuple("bbb" + "abc" * 3 + "ca")


@contextmanager
def criterion(n, title):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE[n] = f"criterion {n:>2} FAIL  {title}: {detail}"
        print(ACCEPTANCE[n])
        raise
    ACCEPTANCE[n] = f"criterion {n:>2} PASS  {title} ({time.perf_counter() - start:.1f}s)"
    print(ACCEPTANCE[n])


def abc_measure(alphabet=None):
    a = fixture_automaton("abc_star")
    if alphabet is not None:
        a = Nfa(alphabet=alphabet, states=a.states, start=a.start, final=a.final, transitions=a.transitions)
    return OpenEditMeasure(a, EditWeights(4, 4, 4, 1))


# -- 1 ------------------------------------------------------------------------------------


def test_criterion_01_abc_star_values():
    with criterion(1, "(abc)* worked values"):
        start = time.perf_counter()
        m = abc_measure()
        assert m(ABC_WORD) == 12
        assert m(ABC_WORD + ("b",)) == 10
        got = {name: mi(ABC_WORD) for name, mi in approx_measures(m).items()}
        assert got == {"m1": 4, "m2": 8, "m3": 4, "m4": 4, "m5": 8}, got
        assert m_star_bounded(m, ABC_WORD, 1).value == 10
        assert time.perf_counter() - start < 60


# -- 2 ------------------------------------------------------------------------------------


def test_criterion_02_ab_star_a_values():
    with criterion(2, "(ab)*+(ab)*a worked values"):
        a = fixture_automaton("ab_star_a")
        m = OpenEditMeasure(a, EditWeights(2, 2, 2, 1))
        assert m(tuple("abba")) == 1
        assert m(tuple("abb")) == 2
        for w in [(3, 5, 7, 1), (5, 3, 4, 2), (9, 9, 2, 1), (4, 6, 5, 3)]:
            m = OpenEditMeasure(a, EditWeights(*w))
            assert m(tuple("abba")) == w[3]
            assert m(tuple("abb")) == min(w[:3])


# -- 3, 4 -----------------------------------------------------------------------------------


NFAS = random_nfas(2024, 200)


def bounded_prefixes(a, max_len, ext_len):
    return oracle.nfa_bounded_prefixes(sorted(a.alphabet), a.start, a.final, a.transitions, max_len, ext_len)


def test_criterion_03_prefix_closure():
    with criterion(3, "prefix closure on 200 random automata"):
        start = time.perf_counter()
        for i, a in enumerate(NFAS):
            c = automata.prefix_closure(a)
            # c is its own prefix language up to 8, so ext_len 8 enumerates L(c) exactly
            assert bounded_prefixes(c, 8, 8) == bounded_prefixes(a, 8, 14), i
        assert time.perf_counter() - start < 30


def test_criterion_04_dfa_closedness_check():
    with criterion(4, "DFA prefix-closedness check on 200 random automata"):
        for i, a in enumerate(NFAS):
            d = automata.determinize(a)
            r = automata.prefix_closure_report(d)
            # two traversals, each looking at an edge at most once
            assert r.edges_scanned[0] <= len(d.transitions) and r.edges_scanned[1] <= len(d.transitions)
            member = oracle.nfa_member(a.alphabet, a.start, a.final, a.transitions)
            o = oracle.LanguageOracle(member, tuple(sorted(a.alphabet)), 8)
            assert automata.is_prefix_closed(d) == (oracle.contractible_bruteforce(o) is None), i


# -- 5 ------------------------------------------------------------------------------------------


def test_criterion_05_cnf_prefix_closure():
    with criterion(5, "CNF prefix closure on fixture grammars"):
        for name in GRAMMARS:
            g = fixture_grammar(name)
            r = grammar.prefix_closure_cnf_report(g)
            # every prefix of length <= 10 of these grammars completes within 10 more symbols
            expect = oracle.prefix_language_bruteforce(None, None, 10, 20, oracle.cfg_words(g, 20))
            got = {w for w in oracle.words_upto(sorted(g.terminals), 10) if grammar.cyk_accepts(r.grammar, w)}
            assert got == expect, name
            assert r.size_before_units <= 3 * r.input_size, name


# -- 6 -------------------------------------------------------------------------------------------


T3 = (1, 2, 3)
CATALOG = [
    algebra.alldifferent(T3),
    algebra.gcc((1, 2), (1, 0), (2, 1), T3),
    algebra.gcc((1, 2), (0, 0), (2, 1), T3),
    algebra.weak_gcc((1, 2), (1, 2), T3),
    algebra.nvalue(2, T3),
    algebra.nvalue(2, T3, "<="),
    algebra.nvalue(2, T3, ">="),
    algebra.among(1, 2, (1,), T3),
    algebra.among(0, 2, (1,), T3),
    algebra.sequence(0, 1, 2, (1,), T3),
    algebra.sliding_sum(2, 4, 2, T3),
    algebra.sum_constraint("=", 4, (0, 1, 2)),
    algebra.sum_constraint("<=", 4, (0, 1, 2)),
    algebra.sum_constraint(">=", 4, (0, 1, 2)),
    algebra.lex_leq((2, 1, 3), T3),
    algebra.lex_lt((2, 1), T3),
    algebra.precedence(1, 2, T3),
    algebra.precedence(1, 2, T3, require_t=True),
    algebra.contiguity(),
    algebra.peak(1, T3),
    algebra.peak(1, T3, "<="),
    algebra.no_peak(T3),
    algebra.average(2, T3),
]


def test_criterion_06_contractible_iff_prefix_closed():
    with criterion(6, "contractibility matches prefix-closedness"):
        for c in CATALOG:
            verdict = algebra.contractibility_oracle(c, max_len=6).holds
            o = oracle.LanguageOracle(c.predicate, c.vtype, 6)
            assert verdict == (oracle.contractible_bruteforce(o) is None), c.name
            # the engine relies on this verdict for its exact-constraint table
            if engine._kind(c) in engine.CONTRACTIBLE:
                assert verdict, c.name
        for name in AUTOMATA:
            a = fixture_automaton(name)
            verdict = algebra.contractibility_oracle(algebra.regular(a), max_len=8).holds
            o = oracle.nfa_oracle(a, 8)
            assert verdict == (oracle.contractible_bruteforce(o) is None), name
            assert verdict == automata.is_prefix_closed(automata.determinize(a)), name


# -- 7 ----------------------------------------------------------------------------------------------


def test_criterion_07_open_d_consistency():
    with criterion(7, "open D-consistency on 100 sessions and the a+bb scenario"):
        small = [n for n in AUTOMATA if len(fixture_automaton(n).states) <= 5]
        rng = random.Random(7)
        for k in range(100):
            a = fixture_automaton(small[k % len(small)])
            alphabet = sorted(a.alphabet)
            member = oracle.nfa_member(a.alphabet, a.start, a.final, a.transitions)
            s = Session(a)
            for _ in range(rng.randint(1, 4)):
                s.add_variable({x for x in alphabet if rng.random() < 0.7})
                before = list(s.domains)
                s.propagate()
                expect = oracle.open_dconsistency_bruteforce(member, before, len(before) + len(a.states), alphabet)
                assert s.domains == expect, (k, before)
                if s.phase == FAILED:
                    break
            if s.phase == FAILED:
                continue
            s.close()
            before = list(s.domains)
            s.propagate()
            assert s.domains == oracle.domain_consistency_bruteforce(member, before), (k, before)

        a = fixture_automaton("a_plus_bb")
        s = Session(a).add_variable("ab").propagate()
        assert s.snapshot()["domains"] == [["a", "b"]]
        s.close().propagate()
        assert s.snapshot()["domains"] == [["a"]]
        s = Session(a).add_variable("ab").propagate().add_variable("ab").close().propagate()
        assert s.snapshot()["domains"] == [["b"], ["b"]]


# -- 8 -----------------------------------------------------------------------------------------------


def test_criterion_08_small_delta_nondecreasing():
    with criterion(8, "open measures non-decreasing when min(alpha, beta, gamma) <= delta"):
        rng = random.Random(8)
        for k in range(50):
            if k % 2 == 0:
                a = fixture_automaton(AUTOMATA[(k // 2) % len(AUTOMATA)])
            else:
                a = random_nfa(rng, max_states=4, max_symbols=3)
            abg = [Fraction(rng.randint(1, 5)) for _ in range(3)]
            delta = Fraction(rng.randint(int(min(abg)), 6))
            m = OpenEditMeasure(a, EditWeights(*abg, delta))
            # one-letter steps up to length 6 cover every word/extension pair by transitivity
            assert oracle.nondecreasing_bruteforce(m, sorted(a.alphabet), 6) is None, (k, abg, delta)


# -- 9 --------------------------------------------------------------------------------------------------


def test_criterion_09_soft_decompositions():
    with criterion(9, "decomposition measures"):
        ad = DecompositionMeasure("alldiff_diseq")
        holds = catalog_predicate("alldiff_diseq")
        for w in oracle.words_upto(T3, 5):
            assert (ad(w) == 0) == holds(w)
        assert oracle.nondecreasing_bruteforce(ad, T3, 5) is None

        rs = DecompositionMeasure("rising_sawtooth")
        count = combiner("count_nonzero")
        for n in range(1, 6):
            d1, d2 = rising_sawtooth(n), rising_sawtooth(n + 1)
            phi, theta = rs_embedding(d1, d2)
            assert semantic_embedding_check(d1, d2, phi, theta, count).holds, n
        assert oracle.nondecreasing_bruteforce(rs, T3, 6) is None
        assert covering_check(rising_sawtooth(3), rising_sawtooth(4)).status == "NotCovered"

        gcc = DecompositionMeasure("gcc_full")
        assert gcc((1, 1)) > 0 and gcc((1, 1, 2)) == 0
        assert oracle.nondecreasing_bruteforce(gcc, (1, 2, 3, 4), 4) is not None
        weak = DecompositionMeasure("gcc_full", keep=drop_lower_bounds)
        assert oracle.nondecreasing_bruteforce(weak, (1, 2, 3, 4), 4) is None


# -- 10 -------------------------------------------------------------------------------------------------


@pytest.mark.xfail(
    strict=True,
    reason="m4 and m5 are not non-decreasing (b -> ba under (abc)*), so m5 exceeds m* on some words",
)
def test_criterion_10_approximation_ordering():
    with criterion(10, "approximation ordering"):
        abc = abc_measure()
        ap = approx_measures(abc)
        assert ap.m5(ABC_WORD) == 8 and m_star_bounded(abc, ABC_WORD, 1).value == 10
        above = []
        for name in AUTOMATA:
            m = OpenEditMeasure(fixture_automaton(name), EditWeights(4, 4, 4, 1))
            ap = approx_measures(m)
            for w in oracle.words_upto(sorted(m.alphabet), 4):
                mw = m(w)
                for label, mi in ap.items():
                    assert mi(w) <= mw, (name, w, label)
                star = m_star_bounded(m, w, 2).value
                assert star <= mw
                if ap.m5(w) > star:
                    above.append((name, "".join(w), ap.m5(w), star))
        assert not above, f"m5 > bounded m* on {len(above)} words, first {above[0]}"


# -- 11 ---------------------------------------------------------------------------------------------------


def test_criterion_11_probe_scan():
    with criterion(11, "no proper edit measure matches bounded m* on the probe words"):
        m = abc_measure("abcd")
        probes = ["d", "bc" + "abc" * 3, "ba", "adc", "d" + "abc" * 3, "".join(ABC_WORD)]
        targets = {tuple(p): m_star_bounded(m, tuple(p), 2).value for p in probes}
        base = fixture_automaton("abc_star")
        # candidates sit between (abc)* and its prefix closure
        languages = {
            "+".join(final): Nfa(alphabet="abcd", states=base.states, start=base.start, final=final,
                                 transitions=base.transitions)
            for final in (["q0"], ["q0", "q1"], ["q0", "q2"], ["q0", "q1", "q2"])
        }
        grid = product([Fraction(i) for i in range(1, 7)] + [INF], repeat=4)
        assert matching_edit_measures(targets, languages, grid) == []


# -- 12 -----------------------------------------------------------------------------------------------------


def test_criterion_12_sum_bounds():
    with criterion(12, "sum bounds propagation"):
        s = Session(algebra.sum_constraint("=", 5, range(10))).add_variable(range(10)).propagate_sum_bounds()
        assert s.snapshot()["domains"] == [list(range(6))]
        s.close().propagate_sum_bounds()
        assert s.snapshot()["domains"] == [[5]]
        rng = random.Random(12)
        vtype = range(5)
        for _ in range(150):
            n = rng.randint(0, 4)
            ds = [frozenset(v for v in vtype if rng.random() < 0.5) or frozenset({0}) for _ in range(rng.randint(1, 3))]
            s = Session(algebra.sum_constraint("=", n, vtype))
            for d in ds:
                s.add_variable(d)
            s.propagate_sum_bounds()
            c = s.constraint
            expect = oracle.open_bconsistent_bounds(c.predicate, ds, len(ds) + c.extra_support, vtype)
            if s.phase == FAILED:
                assert any(b is None for b in expect)
            else:
                assert [(min(d), max(d)) for d in s.domains] == expect, (n, ds)
