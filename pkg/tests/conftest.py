import random
from pathlib import Path

import pytest

from opengc.automata import Nfa, load_automaton
from opengc.grammar import load_grammar

FIXTURES = Path(__file__).parent / "fixtures"

AUTOMATA = ["a_plus_bb", "abc_star", "ab_star_a", "ab_star", "a_star", "even_a", "ends_ab_nfa"]
GRAMMARS = ["G_ab", "G_anbn", "G_dyck"]


def fixture_automaton(name):
    return load_automaton(FIXTURES / f"{name}.json")


def fixture_grammar(name):
    return load_grammar(FIXTURES / f"{name}.json")


def random_nfa(rng: random.Random, max_states=6, max_symbols=3, density=0.3) -> Nfa:
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_symbols)
    states = [f"s{i}" for i in range(n)]
    alphabet = "abc"[:k]
    transitions = [
        (p, a, q) for p in states for a in alphabet for q in states if rng.random() < density
    ]
    start = [s for s in states if rng.random() < 0.3] or [states[0]]
    final = [s for s in states if rng.random() < 0.4]
    return Nfa(alphabet=alphabet, states=states, start=start, final=final, transitions=transitions)


def random_nfas(seed, count, **kw):
    rng = random.Random(seed)
    return [random_nfa(rng, **kw) for _ in range(count)]


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# acceptance verdicts, one line per criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
