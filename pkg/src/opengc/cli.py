"""Command-line front end.

Exit codes: 0 success, 1 domain failure (a failed session, a failed
oracle cross-check), 2 input error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import algebra, automata, engine, grammar, oracle, softdecomp, softedit
from .costs import fmt
from .errors import InputError, LifecycleError, ResourceError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


class OracleMismatch(Exception):
    pass


def _word(text: str, sep: Optional[str]) -> tuple:
    if sep:
        return tuple(p for p in text.split(sep) if p != "") if text else ()
    return tuple(text)


def _int_word(text: str, sep: Optional[str]) -> tuple:
    try:
        return tuple(int(p) for p in _word(text, sep))
    except ValueError:
        raise InputError(f"expected integer values in {text!r}") from None


def _show(word) -> str:
    return "".join(map(str, word)) if all(len(str(s)) == 1 for s in word) else " ".join(map(str, word))


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _emit(args, payload: dict, lines: List[str]):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _check(ok: bool, what: str):
    if not ok:
        raise OracleMismatch(what)


# -- subcommands -------------------------------------------------------------------


def cmd_analyze_automaton(args) -> int:
    a = automata.load_automaton(args.automaton)
    report = automata.prefix_closure_report(a)
    dfa = a if isinstance(a, automata.Dfa) else automata.determinize(a, args.budget)
    closed = automata.is_prefix_closed(dfa)
    payload = {
        "states": len(a.states),
        "transitions": len(a.transitions),
        "deterministic": _is_deterministic(a),
        "prefix_closed": closed,
        "promoted": sorted(report.promoted),
        "edges_scanned": list(report.edges_scanned),
    }
    if args.oracle:
        o = oracle.nfa_oracle(a, args.max_len)
        witness = oracle.contractible_bruteforce(o)
        _check(witness is None or not closed, f"oracle found {witness} but the check says prefix-closed")
        _check_closure(a, args.max_len)
        payload["oracle"] = "agrees"
    lines = [
        f"states: {payload['states']}, transitions: {payload['transitions']}",
        f"deterministic: {str(payload['deterministic']).lower()}",
        f"prefix-closed: {str(closed).lower()}",
        f"promoted states: {', '.join(payload['promoted']) or '(none)'}",
    ]
    if args.oracle:
        lines.append("oracle: agrees")
    _emit(args, payload, lines)
    return EXIT_OK


def _is_deterministic(a) -> bool:
    try:
        automata.Dfa(a.alphabet, a.states, a.start, a.final, a.transitions)
        return True
    except InputError:
        return False


def _check_closure(a, max_len):
    closed = automata.prefix_closure(a)
    o = oracle.nfa_oracle(a, max_len + len(a.states))
    expect = {w for w in oracle.prefix_set(oracle.enumerate_language(o)) if len(w) <= max_len}
    got = oracle.enumerate_language(oracle.nfa_oracle(closed, max_len))
    _check(got == expect, "prefix closure disagrees with the oracle prefix set")


def cmd_prefix_close(args) -> int:
    a = automata.load_automaton(args.automaton)
    closed = automata.prefix_closure(a)
    if args.oracle:
        _check_closure(a, args.max_len)
    text = json.dumps(closed.to_json(), indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_analyze_grammar(args) -> int:
    g = grammar.load_grammar(args.grammar)
    payload = {
        "nonterminals": len(g.nonterminals),
        "terminals": len(g.terminals),
        "productions": len(g.productions),
        "size": g.size,
    }
    lines = [f"nonterminals: {payload['nonterminals']}, productions: {payload['productions']}, size: {g.size}"]
    if args.word is not None:
        w = _word(args.word, args.sep)
        ok = grammar.cyk_accepts(g, w)
        if args.oracle:
            _check(ok == oracle.cfg_member(g)(w), "membership disagrees with the oracle")
        payload["word"] = _show(w)
        payload["accepts"] = ok
        lines.append(f"accepts {_show(w)!r}: {str(ok).lower()}")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_prefix_close_grammar(args) -> int:
    g = grammar.load_grammar(args.grammar)
    report = grammar.prefix_closure_cnf_report(g)
    if args.oracle:
        got = {w for w in oracle.words_upto(sorted(g.terminals), args.max_len) if grammar.cyk_accepts(report.grammar, w)}
        ext = 2 * args.max_len + 2
        expect = oracle.prefix_language_bruteforce(None, None, args.max_len, ext, oracle.cfg_words(g, ext))
        _check(got == expect, "prefix grammar disagrees with the oracle prefix set")
    payload = {
        "grammar": report.grammar.to_json(),
        "input_size": report.input_size,
        "size_before_unit_elimination": report.size_before_units,
        "size": report.grammar.size,
    }
    if args.json or not args.output:
        text = json.dumps(payload if args.json else report.grammar.to_json(), indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(json.dumps(report.grammar.to_json(), indent=2, sort_keys=True) + "\n")
        if args.json:
            print(text)
        else:
            print(f"input size {report.input_size}, before unit elimination {report.size_before_units}, "
                  f"final {report.grammar.size}")
    else:
        print(text)
    return EXIT_OK


def cmd_check_contractible(args) -> int:
    spec = _read_json(args.spec)
    c = algebra.from_spec(spec, Path(args.spec).parent)
    v = algebra.contractibility_oracle(c, None, args.max_len, args.direction)
    payload = {"constraint": c.name, "direction": args.direction, "max_len": args.max_len, "holds": v.holds}
    lines = [f"{c.name}: {args.direction}-closed up to length {args.max_len}: {str(v.holds).lower()}"]
    if v.witness:
        member, reduced = v.witness
        payload["witness"] = {"member": list(member), "reduced": list(reduced)}
        lines.append(f"witness: {_show(member)!r} is in, {_show(reduced)!r} is not")
    if spec.get("kind") == "regular" and args.direction == "prefix":
        a = c.params["automaton"]
        exact = automata.is_prefix_closed(automata.determinize(a, args.budget))
        payload["exact"] = exact
        lines.append(f"exact (automaton check): {str(exact).lower()}")
        if v.witness is not None:
            _check(not exact, "bounded oracle found a counterexample to an exact positive verdict")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_propagate(args) -> int:
    data = _read_json(args.scenario)
    session, snaps = engine.run_scenario(data, Path(args.scenario).parent)
    if args.oracle:
        _oracle_session(data, Path(args.scenario).parent)
    payload = {"trace": snaps, "guarantee": session.guarantee}
    lines = []
    for ev, snap in zip(data.get("events", []), snaps):
        doms = " ".join("{" + ",".join(map(str, d)) + "}" for d in snap["domains"])
        lines.append(f"{ev.get('op'):<10} {snap['phase']:<7} {doms}")
    _emit(args, payload, lines)
    return EXIT_FAIL if session.phase == engine.FAILED else EXIT_OK


def _oracle_session(data, base_dir):
    # replay, comparing each propagate with the brute-force definition for its phase
    s = engine.open_session(data["constraint"], base_dir)
    for ev in data.get("events", []):
        op = ev["op"]
        if op == "propagate" and s.phase != engine.FAILED and s.domains:
            before, phase = list(s.domains), s.phase
            s.propagate()
            if s.automaton is not None:
                a = s.automaton
                member = oracle.nfa_member(a.alphabet, a.start, a.final, a.transitions)
                bound = len(before) + len(a.states)
            elif s.tight:
                member = s.constraint.predicate
                bound = len(before) + s.constraint.extra_support
            else:
                continue
            if phase == engine.CLOSED:
                expect = oracle.domain_consistency_bruteforce(member, before)
            else:
                expect = oracle.open_dconsistency_bruteforce(member, before, bound, s.vtype)
            _check([frozenset(d) for d in s.domains] == expect, f"propagation after {op} disagrees with the oracle")
        elif op == "propagate":
            s.propagate()
        elif op == "add":
            s.add_variable(ev.get("domain", []))
        elif op == "restrict":
            s.restrict_domain(ev.get("var", -1), ev.get("values", []))
        elif op == "close":
            s.close()
        elif op == "propagate_sum_bounds":
            s.propagate_sum_bounds()


def cmd_soft_edit(args) -> int:
    args.json = True
    a = automata.load_automaton(args.automaton)
    weights = softedit.EditWeights.parse(args.weights)
    m = softedit.OpenEditMeasure(a, weights, args.budget)
    w = _word(args.word, args.sep)
    r = m.evaluate(w)
    payload = {
        "m": fmt(r.cost),
        "script": str(r.script) if r.script else None,
        "contractibility": softedit.contractibility_status(weights),
    }
    lines = [f"m = {fmt(r.cost)}", f"script: {r.script if r.script else '(unreachable)'}",
             f"contractibility: {payload['contractibility']}"]
    if args.oracle:
        o = oracle.LanguageOracle(oracle.nfa_member(m.closed.alphabet, m.closed.start, m.closed.final, m.closed.transitions),
                                  tuple(sorted(a.alphabet)), args.max_len)
        ref = oracle.edit_distance_bruteforce(o, weights.as_tuple(), w, r.cost if r.cost != float("inf") else 16)
        _check(ref == r.cost, f"oracle distance {fmt(ref)} differs from {fmt(r.cost)}")
        payload["oracle"] = "agrees"
        lines.append("oracle: agrees")
    if args.approx:
        for name, meas in softedit.approx_measures(m).items():
            payload[name] = fmt(meas(w))
            lines.append(f"{name} = {payload[name]}")
    if args.mstar is not None:
        ms = softedit.m_star_bounded(m, w, args.mstar)
        payload["mstar"] = {"value": fmt(ms.value), "status": ms.status, "ext": _show(ms.extension)}
        lines.append(f"m* <= {fmt(ms.value)} ({ms.status}, extension {_show(ms.extension)!r}, bound {args.mstar})")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_soft_decomp(args) -> int:
    args.json = True
    params = json.loads(args.params) if args.params else {}
    if not isinstance(params, dict):
        raise InputError("--params must be a JSON object")
    keep = softdecomp.drop_lower_bounds if args.weaken else None
    meas = softdecomp.DecompositionMeasure(args.name, args.comb, args.error, keep, **params)
    w = _int_word(args.word, args.sep)
    value = meas(w)
    payload = {"name": args.name, "comb": args.comb, "error": args.error, "weakened": args.weaken,
               "word": list(w), "m": fmt(value)}
    lines = [f"m = {fmt(value)}"]
    if args.oracle:
        holds = softdecomp.catalog_predicate(args.name, **params)(w)
        if args.weaken:
            full = softdecomp.DecompositionMeasure(args.name, args.comb, args.error, **params)
            _check(value <= full(w) and (value == 0 or not holds), "weakened measure exceeds the full measure")
        else:
            _check((value == 0) == holds, "measure is not zero exactly on the constraint")
        payload["oracle"] = "agrees"
        lines.append("oracle: agrees")
    if args.analyze:
        n = len(w)
        d1, d2 = meas.instance(n), meas.instance(n + 1)
        cov = softdecomp.covering_check(d1, d2)
        if args.name == "rising_sawtooth":
            phi, theta = softdecomp.rs_embedding(d1, d2)
        else:
            phi, theta = softdecomp.natural_embedding(d1, d2)
        emb = softdecomp.semantic_embedding_check(d1, d2, phi, theta, meas.comb, mode=args.error)
        counter = oracle.nondecreasing_bruteforce(meas, d1.types["X1"] if n else d2.types["X1"], args.max_len)
        payload["analysis"] = {
            "covering": cov.status,
            "embedding": emb.holds,
            "nondecreasing": counter is None,
            "counterexample": [list(x) for x in counter] if counter else None,
            "max_len": args.max_len,
        }
        lines += [
            f"covering n={n} -> n+1: {cov.status}",
            f"natural embedding: {str(emb.holds).lower()}" + (f" ({emb.reason})" if emb.reason else ""),
            f"non-decreasing up to length {args.max_len}: {str(counter is None).lower()}"
            + (f" (counterexample {counter[0]} -> {counter[1]})" if counter else ""),
        ]
    _emit(args, payload, lines)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--oracle", action="store_true", help="re-check results against the brute-force oracles")
    common.add_argument("--sep", default=None, help="symbol separator for words (default: one character per symbol)")
    common.add_argument("--max-len", type=int, default=6, help="enumeration bound for oracles and bounded checks")
    common.add_argument("--budget", type=int, default=2_000_000, help="search budget (nodes or states)")

    p = argparse.ArgumentParser(prog="opengc", description="Open global constraints toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze-automaton", parents=[common], help="prefix-closedness of an automaton")
    s.add_argument("automaton")
    s.set_defaults(func=cmd_analyze_automaton)

    s = sub.add_parser("prefix-close", parents=[common], help="automaton for the prefix closure")
    s.add_argument("automaton")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_prefix_close)

    s = sub.add_parser("analyze-grammar", parents=[common], help="grammar summary and membership")
    s.add_argument("grammar")
    s.add_argument("--word")
    s.set_defaults(func=cmd_analyze_grammar)

    s = sub.add_parser("prefix-close-grammar", parents=[common], help="CNF grammar for the prefix closure")
    s.add_argument("grammar")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_prefix_close_grammar)

    s = sub.add_parser("check-contractible", parents=[common], help="bounded closure check of a constraint")
    s.add_argument("spec")
    s.add_argument("--direction", choices=algebra.DIRECTIONS, default="prefix")
    s.set_defaults(func=cmd_check_contractible)

    s = sub.add_parser("propagate", parents=[common], help="replay a propagation scenario")
    s.add_argument("scenario")
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("soft-edit", parents=[common], help="open edit-based violation measure")
    s.add_argument("--automaton", required=True)
    s.add_argument("--weights", required=True, help="alpha,beta,gamma,delta; 'inf' forbids an operation")
    s.add_argument("--word", required=True)
    s.add_argument("--approx", action="store_true", help="also report m1..m5")
    s.add_argument("--mstar", type=int, metavar="K", help="bounded m* over extensions up to length K")
    s.set_defaults(func=cmd_soft_edit)

    s = sub.add_parser("soft-decomp", parents=[common], help="decomposition-based violation measure")
    s.add_argument("name", choices=sorted(softdecomp.DECOMPOSITIONS))
    s.add_argument("--params", help="JSON object of decomposition parameters")
    s.add_argument("--comb", default="count_nonzero", choices=sorted(softdecomp.COMBINERS))
    s.add_argument("--error", default=softdecomp.BINARY, choices=[softdecomp.BINARY, softdecomp.AMOUNT])
    s.add_argument("--word", required=True, help="integer values, e.g. 11233")
    s.add_argument("--weaken", action="store_true", help="drop lower-bound items (contractible approximation)")
    s.add_argument("--analyze", action="store_true", help="covering, embedding and monotonicity verdicts")
    s.set_defaults(func=cmd_soft_decomp)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, LifecycleError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceError as exc:
        bound = f" (best bound {fmt(exc.best_bound)})" if exc.best_bound is not None else ""
        print(f"resource limit: {exc}{bound}", file=sys.stderr)
        return EXIT_RESOURCE
    except json.JSONDecodeError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
