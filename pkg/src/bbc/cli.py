"""Command-line entry point.

Commands: normalize, equiv, truthtable, variants, vc, unify, check, analyze,
enumerate.  Exit codes: 0 success or positive result, 1 negative result,
2 usage or input errors.  JSON output (--json) is deterministic for a given
input and seed.  Set BBC_COLOR=0 to disable ANSI colors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import theories
from .ac import equal_mod, unify_mod
from .checks import CHECKS
from .protocol import describe_result, deduce_closure, parse_scenario, run_paper_experiment
from .rewriting import StepCapExceeded, normalize, trace_to_dict
from .semantics import AtomLimit, CircuitVariable, UnboundAtom, atoms, logically_equivalent, truth_table
from .syntax import ParseError, format_substitution, format_term, load_rule_system, parse_term
from .terms import AC, COMM_ONLY, Decomposition, IllSorted, InvalidRule, enumerate_circuits
from .variants import FuelExhausted, variant_complexity, variant_unify, variants_of

USAGE_ERROR = 2
NEGATIVE = 1


def _color_enabled() -> bool:
    if os.environ.get("BBC_COLOR") == "0":
        return False
    return sys.stdout.isatty()


def _paint(text: str, code: str) -> str:
    if _color_enabled():
        return f"\033[{code}m{text}\033[0m"
    return text


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def _theory_from(args: argparse.Namespace) -> Decomposition:
    if args.rules:
        with open(args.rules, "r", encoding="utf-8") as fh:
            source = fh.read()
        _, dec = load_rule_system(source, label="custom")
        return dec
    dec = theories.theory(args.theory, shared_ac=args.shared_ac)
    if args.axioms == "ac":
        dec = dec.with_axioms(AC)
    elif args.axioms == "comm":
        dec = dec.with_axioms(COMM_ONLY)
    return dec


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--theory", default="E3", choices=list(theories.THEORY_LABELS))
    parser.add_argument("--rules", help="path to a rule file defining a custom theory")
    parser.add_argument("--json", action="store_true")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--step-cap", type=int, default=10_000)
    parser.add_argument("--fuel", type=int, default=5_000)
    parser.add_argument("--depth", type=int, default=2)
    parser.add_argument("--atoms", type=int, default=None)
    parser.add_argument("--trace", action="store_true")
    parser.add_argument("--shared-ac", action="store_true",
                        help="force the shared AC reading of the structural axioms")
    parser.add_argument("--axioms", choices=["declared", "ac", "comm"], default="declared",
                        help="override the structural axioms used by the theory")


def cmd_normalize(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    term = parse_term(args.term)
    try:
        trace = normalize(term, dec, args.step_cap)
    except StepCapExceeded as exc:
        print(f"step cap exceeded after {len(exc.trace.steps)} steps", file=sys.stderr)
        return NEGATIVE
    if args.json:
        _emit_json(trace_to_dict(trace))
    elif args.trace:
        for step in trace.steps:
            print(f"{step.rule_label} @ {list(step.position)} -> {format_term(step.after)}")
        print(format_term(trace.result))
    else:
        print(format_term(trace.result))
    return 0


def cmd_equiv(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    t1 = parse_term(args.term1)
    t2 = parse_term(args.term2)
    nf1 = normalize(t1, dec, args.step_cap).result
    nf2 = normalize(t2, dec, args.step_cap).result
    equal = equal_mod(nf1, nf2, dec.active_axioms)
    payload = {
        "equal": equal,
        "nf1": format_term(nf1),
        "nf2": format_term(nf2),
    }
    try:
        payload["logically_equivalent"] = logically_equivalent(t1, t2)
    except CircuitVariable:
        pass
    if args.json:
        _emit_json(payload)
    else:
        print("EQUAL" if equal else "NOT-EQUAL")
    return 0 if equal else NEGATIVE


def cmd_truthtable(args: argparse.Namespace) -> int:
    term = parse_term(args.term)
    table = truth_table(term)
    if args.json:
        _emit_json({
            "atoms": [format_term(a) for a in table.atoms],
            "bits": list(table.bits),
        })
        return 0
    names = [format_term(a) for a in table.atoms]
    print(" ".join(names) + " | value")
    n = len(names)
    for i, bitval in enumerate(table.bits):
        row = " ".join(str((i >> (n - 1 - j)) & 1) for j in range(n))
        print(f"{row} | {bitval}")
    return 0


def cmd_variants(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    term = parse_term(args.term)
    try:
        vset = variants_of(term, dec, args.fuel)
    except FuelExhausted as exc:
        payload = {
            "complete": False,
            "fuel": args.fuel,
            "variants": _variants_payload(exc.partial),
        }
        if args.json:
            _emit_json(payload)
        else:
            print(f"fuel exhausted after {len(exc.partial.variants)} variants (non-convergent)")
        return NEGATIVE
    payload = {"complete": vset.folded_complete, "variants": _variants_payload(vset)}
    if args.json:
        _emit_json(payload)
    else:
        for entry in payload["variants"]:
            print(f"{entry['term']}  {entry['substitution']}")
        print(f"total: {len(vset)}")
    return 0


def _variants_payload(vset) -> list[dict]:
    return [
        {"term": format_term(v.term), "substitution": format_substitution(v.substitution)}
        for v in vset
    ]


def cmd_vc(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    if args.axioms == "declared" and not args.rules and not args.shared_ac:
        # reference counting convention: binary commutative narrowing
        dec = dec.with_axioms(COMM_ONLY if dec.label != "E0" else dec.axioms)
    try:
        result = variant_complexity(dec, args.fuel)
    except FuelExhausted:
        print("fuel exhausted while counting variants", file=sys.stderr)
        return NEGATIVE
    if args.json:
        _emit_json(result)
    else:
        for key, value in sorted(result["overloads"].items()):
            print(f"{key}: {value}")
        print(f"total: {result['total']}")
    return 0 if result["total"] != "divergent" else NEGATIVE


def cmd_unify(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    t1 = parse_term(args.term1)
    t2 = parse_term(args.term2)
    if args.syntactic:
        unifiers = unify_mod(t1, t2, dec.active_axioms, dec.signature)
        complete = True
    else:
        try:
            result = variant_unify(t1, t2, dec, args.fuel)
        except FuelExhausted:
            print("fuel exhausted during variant unification", file=sys.stderr)
            return NEGATIVE
        unifiers, complete = result.substitutions, result.complete
    payload = {
        "complete": complete,
        "unifiers": [format_substitution(s) for s in unifiers],
    }
    if args.json:
        _emit_json(payload)
    else:
        for entry in payload["unifiers"]:
            print(entry)
        print(f"total: {len(unifiers)}")
    return 0 if unifiers else NEGATIVE


def cmd_check(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    selected = args.checks or list(CHECKS)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        print(f"error: unknown checks {unknown}; available: {sorted(CHECKS)}", file=sys.stderr)
        return USAGE_ERROR
    k = args.k if args.k is not None else {"E0": 0, "E1": 1, "E2": 2, "E3": 3}.get(dec.label, 2)
    atom_count = args.atoms if args.atoms is not None else max(2, k + 1)
    reports = []
    for name in selected:
        fn = CHECKS[name]
        if name == "soundness":
            report = fn(dec)
        elif name == "confluence":
            report = fn(dec, k, atom_count, seeds=args.seeds, step_cap=args.step_cap)
        else:
            report = fn(dec, k, atom_count, step_cap=args.step_cap)
        reports.append(report)
    if args.json:
        _emit_json({"reports": [r.to_dict() for r in reports]})
    else:
        for r in reports:
            verdict = _paint("PASS", "32") if r.passed else _paint("FAIL", "31")
            print(f"{verdict} {r.check_name} theory={r.theory} population={r.population}")
            for failure in r.failures[:5]:
                print(f"  failure: {failure}")
    return 0 if all(r.passed for r in reports) else NEGATIVE


def cmd_analyze(args: argparse.Namespace) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        scenario = parse_scenario(fh.read())
    ref = scenario["theory"]
    if ref in theories.THEORY_LABELS:
        dec = theories.theory(ref, shared_ac=args.shared_ac)
    else:
        with open(ref, "r", encoding="utf-8") as fh:
            _, dec = load_rule_system(fh.read(), label="custom")
    query = scenario["query"]
    started = time.perf_counter()
    state, derivation = deduce_closure(query, dec)
    elapsed = time.perf_counter() - started
    payload = {
        "derivable": derivation is not None,
        "knowledge_size": len(state.facts),
        "depth_reached": state.frontier_depth,
        "seconds": round(elapsed, 6),
        "verdict": describe_result(query, derivation),
    }
    if derivation is not None:
        payload["derivation"] = [
            {
                "capability": s.capability,
                "inputs": [format_term(i) for i in s.inputs],
                "output": format_term(s.output),
            }
            for s in derivation.steps
        ]
    if args.json:
        _emit_json(payload)
    else:
        print(payload["verdict"])
        for step in payload.get("derivation", []):
            print(f"  {step['capability']}({', '.join(step['inputs'])}) -> {step['output']}")
    return 0 if derivation is not None else NEGATIVE


def cmd_experiment(args: argparse.Namespace) -> int:
    dec = _theory_from(args)
    report = run_paper_experiment(dec)
    if args.json:
        report = dict(report)
        report["seconds"] = round(report["seconds"], 6)
        _emit_json(report)
    else:
        print(f"{report['theory']}: derivable in {report['seconds']:.3f}s "
              f"({len(report['derivation'])} deduction steps)")
    return 0


def cmd_enumerate(args: argparse.Namespace) -> int:
    names = [f"b{i}" for i in range(args.atoms if args.atoms is not None else 2)]
    k = args.k if args.k is not None else 1
    stream = enumerate_circuits(k, names, include_top=args.include_top)
    if args.count_only:
        print(sum(1 for _ in stream))
        return 0
    count = 0
    for t in stream:
        print(format_term(t))
        count += 1
    print(f"total: {count}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="rewrite a term to its normal form")
    _add_common(p)
    p.add_argument("term")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("equiv", help="compare the normal forms of two terms")
    _add_common(p)
    p.add_argument("term1")
    p.add_argument("term2")
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("truthtable", help="dump the truth table of a circuit")
    _add_common(p)
    p.add_argument("term")
    p.set_defaults(fn=cmd_truthtable)

    p = sub.add_parser("variants", help="compute the folded variant set of a term")
    _add_common(p)
    p.add_argument("term")
    p.set_defaults(fn=cmd_variants)

    p = sub.add_parser("vc", help="variant complexity of the selected theory")
    _add_common(p)
    p.set_defaults(fn=cmd_vc)

    p = sub.add_parser("unify", help="equational unification of two terms")
    _add_common(p)
    p.add_argument("term1")
    p.add_argument("term2")
    p.add_argument("--syntactic", action="store_true",
                   help="unify modulo the structural axioms only (no rules)")
    p.set_defaults(fn=cmd_unify)

    p = sub.add_parser("check", help="run the verification suite")
    _add_common(p)
    p.add_argument("checks", nargs="*", metavar="CHECK",
                   help=f"subset of {sorted(CHECKS)} (default: all)")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seeds", type=int, default=20)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("analyze", help="run a secrecy scenario file")
    _add_common(p)
    p.add_argument("scenario")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("experiment", help="run the reference deduction experiment")
    _add_common(p)
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("enumerate", help="enumerate bounded circuits")
    _add_common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--include-top", action="store_true")
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(fn=cmd_enumerate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, InvalidRule, IllSorted, UnboundAtom, AtomLimit,
            CircuitVariable, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
