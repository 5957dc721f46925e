"""Executable re-verification of the theory-level claims.

Each check enumerates a finite population, compares engine behaviour against
the brute-force semantic oracle, and returns a :class:`CheckReport` whose
failure records replay through the public API.  Reports are deterministic
given (theory, k, atoms, seed).
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass, field

from .ac import canonical_mod, equal_mod
from .rewriting import StepCapExceeded, normalize, normalize_random
from .semantics import classify_normal_form, instantiate_shapes, logically_equivalent, truth_table
from .syntax import format_term
from .terms import (
    BIT, CIRCUIT, OR, App, Decomposition, Substitution, Term, Var,
    enumerate_circuits, sort_of, variables,
)


@dataclass
class CheckReport:
    check_name: str
    theory: str
    population: int
    failures: list[dict] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "check": self.check_name,
            "theory": self.theory,
            "population": self.population,
            "passed": self.passed,
            "failures": self.failures,
            "info": self.info,
        }


def _atom_names(count: int) -> list[str]:
    return [f"b{i}" for i in range(count)]


def check_soundness(dec: Decomposition) -> CheckReport:
    """Every rule (and the declared or-axioms) preserves logical equivalence.

    Rule Bit variables act as atoms directly; Circuit variables range over
    all circuits of rank <= 1 on two private atoms each.
    """
    report = CheckReport("soundness", dec.label, 0)
    for rule in dec.rules:
        circuit_vars = sorted(
            (v for v in variables(rule.lhs) if v.sort != BIT), key=lambda v: v.key)
        pools = []
        for i, v in enumerate(circuit_vars):
            pool = list(enumerate_circuits(1, [f"x{2 * i}", f"x{2 * i + 1}"], include_top=True))
            pools.append(pool)
        for combo in _cartesian(pools):
            sigma = Substitution(dict(zip(circuit_vars, combo)))
            lhs = sigma.apply(rule.lhs)
            rhs = sigma.apply(rule.rhs)
            report.population += 1
            if not logically_equivalent(lhs, rhs):
                report.failures.append({
                    "rule": rule.label,
                    "lhs": format_term(lhs),
                    "rhs": format_term(rhs),
                    "counterexample": _separating_valuation(lhs, rhs),
                })
    if "comm" in dec.active_axioms:
        p = App(OR, (Var("b0", BIT), Var("b1", BIT)))
        q = App(OR, (Var("b1", BIT), Var("b0", BIT)))
        report.population += 1
        if not logically_equivalent(p, q):
            report.failures.append({"rule": "comm-axiom", "lhs": format_term(p), "rhs": format_term(q)})
    return report


def _cartesian(pools: list[list[Term]]):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for tail in _cartesian(pools[1:]):
            yield (head,) + tail


def _separating_valuation(t1: Term, t2: Term) -> dict[str, int] | None:
    from .semantics import atoms, evaluate

    shared = sorted(set(atoms(t1)) | set(atoms(t2)), key=lambda a: a.key)
    n = len(shared)
    for i in range(1 << n):
        valuation = {a: (i >> (n - 1 - j)) & 1 for j, a in enumerate(shared)}
        if evaluate(t1, valuation) != evaluate(t2, valuation):
            return {format_term(a): v for a, v in valuation.items()}
    return None


def check_completeness(dec: Decomposition, k: int, atom_count: int,
                       step_cap: int = 10_000) -> CheckReport:
    """Logically equivalent circuits of the bounded language share one
    B-normal form, and inequivalent ones never collide."""
    report = CheckReport("completeness", dec.label, 0)
    names = _atom_names(atom_count)
    fixed_atoms = tuple(Var(n, BIT) for n in names)
    buckets: dict[tuple[int, ...], dict] = {}
    axioms = dec.active_axioms
    for t in enumerate_circuits(k, names, include_top=True):
        report.population += 1
        table = truth_table(t, fixed_atoms).bits
        nf = canonical_mod(normalize(t, dec, step_cap).result, axioms)
        bucket = buckets.setdefault(table, {"witness": t, "normal_forms": {}})
        bucket["normal_forms"].setdefault(nf, t)
    for table, bucket in buckets.items():
        if len(bucket["normal_forms"]) > 1 and len(report.failures) < 20:
            (nf1, t1), (nf2, t2) = list(bucket["normal_forms"].items())[:2]
            report.failures.append({
                "kind": "equivalent-but-distinct-normal-forms",
                "input1": format_term(t1),
                "input2": format_term(t2),
                "nf1": format_term(nf1),
                "nf2": format_term(nf2),
            })
    nf_to_table: dict[Term, tuple[int, ...]] = {}
    for table, bucket in buckets.items():
        for nf in bucket["normal_forms"]:
            seen = nf_to_table.get(nf)
            if seen is not None and seen != table:
                report.failures.append({
                    "kind": "inequivalent-but-shared-normal-form",
                    "normal_form": format_term(nf),
                })
            nf_to_table[nf] = table
    report.info["semantic_classes"] = len(buckets)
    return report


def check_normal_form_catalog(dec: Decomposition, k: int, atom_count: int,
                              step_cap: int = 10_000) -> CheckReport:
    """Normalized circuits classify into the catalog; distinct shape ids are
    semantically distinct."""
    report = CheckReport("normal-form-catalog", dec.label, 0)
    names = _atom_names(atom_count)
    observed: set[str] = set()
    unclassified: dict[Term, Term] = {}
    for t in enumerate_circuits(k, names, include_top=True):
        report.population += 1
        nf = normalize(t, dec, step_cap).result
        shape = classify_normal_form(nf, dec.label)
        if shape is None:
            if nf not in unclassified and len(unclassified) < 50:
                unclassified[nf] = t
        else:
            observed.add(shape)
    for nf, source in unclassified.items():
        report.failures.append({
            "kind": "unclassified-normal-form",
            "input": format_term(source),
            "normal_form": format_term(nf),
        })
    pool = [Var(f"b{i}", BIT) for i in range(4)]
    instantiations = instantiate_shapes(dec.label, pool)
    ids = list(instantiations)
    for i, id1 in enumerate(ids):
        for id2 in ids[i + 1:]:
            for u in instantiations[id1]:
                for v in instantiations[id2]:
                    report.population += 1
                    if equal_mod(u, v, dec.active_axioms):
                        continue  # the +/- notation identifies these forms
                    if logically_equivalent(u, v):
                        report.failures.append({
                            "kind": "catalog-shapes-equivalent",
                            "shape1": id1,
                            "shape2": id2,
                            "term1": format_term(u),
                            "term2": format_term(v),
                        })
    report.info["observed_shapes"] = sorted(observed)
    return report


def check_confluence_sampling(dec: Decomposition, k: int, atom_count: int,
                              seeds: int = 20, step_cap: int = 10_000) -> CheckReport:
    """Randomized redex/rule orderings land on the strategy's normal form."""
    report = CheckReport("confluence-sampling", dec.label, 0, info={"seeds": seeds})
    names = _atom_names(atom_count)
    axioms = dec.active_axioms
    for t in enumerate_circuits(k, names, include_top=True):
        reference = canonical_mod(normalize(t, dec, step_cap).result, axioms)
        term_hash = zlib.crc32(format_term(t).encode())
        for seed in range(seeds):
            report.population += 1
            rng = random.Random(seed * 7919 + term_hash)
            try:
                result = canonical_mod(normalize_random(t, dec, rng, step_cap).result, axioms)
            except StepCapExceeded:
                report.failures.append({
                    "kind": "step-cap", "input": format_term(t), "seed": seed})
                continue
            if result != reference:
                if len(report.failures) < 20:
                    report.failures.append({
                        "kind": "divergent-normal-forms",
                        "input": format_term(t),
                        "seed": seed,
                        "reference": format_term(reference),
                        "sampled": format_term(result),
                    })
    return report


def check_sort_decreasing_termination(dec: Decomposition, k: int, atom_count: int,
                                      step_cap: int = 10_000) -> CheckReport:
    """Every step is sort-decreasing; normalization never hits the cap."""
    report = CheckReport("sort-decreasing-termination", dec.label, 0)
    names = _atom_names(atom_count)
    sig = dec.signature
    max_steps = 0
    for t in enumerate_circuits(k, names, include_top=True):
        report.population += 1
        try:
            trace = normalize(t, dec, step_cap)
        except StepCapExceeded:
            report.failures.append({"kind": "step-cap", "input": format_term(t)})
            continue
        max_steps = max(max_steps, len(trace.steps))
        for step in trace.steps:
            if not sig.leq(sort_of(step.after, sig), sort_of(step.before, sig)):
                report.failures.append({
                    "kind": "sort-increasing-step",
                    "input": format_term(t),
                    "rule": step.rule_label,
                    "before": format_term(step.before),
                    "after": format_term(step.after),
                })
    report.info["max_steps"] = max_steps
    return report


CHECKS = {
    "soundness": check_soundness,
    "completeness": check_completeness,
    "catalog": check_normal_form_catalog,
    "confluence": check_confluence_sampling,
    "termination": check_sort_decreasing_termination,
}
