"""Rewriting modulo B with a fixed, reproducible strategy.

The strategy is leftmost-innermost over the canonical tree: children are
normalized before their parent, rules are tried in declaration order, and
matchers come out of the matcher enumeration in a deterministic order.  At
flattened ``or`` nodes under AC, the redex may be any sub-multiset of the
children (extension matching), so rules like Absorption2 fire inside wider
disjunctions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from .ac import canonical_mod, equal_mod, match_mod
from .terms import (
    COMM, OR, App, Decomposition, RuleSystem, Substitution, Term, Var,
)

DEFAULT_STEP_CAP = 10_000


class StepCapExceeded(Exception):
    """Normalization exceeded the step budget (non-terminating theory?)."""

    def __init__(self, trace: "DerivationTrace"):
        self.trace = trace
        super().__init__(f"no normal form within {len(trace.steps)} steps")


@dataclass(frozen=True)
class RewriteStep:
    rule_label: str
    position: tuple[int, ...]
    matcher: Substitution
    before: Term
    after: Term


@dataclass(frozen=True)
class DerivationTrace:
    start: Term
    steps: tuple[RewriteStep, ...]
    result: Term

    def rule_labels(self) -> list[str]:
        return [s.rule_label for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def _iter_steps_at(t: Term, node: Term, path: tuple[int, ...], rules: RuleSystem,
                   axioms: frozenset[str], dec: Decomposition) -> Iterator[RewriteStep]:
    sig = dec.signature
    is_or = isinstance(node, App) and node.symbol == OR
    for rule in rules:
        lhs_or = isinstance(rule.lhs, App) and rule.lhs.symbol == OR
        if is_or and lhs_or and "assoc" in axioms:
            n = len(node.args)
            for size in range(n, 1, -1):
                for idxs in combinations(range(n), size):
                    redex = node.args[idxs[0]] if size == 1 else App(OR, tuple(node.args[i] for i in idxs))
                    for sigma in match_mod(rule.lhs, redex, axioms, sig):
                        rest = tuple(node.args[i] for i in range(n) if i not in idxs)
                        replacement = sigma.apply(rule.rhs)
                        new_node: Term = replacement if not rest else canonical_mod(
                            App(OR, rest + (replacement,)), axioms)
                        after = canonical_mod(_replace(t, path, new_node), axioms)
                        yield RewriteStep(rule.label, path, sigma, t, after)
        else:
            for sigma in match_mod(rule.lhs, node, axioms, sig):
                after = canonical_mod(_replace(t, path, sigma.apply(rule.rhs)), axioms)
                yield RewriteStep(rule.label, path, sigma, t, after)


def _replace(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    assert isinstance(t, App)
    i = path[0]
    args = t.args[:i] + (_replace(t.args[i], path[1:], new),) + t.args[i + 1:]
    return App(t.symbol, args)


def iter_rewrite_steps(t: Term, dec: Decomposition,
                       rules: RuleSystem | None = None) -> Iterator[RewriteStep]:
    """All applicable steps, innermost positions first."""
    rules = rules or dec.rules
    axioms = dec.active_axioms
    t = canonical_mod(t, axioms)

    def walk(node: Term, path: tuple[int, ...]) -> Iterator[RewriteStep]:
        if isinstance(node, Var):
            return
        assert isinstance(node, App)
        for i, child in enumerate(node.args):
            yield from walk(child, path + (i,))
        yield from _iter_steps_at(t, node, path, rules, axioms, dec)

    yield from walk(t, ())


def rewrite_once(t: Term, dec: Decomposition,
                 rules: RuleSystem | None = None) -> RewriteStep | None:
    """First applicable step under the fixed strategy, or None on normal forms."""
    for step in iter_rewrite_steps(t, dec, rules):
        return step
    return None


def normalize(t: Term, dec: Decomposition, step_cap: int = DEFAULT_STEP_CAP,
              rules: RuleSystem | None = None) -> DerivationTrace:
    """Rewrite to B-normal form, recording every step."""
    axioms = dec.active_axioms
    start = canonical_mod(t, axioms)
    current = start
    steps: list[RewriteStep] = []
    while True:
        step = rewrite_once(current, dec, rules)
        if step is None:
            return DerivationTrace(start, tuple(steps), current)
        steps.append(step)
        current = step.after
        if len(steps) > step_cap:
            raise StepCapExceeded(DerivationTrace(start, tuple(steps), current))


def normal_form(t: Term, dec: Decomposition, step_cap: int = DEFAULT_STEP_CAP) -> Term:
    return normalize(t, dec, step_cap).result


def is_normal_form(t: Term, dec: Decomposition) -> bool:
    return rewrite_once(t, dec) is None


def normalize_random(t: Term, dec: Decomposition, rng: random.Random,
                     step_cap: int = DEFAULT_STEP_CAP) -> DerivationTrace:
    """Normalize picking a uniformly random applicable step each time."""
    axioms = dec.active_axioms
    start = canonical_mod(t, axioms)
    current = start
    steps: list[RewriteStep] = []
    while True:
        options = list(iter_rewrite_steps(current, dec))
        if not options:
            return DerivationTrace(start, tuple(steps), current)
        step = rng.choice(options)
        steps.append(step)
        current = step.after
        if len(steps) > step_cap:
            raise StepCapExceeded(DerivationTrace(start, tuple(steps), current))


def trace_to_dict(trace: DerivationTrace) -> dict:
    from .syntax import format_substitution, format_term

    return {
        "start": format_term(trace.start),
        "steps": [
            {
                "rule": s.rule_label,
                "position": list(s.position),
                "matcher": format_substitution(s.matcher),
                "after": format_term(s.after),
            }
            for s in trace.steps
        ],
        "result": format_term(trace.result),
    }
