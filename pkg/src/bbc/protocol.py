"""Dolev-Yao deduction closure over circuit knowledge.

The attacker's capabilities are fixed: combine two known circuits with
``or``, negate a known circuit, and emit ``top``.  Starting from the
intercepted messages, the closure applies every capability breadth-first,
normalizes each result under the selected theory, discards terms whose rank
exceeds the size cap, and stops at a fixpoint or the depth bound.  A bounded
non-derivability answer is not a proof of secrecy and is reported as such.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .ac import canonical_mod
from .rewriting import normal_form
from .semantics import CircuitVariable
from .syntax import format_term, parse_term
from .terms import (
    CIRCUIT, OR, App, Decomposition, Term, as_bit, neg, rank,
)

NOT_DERIVABLE_TEMPLATE = "not derivable within depth {depth}, size {size}"

CAPABILITIES = ("combine", "negate", "emitTop")


class ExperimentFailed(Exception):
    """The reference experiment did not derive its secret (engine bug)."""


@dataclass(frozen=True)
class SecrecyQuery:
    initial_knowledge: tuple[Term, ...]
    secret: Term
    max_depth: int = 2
    size_cap: int = 3

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("maxDepth must be nonnegative")
        for t in self.initial_knowledge:
            if rank(t) > self.size_cap:
                raise ValueError("sizeCap below the rank of an initial fact")


@dataclass
class KnowledgeState:
    facts: set[Term] = field(default_factory=set)
    frontier_depth: int = 0


@dataclass(frozen=True)
class DerivationStep:
    capability: str
    inputs: tuple[Term, ...]
    output: Term


@dataclass(frozen=True)
class Derivation:
    steps: tuple[DerivationStep, ...]

    def __len__(self) -> int:
        return len(self.steps)


def _nf(t: Term, dec: Decomposition) -> Term:
    return canonical_mod(normal_form(t, dec), dec.active_axioms)


def deduce_closure(query: SecrecyQuery, dec: Decomposition) -> tuple[KnowledgeState, Derivation | None]:
    """Breadth-first attacker closure; returns the final knowledge and, when
    the secret is reached, the shortest derivation found."""
    known: dict[Term, DerivationStep | None] = {}
    for t in query.initial_knowledge:
        known.setdefault(_nf(t, dec), None)
    secret = _nf(query.secret, dec)
    state = KnowledgeState(set(known), 0)

    depth = 0
    while depth < query.max_depth and secret not in known:
        depth += 1
        current = sorted(known, key=lambda t: t.key)
        new: dict[Term, DerivationStep] = {}

        def offer(candidate: Term, step: DerivationStep) -> None:
            if candidate in known or candidate in new:
                return
            if rank(candidate) > query.size_cap:
                return
            new[candidate] = step

        top_term = _nf(App("top"), dec)
        offer(top_term, DerivationStep("emitTop", (), top_term))
        for a in current:
            negated = _nf(neg(a), dec)
            offer(negated, DerivationStep("negate", (a,), negated))
        for a in current:
            for b in current:
                combined = _nf(App(OR, (a, b)), dec)
                offer(combined, DerivationStep("combine", (a, b), combined))
        if not new:
            break
        known.update(new)
        state = KnowledgeState(set(known), depth)
        if secret in known:
            break

    if secret not in known:
        return state, None
    return state, _reconstruct(secret, known)


def _reconstruct(goal: Term, known: dict[Term, DerivationStep | None]) -> Derivation:
    steps: list[DerivationStep] = []
    seen: set[Term] = set()

    def visit(t: Term) -> None:
        if t in seen:
            return
        seen.add(t)
        step = known.get(t)
        if step is None:
            return
        for inp in step.inputs:
            visit(inp)
        steps.append(step)

    visit(goal)
    return Derivation(tuple(steps))


def replay(derivation: Derivation, query: SecrecyQuery, dec: Decomposition) -> bool:
    """Re-run the derivation's steps from the initial knowledge."""
    facts = {_nf(t, dec) for t in query.initial_knowledge}
    for step in derivation.steps:
        if step.capability == "emitTop":
            produced = _nf(App("top"), dec)
        elif step.capability == "negate":
            if step.inputs[0] not in facts:
                return False
            produced = _nf(neg(step.inputs[0]), dec)
        else:
            if any(i not in facts for i in step.inputs):
                return False
            produced = _nf(App(OR, step.inputs), dec)
        if produced != step.output:
            return False
        facts.add(produced)
    return _nf(query.secret, dec) in facts


def describe_result(query: SecrecyQuery, derivation: Derivation | None) -> str:
    if derivation is not None:
        return "DERIVABLE"
    return ("NOT-DERIVABLE-WITHIN-BOUNDS ("
            + NOT_DERIVABLE_TEMPLATE.format(depth=query.max_depth, size=query.size_cap)
            + "; this is not a proof of secrecy)")


def run_paper_experiment(dec: Decomposition) -> dict:
    """One party emits not(or(asBit(r1), asBit(r1))); the attacker must learn
    asBit(r1) within depth 2."""
    if dec.label not in ("E1", "E2", "E3"):
        raise ValueError("the reference experiment needs a theory with at least one disjunction")
    message = neg(App(OR, (as_bit("r1"), as_bit("r1"))))
    secret = as_bit("r1")
    query = SecrecyQuery((message,), secret, max_depth=2, size_cap=3)
    started = time.perf_counter()
    state, derivation = deduce_closure(query, dec)
    elapsed = time.perf_counter() - started
    if derivation is None:
        raise ExperimentFailed(f"secret not derived under {dec.label}")
    return {
        "theory": dec.label,
        "derivable": True,
        "seconds": elapsed,
        "knowledge_size": len(state.facts),
        "depth_reached": state.frontier_depth,
        "derivation": [
            {
                "capability": s.capability,
                "inputs": [format_term(i) for i in s.inputs],
                "output": format_term(s.output),
            }
            for s in derivation.steps
        ],
    }


def parse_scenario(text: str) -> dict:
    """Scenario file: theory:, knowledge: (one term per line), secret:,
    depth:, sizecap: sections."""
    theory_ref: str | None = None
    knowledge: list[Term] = []
    secret: Term | None = None
    depth = 2
    size_cap = 3
    mode: str | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lowered = line.lower()
        if lowered.startswith("theory:"):
            theory_ref = line.split(":", 1)[1].strip()
            mode = None
        elif lowered.startswith("depth:"):
            depth = int(line.split(":", 1)[1])
            mode = None
        elif lowered.startswith("sizecap:"):
            size_cap = int(line.split(":", 1)[1])
            mode = None
        elif lowered.startswith("secret:"):
            rest = line.split(":", 1)[1].strip()
            if rest:
                secret = parse_term(rest)
            mode = "secret"
        elif lowered.startswith("knowledge:"):
            rest = line.split(":", 1)[1].strip()
            if rest:
                knowledge.append(parse_term(rest))
            mode = "knowledge"
        elif mode == "knowledge":
            knowledge.append(parse_term(line))
        elif mode == "secret":
            secret = parse_term(line)
            mode = None
        else:
            raise ValueError(f"unexpected scenario line: {line!r}")
    if theory_ref is None or secret is None:
        raise ValueError("scenario needs both a theory: and a secret: entry")
    return {
        "theory": theory_ref,
        "query": SecrecyQuery(tuple(knowledge), secret, depth, size_cap),
    }
