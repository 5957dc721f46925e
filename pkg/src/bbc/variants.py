"""Folding variant narrowing, variant complexity, and variant unification.

Narrowing follows the standard variant strategy: a node whose accumulated
substitution has a reducible binding is dropped (such nodes are covered by the
variant computed for the normalized substitution), and a new node is folded
into the set when an existing variant subsumes it, term by B-matching and
substitution by instance-of on the input variables.  On theories with the
finite variant property the frontier empties; otherwise the tree-node budget
runs out and :class:`FuelExhausted` carries the partial set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ac import (
    UnifierSet, canonical_mod, minimize_substitutions, subsumes_mod, unify_mod,
)
from .rewriting import normal_form, rewrite_once
from .terms import (
    AS_BIT, CIRCUIT, NOT, OR, PAIR_SYMBOL, TOP, TUPLE_SYMBOL,
    App, Decomposition, FreshVars, RuleSystem, Substitution, Term, Var, variables,
)

DEFAULT_FUEL = 5_000


@dataclass(frozen=True)
class Variant:
    term: Term
    substitution: Substitution


@dataclass(frozen=True)
class VariantSet:
    variants: tuple[Variant, ...]
    input_term: Term
    folded_complete: bool

    def __iter__(self):
        return iter(self.variants)

    def __len__(self):
        return len(self.variants)


class FuelExhausted(Exception):
    """Narrowing did not converge within the node budget."""

    def __init__(self, partial: VariantSet):
        self.partial = partial
        super().__init__(
            f"variant narrowing of {partial.input_term!r} exceeded its fuel "
            f"({len(partial.variants)} variants found)")


def narrow_one_step(t: Term, dec: Decomposition, fresh: FreshVars | None = None,
                    rules: RuleSystem | None = None) -> list[tuple[Term, Substitution, str, tuple[int, ...]]]:
    """All one-step narrowings of ``t``: (result, unifier on vars(t), rule, position)."""
    fresh = fresh or FreshVars()
    rules = rules or dec.rules
    axioms = dec.active_axioms
    sig = dec.signature
    t = canonical_mod(t, axioms)
    tvars = sorted(variables(t), key=lambda v: v.key)
    out: list[tuple[Term, Substitution, str, tuple[int, ...]]] = []

    def attempt(node: Term, path: tuple[int, ...]) -> None:
        for rule in rules:
            renamed, _ = rule.renamed(fresh)
            lhs_or = isinstance(renamed.lhs, App) and renamed.lhs.symbol == OR
            node_or = isinstance(node, App) and node.symbol == OR
            problems: list[tuple[Term, Term | None]] = []
            if node_or and lhs_or and "assoc" in axioms:
                ext = fresh.make(CIRCUIT)
                problems.append((App(OR, renamed.lhs.args + (ext,)), ext))
                problems.append((renamed.lhs, None))
            elif node_or == lhs_or:
                problems.append((renamed.lhs, None))
            for lhs, ext in problems:
                for theta in unify_mod(node, lhs, axioms, sig, fresh):
                    replacement = theta.apply(
                        App(OR, (renamed.rhs, ext)) if ext is not None else renamed.rhs)
                    result = canonical_mod(_replace(t, path, replacement, theta), axioms)
                    out.append((result, theta.restrict(tvars), rule.label, path))

    def walk(node: Term, path: tuple[int, ...]) -> None:
        if isinstance(node, Var):
            return
        assert isinstance(node, App)
        for i, child in enumerate(node.args):
            walk(child, path + (i,))
        attempt(node, path)

    walk(t, ())
    return out


def _replace(t: Term, path: tuple[int, ...], new: Term, theta: Substitution) -> Term:
    if not path:
        return new
    assert isinstance(t, App)
    i = path[0]
    args = tuple(
        _replace(a, path[1:], new, theta) if j == i else theta.apply(a)
        for j, a in enumerate(t.args))
    return App(t.symbol, args)


def _binding_reducible(sigma: Substitution, dec: Decomposition) -> bool:
    return any(rewrite_once(t, dec) is not None for _, t in sigma.items())


def _as_tuple(var: Variant, tvars: Sequence[Var]) -> Term:
    return App(TUPLE_SYMBOL, (var.term,) + tuple(var.substitution.get(v) for v in tvars))


def _subsumed(cand: Variant, existing: Sequence[Variant], tvars: Sequence[Var],
              dec: Decomposition) -> bool:
    """True iff some existing variant generalizes cand, term and substitution
    through one shared matcher."""
    axioms = dec.active_axioms
    sig = dec.signature
    subject = _as_tuple(cand, tvars)
    return any(subsumes_mod(_as_tuple(var, tvars), subject, axioms, sig)
               for var in existing)


def variants_of(t: Term, dec: Decomposition, fuel: int = DEFAULT_FUEL,
                rules: RuleSystem | None = None) -> VariantSet:
    """Breadth-first folding variant narrowing from ``(normalize(t), id)``."""
    axioms = dec.active_axioms
    rules = rules or dec.rules
    fresh = FreshVars()
    tvars = sorted(variables(t), key=lambda v: v.key)
    root_term = normal_form(t, dec)
    root = Variant(root_term, Substitution())
    accepted: list[Variant] = [root]
    frontier: list[Variant] = [root]
    nodes = 1
    while frontier:
        next_frontier: list[Variant] = []
        for node in frontier:
            for result, theta, _label, _pos in narrow_one_step(node.term, dec, fresh, rules):
                nodes += 1
                if nodes > fuel:
                    raise FuelExhausted(VariantSet(tuple(accepted), t, False))
                sigma = node.substitution.compose(theta).restrict(tvars)
                if _binding_reducible(sigma, dec):
                    continue
                nf = normal_form(result, dec)
                cand = Variant(canonical_mod(nf, axioms), sigma)
                if _subsumed(cand, accepted, tvars, dec):
                    continue
                accepted.append(cand)
                next_frontier.append(cand)
        frontier = next_frontier
    final = _minimize_variants(accepted, tvars, dec)
    return VariantSet(tuple(final), t, True)


def _minimize_variants(variants: list[Variant], tvars: Sequence[Var],
                       dec: Decomposition) -> list[Variant]:
    kept: list[Variant] = []
    for i, cand in enumerate(variants):
        redundant = False
        for j, other in enumerate(variants):
            if i == j:
                continue
            if _subsumed(cand, [other], tvars, dec):
                mutual = _subsumed(other, [cand], tvars, dec)
                if not mutual or j < i:
                    redundant = True
                    break
        if not redundant:
            kept.append(cand)
    return kept


# symbols counted by the reference reconciliation of the complexity table;
# Maude merges subsort-overloaded operators, so ``not`` counts once at its
# largest declaration, and the protocol-only asBit extension is excluded
TABLE_SYMBOLS = (TOP, NOT, OR)


def _general_application(dec: Decomposition, name: str, arg_sorts: tuple[str, ...],
                         fresh: FreshVars) -> Term:
    return App(name, tuple(fresh.make(s) for s in arg_sorts)) if arg_sorts else App(name)


def variant_complexity(dec: Decomposition, fuel: int = DEFAULT_FUEL) -> dict:
    """Per-overload variant counts of most-general applications, plus totals.

    ``overloads`` maps "name : s1 s2 -> s" to a count or "divergent"; totals
    are reported for every reasonable counting convention so mismatches can
    be reconciled explicitly.
    """
    fresh = FreshVars(1000)
    overloads: dict[str, int | str] = {}
    per_symbol_max: dict[str, int | str] = {}
    for decl in dec.signature.ops:
        key = f"{decl.name} : {' '.join(decl.arg_sorts)} -> {decl.result_sort}".replace("  ", " ")
        term = _general_application(dec, decl.name, decl.arg_sorts, fresh)
        try:
            count: int | str = len(variants_of(term, dec, fuel))
        except FuelExhausted:
            count = "divergent"
        overloads[key] = count
        prev = per_symbol_max.get(decl.name)
        if prev == "divergent" or count == "divergent":
            per_symbol_max[decl.name] = "divergent"
        elif prev is None or count > prev:
            per_symbol_max[decl.name] = count

    def total(names: Sequence[str]) -> int | str:
        values = [per_symbol_max.get(n, 0) for n in names]
        if any(v == "divergent" for v in values):
            return "divergent"
        return sum(v for v in values if isinstance(v, int))

    return {
        "theory": dec.label,
        "axioms": sorted(dec.active_axioms),
        "overloads": overloads,
        "per_symbol": dict(per_symbol_max),
        "totals": {
            "reference": total(TABLE_SYMBOLS),
            "all_overloads": ("divergent" if any(v == "divergent" for v in overloads.values())
                              else sum(v for v in overloads.values() if isinstance(v, int))),
            "with_asBit": total(TABLE_SYMBOLS + (AS_BIT,)),
        },
        "total": total(TABLE_SYMBOLS),
    }


def variant_unify(t1: Term, t2: Term, dec: Decomposition,
                  fuel: int = DEFAULT_FUEL) -> UnifierSet:
    """Equational unification via variants of the pairing of both terms."""
    axioms = dec.active_axioms
    sig = dec.signature
    keep = sorted(variables(t1) | variables(t2), key=lambda v: v.key)
    pair = App(PAIR_SYMBOL, (t1, t2))
    vset = variants_of(pair, dec, fuel)
    fresh = FreshVars(10 ** 6)
    found: list[Substitution] = []
    seen: set = set()
    for var in vset:
        assert isinstance(var.term, App) and var.term.symbol == PAIR_SYMBOL
        left, right = var.term.args
        for theta in unify_mod(left, right, axioms, sig, fresh):
            sigma = var.substitution.compose(theta).restrict(keep)
            key = frozenset((v, canonical_mod(u, axioms)) for v, u in sigma.items())
            if key in seen:
                continue
            seen.add(key)
            found.append(sigma)
    found = minimize_substitutions(found, keep, axioms, sig)
    return UnifierSet(tuple(found), complete=vset.folded_complete)
