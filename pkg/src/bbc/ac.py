"""Equality, matching and unification modulo the structural axioms of ``or``.

Three regimes are supported for the single axiom-carrying symbol:

* free (B = {}): positional comparison on the flattened node;
* commutative (B = {comm}): children align one-to-one in any order, arities
  must agree (the binary-tree reading of nested disjunctions);
* AC (B = {assoc, comm}): children form multisets, pattern variables absorb
  nonempty sub-multisets, and unification solves the induced linear
  Diophantine system over a basis of minimal solutions.

Associativity by itself is resolved structurally by the flattened term
representation, so {assoc} behaves like {} on stored terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Sequence

from .terms import (
    AC, BIT, CIRCUIT, COMM, FREE, FRESH, MSG, NOT, OR, TOP, TUPLE_SYMBOL,
    App, FreshVars, IllSorted, Signature, Substitution, Term, Var,
    builtin_signature, canonical, variables,
)

Binds = dict[Var, Term]

_DEFAULT_SIG = builtin_signature()


@dataclass(frozen=True)
class MatchResult:
    substitutions: tuple[Substitution, ...]

    def __iter__(self):
        return iter(self.substitutions)

    def __len__(self):
        return len(self.substitutions)

    def __bool__(self):
        return bool(self.substitutions)


@dataclass(frozen=True)
class UnifierSet:
    substitutions: tuple[Substitution, ...]
    complete: bool = True

    def __iter__(self):
        return iter(self.substitutions)

    def __len__(self):
        return len(self.substitutions)

    def __bool__(self):
        return bool(self.substitutions)


def canonical_mod(t: Term, axioms: frozenset[str]) -> Term:
    """B-canonical representative: sorted or-children when comm is declared."""
    return canonical(t) if COMM in axioms else t


def equal_mod(t1: Term, t2: Term, axioms: frozenset[str]) -> bool:
    if COMM in axioms:
        return canonical(t1) == canonical(t2)
    return t1 == t2


# ---------------------------------------------------------------------------
# Matching (subject variables are frozen)
# ---------------------------------------------------------------------------

def _sort_ok(v: Var, t: Term, sig: Signature) -> bool:
    try:
        return sig.leq(sig.least_sort(t), v.sort)
    except IllSorted:
        return False


def _match(pattern: Term, subject: Term, binds: Binds, axioms: frozenset[str],
           sig: Signature) -> Iterator[Binds]:
    if isinstance(pattern, Var):
        bound = binds.get(pattern)
        if bound is not None:
            if equal_mod(bound, subject, axioms):
                yield binds
            return
        if _sort_ok(pattern, subject, sig):
            out = dict(binds)
            out[pattern] = canonical_mod(subject, axioms)
            yield out
        return
    if not isinstance(subject, App) or not isinstance(pattern, App):
        return
    if pattern.symbol != subject.symbol:
        return
    if pattern.symbol == OR:
        yield from _match_or(pattern.args, subject.args, binds, axioms, sig)
        return
    if len(pattern.args) != len(subject.args):
        return
    yield from _match_seq(pattern.args, subject.args, binds, axioms, sig)


def _match_seq(pats: Sequence[Term], subs: Sequence[Term], binds: Binds,
               axioms: frozenset[str], sig: Signature) -> Iterator[Binds]:
    if not pats:
        yield binds
        return
    for b in _match(pats[0], subs[0], binds, axioms, sig):
        yield from _match_seq(pats[1:], subs[1:], b, axioms, sig)


def _match_or(pats: Sequence[Term], subs: Sequence[Term], binds: Binds,
              axioms: frozenset[str], sig: Signature) -> Iterator[Binds]:
    if COMM not in axioms:
        if len(pats) == len(subs):
            yield from _match_seq(pats, subs, binds, axioms, sig)
        return
    if "assoc" not in axioms:
        if len(pats) != len(subs):
            return
        seen: set[tuple] = set()
        for perm in permutations(range(len(subs))):
            arranged = tuple(subs[i] for i in perm)
            if arranged in seen:
                continue
            seen.add(arranged)
            yield from _match_seq(pats, arranged, binds, axioms, sig)
        return
    # full AC: non-variable pattern children claim single subject children,
    # variable children absorb the rest as nonempty groups
    if len(pats) > len(subs):
        return
    nonvars = [p for p in pats if not isinstance(p, Var)]
    pat_vars = [p for p in pats if isinstance(p, Var)]
    yield from _match_or_nonvars(nonvars, pat_vars, list(range(len(subs))), subs,
                                 binds, axioms, sig)


def _match_or_nonvars(nonvars: list[Term], pat_vars: list[Var], free: list[int],
                      subs: Sequence[Term], binds: Binds, axioms: frozenset[str],
                      sig: Signature) -> Iterator[Binds]:
    if not nonvars:
        yield from _match_or_vars(pat_vars, free, subs, binds, axioms, sig)
        return
    p, rest = nonvars[0], nonvars[1:]
    tried: set = set()
    for idx in free:
        s = subs[idx]
        if s.key in tried:
            continue
        tried.add(s.key)
        for b in _match(p, s, binds, axioms, sig):
            remaining = [j for j in free if j != idx]
            yield from _match_or_nonvars(rest, pat_vars, remaining, subs, b, axioms, sig)


def _group_term(group: list[Term]) -> Term:
    if len(group) == 1:
        return group[0]
    return canonical(App(OR, tuple(group)))


def _match_or_vars(pat_vars: list[Var], free: list[int], subs: Sequence[Term],
                   binds: Binds, axioms: frozenset[str], sig: Signature) -> Iterator[Binds]:
    if not pat_vars:
        if not free:
            yield binds
        return
    v, rest = pat_vars[0], pat_vars[1:]
    bound = binds.get(v)
    if bound is not None:
        parts = list(bound.args) if isinstance(bound, App) and bound.symbol == OR else [bound]
        for idxs in _pick_multiset(free, subs, parts, axioms):
            remaining = [j for j in free if j not in idxs]
            yield from _match_or_vars(rest, remaining, subs, binds, axioms, sig)
        return
    # nonempty groups, but leave at least one child per remaining variable
    max_take = len(free) - len(rest)
    seen_groups: set = set()
    for size in range(1, max_take + 1):
        for combo in combinations(free, size):
            group = sorted((subs[i] for i in combo), key=lambda t: t.key)
            gkey = tuple(t.key for t in group)
            if gkey in seen_groups:
                continue
            seen_groups.add(gkey)
            value = _group_term(group)
            if not _sort_ok(v, value, sig):
                continue
            out = dict(binds)
            out[v] = value
            remaining = [j for j in free if j not in combo]
            yield from _match_or_vars(rest, remaining, subs, out, axioms, sig)


def _pick_multiset(free: list[int], subs: Sequence[Term], parts: list[Term],
                   axioms: frozenset[str]) -> Iterator[tuple[int, ...]]:
    """Index tuples in ``free`` whose terms form exactly the multiset ``parts``."""
    if len(parts) > len(free):
        return
    want = sorted(canonical_mod(p, axioms).key for p in parts)
    for combo in combinations(free, len(parts)):
        got = sorted(canonical_mod(subs[i], axioms).key for i in combo)
        if got == want:
            yield combo
            return  # any one witness suffices; groups are value-equal


def match_mod(pattern: Term, subject: Term, axioms: frozenset[str],
              signature: Signature | None = None) -> MatchResult:
    """Complete, duplicate-free set of B-matchers of pattern onto subject."""
    sig = signature or _DEFAULT_SIG
    out: list[Substitution] = []
    seen: set = set()
    for binds in _match(pattern, subject, {}, axioms, sig):
        sigma = Substitution(binds)
        key = frozenset((v, t) for v, t in sigma.items())
        if key not in seen:
            seen.add(key)
            out.append(sigma)
    return MatchResult(tuple(out))


def subsumes_mod(general: Term, specific: Term, axioms: frozenset[str],
                 signature: Signature | None = None) -> bool:
    """True iff ``specific`` is a B-instance of ``general`` (its vars frozen)."""
    for _ in _match(general, specific, {}, axioms, signature or _DEFAULT_SIG):
        return True
    return False


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------

_MAX_BASIS = 14


def _apply_binds(t: Term, binds: Binds) -> Term:
    if not binds:
        return t
    return Substitution(binds).apply(t)


def _weaken(t: Term, target: str, binds: Binds, sig: Signature,
            fresh: FreshVars) -> Iterator[tuple[Term, Binds]]:
    """Specialize variables of ``t`` so that its least sort becomes <= target."""
    try:
        if sig.leq(sig.least_sort(t), target):
            yield t, binds
            return
    except IllSorted:
        return
    if isinstance(t, Var):
        if sig.leq(target, t.sort):
            w = fresh.make(target)
            out = dict(binds)
            out[t] = w
            yield w, out
        return
    assert isinstance(t, App)
    if t.symbol == OR or not t.args:
        return
    for decl in sig.declarations(t.symbol, len(t.args)):
        if not sig.leq(decl.result_sort, target):
            continue
        def go(i: int, args: tuple[Term, ...], b: Binds) -> Iterator[tuple[Term, Binds]]:
            if i == len(t.args):
                yield App(t.symbol, args), b
                return
            arg = _apply_binds(t.args[i], b)
            for new_arg, b2 in _weaken(arg, decl.arg_sorts[i], b, sig, fresh):
                yield from go(i + 1, args + (new_arg,), b2)
        yield from go(0, (), binds)


def _occurs(v: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return v == t
    return any(_occurs(v, a) for a in t.args)  # type: ignore[union-attr]


def _bind(v: Var, t: Term, binds: Binds, eqs: list[tuple[Term, Term]],
          axioms: frozenset[str], sig: Signature, fresh: FreshVars) -> Iterator[Binds]:
    t = _apply_binds(t, binds)
    if isinstance(t, Var) and t == v:
        yield from _unify(eqs, binds, axioms, sig, fresh)
        return
    if _occurs(v, t):
        return
    for value, b in _weaken(t, v.sort, binds, sig, fresh):
        value = _apply_binds(value, b)
        if _occurs(v, value):
            continue
        out = {w: Substitution({v: value}).apply(u) for w, u in b.items()}
        out[v] = value
        new_eqs = [(Substitution({v: value}).apply(a), Substitution({v: value}).apply(c))
                   for a, c in eqs]
        yield from _unify(new_eqs, out, axioms, sig, fresh)


def _unify(eqs: list[tuple[Term, Term]], binds: Binds, axioms: frozenset[str],
           sig: Signature, fresh: FreshVars) -> Iterator[Binds]:
    if not eqs:
        yield binds
        return
    s, t = eqs[0]
    rest = eqs[1:]
    s = _apply_binds(s, binds)
    t = _apply_binds(t, binds)
    if equal_mod(s, t, axioms):
        yield from _unify(rest, binds, axioms, sig, fresh)
        return
    if isinstance(s, Var):
        yield from _bind(s, t, binds, rest, axioms, sig, fresh)
        return
    if isinstance(t, Var):
        yield from _bind(t, s, binds, rest, axioms, sig, fresh)
        return
    assert isinstance(s, App) and isinstance(t, App)
    if s.symbol != t.symbol:
        return
    if s.symbol == OR:
        if COMM not in axioms:
            if len(s.args) == len(t.args):
                yield from _unify(list(zip(s.args, t.args)) + rest, binds, axioms, sig, fresh)
            return
        if "assoc" not in axioms:
            if len(s.args) != len(t.args):
                return
            for perm in permutations(range(len(t.args))):
                paired = [(s.args[i], t.args[perm[i]]) for i in range(len(s.args))]
                yield from _unify(paired + rest, binds, axioms, sig, fresh)
            return
        yield from _unify_ac(list(s.args), list(t.args), binds, rest, axioms, sig, fresh)
        return
    if len(s.args) != len(t.args):
        return
    yield from _unify(list(zip(s.args, t.args)) + rest, binds, axioms, sig, fresh)


def _unify_ac(left: list[Term], right: list[Term], binds: Binds,
              rest: list[tuple[Term, Term]], axioms: frozenset[str],
              sig: Signature, fresh: FreshVars) -> Iterator[Binds]:
    # cancel syntactically equal parts (multiset subtraction)
    left = sorted(left, key=lambda x: x.key)
    right = sorted(right, key=lambda x: x.key)
    i = 0
    while i < len(left):
        part = left[i]
        hit = next((j for j, q in enumerate(right) if q == part), None)
        if hit is None:
            i += 1
        else:
            left.pop(i)
            right.pop(hit)
    if not left and not right:
        yield from _unify(rest, binds, axioms, sig, fresh)
        return
    if not left or not right:
        return
    if len(left) == 1 and len(right) == 1:
        yield from _unify([(left[0], right[0])] + rest, binds, axioms, sig, fresh)
        return
    if len(left) == 1:
        l0 = left[0]
        if isinstance(l0, Var):
            yield from _bind(l0, App(OR, tuple(right)), binds, rest, axioms, sig, fresh)
        return
    if len(right) == 1:
        r0 = right[0]
        if isinstance(r0, Var):
            yield from _bind(r0, App(OR, tuple(left)), binds, rest, axioms, sig, fresh)
        return

    # Variable abstraction: every part becomes a column of a linear
    # Diophantine equation; non-variable parts keep a side constraint that
    # their column receives exactly one fresh part.
    cols: list[tuple[Term, int, int, bool]] = []  # (term, left mult, right mult, is_var)
    def add(parts: list[Term], side: int) -> None:
        for p in parts:
            for idx, (q, lm, rm, isv) in enumerate(cols):
                if q == p:
                    cols[idx] = (q, lm + (1 - side), rm + side, isv)
                    break
            else:
                cols.append((p, 1 - side, side, isinstance(p, Var)))
    add(left, 0)
    add(right, 1)

    coeffs = [(lm, rm) for (_, lm, rm, _) in cols]
    basis = _dioph_basis(coeffs)
    if not basis or len(basis) > _MAX_BASIS:
        return

    n = len(cols)
    for mask in range(1, 1 << len(basis)):
        chosen = [basis[b] for b in range(len(basis)) if mask >> b & 1]
        totals = [sum(vec[i] for vec in chosen) for i in range(n)]
        ok = True
        for i, (term, _, _, is_var) in enumerate(cols):
            if totals[i] == 0:
                ok = False
                break
            if not is_var and totals[i] != 1:
                ok = False
                break
            if is_var and totals[i] > 1 and sig.leq(term.sort, BIT):  # type: ignore[union-attr]
                ok = False
                break
        if not ok:
            continue
        part_vars = []
        for vec in chosen:
            # a part absorbed alone by some Bit-sorted column must be a Bit
            bit_needed = any(
                cols[i][3] and totals[i] >= 1 and sig.leq(cols[i][0].sort, BIT) and vec[i]  # type: ignore[union-attr]
                for i in range(n))
            part_vars.append(fresh.make(BIT if bit_needed else CIRCUIT))
        new_eqs: list[tuple[Term, Term]] = []
        assignment: list[tuple[Var, Term]] = []
        for i, (term, _, _, is_var) in enumerate(cols):
            parts = []
            for vec, w in zip(chosen, part_vars):
                parts.extend([w] * vec[i])
            value: Term = parts[0] if len(parts) == 1 else App(OR, tuple(parts))
            if is_var:
                assignment.append((term, value))  # type: ignore[arg-type]
            else:
                new_eqs.append((term, value))
        def assign(k: int, b: Binds) -> Iterator[Binds]:
            if k == len(assignment):
                yield from _unify(new_eqs + rest, b, axioms, sig, fresh)
                return
            v, value = assignment[k]
            for b2 in _bind(v, value, b, [], axioms, sig, fresh):
                yield from assign(k + 1, b2)
        yield from assign(0, dict(binds))


def _dioph_basis(coeffs: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Minimal nonzero solutions of sum(l_i x_i) = sum(r_i x_i), x_i >= 0."""
    lmax = max((l for l, _ in coeffs), default=0)
    rmax = max((r for _, r in coeffs), default=0)
    bounds = []
    for l, r in coeffs:
        if l and r:
            bounds.append(1)        # appears on both sides: minimal use is 0/1
        elif l:
            bounds.append(max(rmax, 1))
        else:
            bounds.append(max(lmax, 1))
    sols: list[tuple[int, ...]] = []

    def rec(i: int, vec: list[int], lsum: int, rsum: int) -> None:
        if i == len(coeffs):
            if lsum == rsum and any(vec):
                sols.append(tuple(vec))
            return
        l, r = coeffs[i]
        for x in range(bounds[i] + 1):
            rec(i + 1, vec + [x], lsum + l * x, rsum + r * x)

    rec(0, [], 0, 0)
    minimal = []
    for v in sols:
        if not any(w != v and all(wi <= vi for wi, vi in zip(w, v)) for w in sols):
            minimal.append(v)
    return minimal


def unify_mod(t1: Term, t2: Term, axioms: frozenset[str],
              signature: Signature | None = None,
              fresh: FreshVars | None = None) -> UnifierSet:
    """Complete finite set of B-unifiers, minimized by pairwise subsumption."""
    sig = signature or _DEFAULT_SIG
    fresh = fresh or FreshVars()
    keep = sorted(variables(t1) | variables(t2), key=lambda v: v.key)
    out: list[Substitution] = []
    seen: set = set()
    for binds in _unify([(t1, t2)], {}, axioms, sig, fresh):
        sigma = Substitution(binds).normalized_idempotent()
        sigma = sigma.restrict(keep)
        key = frozenset((v, canonical_mod(t, axioms)) for v, t in sigma.items())
        if key in seen:
            continue
        seen.add(key)
        out.append(sigma)
    out = minimize_substitutions(out, keep, axioms, sig)
    return UnifierSet(tuple(out), complete=True)


def substitution_instance_of(specific: Substitution, general: Substitution,
                             over: Sequence[Var], axioms: frozenset[str],
                             signature: Signature | None = None) -> bool:
    """True iff some rho has rho(general(x)) =B specific(x) for all x in over."""
    sig = signature or _DEFAULT_SIG
    pattern = App(TUPLE_SYMBOL, tuple(general.get(v) for v in over))
    subject = App(TUPLE_SYMBOL, tuple(specific.get(v) for v in over))
    return subsumes_mod(pattern, subject, axioms, sig)


def minimize_substitutions(subs: list[Substitution], over: Sequence[Var],
                           axioms: frozenset[str],
                           signature: Signature | None = None) -> list[Substitution]:
    """Keep only substitutions that are not strict instances of earlier ones."""
    sig = signature or _DEFAULT_SIG
    kept: list[Substitution] = []
    for cand in subs:
        drop = False
        for other in subs:
            if other is cand:
                continue
            if substitution_instance_of(cand, other, over, axioms, sig):
                if substitution_instance_of(other, cand, over, axioms, sig):
                    # mutually subsuming: keep the first in enumeration order
                    if any(o is other for o in kept):
                        drop = True
                        break
                    continue
                drop = True
                break
        if not drop:
            kept.append(cand)
    return kept
