"""Valuation semantics, truth tables, and the normal-form shape catalogs.

Atoms are Bit variables and ``asBit(r)`` applications; both evaluate by
lookup in a valuation.  The equivalence oracle is deliberately brute force:
it enumerates all 2^n valuations and refuses more than 16 atoms.

Shape catalogs replicate the published normal-form tables for each theory.
Where a table writes an outer +/- sign the catalog registers two entries,
``<id>`` for the positive form and ``<id>-dual`` for the negated one; inner
sign choices stay under a single id.  Shape bit metavariables match a Bit
atom or a negated Bit atom, with distinct metavariables bound to distinct
underlying atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterator, Mapping, Sequence

from .terms import AS_BIT, BIT, NOT, OR, TOP, App, Term, Var

ATOM_LIMIT = 16


class UnboundAtom(Exception):
    """A valuation misses an atom of the evaluated term."""


class AtomLimit(Exception):
    """More atoms than the brute-force oracle is willing to enumerate."""


class CircuitVariable(Exception):
    """Truth-table semantics is defined over Bit atoms only."""


Valuation = Mapping[Term, int]


def atoms(t: Term) -> list[Term]:
    """Bit variables and asBit atoms of t, in the canonical term order."""
    found: set[Term] = set()
    _collect_atoms(t, found)
    return sorted(found, key=lambda a: a.key)


def _collect_atoms(t: Term, found: set[Term]) -> None:
    if isinstance(t, Var):
        if t.sort != BIT:
            raise CircuitVariable(f"{t.name} is not a Bit atom")
        found.add(t)
        return
    assert isinstance(t, App)
    if t.symbol == AS_BIT:
        found.add(t)
        return
    if t.symbol == TOP:
        return
    for a in t.args:
        _collect_atoms(a, found)


def evaluate(t: Term, valuation: Valuation) -> int:
    """1 iff the valuation satisfies t: top always, atoms by lookup, not
    flips, or is the disjunction over all flattened children."""
    if isinstance(t, Var) or (isinstance(t, App) and t.symbol == AS_BIT):
        try:
            return 1 if valuation[t] else 0
        except KeyError:
            raise UnboundAtom(f"no value for atom {t!r}") from None
    assert isinstance(t, App)
    if t.symbol == TOP:
        return 1
    if t.symbol == NOT:
        return 1 - evaluate(t.args[0], valuation)
    if t.symbol == OR:
        return 1 if any(evaluate(a, valuation) for a in t.args) else 0
    raise CircuitVariable(f"cannot evaluate {t!r}")


@dataclass(frozen=True)
class TruthTable:
    atoms: tuple[Term, ...]
    bits: tuple[int, ...]

    def __eq__(self, other) -> bool:
        return (isinstance(other, TruthTable)
                and self.atoms == other.atoms and self.bits == other.bits)

    def __hash__(self) -> int:
        return hash((self.atoms, self.bits))


def truth_table(t: Term, atom_order: Sequence[Term] | None = None) -> TruthTable:
    """Evaluate t over all valuations of its atoms (first atom is the MSB)."""
    names = tuple(atom_order) if atom_order is not None else tuple(atoms(t))
    n = len(names)
    if n > ATOM_LIMIT:
        raise AtomLimit(f"{n} atoms exceed the oracle limit of {ATOM_LIMIT}")
    bits = []
    for i in range(1 << n):
        valuation = {a: (i >> (n - 1 - j)) & 1 for j, a in enumerate(names)}
        bits.append(evaluate(t, valuation))
    return TruthTable(names, tuple(bits))


def logically_equivalent(t1: Term, t2: Term) -> bool:
    shared = sorted(set(atoms(t1)) | set(atoms(t2)), key=lambda a: a.key)
    return truth_table(t1, shared).bits == truth_table(t2, shared).bits


# ---------------------------------------------------------------------------
# Normal-form shape catalogs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Meta:
    """Shape metavariable: matches a Bit atom, optionally under a negation."""

    index: int
    negated: bool = False


def _m(i: int, negated: bool = False) -> Meta:
    return Meta(i, negated)


def _sor(*parts) -> tuple:
    # flatten nested or-patterns the same way terms are stored
    flat: list = []
    for p in parts:
        if isinstance(p, tuple) and p and p[0] == "or":
            flat.extend(p[1:])
        else:
            flat.append(p)
    return ("or",) + tuple(flat)


def _snot(part) -> tuple:
    return ("not", part)


_TOP_SHAPE = ("top",)


@dataclass(frozen=True)
class NormalFormShape:
    catalog: str
    shape_id: str
    patterns: tuple


def _signed(shape, sign: bool):
    return _snot(shape) if sign else shape


def _expand(shape_id: str, body_variants: list, outer_pm: bool) -> list[tuple[str, tuple]]:
    out = [(shape_id, tuple(body_variants))]
    if outer_pm:
        out.append((shape_id + "-dual", tuple(_snot(b) for b in body_variants)))
    return out


def _catalog_entries(label: str) -> list[tuple[str, tuple]]:
    b0, b1, b2, b3 = _m(0), _m(1), _m(2), _m(3)
    n0, n1 = _m(0, True), _m(1, True)
    entries: list[tuple[str, tuple]] = []
    entries += _expand("0.1", [_TOP_SHAPE], True)
    entries += _expand("0.2", [b0], True)
    if label == "E0":
        return entries
    entries += _expand("1.1", [_sor(b0, b1)], True)
    if label == "E1":
        return entries
    if label == "E2":
        entries += _expand("2.1", [_sor(b0, b1, b2)], True)
        entries += _expand("2.2", [_sor(_snot(_sor(b0, b1)), b2)], True)
        return entries
    # E3
    entries += _expand("2.1", [_sor(b0, b1, b2)], True)
    entries += _expand("2.2", [_sor(_snot(_sor(b0, b1)), b2)], False)
    entries += _expand("3.1", [_sor(_snot(_sor(b0, b1)), _snot(_sor(b0, b2)))], False)
    variants_32 = [
        _sor(_signed(_sor(b0, b1), s1), _signed(_sor(b2, b3), s2))
        for s1, s2 in product((False, True), repeat=2)
    ]
    entries += _expand("3.2", variants_32, True)
    entries += _expand("3.3", [_sor(_snot(_sor(b0, b1)), _snot(_sor(n0, n1)))], True)
    entries += _expand("3.4", [_sor(_snot(_sor(b0, b1)), _snot(_sor(n0, b2)))], True)
    variants_35 = [
        _sor(_signed(_sor(b0, b1, b2), s1), _signed(b3, s2))
        for s1, s2 in product((False, True), repeat=2)
    ]
    entries += _expand("3.5", variants_35, True)
    entries += _expand("3.6", [_sor(_snot(_sor(_snot(_sor(b0, b1)), b2)), b3)], True)
    return entries


_CATALOGS: dict[str, list[NormalFormShape]] = {}


def catalog(label: str) -> list[NormalFormShape]:
    if label not in _CATALOGS:
        grouped: dict[str, list] = {}
        order: list[str] = []
        for shape_id, patterns in _catalog_entries(label):
            if shape_id not in grouped:
                grouped[shape_id] = []
                order.append(shape_id)
            grouped[shape_id].extend(patterns)
        _CATALOGS[label] = [NormalFormShape(label, sid, tuple(grouped[sid])) for sid in order]
    return _CATALOGS[label]


def _signed_atom(t: Term) -> tuple[Term, bool] | None:
    """Decompose t as a possibly-negated Bit atom; None if not of that form."""
    negated = False
    if isinstance(t, App) and t.symbol == NOT:
        negated = True
        t = t.args[0]
    if isinstance(t, Var) and t.sort == BIT:
        return t, negated
    if isinstance(t, App) and t.symbol == AS_BIT:
        return t, negated
    return None


def _match_shape(pattern, t: Term, binds: dict[int, tuple[Term, bool]]) -> Iterator[dict]:
    if isinstance(pattern, Meta):
        decomposed = _signed_atom(t)
        if decomposed is None:
            return
        atom, sign = decomposed
        want = (atom, sign != pattern.negated)
        bound = binds.get(pattern.index)
        if bound is not None:
            if bound == want:
                yield binds
            return
        if any(other[0] == atom for other in binds.values()):
            return  # distinct metavariables name distinct underlying atoms
        out = dict(binds)
        out[pattern.index] = want
        yield out
        return
    if pattern == _TOP_SHAPE:
        if isinstance(t, App) and t.symbol == TOP:
            yield binds
        return
    kind = pattern[0]
    if kind == "not":
        if isinstance(t, App) and t.symbol == NOT and _signed_atom(t) is None:
            yield from _match_shape(pattern[1], t.args[0], binds)
        return
    assert kind == "or"
    parts = pattern[1:]
    if not (isinstance(t, App) and t.symbol == OR and len(t.args) == len(parts)):
        return
    used_orders: set = set()
    for perm in permutations(t.args):
        if perm in used_orders:
            continue
        used_orders.add(perm)
        stack = [(0, binds)]
        for i, sub in enumerate(perm):
            stack = [(i + 1, b2) for (_, b) in stack for b2 in _match_shape(parts[i], sub, b)]
            if not stack:
                break
        for _, b in stack:
            yield b


def classify_normal_form(t: Term, label: str) -> str | None:
    """First catalog shape id matching t, or None when unclassified."""
    for shape in catalog(label):
        for pattern in shape.patterns:
            for _ in _match_shape(pattern, t, {}):
                return shape.shape_id
    return None


def instantiate_shapes(label: str, atom_pool: Sequence[Term]) -> dict[str, list[Term]]:
    """Concrete instantiations of every shape id over distinct pool atoms."""
    out: dict[str, list[Term]] = {}
    for shape in catalog(label):
        terms: list[Term] = []
        for pattern in shape.patterns:
            terms.append(_instantiate(pattern, atom_pool))
        out[shape.shape_id] = terms
    return out


def _instantiate(pattern, atom_pool: Sequence[Term]) -> Term:
    if isinstance(pattern, Meta):
        atom = atom_pool[pattern.index]
        return App(NOT, (atom,)) if pattern.negated else atom
    if pattern == _TOP_SHAPE:
        return App(TOP)
    if pattern[0] == "not":
        return App(NOT, (_instantiate(pattern[1], atom_pool),))
    return App(OR, tuple(_instantiate(p, atom_pool) for p in pattern[1:]))
