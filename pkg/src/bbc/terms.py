"""Order-sorted terms for bounded binary circuits.

The term language has four built-in operators (``top``, ``not``, ``or``,
``asBit``) over the sort chain Bit < Circuit < Msg plus the isolated sort
Fresh.  ``or`` nodes are stored flattened (never an ``or`` directly under an
``or``); the order of their children is preserved as constructed, and
:func:`canonical` sorts them into the fixed total term order used for
matching modulo commutativity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping

BIT = "Bit"
CIRCUIT = "Circuit"
MSG = "Msg"
FRESH = "Fresh"

TOP = "top"
NOT = "not"
OR = "or"
AS_BIT = "asBit"

ASSOC = "assoc"
COMM = "comm"

AC: frozenset[str] = frozenset({ASSOC, COMM})
COMM_ONLY: frozenset[str] = frozenset({COMM})
FREE: frozenset[str] = frozenset()

# Reserved prefix for machine-generated variables; rejected by the parser.
FRESH_PREFIX = "#v"


class IllSorted(Exception):
    """No operator declaration matches the arguments."""


class Term:
    """Base class; instances are immutable and hash-consed by structure."""

    __slots__ = ("key", "_hash")

    def _seal(self, key: tuple) -> None:
        self.key = key
        self._hash = hash(key)

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Term) and self.key == other.key)

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Term") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:
        from .syntax import format_term

        return format_term(self)


class Var(Term):
    __slots__ = ("name", "sort")

    def __init__(self, name: str, sort: str):
        self.name = name
        self.sort = sort
        self._seal((1, sort, name))


class App(Term):
    __slots__ = ("symbol", "args")

    def __init__(self, symbol: str, args: Iterable[Term] = ()):
        args = tuple(args)
        if symbol == OR:
            args = _flatten_or(args)
            if len(args) < 2:
                raise ValueError("or needs at least two arguments")
        self.symbol = symbol
        self.args = args
        self._seal((0, symbol, len(args), tuple(a.key for a in args)))


def _flatten_or(args: tuple[Term, ...]) -> tuple[Term, ...]:
    if not any(isinstance(a, App) and a.symbol == OR for a in args):
        return args
    flat: list[Term] = []
    for a in args:
        if isinstance(a, App) and a.symbol == OR:
            flat.extend(a.args)
        else:
            flat.append(a)
    return tuple(flat)


# Construction helpers used throughout the engine and tests.

def top() -> App:
    return App(TOP)


def bit(i: int) -> Var:
    return Var(f"b{i}", BIT)


def circ(i: int) -> Var:
    return Var(f"c{i}", CIRCUIT)


def neg(t: Term) -> App:
    return App(NOT, (t,))


def disj(*args: Term) -> Term:
    if len(args) == 1:
        return args[0]
    return App(OR, args)


def fresh_const(name: str) -> App:
    return App(name)


def as_bit(name: str) -> App:
    return App(AS_BIT, (fresh_const(name),))


@dataclass(frozen=True)
class Sort:
    name: str


@dataclass(frozen=True)
class OpDecl:
    name: str
    arg_sorts: tuple[str, ...]
    result_sort: str
    axioms: frozenset[str] = FREE


class SortOrder:
    """Reflexive-transitive subsort order over a finite sort set."""

    def __init__(self, sorts: Iterable[str], pairs: Iterable[tuple[str, str]]):
        self.sorts = set(sorts)
        self._leq: set[tuple[str, str]] = {(s, s) for s in self.sorts}
        self._leq.update(pairs)
        changed = True
        while changed:
            changed = False
            for (a, b) in list(self._leq):
                for (c, d) in list(self._leq):
                    if b == c and (a, d) not in self._leq:
                        self._leq.add((a, d))
                        changed = True
        for a, b in self._leq:
            if a != b and (b, a) in self._leq:
                raise ValueError(f"subsort cycle through {a} and {b}")

    def leq(self, sub: str, sup: str) -> bool:
        return (sub, sup) in self._leq


class Signature:
    """Operator declarations plus the subsort order; resolves least sorts."""

    def __init__(self, sorts: Iterable[str], subsorts: Iterable[tuple[str, str]],
                 ops: Iterable[OpDecl]):
        self.order = SortOrder(sorts, subsorts)
        self.ops: list[OpDecl] = list(ops)
        self._by_name: dict[tuple[str, int], list[OpDecl]] = {}
        for decl in self.ops:
            self._by_name.setdefault((decl.name, len(decl.arg_sorts)), []).append(decl)
        self._sort_cache: dict[Term, str] = {}

    def extend(self, sorts: Iterable[str] = (), subsorts: Iterable[tuple[str, str]] = (),
               ops: Iterable[OpDecl] = ()) -> "Signature":
        all_sorts = set(self.order.sorts) | set(sorts)
        pairs = {(a, b) for (a, b) in self.order._leq if a != b} | set(subsorts)
        return Signature(all_sorts, pairs, list(self.ops) + list(ops))

    def axioms_of(self, symbol: str) -> frozenset[str]:
        ax: set[str] = set()
        for (name, _), decls in self._by_name.items():
            if name == symbol:
                for d in decls:
                    ax |= d.axioms
        return frozenset(ax)

    def declarations(self, name: str, arity: int) -> list[OpDecl]:
        return self._by_name.get((name, arity), [])

    def leq(self, sub: str, sup: str) -> bool:
        return self.order.leq(sub, sup)

    def least_sort(self, t: Term) -> str:
        cached = self._sort_cache.get(t)
        if cached is not None:
            return cached
        s = self._least_sort(t)
        self._sort_cache[t] = s
        return s

    def _least_sort(self, t: Term) -> str:
        if isinstance(t, Var):
            if t.sort not in self.order.sorts:
                raise IllSorted(f"unknown sort {t.sort}")
            return t.sort
        assert isinstance(t, App)
        if not t.args:
            decls = self.declarations(t.symbol, 0)
            if decls:
                return decls[0].result_sort
            if _is_fresh_name(t.symbol):
                return FRESH
            raise IllSorted(f"undeclared constant {t.symbol}")
        if t.symbol == PAIR_SYMBOL or t.symbol == TUPLE_SYMBOL:
            return MSG
        arg_sorts = [self.least_sort(a) for a in t.args]
        candidates = []
        for decl in self.declarations(t.symbol, len(t.args)):
            if t.symbol == OR:
                # flattened n-ary node checked against the binary declaration
                ok = all(self.leq(s, decl.arg_sorts[0]) for s in arg_sorts)
            else:
                ok = all(self.leq(s, d) for s, d in zip(arg_sorts, decl.arg_sorts))
            if ok:
                candidates.append(decl.result_sort)
        if t.symbol == OR and not self.declarations(OR, len(t.args)):
            decl2 = self.declarations(OR, 2)
            if decl2 and all(self.leq(s, decl2[0].arg_sorts[0]) for s in arg_sorts):
                candidates.append(decl2[0].result_sort)
        if not candidates:
            raise IllSorted(
                f"no declaration of {t.symbol}/{len(t.args)} matches argument sorts {arg_sorts}")
        least = candidates[0]
        for c in candidates[1:]:
            if self.leq(c, least):
                least = c
        return least


def _is_fresh_name(name: str) -> bool:
    return len(name) > 1 and name[0] == "r" and name[1:].isdigit()


PAIR_SYMBOL = "#pair"
TUPLE_SYMBOL = "#tuple"


def builtin_signature() -> Signature:
    return Signature(
        sorts=(BIT, CIRCUIT, MSG, FRESH),
        subsorts=((BIT, CIRCUIT), (CIRCUIT, MSG)),
        ops=(
            OpDecl(TOP, (), BIT),
            OpDecl(NOT, (BIT,), BIT),
            OpDecl(NOT, (CIRCUIT,), CIRCUIT),
            OpDecl(OR, (CIRCUIT, CIRCUIT), CIRCUIT, AC),
            OpDecl(AS_BIT, (FRESH,), BIT),
        ),
    )


SIGNATURE = builtin_signature()


def sort_of(t: Term, signature: Signature = SIGNATURE) -> str:
    """Least sort derivable for ``t``; raises :class:`IllSorted` otherwise."""
    return signature.least_sort(t)


def rank(t: Term) -> int:
    """Number of disjunctions in ``t`` (an n-ary node counts n-1)."""
    if isinstance(t, Var):
        return 0
    assert isinstance(t, App)
    inner = sum(rank(a) for a in t.args)
    if t.symbol == OR:
        return inner + len(t.args) - 1
    return inner


def in_language(t: Term, k: int) -> bool:
    return rank(t) <= k


def variables(t: Term) -> set[Var]:
    out: set[Var] = set()
    _collect_vars(t, out)
    return out


def _collect_vars(t: Term, out: set[Var]) -> None:
    if isinstance(t, Var):
        out.add(t)
    else:
        for a in t.args:  # type: ignore[union-attr]
            _collect_vars(a, out)


def canonical(t: Term) -> Term:
    """AC-canonical form: or-children recursively sorted by the term order."""
    if isinstance(t, Var):
        return t
    assert isinstance(t, App)
    args = tuple(canonical(a) for a in t.args)
    if t.symbol == OR:
        args = tuple(sorted(args, key=lambda a: a.key))
    if args == t.args:
        return t
    return App(t.symbol, args)


class Substitution:
    """Sort-respecting finite map from variables to terms."""

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        m = dict(mapping)
        self._map = {v: t for v, t in m.items() if v != t}

    @property
    def bindings(self) -> dict[Var, Term]:
        return dict(self._map)

    def domain(self) -> set[Var]:
        return set(self._map)

    def get(self, v: Var) -> Term:
        return self._map.get(v, v)

    def is_identity(self) -> bool:
        return not self._map

    def apply(self, t: Term) -> Term:
        """Homomorphic replacement; or-children re-sorted into canonical order."""
        if not self._map:
            return canonical(t)
        return self._apply(t)

    def _apply(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self._map.get(t, t)
        assert isinstance(t, App)
        args = tuple(self._apply(a) for a in t.args)
        if t.symbol == OR:
            out = App(OR, args)
            return App(OR, tuple(sorted(out.args, key=lambda a: a.key)))
        return App(t.symbol, args)

    def compose(self, other: "Substitution") -> "Substitution":
        """Return other∘self: x ↦ other(self(x)) on the union of domains."""
        out: dict[Var, Term] = {}
        for v, t in self._map.items():
            out[v] = other.apply(t)
        for v, t in other._map.items():
            if v not in self._map:
                out[v] = t
        return Substitution(out)

    def restrict(self, keep: Iterable[Var]) -> "Substitution":
        keep = set(keep)
        return Substitution({v: t for v, t in self._map.items() if v in keep})

    def normalized_idempotent(self, limit: int = 50) -> "Substitution":
        """Iterate self-application until no bound variable occurs in an image."""
        current = self
        for _ in range(limit):
            nxt = {v: current.apply(t) for v, t in current._map.items()}
            if nxt == current._map:
                return current
            current = Substitution(nxt)
        raise ValueError("substitution is not idempotent (cyclic bindings)")

    def items(self):
        return self._map.items()

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        from .syntax import format_term

        inner = ", ".join(
            f"{v.name}<-{format_term(t)}" for v, t in sorted(self._map.items(), key=lambda kv: kv[0].key))
        return "{" + inner + "}"


def apply_substitution(sigma: Substitution, t: Term) -> Term:
    return sigma.apply(t)


def compose_substitutions(sigma: Substitution, theta: Substitution) -> Substitution:
    """(θ∘σ)(x) = θ(σ(x)) on dom(σ) ∪ dom(θ)."""
    return sigma.compose(theta)


class FreshVars:
    """Call-local generator of reserved-namespace variables (#v0, #v1, ...)."""

    def __init__(self, start: int = 0):
        self._n = start

    def make(self, sort: str) -> Var:
        v = Var(f"{FRESH_PREFIX}{self._n}", sort)
        self._n += 1
        return v


@dataclass(frozen=True)
class RewriteRule:
    label: str
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise InvalidRule(f"{self.label}: left-hand side is a bare variable")
        extra = variables(self.rhs) - variables(self.lhs)
        if extra:
            names = ", ".join(sorted(v.name for v in extra))
            raise InvalidRule(f"{self.label}: right-hand side introduces {names}")

    def renamed(self, fresh: FreshVars) -> tuple["RewriteRule", Substitution]:
        ren = Substitution({v: fresh.make(v.sort) for v in sorted(variables(self.lhs), key=lambda v: v.key)})
        return RewriteRule(self.label, ren.apply(self.lhs), ren.apply(self.rhs)), ren


class InvalidRule(Exception):
    """A rule violates l ∉ X or vars(r) ⊆ vars(l)."""


@dataclass(frozen=True)
class RuleSystem:
    label: str
    rules: tuple[RewriteRule, ...]

    def __iter__(self) -> Iterator[RewriteRule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class Decomposition:
    """A rewrite theory: signature, structural axioms B, oriented rules Δ."""

    label: str
    signature: Signature
    axioms: frozenset[str]           # structural axioms of the or symbol
    rules: RuleSystem
    shared_ac: bool = False          # force the shared-AC reading of B

    def axioms_of(self, symbol: str) -> frozenset[str]:
        if symbol == OR:
            return AC if self.shared_ac else self.axioms
        return FREE

    @property
    def active_axioms(self) -> frozenset[str]:
        return AC if self.shared_ac else self.axioms

    def with_axioms(self, axioms: frozenset[str]) -> "Decomposition":
        return Decomposition(self.label, self.signature, axioms, self.rules, False)


def enumerate_circuits(k: int, bit_vars: list[str], include_top: bool = False) -> Iterator[Term]:
    """Yield every AC-canonical circuit of rank <= k over the given atoms.

    Negation nesting is capped at one per position: double-negation towers
    collapse in every built-in theory and add no semantic coverage.  Each
    distinct canonical term is produced exactly once, ranks in ascending
    order.
    """
    if not bit_vars:
        raise ValueError("bitVars must be nonempty")
    atoms: list[Term] = [Var(name, BIT) for name in bit_vars]
    if include_top:
        atoms.append(top())
    signed: list[Term] = []
    for a in sorted(atoms, key=lambda t: t.key):
        signed.append(a)
        signed.append(neg(a))
    signed.sort(key=lambda t: t.key)

    # positive_or[r] lists the or-rooted canonical terms of rank exactly r
    positive_or: dict[int, list[Term]] = {}

    def children_pool(max_rank: int) -> list[Term]:
        pool = list(signed)
        for r in range(1, max_rank + 1):
            pool.extend(neg(u) for u in positive_or.get(r, ()))
        return sorted(pool, key=lambda t: t.key)

    for r in range(0, k + 1):
        if r == 0:
            yield from signed
            continue
        nodes: list[Term] = []
        pool = children_pool(r - 1)
        by_rank: dict[int, list[Term]] = {}
        for c in pool:
            by_rank.setdefault(rank(c), []).append(c)
        for m in range(2, r + 2):
            budget = r - (m - 1)
            for combo in _rank_multisets(by_rank, m, budget):
                nodes.append(App(OR, combo))
        nodes = sorted(set(nodes), key=lambda t: t.key)
        positive_or[r] = nodes
        for u in nodes:
            yield u
            yield neg(u)


def _rank_multisets(by_rank: dict[int, list[Term]], m: int, budget: int) -> Iterator[tuple[Term, ...]]:
    """Sorted m-multisets of pool terms whose ranks sum exactly to budget."""
    ranks = sorted(by_rank)
    for split in _sum_partitions(ranks, m, budget):
        groups = []
        for r, count in split:
            groups.append(list(combinations_with_replacement(by_rank[r], count)))
        for pick in _product(groups):
            combo = tuple(sorted((t for grp in pick for t in grp), key=lambda t: t.key))
            yield combo


def _sum_partitions(ranks: list[int], m: int, budget: int) -> Iterator[list[tuple[int, int]]]:
    """Ways to pick counts per rank value: counts sum to m, weighted sum to budget."""
    if not ranks:
        if m == 0 and budget == 0:
            yield []
        return
    r, rest = ranks[0], ranks[1:]
    max_count = m if r == 0 else min(m, budget // r)
    for count in range(max_count + 1):
        for tail in _sum_partitions(rest, m - count, budget - count * r):
            yield ([(r, count)] if count else []) + tail


def _product(groups: list[list]) -> Iterator[tuple]:
    if not groups:
        yield ()
        return
    for head in groups[0]:
        for tail in _product(groups[1:]):
            yield (head,) + tail
