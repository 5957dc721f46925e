"""Concrete syntax: term parser/printer and the rule-file reader.

Term grammar (whitespace insignificant)::

    term := "top" | ident | "not(" term ")" | "or(" term ("," term)+ ")"
          | "asBit(" ident ")"

Identifiers b<N> parse as Bit variables, c<N> as Circuit variables and r<N>,
only inside asBit(...), as Fresh constants.  Rule files add declarations::

    file       := (sortdecl | subsortdecl | opdecl | vardecl | eqdecl | comment)*
    sortdecl   := "sorts" ident+ "."
    subsortdecl:= "subsort" ident "<" ident "."
    opdecl     := "op" ident ":" sorts "->" sort ("[" ("assoc")? ("comm")? "]")? "."
    vardecl    := "vars" ident+ ":" sort "."
    eqdecl     := "eq" term "=" term "."
    comment    := "***" to end-of-line

Variable occurrences are matched against vardecls case-insensitively with
underscores ignored, so c_0 and C0 name the same declared variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .terms import (
    AS_BIT, BIT, CIRCUIT, FRESH, FRESH_PREFIX, MSG, NOT, OR, TOP,
    App, Decomposition, FreshVars, InvalidRule, OpDecl, RewriteRule, RuleSystem,
    Signature, Substitution, Term, Var, builtin_signature, variables,
)

SORT_ALIASES = {"BitSort": BIT, "Bit": BIT, "Circuit": CIRCUIT, "Msg": MSG, "Fresh": FRESH}

_BIT_VAR = re.compile(r"b[0-9]+\Z")
_CIRCUIT_VAR = re.compile(r"c[0-9]+\Z")
_FRESH_CONST = re.compile(r"r[0-9]+\Z")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}" if line else message)


@dataclass(frozen=True)
class Token:
    kind: str   # ident | punct | end
    text: str
    line: int
    column: int


_PUNCT = ("->", "(", ")", ",", ".", ":", "<", "=", "[", "]")


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if text.startswith("***", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("end", "", line, col))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.column)
        return self.next()


def _norm_var_name(name: str) -> str:
    return name.replace("_", "").upper()


def _parse_term(cur: _Cursor, varmap: Mapping[str, Var] | None) -> Term:
    tok = cur.expect("ident")
    name = tok.text
    if name == TOP:
        return App(TOP)
    if name == NOT:
        cur.expect("punct", "(")
        arg = _parse_term(cur, varmap)
        cur.expect("punct", ")")
        return App(NOT, (arg,))
    if name == OR:
        cur.expect("punct", "(")
        args = [_parse_term(cur, varmap)]
        while cur.peek() == cur.peek() and cur.peek().text == ",":
            cur.next()
            args.append(_parse_term(cur, varmap))
        cur.expect("punct", ")")
        if len(args) < 2:
            raise ParseError("or needs at least two arguments", tok.line, tok.column)
        return App(OR, tuple(args))
    if name == AS_BIT:
        cur.expect("punct", "(")
        inner = cur.expect("ident")
        cur.expect("punct", ")")
        if varmap is not None:
            v = varmap.get(_norm_var_name(inner.text))
            if v is not None and v.sort == FRESH:
                return App(AS_BIT, (v,))
        if not _FRESH_CONST.match(inner.text):
            raise ParseError(f"asBit expects a Fresh atom r<N>, found {inner.text!r}",
                             inner.line, inner.column)
        return App(AS_BIT, (App(inner.text),))
    if name.startswith("#"):
        raise ParseError(f"reserved identifier {name!r}", tok.line, tok.column)
    if varmap is not None:
        v = varmap.get(_norm_var_name(name))
        if v is not None:
            return v
    if _BIT_VAR.match(name):
        return Var(name, BIT)
    if _CIRCUIT_VAR.match(name):
        return Var(name, CIRCUIT)
    raise ParseError(f"unknown identifier {name!r}", tok.line, tok.column)


def parse_term(text: str, varmap: Mapping[str, Var] | None = None) -> Term:
    cur = _Cursor(_tokenize(text))
    t = _parse_term(cur, varmap)
    end = cur.peek()
    if end.kind != "end":
        raise ParseError(f"trailing input {end.text!r}", end.line, end.column)
    return t


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    assert isinstance(t, App)
    if not t.args:
        return t.symbol
    return f"{t.symbol}({','.join(format_term(a) for a in t.args)})"


@dataclass
class RuleFile:
    """Parsed rule file: signature extensions, declared variables, rules."""

    sorts: list[str] = field(default_factory=list)
    subsorts: list[tuple[str, str]] = field(default_factory=list)
    ops: list[OpDecl] = field(default_factory=list)
    variables: dict[str, Var] = field(default_factory=dict)
    rules: list[RewriteRule] = field(default_factory=list)

    @property
    def axioms(self) -> frozenset[str]:
        ax: set[str] = set()
        for decl in self.ops:
            ax |= decl.axioms
        return frozenset(ax)


def _resolve_sort(name: str, known: set[str], tok: Token) -> str:
    resolved = SORT_ALIASES.get(name, name)
    if resolved not in known:
        raise ParseError(f"unknown sort {name!r}", tok.line, tok.column)
    return resolved


def parse_rule_file(text: str, base: Signature | None = None) -> RuleFile:
    base = base or builtin_signature()
    out = RuleFile()
    known_sorts = set(base.order.sorts)
    varmap: dict[str, Var] = {}
    tokens = _tokenize(text)
    # rebuild comment labels: re-scan raw text for *** lines in order
    labels = _comment_labels(text)
    cur = _Cursor(tokens)
    eq_index = 0
    while cur.peek().kind != "end":
        tok = cur.expect("ident")
        if tok.text in ("sorts", "sort"):
            while cur.peek().kind == "ident":
                name = cur.next().text
                resolved = SORT_ALIASES.get(name, name)
                known_sorts.add(resolved)
                if resolved not in base.order.sorts and resolved not in out.sorts:
                    out.sorts.append(resolved)
            cur.expect("punct", ".")
        elif tok.text == "subsort":
            a = cur.expect("ident")
            cur.expect("punct", "<")
            b = cur.expect("ident")
            cur.expect("punct", ".")
            out.subsorts.append((_resolve_sort(a.text, known_sorts, a),
                                 _resolve_sort(b.text, known_sorts, b)))
        elif tok.text == "op":
            name = cur.expect("ident").text
            cur.expect("punct", ":")
            arg_sorts = []
            while cur.peek().kind == "ident":
                s = cur.next()
                arg_sorts.append(_resolve_sort(s.text, known_sorts, s))
            cur.expect("punct", "->")
            res = cur.expect("ident")
            result = _resolve_sort(res.text, known_sorts, res)
            axioms: set[str] = set()
            if cur.peek().text == "[":
                cur.next()
                while cur.peek().kind == "ident":
                    attr = cur.next()
                    if attr.text not in ("assoc", "comm"):
                        raise ParseError(f"unsupported attribute {attr.text!r}",
                                         attr.line, attr.column)
                    axioms.add(attr.text)
                cur.expect("punct", "]")
            cur.expect("punct", ".")
            out.ops.append(OpDecl(name, tuple(arg_sorts), result, frozenset(axioms)))
        elif tok.text in ("vars", "var"):
            names = []
            while cur.peek().kind == "ident" and cur.peek().text != ":":
                names.append(cur.next())
            cur.expect("punct", ":")
            s = cur.expect("ident")
            sort = _resolve_sort(s.text, known_sorts, s)
            cur.expect("punct", ".")
            for n in names:
                if n.text.startswith("#"):
                    raise ParseError(f"reserved identifier {n.text!r}", n.line, n.column)
                v = Var(n.text, sort)
                varmap[_norm_var_name(n.text)] = v
                out.variables[_norm_var_name(n.text)] = v
        elif tok.text == "eq":
            lhs = _parse_term(cur, varmap)
            cur.expect("punct", "=")
            rhs = _parse_term(cur, varmap)
            cur.expect("punct", ".")
            label = labels[eq_index] if eq_index < len(labels) and labels[eq_index] else f"rule-{eq_index}"
            eq_index += 1
            try:
                out.rules.append(RewriteRule(label, lhs, rhs))
            except InvalidRule as exc:
                raise InvalidRule(f"line {tok.line}: {exc}") from exc
        else:
            raise ParseError(f"unexpected declaration {tok.text!r}", tok.line, tok.column)
    return out


def _comment_labels(text: str) -> list[str]:
    """Label for the i-th eq: nearest *** comment line above it."""
    labels: list[str] = []
    pending: str | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("***"):
            pending = line.lstrip("*").strip() or None
        elif line.startswith("eq"):
            labels.append(pending or "")
            pending = None
    return labels


def load_rule_system(source: str, label: str = "custom",
                     base: Signature | None = None) -> tuple[RuleSystem, Decomposition]:
    """Parse a rule file into a validated rule system and its decomposition."""
    base = base or builtin_signature()
    parsed = parse_rule_file(source, base)
    signature = base.extend(parsed.sorts, parsed.subsorts, parsed.ops) if (
        parsed.sorts or parsed.subsorts or parsed.ops) else base
    system = RuleSystem(label, tuple(parsed.rules))
    axioms = parsed.axioms or signature.axioms_of(OR)
    return system, Decomposition(label, signature, frozenset(axioms), system)


def format_substitution(sigma: Substitution) -> dict[str, str]:
    return {v.name: format_term(t) for v, t in sorted(sigma.items(), key=lambda kv: kv[0].key)}
