"""Propositional modal formulas over the primitive connectives ~, -> and [].

Conjunction, disjunction, the biconditional and the diamond are sugar; the
parser expands them immediately, so a :class:`Formula` never contains them:

    a /\\ b   ==>  ~(a -> ~b)
    a \\/ b   ==>  ~a -> b
    a <-> b  ==>  (a -> b) /\\ (b -> a)
    <>a      ==>  ~[]~a

Schemas are formulas whose leaves may also be :class:`Meta` nodes.  In schema
text, metavariables are written as capitalised identifiers (``A``, ``B``) or
as the Greek letters φ, ψ, χ (read as ``A``, ``B``, ``C``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Meta:
    """Schema metavariable; lives in its own namespace (capitalised names)."""

    name: str

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Neg:
    body: "Formula"

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Impl:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Box:
    body: "Formula"

    def __str__(self) -> str:
        return to_text(self)


Formula = Union[Var, Meta, Neg, Impl, Box]
Schema = Formula  # a Formula that may contain Meta leaves
Substitution = Dict[str, Formula]


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# builders for the defined connectives

def conj(a: Formula, b: Formula) -> Formula:
    return Neg(Impl(a, Neg(b)))


def disj(a: Formula, b: Formula) -> Formula:
    return Impl(Neg(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(Impl(a, b), Impl(b, a))


def dia(a: Formula) -> Formula:
    return Neg(Box(Neg(a)))


# ---------------------------------------------------------------------------
# lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iff><->|↔)
  | (?P<impl>->|→)
  | (?P<and>/\\|∧|&)
  | (?P<or>\\/|∨|\|)
  | (?P<not>~|¬)
  | (?P<box>\[\]|□)
  | (?P<dia><>|◇)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<var>[a-z][a-z0-9_]*)
  | (?P<meta>[A-Z][A-Za-z0-9_]*|[φψχθ])
    """,
    re.VERBOSE,
)

_GREEK = {"φ": "A", "ψ": "B", "χ": "C", "θ": "D"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_meta: bool):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.allow_meta = allow_meta

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, kind: str) -> Tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            what = repr(tok[1]) if tok[0] != "eof" else "end of input"
            raise ParseError(f"expected {kind}, found {what}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        self.take("eof")
        return f

    # <-> is the loosest connective and associates to the left
    def iff(self) -> Formula:
        f = self.impl()
        while self.peek()[0] == "iff":
            self.i += 1
            f = iff(f, self.impl())
        return f

    def impl(self) -> Formula:
        f = self.disj()
        if self.peek()[0] == "impl":
            self.i += 1
            return Impl(f, self.impl())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "or":
            self.i += 1
            f = disj(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == "and":
            self.i += 1
            f = conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "not":
            self.i += 1
            return Neg(self.unary())
        if kind == "box":
            self.i += 1
            return Box(self.unary())
        if kind == "dia":
            self.i += 1
            return dia(self.unary())
        if kind == "lpar":
            self.i += 1
            f = self.iff()
            self.take("rpar")
            return f
        if kind == "var":
            self.i += 1
            return Var(value)
        if kind == "meta":
            if not self.allow_meta:
                raise ParseError(f"metavariable {value!r} outside a schema", pos, self.text)
            self.i += 1
            return Meta(_GREEK.get(value, value))
        what = repr(value) if kind != "eof" else "end of input"
        raise ParseError(f"unexpected {what}", pos, self.text)


def parse(text: str) -> Formula:
    """Parse a formula; sugar is expanded on the way in."""
    return _Parser(text, allow_meta=False).parse()


def parse_schema(text: str) -> Schema:
    return _Parser(text, allow_meta=True).parse()


# ---------------------------------------------------------------------------
# printing

def to_text(f: Formula) -> str:
    """ASCII rendering with minimal parentheses; ``parse(to_text(f)) == f``."""
    if isinstance(f, (Var, Meta)):
        return f.name
    if isinstance(f, Neg):
        return "~" + _operand(f.body)
    if isinstance(f, Box):
        return "[]" + _operand(f.body)
    left = to_text(f.left)
    if isinstance(f.left, Impl):
        left = f"({left})"
    return f"{left} -> {to_text(f.right)}"


def _operand(f: Formula) -> str:
    s = to_text(f)
    return f"({s})" if isinstance(f, Impl) else s


# ``print`` is the name the rest of the toolkit documents; keep both spellings.
print_formula = to_text


# ---------------------------------------------------------------------------
# structural helpers

def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (Neg, Box)):
        return (f.body,)
    if isinstance(f, Impl):
        return (f.left, f.right)
    return ()


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order walk; shared subformulas are yielded once per occurrence."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def variables(f: Formula) -> List[str]:
    """Variable names in order of first occurrence."""
    seen: Dict[str, None] = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            seen.setdefault(g.name, None)
    return list(seen)


def metavariables(s: Schema) -> List[str]:
    seen: Dict[str, None] = {}
    for g in subformulas(s):
        if isinstance(g, Meta):
            seen.setdefault(g.name, None)
    return list(seen)


def modal_depth(f: Formula) -> int:
    if isinstance(f, Box):
        return 1 + modal_depth(f.body)
    return max((modal_depth(c) for c in children(f)), default=0)


@dataclass(frozen=True)
class Closure:
    """Deduplicated subformula closure, ordered by size then printed form.

    Every formula comes after all of its subformulas.
    """

    items: Tuple[Formula, ...]

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> Formula:
        return self.items[i]

    def index(self, f: Formula) -> int:
        return self.items.index(f)


def closure_of(formulas: Iterable[Formula]) -> Closure:
    found = set()
    for f in formulas:
        found.update(subformulas(f))
    keyed = sorted((size(g), to_text(g), g) for g in found)
    return Closure(tuple(g for _, _, g in keyed))


# ---------------------------------------------------------------------------
# schemas

def instantiate(schema: Schema, sub: Mapping[str, Formula]) -> Formula:
    if isinstance(schema, Meta):
        try:
            return sub[schema.name]
        except KeyError:
            raise SchemaError(f"no binding for metavariable {schema.name}") from None
    if isinstance(schema, Var):
        return schema
    if isinstance(schema, Neg):
        return Neg(instantiate(schema.body, sub))
    if isinstance(schema, Box):
        return Box(instantiate(schema.body, sub))
    return Impl(instantiate(schema.left, sub), instantiate(schema.right, sub))


def match_schema(f: Formula, schema: Schema) -> Optional[Substitution]:
    """First-order pattern match of ``f`` against ``schema``; None if it fails."""
    sub: Substitution = {}

    def go(g: Formula, s: Schema) -> bool:
        if isinstance(s, Meta):
            bound = sub.get(s.name)
            if bound is None:
                sub[s.name] = g
                return True
            return bound == g
        if type(g) is not type(s):
            return False
        if isinstance(s, Var):
            return g == s
        if isinstance(s, Impl):
            return go(g.left, s.left) and go(g.right, s.right)
        return go(g.body, s.body)

    return sub if go(f, schema) else None


FRESH_LETTERS = ("p", "q", "r", "s", "u", "v", "w")


def fresh_instance(schema: Schema) -> Formula:
    """Instantiate distinct metavariables with distinct letters p, q, r, ..."""
    names = sorted(metavariables(schema))
    if len(names) > len(FRESH_LETTERS):
        raise SchemaError("too many metavariables for the fresh-letter pool")
    return instantiate(schema, {m: Var(FRESH_LETTERS[i]) for i, m in enumerate(names)})
