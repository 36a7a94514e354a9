"""First-order frame conditions over the accessibility relation R and equality.

Grammar (loosest first)::

    cond   := quant | imp
    quant  := ('forall' | 'exists') ident+ '.' cond
    imp    := or ('->' imp)?          right-associative
    or     := and ('|' and)*
    and    := unary ('&' unary)*
    unary  := '~' unary | quant | '(' cond ')' | 'R(' ident ',' ident ')' | ident '=' ident

A quantifier's scope runs as far right as possible.  Variables left unbound
are universally closed at the front, in order of first occurrence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple, Union


class ConditionSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


@dataclass(frozen=True)
class Rel:
    left: str
    right: str


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Condition"


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Or:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Implies:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Condition"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Condition"


Condition = Union[Rel, Eq, Not, And, Or, Implies, Forall, Exists]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<kw>forall|exists)\b|(?P<arrow>->)|(?P<sym>[~&|().,=∀∃])|(?P<ident>[A-Za-z][A-Za-z0-9_]*))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ConditionSyntaxError(f"unknown token {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        kind, value = m.lastgroup, m.group(m.lastgroup)
        if value == "∀":
            kind, value = "kw", "forall"
        elif value == "∃":
            kind, value = "kw", "exists"
        out.append((kind, value, start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def expect(self, value: str):
        kind, v, pos = self.toks[self.i]
        if v != value or kind == "eof":
            raise ConditionSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)
        self.i += 1

    def ident(self) -> str:
        kind, v, pos = self.toks[self.i]
        if kind != "ident" or v == "R":
            raise ConditionSyntaxError(f"expected a variable, found {v or 'end of input'!r}", pos)
        self.i += 1
        return v

    def cond(self) -> Condition:
        if self.peek()[0] == "kw":
            return self.quant()
        return self.imp()

    def quant(self) -> Condition:
        _, kw, _ = self.toks[self.i]
        self.i += 1
        names = [self.ident()]
        while self.peek()[0] == "ident":
            names.append(self.ident())
        if self.peek()[1] == ",":  # tolerate "forall x,y."
            while self.peek()[1] == ",":
                self.i += 1
                names.append(self.ident())
        self.expect(".")
        body = self.cond()
        node = Forall if kw == "forall" else Exists
        for name in reversed(names):
            body = node(name, body)
        return body

    def imp(self) -> Condition:
        left = self.disj()
        if self.peek()[0] == "arrow":
            self.i += 1
            return Implies(left, self.cond())
        return left

    def disj(self) -> Condition:
        left = self.conj()
        while self.peek()[1] == "|":
            self.i += 1
            left = Or(left, self.conj())
        return left

    def conj(self) -> Condition:
        left = self.unary()
        while self.peek()[1] == "&":
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self) -> Condition:
        kind, v, pos = self.peek()
        if v == "~":
            self.i += 1
            return Not(self.unary())
        if kind == "kw":
            return self.quant()
        if v == "(":
            self.i += 1
            c = self.cond()
            self.expect(")")
            return c
        if kind == "ident" and v == "R" and self.toks[self.i + 1][1] == "(":
            self.i += 2
            a = self.ident()
            self.expect(",")
            b = self.ident()
            self.expect(")")
            return Rel(a, b)
        if kind == "ident":
            a = self.ident()
            self.expect("=")
            return Eq(a, self.ident())
        raise ConditionSyntaxError(f"unexpected {v or 'end of input'!r}", pos)


def free_variables(c: Condition) -> List[str]:
    """Free variables in order of first occurrence."""
    out: Dict[str, None] = {}

    def go(c: Condition, bound: frozenset):
        if isinstance(c, (Rel, Eq)):
            for v in (c.left, c.right):
                if v not in bound:
                    out.setdefault(v, None)
        elif isinstance(c, Not):
            go(c.body, bound)
        elif isinstance(c, (Forall, Exists)):
            go(c.body, bound | {c.var})
        else:
            go(c.left, bound)
            go(c.right, bound)

    go(c, frozenset())
    return list(out)


def parse_condition(text: str) -> Condition:
    p = _Parser(text)
    c = p.cond()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise ConditionSyntaxError(f"trailing input {v!r}", pos)
    for name in reversed(free_variables(c)):
        c = Forall(name, c)
    return c


def condition_text(c: Condition) -> str:
    """Fully parenthesised rendering that parses back to the same tree."""
    if isinstance(c, Rel):
        return f"R({c.left},{c.right})"
    if isinstance(c, Eq):
        return f"{c.left} = {c.right}"
    if isinstance(c, Not):
        return f"~{condition_text(c.body)}"
    if isinstance(c, (Forall, Exists)):
        kw = "forall" if isinstance(c, Forall) else "exists"
        return f"({kw} {c.var}. {condition_text(c.body)})"
    op = {And: "&", Or: "|", Implies: "->"}[type(c)]
    return f"({condition_text(c.left)} {op} {condition_text(c.right)})"


# ---------------------------------------------------------------------------
# evaluation

def eval_condition(frame, c: Condition) -> bool:
    """Brute-force truth of a closed condition; quantifiers range over the worlds."""
    return compile_condition(c)(frame.size, frame.succ_masks)


Compiled = Callable[[int, Tuple[int, ...]], bool]


def compile_condition(c: Condition) -> Compiled:
    """Turn ``c`` into a function of (world count, successor bitmasks)."""
    slots: Dict[str, int] = {}
    counter = [0]
    free: List[str] = []

    def slot(name: str) -> int:
        if name not in slots:
            free.append(name)
            slots[name] = -len(free)
        return slots[name]

    def build(c: Condition):
        if isinstance(c, Rel):
            a, b = slot(c.left), slot(c.right)
            return lambda env, n, succ: bool(succ[env[a]] >> env[b] & 1)
        if isinstance(c, Eq):
            a, b = slot(c.left), slot(c.right)
            return lambda env, n, succ: env[a] == env[b]
        if isinstance(c, Not):
            f = build(c.body)
            return lambda env, n, succ: not f(env, n, succ)
        if isinstance(c, And):
            f, g = build(c.left), build(c.right)
            return lambda env, n, succ: f(env, n, succ) and g(env, n, succ)
        if isinstance(c, Or):
            f, g = build(c.left), build(c.right)
            return lambda env, n, succ: f(env, n, succ) or g(env, n, succ)
        if isinstance(c, Implies):
            f, g = build(c.left), build(c.right)
            return lambda env, n, succ: (not f(env, n, succ)) or g(env, n, succ)
        # a fresh slot per binder keeps shadowed names apart
        outer = slots.get(c.var)
        s = counter[0]
        counter[0] += 1
        slots[c.var] = s
        f = build(c.body)
        if outer is None:
            del slots[c.var]
        else:
            slots[c.var] = outer
        if isinstance(c, Forall):
            def forall(env, n, succ):
                for w in range(n):
                    env[s] = w
                    if not f(env, n, succ):
                        return False
                return True
            return forall

        def exists(env, n, succ):
            for w in range(n):
                env[s] = w
                if f(env, n, succ):
                    return True
            return False
        return exists

    body = build(c)
    if free:
        raise ValueError(f"condition has free variables {free}")

    def run(n: int, succ: Tuple[int, ...]) -> bool:
        return body({}, n, succ)

    return run
