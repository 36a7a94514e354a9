"""Registry of named cell strengthenings and the axioms they induce.

Each row pairs one cell restriction of the simplified W matrix with the axiom
obtained by reading the values through their provability meanings:

    P  ~>  []X          t  ~>  ~[]X /\\ X
    f  ~>  ~[]~X /\\ ~X  R  ~>  []~X

Axiom texts are kept exactly as tabulated (``A``/``B`` stand for the two
metavariables); where a row lists a shorter equivalent, that shorter axiom is
the one used and the long form is kept in ``full_axiom``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional

from .formula import Formula, Schema, fresh_instance, parse_schema, to_text
from .nmatrix import CellRestriction


class Remark(Enum):
    PROVABLE_K = "ProvableK"
    PROVABLE_T = "ProvableT"
    PROVABLE_S4 = "ProvableS4"
    NOT_PROVABLE_S5 = "NotProvableS5"
    NONE = "None"


@dataclass(frozen=True)
class NamedStrengthening:
    name: str
    restriction: CellRestriction
    axiom_text: str
    remark: Remark = Remark.NONE
    full_axiom_text: Optional[str] = None
    note: str = ""

    @property
    def axiom(self) -> Schema:
        return parse_schema(self.axiom_text)

    @property
    def full_axiom(self) -> Schema:
        return parse_schema(self.full_axiom_text or self.axiom_text)

    def instance(self) -> Formula:
        """Representative instance on fresh letters (A -> p, B -> q)."""
        return fresh_instance(self.axiom)

    @property
    def group(self) -> str:
        return {"neg": "negation", "box": "box", "impl": "implication"}[self.restriction.connective]


def _r(conn: str, inputs: str, out: str) -> CellRestriction:
    return CellRestriction(conn, tuple(inputs.split(",")), frozenset([out]))


K, T, S4, NS5, NONE = Remark.PROVABLE_K, Remark.PROVABLE_T, Remark.PROVABLE_S4, Remark.NOT_PROVABLE_S5, Remark.NONE

_NEGATION = [
    NamedStrengthening("N1", _r("neg", "P", "R"), "[]A -> []~~A", K),
    NamedStrengthening("N2", _r("neg", "P", "f"), "[]A -> ~[]~~A", NONE,
                       full_axiom_text="[]A -> ~[]~~A /\\ ~~A",
                       note="no frame condition known"),
    NamedStrengthening("N3", _r("neg", "t", "R"), "~[]A /\\ A -> []~~A", NS5),
    NamedStrengthening("N4", _r("neg", "t", "f"), "~[]A /\\ A -> ~[]~~A", K,
                       full_axiom_text="~[]A /\\ A -> ~[]~~A /\\ ~~A"),
]

_BOX = [
    NamedStrengthening("B1", _r("box", "P", "P"), "[]A -> [][]A", NONE, note="axiom 4"),
    NamedStrengthening("B2", _r("box", "P", "t"), "[]A -> ~[][]A", NONE,
                       full_axiom_text="[]A -> []A /\\ ~[][]A"),
    NamedStrengthening("B3", _r("box", "t", "R"), "~[]A /\\ A -> []~[]A", S4),
    NamedStrengthening("B4", _r("box", "t", "f"), "~[]A /\\ A -> ~[]~[]A", NONE,
                       full_axiom_text="~[]A /\\ A -> ~[]A /\\ ~[]~[]A"),
    NamedStrengthening("B5", _r("box", "f", "R"), "~[]~A /\\ ~A -> []~[]A", NONE,
                       note="stated provable in KTB; KTB is outside the tableau's logics"),
    NamedStrengthening("B6", _r("box", "f", "f"), "~[]~A /\\ ~A -> ~[]A /\\ ~[]~[]A", NS5),
    NamedStrengthening("B7", _r("box", "R", "R"), "[]~A -> []~[]A", T),
    NamedStrengthening("B8", _r("box", "R", "f"), "[]~A -> ~[]A /\\ ~[]~[]A", NS5),
]

# (antecedent value, consequent value, output value, axiom, remark) in table order
_IMPLICATION_ROWS = [
    ("P", "P", "P", "[]A /\\ []B -> [](A -> B)", K),
    ("P", "P", "t", "[]A /\\ []B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("P", "t", "P", "[]A /\\ ~[]B /\\ B -> [](A -> B)", NS5),
    ("P", "t", "t", "[]A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)", K),
    ("P", "f", "f", "[]A /\\ ~[]~B /\\ ~B -> ~[]~(A -> B) /\\ ~(A -> B)", T),
    ("P", "f", "R", "[]A /\\ ~[]~B /\\ ~B -> []~(A -> B)", NS5),
    ("P", "R", "f", "[]A /\\ []~B -> ~[]~(A -> B) /\\ ~(A -> B)", NS5),
    ("P", "R", "R", "[]A /\\ []~B -> []~(A -> B)", K),
    ("t", "P", "P", "~[]A /\\ A /\\ []B -> [](A -> B)", K),
    ("t", "P", "t", "~[]A /\\ A /\\ []B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("t", "t", "P", "~[]A /\\ A /\\ ~[]B /\\ B -> [](A -> B)", NS5),
    ("t", "t", "t", "~[]A /\\ A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)", K),
    ("t", "f", "f", "~[]A /\\ A /\\ ~[]~B /\\ ~B -> ~[]~(A -> B) /\\ ~(A -> B)", K),
    ("t", "f", "R", "~[]A /\\ A /\\ ~[]~B /\\ ~B -> []~(A -> B)", NS5),
    ("t", "R", "f", "~[]A /\\ A /\\ []~B -> ~[]~(A -> B) /\\ ~(A -> B)", T),
    ("t", "R", "R", "~[]A /\\ A /\\ []~B -> []~(A -> B)", NS5),
    ("f", "P", "P", "~[]~A /\\ ~A /\\ []B -> [](A -> B)", K),
    ("f", "P", "t", "~[]~A /\\ ~A /\\ []B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("f", "t", "P", "~[]~A /\\ ~A /\\ ~[]B /\\ B -> [](A -> B)", NS5),
    ("f", "t", "t", "~[]~A /\\ ~A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("f", "f", "P", "~[]~A /\\ ~A /\\ ~[]~B /\\ ~B -> [](A -> B)", NS5),
    ("f", "f", "t", "~[]~A /\\ ~A /\\ ~[]~B /\\ ~B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("f", "R", "P", "~[]~A /\\ ~A /\\ []~B -> [](A -> B)", NS5),
    ("f", "R", "t", "~[]~A /\\ ~A /\\ []~B -> ~[](A -> B) /\\ (A -> B)", K),
    ("R", "P", "P", "[]~A /\\ []B -> [](A -> B)", K),
    ("R", "P", "t", "[]~A /\\ []B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("R", "t", "P", "[]~A /\\ ~[]B /\\ B -> [](A -> B)", K),
    ("R", "t", "t", "[]~A /\\ ~[]B /\\ B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("R", "f", "P", "[]~A /\\ ~[]~B /\\ ~B -> [](A -> B)", K),
    ("R", "f", "t", "[]~A /\\ ~[]~B /\\ ~B -> ~[](A -> B) /\\ (A -> B)", NS5),
    ("R", "R", "P", "[]~A /\\ []~B -> [](A -> B)", K),
    ("R", "R", "t", "[]~A /\\ []~B -> ~[](A -> B) /\\ (A -> B)", NS5),
]


def impl_name(a: str, b: str, c: str) -> str:
    return f"I_{{{a},{b}}}^{{{c}}}"


_IMPLICATION = [
    NamedStrengthening(impl_name(a, b, c), _r("impl", f"{a},{b}", c), axiom, remark)
    for a, b, c, axiom, remark in _IMPLICATION_ROWS
]

REGISTRY: Dict[str, NamedStrengthening] = {s.name: s for s in _NEGATION + _BOX + _IMPLICATION}

# the 17 extra axioms of T-BAT over W, in listing order
TBAT_AXIOMS = (
    "N1", "N4", "B1", "B7",
    impl_name("P", "P", "P"), impl_name("t", "P", "P"), impl_name("f", "P", "P"),
    impl_name("R", "R", "P"), impl_name("R", "t", "P"), impl_name("R", "P", "P"),
    impl_name("R", "f", "P"),
    impl_name("P", "t", "t"), impl_name("f", "R", "t"),
    impl_name("P", "f", "f"), impl_name("t", "f", "f"), impl_name("t", "R", "f"),
    impl_name("P", "R", "R"),
)


def normalize_name(name: str) -> str:
    """Accept ``I_{P,t}^{t}``, ``I_{P,t}^t``, ``I[P,t]^t`` and ``I_Pt^t`` spellings."""
    s = name.strip().replace(" ", "")
    if s in REGISTRY:
        return s
    if s[:1] in ("I", "i") and len(s) > 1:
        body = s[1:].lstrip("_")
        for ch in "{}[]":
            body = body.replace(ch, "")
        if "^" in body:
            args, out = body.split("^", 1)
            args = args.replace(",", "")
            if len(args) == 2 and len(out) == 1:
                return impl_name(args[0], args[1], out)
    return s.upper()


def strengthening(name: str) -> NamedStrengthening:
    key = normalize_name(name)
    try:
        return REGISTRY[key]
    except KeyError:
        raise KeyError(f"unknown strengthening {name!r}") from None


def all_strengthenings() -> List[NamedStrengthening]:
    return list(REGISTRY.values())


_MEANING = {
    "P": "[]{x}",
    "t": "~[]{x} /\\ {x}",
    "f": "~[]~{x} /\\ ~{x}",
    "R": "[]~{x}",
}


def meaning_text(value: str, x: str) -> str:
    """Object-language reading of ``v(x) = value``."""
    return _MEANING[value].format(x=x)


def registry_digest() -> str:
    payload = [
        {"name": s.name, "restriction": str(s.restriction), "axiom": to_text(s.axiom), "remark": s.remark.value}
        for s in REGISTRY.values()
    ]
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
