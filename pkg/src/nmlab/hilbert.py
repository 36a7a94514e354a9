"""Hilbert-style proof objects and a line-by-line checker.

Proof files are line-delimited JSON.  An optional first record
``{"premises": [...], "system": "W"}`` declares the premises; every other
record is one proof line::

    {"f": "p -> (q -> p)", "rule": "Axiom", "schema": "p1"}
    {"f": "q", "rule": "MP", "refs": [3, 4]}
    {"f": "[](p -> p)", "rule": "Nec", "refs": [5]}
    {"f": "p", "rule": "Premise"}

``refs`` are 1-based.  ``MP`` with refs ``[i, j]`` needs line ``j`` to be
``line i -> this line``.  Axiom lines may carry ``"sub": {"A": "p"}``; without
it the substitution is found by matching.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .formula import Box, Formula, Impl, ParseError, Schema, instantiate, match_schema, metavariables, parse, parse_schema, subformulas, to_text
from .strengthenings import TBAT_AXIOMS, normalize_name, strengthening

RULES = ("Premise", "Axiom", "MP", "Nec")


@dataclass(frozen=True)
class System:
    name: str
    schemas: Tuple[Tuple[str, Schema], ...]
    necessitation: bool

    def schema(self, name: str) -> Optional[Schema]:
        for key in (name, normalize_name(name)):
            for n, s in self.schemas:
                if n == key:
                    return s
        return None

    @property
    def names(self) -> List[str]:
        return [n for n, _ in self.schemas]


_CLASSICAL = (
    ("p1", "A -> (B -> A)"),
    ("p2", "(A -> (B -> C)) -> ((A -> B) -> (A -> C))"),
    ("p3", "(~B -> ~A) -> (A -> B)"),
)
_MODAL = {
    "K": "[](A -> B) -> ([]A -> []B)",
    "T": "[]A -> A",
    "4": "[]A -> [][]A",
    "5": "~[]~A -> []~[]~A",
    "Lob": "[]([]A -> A) -> []A",
}


def _system(name: str, extra: Iterable[str], nec: bool) -> System:
    pairs = [(n, parse_schema(t)) for n, t in _CLASSICAL]
    pairs += [(n, parse_schema(_MODAL[n])) for n in extra]
    return System(name, tuple(pairs), nec)


def builtin_system(name: str) -> System:
    key = name.strip().upper()
    if key == "W":
        return _system("W", ["T"], False)
    if key in ("TBAT", "T-BAT"):
        base = _system("TBAT", ["T"], False)
        extra = tuple((n, strengthening(n).axiom) for n in TBAT_AXIOMS)
        return System("TBAT", base.schemas + extra, False)
    table = {"K": ["K"], "T": ["K", "T"], "S4": ["K", "T", "4"], "S5": ["K", "T", "5"], "GL": ["K", "4", "Lob"]}
    if key in table:
        return _system(key, table[key], True)
    raise KeyError(f"unknown system {name!r}; expected one of W, TBAT, K, T, S4, S5, GL")


SYSTEM_NAMES = ("W", "TBAT", "K", "T", "S4", "S5", "GL")


# ---------------------------------------------------------------------------
# proofs

@dataclass(frozen=True)
class Line:
    formula: Formula
    rule: str
    schema: Optional[str] = None
    refs: Tuple[int, ...] = ()
    sub: Optional[Mapping[str, Formula]] = None

    def to_json(self) -> dict:
        out: dict = {"f": to_text(self.formula), "rule": self.rule}
        if self.schema is not None:
            out["schema"] = self.schema
        if self.refs:
            out["refs"] = list(self.refs)
        if self.sub:
            out["sub"] = {k: to_text(v) for k, v in sorted(self.sub.items())}
        return out


@dataclass(frozen=True)
class Proof:
    lines: Tuple[Line, ...]
    premises: Tuple[Formula, ...] = ()
    system: Optional[str] = None

    @property
    def conclusion(self) -> Optional[Formula]:
        return self.lines[-1].formula if self.lines else None

    def dumps(self) -> str:
        head = {"premises": [to_text(p) for p in self.premises]}
        if self.system:
            head["system"] = self.system
        rows = [json.dumps(head)] + [json.dumps(l.to_json()) for l in self.lines]
        return "\n".join(rows) + "\n"


class ProofFormatError(ValueError):
    pass


def loads_proof(text: str) -> Proof:
    lines: List[Line] = []
    premises: Optional[List[Formula]] = None
    system = None
    for n, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ProofFormatError(f"record {n}: {exc.msg}") from None
        if not isinstance(rec, dict):
            raise ProofFormatError(f"record {n}: expected an object")
        try:
            if "premises" in rec and "f" not in rec:
                if lines or premises is not None:
                    raise ProofFormatError(f"record {n}: premises header must come first")
                premises = [parse(p) for p in rec["premises"]]
                system = rec.get("system")
                continue
            rule = rec.get("rule")
            if rule not in RULES:
                raise ProofFormatError(f"record {n}: unknown rule {rule!r}")
            sub = rec.get("sub")
            lines.append(Line(
                parse(rec["f"]),
                rule,
                rec.get("schema"),
                tuple(int(r) for r in rec.get("refs", ())),
                {k: parse(v) for k, v in sub.items()} if sub else None,
            ))
        except ParseError as exc:
            raise ProofFormatError(f"record {n}: {exc}") from None
        except KeyError as exc:
            raise ProofFormatError(f"record {n}: missing field {exc}") from None
    if premises is None:
        premises = [l.formula for l in lines if l.rule == "Premise"]
    return Proof(tuple(lines), tuple(premises), system)


def load_proof(path: Union[str, Path]) -> Proof:
    return loads_proof(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Accepted:
    conclusion: Formula
    theorem: bool  # no premise among the conclusion's ancestors

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Rejected:
    line: int
    reason: str

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"line {self.line}: {self.reason}"


CheckResult = Union[Accepted, Rejected]


def check_proof(p: Proof, s: System) -> CheckResult:
    if not p.lines:
        return Rejected(0, "empty proof")
    premises = set(p.premises)
    dep: List[bool] = []  # per line: depends on a premise
    for k, line in enumerate(p.lines, 1):
        f = line.formula
        for r in line.refs:
            if not 1 <= r < k:
                return Rejected(k, f"reference {r} is not an earlier line")
        if line.rule == "Premise":
            if f not in premises:
                return Rejected(k, "formula is not a declared premise")
            dep.append(True)
        elif line.rule == "Axiom":
            schema = s.schema(line.schema or "")
            if schema is None:
                return Rejected(k, f"unknown schema {line.schema!r} in system {s.name}")
            if line.sub is not None:
                missing = set(metavariables(schema)) - set(line.sub)
                if missing or instantiate(schema, line.sub) != f:
                    return Rejected(k, "schema mismatch")
            elif match_schema(f, schema) is None:
                return Rejected(k, "schema mismatch")
            dep.append(False)
        elif line.rule == "MP":
            if len(line.refs) != 2:
                return Rejected(k, "MP needs two references")
            i, j = line.refs
            a, b = p.lines[i - 1].formula, p.lines[j - 1].formula
            if b != Impl(a, f):
                return Rejected(k, f"MP: line {j} is not (line {i}) -> (this line)")
            dep.append(dep[i - 1] or dep[j - 1])
        else:  # Nec
            if not s.necessitation:
                return Rejected(k, f"necessitation is not a rule of {s.name}")
            if len(line.refs) != 1:
                return Rejected(k, "Nec needs one reference")
            i = line.refs[0]
            if f != Box(p.lines[i - 1].formula):
                return Rejected(k, f"Nec: formula is not [] of line {i}")
            if dep[i - 1]:
                return Rejected(k, "necessitation applied to non-theorem")
            dep.append(False)
    return Accepted(p.lines[-1].formula, not dep[-1])


# ---------------------------------------------------------------------------
# bounded search

@dataclass(frozen=True)
class Found:
    proof: Proof


@dataclass(frozen=True)
class NotFoundWithinBudget:
    explored: int


def derivable_bounded(target: Formula, s: System, budget: int = 2000) -> Union[Found, NotFoundWithinBudget]:
    """Forward saturation with schema instances drawn from the target's subformulas.

    ``budget`` caps the number of distinct formulas derived.  A miss says
    nothing about derivability.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    pool = sorted(set(subformulas(target)), key=lambda g: (len(to_text(g)), to_text(g)))
    pool_set = set(pool)
    known: Dict[Formula, Tuple] = {}
    order: List[Formula] = []

    def add(f: Formula, why: Tuple) -> bool:
        if f in known:
            return False
        known[f] = why
        order.append(f)
        return True

    for name, schema in s.schemas:
        sub = match_schema(target, schema)
        if sub is not None and budget > 0:
            return Found(Proof((Line(target, "Axiom", name, (), sub),)))

    for name, schema in s.schemas:
        metas = sorted(metavariables(schema))
        for combo in itertools.product(pool, repeat=len(metas)):
            if len(order) >= budget:
                return NotFoundWithinBudget(len(order))
            sub = dict(zip(metas, combo))
            add(instantiate(schema, sub), ("Axiom", name, sub))
            if target in known:
                return Found(_extract(target, known))

    changed = True
    while changed and target not in known:
        changed = False
        implications = [f for f in order if isinstance(f, Impl)]
        for imp in implications:
            if imp.left in known and imp.right not in known:
                if len(order) >= budget:
                    return NotFoundWithinBudget(len(order))
                changed |= add(imp.right, ("MP", imp.left, imp))
        if s.necessitation:
            for f in list(order):
                if Box(f) in pool_set and Box(f) not in known:
                    if len(order) >= budget:
                        return NotFoundWithinBudget(len(order))
                    changed |= add(Box(f), ("Nec", f))
    if target in known:
        return Found(_extract(target, known))
    return NotFoundWithinBudget(len(order))


def _extract(target: Formula, known: Mapping[Formula, Tuple]) -> Proof:
    lines: List[Line] = []
    index: Dict[Formula, int] = {}

    def emit(f: Formula) -> int:
        if f in index:
            return index[f]
        why = known[f]
        if why[0] == "Axiom":
            line = Line(f, "Axiom", why[1], (), dict(why[2]))
        elif why[0] == "MP":
            i, j = emit(why[1]), emit(why[2])
            line = Line(f, "MP", None, (i, j))
        else:
            line = Line(f, "Nec", None, (emit(why[1]),))
        lines.append(line)
        index[f] = len(lines)
        return len(lines)

    emit(target)
    return Proof(tuple(lines))


# ---------------------------------------------------------------------------
# shipped corpus

def corpus_paths() -> List[Path]:
    from importlib import resources
    root = resources.files("nmlab").joinpath("data").joinpath("proofs")
    return sorted(Path(str(p)) for p in root.iterdir() if str(p).endswith(".jsonl"))


def mutate_line(p: Proof, k: int) -> Proof:
    """Copy of ``p`` with line ``k`` (1-based) replaced by its negation."""
    from .formula import Neg

    lines = list(p.lines)
    old = lines[k - 1]
    lines[k - 1] = Line(Neg(old.formula), old.rule, old.schema, old.refs, old.sub)
    return Proof(tuple(lines), p.premises, p.system)
