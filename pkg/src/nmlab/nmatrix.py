"""Non-deterministic matrices (Nmatrices) and their consequence relations.

An Nmatrix assigns to every connective/argument combination a non-empty
*set* of admissible output values.  A valuation picks one value per formula
(shared by every occurrence of that formula) so that each compound formula's
value lies in the cell selected by its immediate subformulas' values.

Two routes decide consequence:

* :func:`enumerate_valuations` walks the full choice tree depth-first;
* :func:`check_consequence` runs a constraint search (arc consistency plus
  backtracking in the same variable/value order), so the first witness it
  reports is exactly the first witness the plain enumeration would meet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .formula import Box, Closure, Formula, Impl, Neg, Var, closure_of, to_text

CONNECTIVES = ("neg", "box", "impl")
DEFAULT_MAX_CLOSURE = 24


class NmatrixError(ValueError):
    pass


class EmptyCell(NmatrixError):
    def __init__(self, connective: str, inputs: Tuple[str, ...]):
        self.connective = connective
        self.inputs = inputs
        super().__init__(f"empty cell {connective}({','.join(inputs)})")


class ClosureTooLarge(NmatrixError):
    pass


@dataclass(frozen=True, eq=False)
class Nmatrix:
    values: Tuple[str, ...]
    designated: FrozenSet[str]
    neg: Mapping[str, FrozenSet[str]]
    box: Mapping[str, FrozenSet[str]]
    impl: Mapping[Tuple[str, str], FrozenSet[str]]
    name: str = ""

    def __post_init__(self):
        vals = set(self.values)
        if not vals or len(vals) != len(self.values):
            raise NmatrixError("value set must be non-empty and duplicate-free")
        if not self.designated or not self.designated <= vals:
            raise NmatrixError("designated set must be a non-empty subset of the values")
        for conn in CONNECTIVES:
            table = getattr(self, conn)
            expected = set(self.inputs(conn))
            if set(table) != expected:
                raise NmatrixError(f"{conn} table must have exactly one cell per input")
            for key, cell in table.items():
                if not cell:
                    raise EmptyCell(conn, key if isinstance(key, tuple) else (key,))
                if not cell <= vals:
                    raise NmatrixError(f"{conn} cell {key} uses unknown values {sorted(cell - vals)}")

    def inputs(self, connective: str) -> List:
        if connective == "impl":
            return [(a, b) for a in self.values for b in self.values]
        if connective in ("neg", "box"):
            return list(self.values)
        raise NmatrixError(f"unknown connective {connective!r}")

    def cell(self, connective: str, *args: str) -> FrozenSet[str]:
        table = getattr(self, connective)
        return table[args] if connective == "impl" else table[args[0]]

    def ordered(self, cell: Iterable[str]) -> List[str]:
        """Cell members in the matrix's value order."""
        cell = set(cell)
        return [v for v in self.values if v in cell]

    def cells(self) -> Iterator[Tuple[str, Tuple[str, ...], FrozenSet[str]]]:
        for conn in CONNECTIVES:
            for key in self.inputs(conn):
                args = key if isinstance(key, tuple) else (key,)
                yield conn, args, self.cell(conn, *args)

    def same_tables(self, other: "Nmatrix") -> bool:
        return (
            self.values == other.values
            and self.designated == other.designated
            and all(c == other.cell(conn, *args) for conn, args, c in self.cells())
        )

    # -- serialisation -----------------------------------------------------

    def to_json(self) -> dict:
        def cell_list(c):
            return self.ordered(c)

        return {
            "values": list(self.values),
            "designated": self.ordered(self.designated),
            "neg": {v: cell_list(self.neg[v]) for v in self.values},
            "box": {v: cell_list(self.box[v]) for v in self.values},
            "impl": {f"{a},{b}": cell_list(self.impl[a, b]) for a in self.values for b in self.values},
        }

    @classmethod
    def from_json(cls, data: dict, name: str = "") -> "Nmatrix":
        try:
            values = tuple(data["values"])
            designated = frozenset(data["designated"])
            neg = {k: frozenset(v) for k, v in data["neg"].items()}
            box = {k: frozenset(v) for k, v in data["box"].items()}
            impl = {}
            for key, v in data["impl"].items():
                parts = tuple(p.strip() for p in key.split(","))
                if len(parts) != 2:
                    raise NmatrixError(f"impl key {key!r} is not of the form 'a,b'")
                impl[parts] = frozenset(v)
        except (KeyError, TypeError, AttributeError) as e:
            raise NmatrixError(f"malformed matrix description: {e}") from None
        extra = set(data) - {"values", "designated", "neg", "box", "impl", "name"}
        if extra:
            raise NmatrixError(f"unknown keys in matrix description: {sorted(extra)}")
        return cls(values, designated, neg, box, impl, name=name or data.get("name", ""))


def load_matrix(path: Union[str, Path]) -> Nmatrix:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    return Nmatrix.from_json(data, name=data.get("name", path.stem))


# ---------------------------------------------------------------------------
# built-in matrices

VALUES = ("P", "t", "f", "R")
D = frozenset({"P", "t"})
ND = frozenset({"f", "R"})


def _fs(s: str) -> FrozenSet[str]:
    return frozenset(s)


def _tbat(original: bool) -> Nmatrix:
    neg = {"P": _fs("R"), "t": _fs("f"), "f": _fs("t"), "R": _fs("P")}
    box = {"P": _fs("P"), "t": ND, "f": ND, "R": _fs("R")}
    rows = {
        "P": ["P", "t", "f", "R"],
        "t": ["P", "Pt", "f", "f"],
        "f": ["P", "Pt", "Pt", "Pt" if original else "t"],
        "R": ["P", "P", "P", "P"],
    }
    impl = {(a, b): _fs(rows[a][j]) for a in VALUES for j, b in enumerate(VALUES)}
    return Nmatrix(VALUES, D, neg, box, impl, name="TBAT_ORIGINAL" if original else "TBAT")


def _w(simplified: bool) -> Nmatrix:
    if simplified:
        neg = {"P": ND, "t": ND, "f": _fs("t"), "R": _fs("P")}
    else:
        neg = {"P": ND, "t": ND, "f": D, "R": D}
    box = {"P": D, "t": ND, "f": ND, "R": ND}
    impl = {(a, b): (ND if a in D and b in ND else D) for a in VALUES for b in VALUES}
    return Nmatrix(VALUES, D, neg, box, impl, name="W_SIMPLIFIED" if simplified else "W")


_BUILTINS: Dict[str, Callable[[], Nmatrix]] = {
    "TBAT": lambda: _tbat(False),
    "TBAT_ORIGINAL": lambda: _tbat(True),
    "W": lambda: _w(False),
    "W_SIMPLIFIED": lambda: _w(True),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_matrix(name: str) -> Nmatrix:
    try:
        return _BUILTINS[name.upper() if name.upper() in _BUILTINS else name]()
    except KeyError:
        raise NmatrixError(f"unknown matrix {name!r}; expected one of {', '.join(BUILTIN_NAMES)}") from None


# ---------------------------------------------------------------------------
# strengthening by cell restriction

@dataclass(frozen=True)
class CellRestriction:
    connective: str
    inputs: Tuple[str, ...]
    allowed: FrozenSet[str]

    def __post_init__(self):
        arity = {"neg": 1, "box": 1, "impl": 2}.get(self.connective)
        if arity is None:
            raise NmatrixError(f"unknown connective {self.connective!r}")
        if len(self.inputs) != arity:
            raise NmatrixError(f"{self.connective} takes {arity} input(s), got {len(self.inputs)}")
        if not self.allowed:
            raise NmatrixError("a restriction must allow at least one value")

    def __str__(self) -> str:
        allowed = ",".join(sorted(self.allowed, key=lambda v: VALUES.index(v) if v in VALUES else v))
        return f"{self.connective}({','.join(self.inputs)})={{{allowed}}}"


def compose(base: Nmatrix, restrictions: Sequence[CellRestriction], name: str = "") -> Nmatrix:
    """Intersect the targeted cells of ``base`` with each restriction's allowed set."""
    tables = {"neg": dict(base.neg), "box": dict(base.box), "impl": dict(base.impl)}
    vals = set(base.values)
    for r in restrictions:
        if not set(r.inputs) <= vals or not r.allowed <= vals:
            raise NmatrixError(f"restriction {r} mentions values outside {base.values}")
        key = r.inputs if r.connective == "impl" else r.inputs[0]
        new = tables[r.connective][key] & r.allowed
        if not new:
            raise EmptyCell(r.connective, r.inputs)
        tables[r.connective][key] = new
    label = name or (base.name + "+" + ";".join(str(r) for r in restrictions) if restrictions else base.name)
    return Nmatrix(base.values, base.designated, tables["neg"], tables["box"], tables["impl"], name=label)


def refines(fine: Nmatrix, coarse: Nmatrix) -> bool:
    if fine.values != coarse.values or fine.designated != coarse.designated:
        raise NmatrixError("refinement needs matching value and designated sets")
    return all(cell <= coarse.cell(conn, *args) for conn, args, cell in fine.cells())


# ---------------------------------------------------------------------------
# valuations

@dataclass(frozen=True)
class Valuation:
    closure: Closure
    values: Tuple[str, ...]

    def __getitem__(self, f: Formula) -> str:
        return self.values[self.closure.index(f)]

    def as_dict(self) -> Dict[str, str]:
        return {to_text(f): v for f, v in zip(self.closure, self.values)}

    def render(self) -> str:
        return ", ".join(f"v({to_text(f)})={v}" for f, v in zip(self.closure, self.values))


def _structure(closure: Closure) -> List[Tuple[str, Tuple[int, ...]]]:
    index = {f: i for i, f in enumerate(closure)}
    out = []
    for f in closure:
        if isinstance(f, Var):
            out.append(("var", ()))
        elif isinstance(f, Neg):
            out.append(("neg", (index[f.body],)))
        elif isinstance(f, Box):
            out.append(("box", (index[f.body],)))
        elif isinstance(f, Impl):
            out.append(("impl", (index[f.left], index[f.right])))
        else:
            raise NmatrixError(f"cannot evaluate {to_text(f)}: metavariables have no value")
    return out


def _guard(closure: Closure, max_closure: Optional[int]) -> None:
    if max_closure is not None and len(closure) > max_closure:
        raise ClosureTooLarge(
            f"closure has {len(closure)} formulas, above the cap of {max_closure}; raise max_closure to force"
        )


PrefixPruner = Callable[[int, Tuple[str, ...]], bool]


def enumerate_valuations(
    closure: Closure,
    m: Nmatrix,
    prune: Optional[PrefixPruner] = None,
    max_closure: Optional[int] = DEFAULT_MAX_CLOSURE,
) -> Iterator[Valuation]:
    """Yield every valuation of ``closure`` in depth-first, value-ordered fashion.

    ``prune(i, prefix)`` is consulted each time position ``i`` receives a
    value (``prefix`` holds positions ``0..i``); returning True abandons the
    branch.
    """
    if not isinstance(closure, Closure):
        closure = Closure(tuple(closure))
    _guard(closure, max_closure)
    shape = _structure(closure)
    n = len(closure)
    assigned: List[str] = []

    def options(i: int) -> List[str]:
        kind, kids = shape[i]
        if kind == "var":
            return list(m.values)
        return m.ordered(m.cell(kind, *(assigned[k] for k in kids)))

    def go(i: int) -> Iterator[Valuation]:
        if i == n:
            yield Valuation(closure, tuple(assigned))
            return
        for v in options(i):
            assigned.append(v)
            if prune is None or not prune(i, tuple(assigned)):
                yield from go(i + 1)
            assigned.pop()

    yield from go(0)


@dataclass(frozen=True)
class Verdict:
    valid: bool
    witness: Optional[Valuation] = None

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        return "Valid" if self.valid else f"Invalid: {self.witness.render()}"


class _Network:
    """Constraint network whose solutions are the counter-valuations of a sequent."""

    def __init__(self, closure: Closure, m: Nmatrix):
        self.closure = closure
        self.m = m
        self.k = len(m.values)
        idx = {v: i for i, v in enumerate(m.values)}
        self.full = (1 << self.k) - 1

        def mask(cell):
            return sum(1 << idx[v] for v in cell)

        self.dmask = mask(m.designated)
        self.cells = {
            "neg": [mask(m.neg[a]) for a in m.values],
            "box": [mask(m.box[a]) for a in m.values],
            "impl": [[mask(m.impl[a, b]) for b in m.values] for a in m.values],
        }
        self.shape = _structure(closure)
        # constraints: (kind, child indices, parent index); watchers per variable
        self.constraints = [(kind, kids, i) for i, (kind, kids) in enumerate(self.shape) if kind != "var"]
        self.watch: List[List[int]] = [[] for _ in closure]
        for ci, (_, kids, parent) in enumerate(self.constraints):
            for v in set(kids) | {parent}:
                self.watch[v].append(ci)

    def _revise(self, ci: int, dom: List[int]) -> Optional[List[int]]:
        """Return the variables whose domains shrank, or None on a wipe-out."""
        kind, kids, parent = self.constraints[ci]
        k = self.k
        pd = dom[parent]
        if kind == "impl":
            a_idx, b_idx = kids
            ad, bd = dom[a_idx], dom[b_idx]
            table = self.cells["impl"]
            new_a = new_b = new_p = 0
            for a in range(k):
                if not ad >> a & 1:
                    continue
                row = table[a]
                # in A -> A both operands are one variable: only the diagonal is a support
                for b in ((a,) if a_idx == b_idx else range(k)):
                    if bd >> b & 1:
                        hit = row[b] & pd
                        if hit:
                            new_a |= 1 << a
                            new_b |= 1 << b
                            new_p |= hit
            changed = []
            for var, old, new in ((a_idx, ad, new_a), (b_idx, bd, new_b), (parent, pd, new_p)):
                if new != old:
                    if not new:
                        return None
                    dom[var] = new
                    changed.append(var)
            return changed
        (c_idx,) = kids
        cd = dom[c_idx]
        table = self.cells[kind]
        new_c = new_p = 0
        for a in range(k):
            if cd >> a & 1:
                hit = table[a] & pd
                if hit:
                    new_c |= 1 << a
                    new_p |= hit
        changed = []
        for var, old, new in ((c_idx, cd, new_c), (parent, pd, new_p)):
            if new != old:
                if not new:
                    return None
                dom[var] = new
                changed.append(var)
        return changed

    def propagate(self, dom: List[int], queue: Iterable[int]) -> bool:
        pending = list(dict.fromkeys(queue))
        queued = set(pending)
        while pending:
            ci = pending.pop()
            queued.discard(ci)
            changed = self._revise(ci, dom)
            if changed is None:
                return False
            for var in changed:
                for cj in self.watch[var]:
                    if cj != ci and cj not in queued:
                        queued.add(cj)
                        pending.append(cj)
        return True

    def first_solution(self, dom: List[int]) -> Optional[Tuple[int, ...]]:
        if not self.propagate(dom, range(len(self.constraints))):
            return None
        n = len(dom)

        def go(i: int, dom: List[int]) -> Optional[List[int]]:
            while i < n and dom[i] & (dom[i] - 1) == 0:
                i += 1
            if i == n:
                return dom
            for a in range(self.k):
                if dom[i] >> a & 1:
                    trial = list(dom)
                    trial[i] = 1 << a
                    if self.propagate(trial, self.watch[i]):
                        found = go(i + 1, trial)
                        if found is not None:
                            return found
            return None

        sol = go(0, dom)
        if sol is None:
            return None
        return tuple(d.bit_length() - 1 for d in sol)


def check_consequence(
    premises: Iterable[Formula],
    conclusion: Formula,
    m: Nmatrix,
    max_closure: Optional[int] = DEFAULT_MAX_CLOSURE,
) -> Verdict:
    """Decide ``premises |= conclusion`` in ``m``.

    The witness of an invalid sequent is the first counter-valuation in
    enumeration order (closure order, values in matrix order).
    """
    premises = list(dict.fromkeys(premises))
    closure = closure_of(premises + [conclusion])
    _guard(closure, max_closure)
    if conclusion in premises:
        return Verdict(True)
    net = _Network(closure, m)
    dom = [net.full] * len(closure)
    for p in premises:
        dom[closure.index(p)] &= net.dmask
    dom[closure.index(conclusion)] &= net.full & ~net.dmask
    if any(d == 0 for d in dom):
        return Verdict(True)
    sol = net.first_solution(dom)
    if sol is None:
        return Verdict(True)
    return Verdict(False, Valuation(closure, tuple(m.values[i] for i in sol)))


def check_tautology(f: Formula, m: Nmatrix, max_closure: Optional[int] = DEFAULT_MAX_CLOSURE) -> Verdict:
    return check_consequence([], f, m, max_closure=max_closure)


def check_consequence_by_enumeration(
    premises: Iterable[Formula],
    conclusion: Formula,
    m: Nmatrix,
    max_closure: Optional[int] = DEFAULT_MAX_CLOSURE,
) -> Verdict:
    """Reference route: a plain depth-first walk of the choice tree.

    No propagation.  A branch dies only when the value just placed is a
    non-designated premise or a designated conclusion; the first leaf reached
    is the counter-valuation.  Same order as :func:`enumerate_valuations`.
    """
    premises = list(dict.fromkeys(premises))
    closure = closure_of(premises + [conclusion])
    _guard(closure, max_closure)
    shape = _structure(closure)
    n, k = len(closure), len(m.values)
    idx = {v: i for i, v in enumerate(m.values)}

    def opts(cell) -> Tuple[int, ...]:
        return tuple(idx[v] for v in m.ordered(cell))

    neg = [opts(m.neg[v]) for v in m.values]
    box = [opts(m.box[v]) for v in m.values]
    impl = [[opts(m.impl[a, b]) for b in m.values] for a in m.values]
    everything = tuple(range(k))
    des = [v in m.designated for v in m.values]
    # allowed[i][x]: may position i hold value x on a counter-valuation
    allowed = [[True] * k for _ in range(n)]
    for p in premises:
        allowed[closure.index(p)] = list(des)
    allowed[closure.index(conclusion)] = [not d for d in des]
    if conclusion in premises:
        return Verdict(True)

    kinds = [kind for kind, _ in shape]
    kids = [ks + (0,) * (2 - len(ks)) for _, ks in shape]
    vals = [0] * n

    def go(i: int) -> bool:
        if i == n:
            return True
        kind, (a, b) = kinds[i], kids[i]
        if kind == "var":
            choice = everything
        elif kind == "neg":
            choice = neg[vals[a]]
        elif kind == "box":
            choice = box[vals[a]]
        else:
            choice = impl[vals[a]][vals[b]]
        ok = allowed[i]
        for x in choice:
            if ok[x]:
                vals[i] = x
                if go(i + 1):
                    return True
        return False

    if go(0):
        return Verdict(False, Valuation(closure, tuple(m.values[x] for x in vals)))
    return Verdict(True)


def respects_tables(v: Valuation, m: Nmatrix) -> bool:
    """Direct scan of the valuation conditions, independent of the enumerator."""
    for f, val in zip(v.closure, v.values):
        if val not in m.values:
            return False
        if isinstance(f, Neg) and val not in m.neg[v[f.body]]:
            return False
        if isinstance(f, Box) and val not in m.box[v[f.body]]:
            return False
        if isinstance(f, Impl) and val not in m.impl[v[f.left], v[f.right]]:
            return False
    return True
