"""Finite Kripke frames and models, frame validity and correspondence scans.

Worlds are ``0..n-1``.  A relation is stored both as a frozenset of pairs and
as a tuple of successor bitmasks; the enumeration order of frames is the
ascending order of the relation bitmask in which pair ``(i, j)`` is bit
``i * n + j``.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .conditions import Condition, compile_condition, condition_text, parse_condition
from .formula import Box, Formula, Impl, Neg, Var, closure_of, fresh_instance, metavariables, parse_schema, to_text, variables

FRAME_CLASSES = ("all", "reflexive", "transitive", "refl_trans", "equivalence", "symmetric", "serial")
DEFAULT_FRAME_BUDGET = 100_000


class ResourceCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Frame:
    size: int
    relation: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("a frame needs at least one world")
        object.__setattr__(self, "relation", frozenset((int(a), int(b)) for a, b in self.relation))
        for a, b in self.relation:
            if not (0 <= a < self.size and 0 <= b < self.size):
                raise ValueError(f"pair ({a},{b}) outside worlds 0..{self.size - 1}")

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "Frame":
        pairs = [(i // n, i % n) for i in range(n * n) if mask >> i & 1]
        return cls(n, frozenset(pairs))

    @property
    def mask(self) -> int:
        return sum(1 << (a * self.size + b) for a, b in self.relation)

    @property
    def succ_masks(self) -> Tuple[int, ...]:
        succ = [0] * self.size
        for a, b in self.relation:
            succ[a] |= 1 << b
        return tuple(succ)

    def successors(self, w: int) -> List[int]:
        return sorted(b for a, b in self.relation if a == w)

    def is_reflexive(self) -> bool:
        return all((w, w) in self.relation for w in range(self.size))

    def is_symmetric(self) -> bool:
        return all((b, a) in self.relation for a, b in self.relation)

    def is_transitive(self) -> bool:
        return all((a, c) in self.relation for a, b in self.relation for b2, c in self.relation if b == b2)

    def is_serial(self) -> bool:
        return all(any(a == w for a, _ in self.relation) for w in range(self.size))

    def in_class(self, cls: str) -> bool:
        if cls == "all":
            return True
        if cls == "reflexive":
            return self.is_reflexive()
        if cls == "transitive":
            return self.is_transitive()
        if cls == "refl_trans":
            return self.is_reflexive() and self.is_transitive()
        if cls == "equivalence":
            return self.is_reflexive() and self.is_transitive() and self.is_symmetric()
        if cls == "symmetric":
            return self.is_symmetric()
        if cls == "serial":
            return self.is_serial()
        raise ValueError(f"unknown frame class {cls!r}")

    def to_json(self) -> dict:
        return {"worlds": self.size, "relation": [list(p) for p in sorted(self.relation)]}

    def __str__(self) -> str:
        pairs = ",".join(f"{a}->{b}" for a, b in sorted(self.relation))
        return f"n={self.size} R={{{pairs}}}"


@dataclass(frozen=True)
class Model:
    frame: Frame
    valuation: Mapping[str, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        val = {k: frozenset(v) for k, v in self.valuation.items()}
        for k, ws in val.items():
            if any(not 0 <= w < self.frame.size for w in ws):
                raise ValueError(f"valuation of {k} mentions a world outside the frame")
        object.__setattr__(self, "valuation", val)

    def true_at(self, var: str, w: int) -> bool:
        return w in self.valuation.get(var, frozenset())

    def to_json(self) -> dict:
        out = self.frame.to_json()
        out["valuation"] = {k: sorted(v) for k, v in sorted(self.valuation.items())}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: Mapping) -> "Model":
        frame = Frame(int(data["worlds"]), frozenset(tuple(p) for p in data["relation"]))
        return cls(frame, {k: frozenset(v) for k, v in data.get("valuation", {}).items()})


# ---------------------------------------------------------------------------
# evaluation

def eval_model(m: Model, w: int, f: Formula) -> bool:
    """Truth of ``f`` at world ``w``; variables missing from the valuation are false."""
    if not 0 <= w < m.frame.size:
        raise ValueError(f"world {w} outside the frame")
    return _eval(m, m.frame.succ_masks, w, f)


def _eval(m: Model, succ: Tuple[int, ...], w: int, f: Formula) -> bool:
    if isinstance(f, Var):
        return m.true_at(f.name, w)
    if isinstance(f, Neg):
        return not _eval(m, succ, w, f.body)
    if isinstance(f, Impl):
        return (not _eval(m, succ, w, f.left)) or _eval(m, succ, w, f.right)
    if isinstance(f, Box):
        return all(_eval(m, succ, v, f.body) for v in range(m.frame.size) if succ[w] >> v & 1)
    raise TypeError(f"cannot evaluate {f!r} in a Kripke model")


class _MaskEvaluator:
    """Truth sets as world bitmasks, computed bottom-up over a closure."""

    def __init__(self, f: Formula):
        self.closure = closure_of([f])
        self.vars = variables(f)
        index = {g: i for i, g in enumerate(self.closure)}
        ops = []
        for g in self.closure:
            if isinstance(g, Var):
                ops.append(("v", self.vars.index(g.name), 0))
            elif isinstance(g, Neg):
                ops.append(("n", index[g.body], 0))
            elif isinstance(g, Impl):
                ops.append(("i", index[g.left], index[g.right]))
            elif isinstance(g, Box):
                ops.append(("b", index[g.body], 0))
            else:
                raise TypeError(f"cannot evaluate {g!r} in a Kripke model")
        self.ops = ops

    def truth_set(self, n: int, succ: Sequence[int], assignment: Sequence[int]) -> int:
        full = (1 << n) - 1
        vals: List[int] = []
        for op, a, b in self.ops:
            if op == "v":
                vals.append(assignment[a])
            elif op == "n":
                vals.append(full & ~vals[a])
            elif op == "i":
                vals.append(full & (~vals[a] | vals[b]))
            else:
                s = vals[a]
                vals.append(sum(1 << w for w in range(n) if succ[w] & ~s == 0))
        return vals[-1]

    def valid_on(self, n: int, succ: Sequence[int]) -> bool:
        full = (1 << n) - 1
        for assignment in itertools.product(range(1 << n), repeat=len(self.vars)):
            if self.truth_set(n, succ, assignment) != full:
                return False
        return True

    def falsifying_model(self, frame: Frame) -> Optional[Tuple[Model, int]]:
        n, succ = frame.size, frame.succ_masks
        full = (1 << n) - 1
        for assignment in itertools.product(range(1 << n), repeat=len(self.vars)):
            t = self.truth_set(n, succ, assignment)
            if t != full:
                w = next(i for i in range(n) if not t >> i & 1)
                val = {v: frozenset(i for i in range(n) if a >> i & 1) for v, a in zip(self.vars, assignment)}
                return Model(frame, val), w
        return None


def frame_valid(fr: Frame, f: Formula) -> bool:
    """True iff ``f`` holds at every world under every valuation of its variables."""
    return _MaskEvaluator(_as_formula(f)).valid_on(fr.size, fr.succ_masks)


def falsify_on_frame(fr: Frame, f: Formula) -> Optional[Tuple[Model, int]]:
    """First (valuation-order) model on ``fr`` refuting ``f``, with the world."""
    return _MaskEvaluator(_as_formula(f)).falsifying_model(fr)


def _as_formula(f: Formula) -> Formula:
    return fresh_instance(f) if metavariables(f) else f


def eval_condition(fr: Frame, c: Condition) -> bool:
    return compile_condition(c)(fr.size, fr.succ_masks)


# ---------------------------------------------------------------------------
# frame enumeration

def _set_partitions(items: List[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _masks(n: int, cls: str) -> List[int]:
    if cls == "equivalence":
        out = []
        for part in _set_partitions(list(range(n))):
            out.append(sum(1 << (a * n + b) for block in part for a in block for b in block))
        return sorted(out)
    if cls == "reflexive" or cls == "refl_trans":
        diag = sum(1 << (i * n + i) for i in range(n))
        off = [i * n + j for i in range(n) for j in range(n) if i != j]
        masks = []
        for bits in range(1 << len(off)):
            masks.append(diag | sum(1 << off[k] for k in range(len(off)) if bits >> k & 1))
        masks.sort()
        if cls == "refl_trans":
            masks = [m for m in masks if Frame.from_mask(n, m).is_transitive()]
        return masks
    return [m for m in range(1 << (n * n)) if cls == "all" or Frame.from_mask(n, m).in_class(cls)]


def enumerate_frames(n: int, cls: str = "all") -> Iterator[Frame]:
    """All frames of ``cls`` on ``n`` worlds in ascending relation-bitmask order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if cls not in FRAME_CLASSES:
        raise ValueError(f"unknown frame class {cls!r}; expected one of {', '.join(FRAME_CLASSES)}")
    for m in _masks(n, cls):
        yield Frame.from_mask(n, m)


def count_frames(n: int, cls: str = "all") -> int:
    if cls == "all":
        return 1 << (n * n)
    return len(_masks(n, cls))


# ---------------------------------------------------------------------------
# correspondence

@dataclass(frozen=True)
class Mismatch:
    frame: Frame
    axiom_valid: bool
    condition_holds: bool

    def to_json(self) -> dict:
        return {"frame": self.frame.to_json(), "axiom_valid": self.axiom_valid, "condition_holds": self.condition_holds}


@dataclass(frozen=True)
class CorrespondenceReport:
    axiom_name: str
    axiom_text: str
    condition_text: str
    frame_class: str
    max_size: int
    frames_scanned: int
    mismatches: Tuple[Mismatch, ...]

    @property
    def agrees(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom_name,
            "axiom_text": self.axiom_text,
            "condition": self.condition_text,
            "class": self.frame_class,
            "max_n": self.max_size,
            "frames": self.frames_scanned,
            "mismatch_count": len(self.mismatches),
            "mismatches": [m.to_json() for m in self.mismatches],
        }

    def summary(self, show: int = 3) -> str:
        head = (f"{self.axiom_name}: {len(self.mismatches)} mismatches over {self.frames_scanned} "
                f"{self.frame_class} frames (n<={self.max_size})")
        lines = [head]
        for mm in self.mismatches[:show]:
            lines.append(f"  {mm.frame}  axiom_valid={mm.axiom_valid} condition={mm.condition_holds}")
        if len(self.mismatches) > show:
            lines.append(f"  ... {len(self.mismatches) - show} more")
        return "\n".join(lines)


def _scan_chunk(args) -> Tuple[int, List[Tuple[int, int, bool, bool]]]:
    axiom_text, cond_text, n, masks = args
    ev = _MaskEvaluator(_as_formula(parse_schema(axiom_text)))
    cond = compile_condition(parse_condition(cond_text))
    found = []
    for m in masks:
        succ = Frame.from_mask(n, m).succ_masks
        a = ev.valid_on(n, succ)
        c = cond(n, succ)
        if a != c:
            found.append((n, m, a, c))
    return len(masks), found


def correspondence_scan(
    axiom: Formula | str,
    condition: Condition | str,
    max_n: int = 3,
    cls: str = "all",
    budget: int = DEFAULT_FRAME_BUDGET,
    name: str = "",
    jobs: int = 1,
    chunk: int = 4096,
) -> CorrespondenceReport:
    """Compare frame validity of ``axiom`` with ``condition`` on every frame up to ``max_n`` worlds.

    Schemas are checked through one instance on distinct fresh letters.  The
    budget caps the number of frames; the cap is checked before any work.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    ax = parse_schema(axiom) if isinstance(axiom, str) else axiom
    cond = parse_condition(condition) if isinstance(condition, str) else condition
    ax_text, cond_text = to_text(ax), condition_text(cond)
    counts = [count_frames(n, cls) for n in range(1, max_n + 1)]
    if sum(counts) > budget:
        raise ResourceCapExceeded(f"scan needs {sum(counts)} frames, budget is {budget}")

    tasks = []
    for n in range(1, max_n + 1):
        masks = _masks(n, cls)
        for i in range(0, len(masks), chunk):
            tasks.append((ax_text, cond_text, n, masks[i:i + chunk]))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_chunk, tasks))
    else:
        results = [_scan_chunk(t) for t in tasks]

    scanned = sum(r[0] for r in results)
    mismatches = tuple(Mismatch(Frame.from_mask(n, m), a, c) for _, found in results for n, m, a, c in found)
    return CorrespondenceReport(name or ax_text, ax_text, cond_text, cls, max_n, scanned, mismatches)


def candidate_search(
    axiom: Formula | str,
    candidates: Iterable[str],
    max_n: int = 3,
    cls: str = "all",
) -> List[Tuple[str, int]]:
    """Mismatch count of each candidate condition, best first (stable on ties)."""
    scored = []
    for text in candidates:
        rep = correspondence_scan(axiom, text, max_n=max_n, cls=cls)
        scored.append((text, len(rep.mismatches)))
    return sorted(scored, key=lambda p: p[1])


STANDARD_CANDIDATES = (
    "forall x. R(x,x)",
    "forall x y. R(x,y) -> x = y",
    "forall x y. R(x,y) -> R(y,x)",
    "forall x y z. R(x,y) & R(y,z) -> R(x,z)",
    "forall x y z. R(x,y) & R(x,z) -> R(y,z)",
    "forall x. exists y. R(x,y)",
    "forall x y. ~R(x,y)",
    "forall x. ~R(x,x)",
    "forall x y z. R(x,y) & R(x,z) -> y = z",
    "forall x y. R(x,y) -> R(x,x)",
    "forall x y. R(x,y) -> R(y,y)",
    "forall x y. R(x,y) -> exists z. (R(x,z) & R(y,z))",
)


# ---------------------------------------------------------------------------
# shipped condition table

@dataclass(frozen=True)
class ConditionRow:
    name: str
    axiom_text: str
    condition_text: str
    source: str

    @property
    def axiom(self) -> Formula:
        return parse_schema(self.axiom_text)

    @property
    def condition(self) -> Condition:
        return parse_condition(self.condition_text)


def _data_bytes(name: str) -> bytes:
    from importlib import resources
    return resources.files("nmlab").joinpath("data").joinpath(name).read_bytes()


def load_conditions(text: Optional[str] = None) -> List[ConditionRow]:
    """Rows of the shipped conditions file, or of ``text`` if given."""
    if text is None:
        text = _data_bytes("conditions.tsv").decode("utf-8")
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"conditions line {lineno}: expected 4 tab-separated fields, got {len(parts)}")
        row = ConditionRow(*(p.strip() for p in parts))
        row.axiom, row.condition  # validate eagerly
        rows.append(row)
    return rows


def conditions_digest() -> str:
    import hashlib
    return hashlib.sha256(_data_bytes("conditions.tsv")).hexdigest()[:16]
