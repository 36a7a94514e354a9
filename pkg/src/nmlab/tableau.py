"""Prefixed tableaux deciding validity in K, T, S4 and S5.

A node is a signed formula at a prefix.  Prefixes are tuples naming worlds
of a tree rooted at ``(1,)``; in S5 every prefix sits directly under a single
universal cluster, so prefixes are just ``(k,)``.

Rule order on a branch: non-branching rules (alpha and nu) first, then
branching (beta), then world-creating (pi).  Within a class the oldest
pending node goes first, which makes traces reproducible.

S4 uses the 4-rule (``T []A`` at a prefix is copied to its children) and
blocks pi-expansion at a prefix whose signed formulas are included in a
proper ancestor's; the counter-model sends the blocked prefix to that
ancestor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

from .formula import Box, Formula, Impl, Neg, Var, fresh_instance, metavariables, to_text
from .kripke import Frame, Model, eval_model

LOGICS = ("K", "T", "S4", "S5")
DEFAULT_MAX_STEPS = 10_000

Prefix = Tuple[int, ...]


class DepthExceeded(RuntimeError):
    """Raised when the rule-application guard is hit; never a verdict."""


@dataclass(frozen=True)
class TraceStep:
    index: int
    prefix: Prefix
    signed: str
    rule: str
    parent: Optional[int]

    def __str__(self) -> str:
        p = ".".join(map(str, self.prefix))
        par = "-" if self.parent is None else str(self.parent)
        return f"{self.index:>4}  {p:<8} {self.signed:<40} {self.rule:<6} from {par}"


@dataclass(frozen=True)
class Theorem:
    logic: str
    trace: Tuple[TraceStep, ...]

    def __bool__(self) -> bool:
        return True

    def render(self) -> str:
        return "\n".join(str(s) for s in self.trace)


@dataclass(frozen=True)
class NonTheorem:
    logic: str
    model: Model
    world: int

    def __bool__(self) -> bool:
        return False


TableauResult = Union[Theorem, NonTheorem]


def _sign(s: bool, f: Formula) -> str:
    return ("T " if s else "F ") + to_text(f)


@dataclass
class _Branch:
    nodes: List[Tuple[Prefix, bool, Formula, int]] = field(default_factory=list)
    present: Set[Tuple[Prefix, bool, Formula]] = field(default_factory=set)
    prefixes: List[Prefix] = field(default_factory=list)
    used: Set[int] = field(default_factory=set)
    nu_done: Set[Tuple[int, Prefix]] = field(default_factory=set)
    blocked: Dict[Prefix, Prefix] = field(default_factory=dict)
    closed: bool = False

    def copy(self) -> "_Branch":
        return _Branch(list(self.nodes), set(self.present), list(self.prefixes), set(self.used),
                       set(self.nu_done), dict(self.blocked), self.closed)

    def labels(self, p: Prefix) -> FrozenSet[Tuple[bool, Formula]]:
        return frozenset((s, f) for q, s, f, _ in self.nodes if q == p)


class _Prover:
    def __init__(self, logic: str, max_steps: int):
        if logic not in LOGICS:
            raise ValueError(f"unknown logic {logic!r}; expected one of {', '.join(LOGICS)}")
        self.logic = logic
        self.max_steps = max_steps
        self.steps = 0
        self.trace: List[TraceStep] = []

    def _tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise DepthExceeded(f"more than {self.max_steps} rule applications")

    def add(self, b: _Branch, p: Prefix, s: bool, f: Formula, rule: str, parent: Optional[int]) -> None:
        if b.closed or (p, s, f) in b.present:
            return
        idx = len(self.trace) + 1
        self.trace.append(TraceStep(idx, p, _sign(s, f), rule, parent))
        b.nodes.append((p, s, f, idx))
        b.present.add((p, s, f))
        if p not in b.prefixes:
            b.prefixes.append(p)
        if (p, not s, f) in b.present:
            b.closed = True
            self.trace.append(TraceStep(idx + 1, p, "closed", "x", idx))

    # accessibility on the tree built so far
    def accessible(self, b: _Branch, p: Prefix) -> List[Prefix]:
        if self.logic == "S5":
            return list(b.prefixes)
        kids = [q for q in b.prefixes if len(q) == len(p) + 1 and q[:-1] == p]
        if self.logic == "K":
            return kids
        return [p] + kids

    def run(self, f: Formula) -> Optional[_Branch]:
        b = _Branch()
        self.add(b, (1,), False, f, "root", None)
        return self.expand(b)

    def expand(self, b: _Branch) -> Optional[_Branch]:
        """Return an open saturated branch, or None if every branch closes."""
        while not b.closed:
            if self.step_linear(b):
                continue
            split = self.pick_beta(b)
            if split is not None:
                i, (p, _, g, idx) = split
                b.used.add(i)
                self._tick()
                left = b.copy()
                self.add(left, p, False, g.left, "beta", idx)
                found = self.expand(left)
                if found is not None:
                    return found
                self.add(b, p, True, g.right, "beta", idx)
                continue
            if self.step_pi(b):
                continue
            return b
        return None

    def step_linear(self, b: _Branch) -> bool:
        for i, (p, s, g, idx) in enumerate(b.nodes):
            if b.closed:
                return True
            if isinstance(g, Neg) and i not in b.used:
                b.used.add(i)
                self._tick()
                self.add(b, p, not s, g.body, "alpha", idx)
                return True
            if isinstance(g, Impl) and not s and i not in b.used:
                b.used.add(i)
                self._tick()
                self.add(b, p, True, g.left, "alpha", idx)
                self.add(b, p, False, g.right, "alpha", idx)
                return True
            if isinstance(g, Box) and s:
                targets = [q for q in self.accessible(b, p) if (i, q) not in b.nu_done]
                if targets:
                    q = targets[0]
                    b.nu_done.add((i, q))
                    self._tick()
                    self.add(b, q, True, g.body, "nu", idx)
                    if self.logic == "S4" and q != p:
                        self.add(b, q, True, g, "nu4", idx)
                    return True
        return False

    def pick_beta(self, b: _Branch):
        for i, node in enumerate(b.nodes):
            p, s, g, _ = node
            if isinstance(g, Impl) and s and i not in b.used:
                if (p, False, g.left) in b.present or (p, True, g.right) in b.present:
                    b.used.add(i)
                    continue
                return i, node
        return None

    def step_pi(self, b: _Branch) -> bool:
        for i, (p, s, g, idx) in enumerate(b.nodes):
            if not (isinstance(g, Box) and not s) or i in b.used:
                continue
            if p in b.blocked:
                continue
            if self.logic == "S4":
                blocker = self.find_blocker(b, p)
                if blocker is not None:
                    b.blocked[p] = blocker
                    continue
            b.used.add(i)
            if self.logic == "S5" and any((q, False, g.body) in b.present for q in b.prefixes):
                continue
            self._tick()
            q = self.fresh_prefix(b, p)
            self.add(b, q, False, g.body, "pi", idx)
            return True
        return False

    def find_blocker(self, b: _Branch, p: Prefix) -> Optional[Prefix]:
        mine = b.labels(p)
        for k in range(len(p) - 1, 0, -1):
            anc = p[:k]
            if mine <= b.labels(anc):
                return anc
        return None

    def fresh_prefix(self, b: _Branch, p: Prefix) -> Prefix:
        if self.logic == "S5":
            return (max(q[0] for q in b.prefixes) + 1,)
        n = 1 + sum(1 for q in b.prefixes if len(q) == len(p) + 1 and q[:-1] == p)
        return p + (n,)

    def model_of(self, b: _Branch) -> Tuple[Model, int]:
        worlds = [p for p in b.prefixes if p not in b.blocked]
        num = {p: i for i, p in enumerate(worlds)}
        target = {p: num[b.blocked.get(p, p)] for p in b.prefixes}
        edges: Set[Tuple[int, int]] = set()
        n = len(worlds)
        if self.logic == "S5":
            edges = {(i, j) for i in range(n) for j in range(n)}
        else:
            for q in b.prefixes:
                if len(q) > 1 and q[:-1] in num:
                    edges.add((num[q[:-1]], target[q]))
            if self.logic in ("T", "S4"):
                edges |= {(i, i) for i in range(n)}
            if self.logic == "S4":
                edges = _transitive_closure(edges, n)
        val: Dict[str, Set[int]] = {}
        for p, s, g, _ in b.nodes:
            if isinstance(g, Var):
                val.setdefault(g.name, set())
                if s and p in num:
                    val[g.name].add(num[p])
        return Model(Frame(n, frozenset(edges)), {k: frozenset(v) for k, v in val.items()}), 0


def _transitive_closure(edges: Set[Tuple[int, int]], n: int) -> Set[Tuple[int, int]]:
    reach = [[(i, j) in edges for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return {(i, j) for i in range(n) for j in range(n) if reach[i][j]}


_CLASS = {"K": "all", "T": "reflexive", "S4": "refl_trans", "S5": "equivalence"}


def frame_class(logic: str) -> str:
    return _CLASS[logic]


def decide(f: Formula, logic: str = "K", max_steps: int = DEFAULT_MAX_STEPS) -> TableauResult:
    """Theorem or NonTheorem for ``f`` in ``logic``; schemas are read through a fresh instance."""
    if metavariables(f):
        f = fresh_instance(f)
    prover = _Prover(logic, max_steps)
    open_branch = prover.run(f)
    if open_branch is None:
        return Theorem(logic, tuple(prover.trace))
    model, world = prover.model_of(open_branch)
    if eval_model(model, world, f) or not model.frame.in_class(_CLASS[logic]):
        raise AssertionError(f"extracted counter-model does not refute {to_text(f)} in {logic}")
    return NonTheorem(logic, model, world)


# ---------------------------------------------------------------------------
# remark verification

@dataclass(frozen=True)
class Confirmed:
    logic: str
    detail: str = ""
    model: Optional[Model] = None

    status = "Confirmed"


@dataclass(frozen=True)
class Refuted:
    logic: str
    evidence: str
    model: Optional[Model] = None
    weakest_logic: Optional[str] = None

    status = "Refuted"


@dataclass(frozen=True)
class Unchecked:
    reason: str

    status = "Unchecked"


RemarkVerdict = Union[Confirmed, Refuted, Unchecked]


def weakest_logic(f: Formula, max_steps: int = DEFAULT_MAX_STEPS) -> Optional[str]:
    """First of K, T, S4, S5 proving ``f``; None if none does."""
    for logic in LOGICS:
        if isinstance(decide(f, logic, max_steps), Theorem):
            return logic
    return None


def verify_remark(s, max_steps: int = DEFAULT_MAX_STEPS) -> RemarkVerdict:
    """Check the provability remark of a named strengthening against the tableau."""
    from .strengthenings import Remark

    if s.remark is Remark.NONE:
        raise ValueError(f"{s.name} carries no remark to verify")
    f = s.instance()
    try:
        if s.remark is Remark.NOT_PROVABLE_S5:
            r = decide(f, "S5", max_steps)
            if isinstance(r, NonTheorem):
                if eval_model(r.model, r.world, f) or not r.model.frame.in_class("equivalence"):
                    return Refuted("S5", "counter-model failed re-validation", r.model)
                return Confirmed("S5", f"counter-model at world {r.world}", r.model)
            return Refuted("S5", f"closed S5 tableau ({len(r.trace)} steps)", weakest_logic=weakest_logic(f, max_steps))
        logic = {Remark.PROVABLE_K: "K", Remark.PROVABLE_T: "T", Remark.PROVABLE_S4: "S4"}[s.remark]
        r = decide(f, logic, max_steps)
        if isinstance(r, Theorem):
            return Confirmed(logic, f"closed {logic} tableau ({len(r.trace)} steps)")
        return Refuted(logic, f"{logic} counter-model at world {r.world}", r.model,
                       weakest_logic=weakest_logic(f, max_steps))
    except DepthExceeded as exc:
        return Unchecked(str(exc))
