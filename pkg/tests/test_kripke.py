import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmlab.conditions import (
    And, ConditionSyntaxError, Eq, Exists, Forall, Implies, Not, Or, Rel, condition_text, eval_condition,
    free_variables, parse_condition,
)
from nmlab.formula import Box, Impl, Neg, Var, parse, parse_schema, variables
from nmlab.kripke import (
    FRAME_CLASSES, Frame, Model, ResourceCapExceeded, conditions_digest, correspondence_scan, count_frames,
    enumerate_frames, eval_model, falsify_on_frame, frame_valid, load_conditions,
)

from strategies import formulas


def naive(frame_pairs, val, w, f):
    """Second evaluator: successor sets rebuilt from the pair list each time."""
    if isinstance(f, Var):
        return w in val.get(f.name, ())
    if isinstance(f, Neg):
        return not naive(frame_pairs, val, w, f.body)
    if isinstance(f, Impl):
        return (not naive(frame_pairs, val, w, f.left)) or naive(frame_pairs, val, w, f.right)
    return all(naive(frame_pairs, val, v, f.body) for (u, v) in frame_pairs if u == w)


def naive_valid(fr, f):
    letters = variables(f)
    worlds = range(fr.size)
    pairs = sorted(fr.relation)
    for bits in itertools.product([False, True], repeat=fr.size * len(letters)):
        val = {x: {w for w in worlds if bits[i * fr.size + w]} for i, x in enumerate(letters)}
        if not all(naive(pairs, val, w, f) for w in worlds):
            return False
    return True


def naive_condition(fr, c, env=None):
    env = env or {}
    if isinstance(c, Rel):
        return (env[c.left], env[c.right]) in fr.relation
    if isinstance(c, Eq):
        return env[c.left] == env[c.right]
    if isinstance(c, Not):
        return not naive_condition(fr, c.body, env)
    if isinstance(c, And):
        return naive_condition(fr, c.left, env) and naive_condition(fr, c.right, env)
    if isinstance(c, Or):
        return naive_condition(fr, c.left, env) or naive_condition(fr, c.right, env)
    if isinstance(c, Implies):
        return (not naive_condition(fr, c.left, env)) or naive_condition(fr, c.right, env)
    test = all if isinstance(c, Forall) else any
    return test(naive_condition(fr, c.body, {**env, c.var: w}) for w in range(fr.size))


def frames_strategy(max_n=3):
    return st.integers(1, max_n).flatmap(
        lambda n: st.integers(0, (1 << (n * n)) - 1).map(lambda m: Frame.from_mask(n, m)))


# -- models ---------------------------------------------------------------

def test_eval_examples():
    lonely = Model(Frame(1, frozenset()), {})
    assert eval_model(lonely, 0, parse("[]p"))
    assert not eval_model(lonely, 0, parse("[]p -> p"))
    loop = Frame(1, frozenset({(0, 0)}))
    for val in ({}, {"p": {0}}):
        assert eval_model(Model(loop, val), 0, parse("[]p -> p"))


def test_eval_rejects_world_out_of_range():
    with pytest.raises(ValueError):
        eval_model(Model(Frame(1, frozenset()), {}), 1, parse("p"))


def test_frame_and_model_validation():
    with pytest.raises(ValueError):
        Frame(2, frozenset({(0, 2)}))
    with pytest.raises(ValueError):
        Frame(0, frozenset())
    with pytest.raises(ValueError):
        Model(Frame(1, frozenset()), {"p": {3}})


def test_model_json_round_trip():
    m = Model(Frame(2, frozenset({(0, 1), (1, 1)})), {"p": {1}, "q": set()})
    assert Model.from_json(m.to_json()) == m
    assert m.dumps() == '{"relation": [[0, 1], [1, 1]], "valuation": {"p": [1], "q": []}, "worlds": 2}'


@given(frames_strategy(), formulas(letters=("p", "q"), max_leaves=6), st.data())
@settings(max_examples=200)
def test_eval_model_agrees_with_naive(fr, f, data):
    val = {x: frozenset(data.draw(st.sets(st.integers(0, fr.size - 1)))) for x in ("p", "q")}
    m = Model(fr, val)
    pairs = sorted(fr.relation)
    for w in range(fr.size):
        assert eval_model(m, w, f) == naive(pairs, val, w, f)


# -- frame validity ---------------------------------------------------------

def test_frame_valid_examples():
    chain = Frame(2, frozenset({(0, 0), (1, 1), (0, 1)}))
    assert frame_valid(chain, parse("[]p -> p"))
    assert not frame_valid(Frame(3, frozenset({(0, 1), (1, 2)})), parse("[]p -> [][]p"))
    for fr in enumerate_frames(2):
        assert frame_valid(fr, parse("p -> p"))


def test_frame_valid_on_schema_uses_fresh_instance():
    fr = Frame(2, frozenset({(0, 1)}))
    assert frame_valid(fr, parse_schema("[]A -> [][]A")) == frame_valid(fr, parse("[]p -> [][]p"))


@given(frames_strategy(), formulas(letters=("p", "q"), max_leaves=5))
@settings(max_examples=150)
def test_frame_valid_agrees_with_naive(fr, f):
    assert frame_valid(fr, f) == naive_valid(fr, f)


@given(frames_strategy(), formulas(letters=("p", "q"), max_leaves=5))
@settings(max_examples=100)
def test_falsifying_model_really_falsifies(fr, f):
    found = falsify_on_frame(fr, f)
    assert (found is None) == frame_valid(fr, f)
    if found is not None:
        model, w = found
        assert model.frame == fr
        assert not eval_model(model, w, f)


# -- enumeration --------------------------------------------------------------

@pytest.mark.parametrize("n, cls, count", [
    (2, "all", 16), (2, "reflexive", 4), (3, "equivalence", 5), (4, "equivalence", 15),
    (1, "all", 2), (3, "all", 512), (3, "reflexive", 64),
    # transitive relations and preorders on small sets (known integer sequences)
    (2, "transitive", 13), (3, "transitive", 171), (3, "refl_trans", 29), (4, "refl_trans", 355),
    (2, "symmetric", 8), (2, "serial", 9),
])
def test_frame_counts(n, cls, count):
    frames = list(enumerate_frames(n, cls))
    assert len(frames) == count == count_frames(n, cls)
    assert len({f.mask for f in frames}) == count


@pytest.mark.parametrize("cls", FRAME_CLASSES)
def test_enumeration_is_exactly_the_class(cls):
    got = [f.mask for f in enumerate_frames(3, cls)]
    want = [m for m in range(512) if Frame.from_mask(3, m).in_class(cls)]
    assert got == want


def test_enumeration_errors():
    with pytest.raises(ValueError):
        list(enumerate_frames(0))
    with pytest.raises(ValueError):
        list(enumerate_frames(2, "euclidean"))


@given(formulas(letters=("p",), max_leaves=5))
@settings(max_examples=40)
def test_validity_on_all_frames_passes_to_subclasses(f):
    if all(frame_valid(fr, f) for n in (1, 2) for fr in enumerate_frames(n)):
        for cls in FRAME_CLASSES:
            assert all(frame_valid(fr, f) for n in (1, 2) for fr in enumerate_frames(n, cls))


# -- conditions ---------------------------------------------------------------

N3 = "forall x y. R(x,y) -> x = y"
B7 = "forall x y. R(x,y) -> exists z. (R(x,z) & R(y,z))"


def test_parse_condition_examples():
    c = parse_condition(N3)
    assert c == Forall("x", Forall("y", Implies(Rel("x", "y"), Eq("x", "y"))))
    assert parse_condition("R(x,y) -> x = y") == c
    b7 = parse_condition(B7)
    assert b7 == Forall("x", Forall("y", Implies(Rel("x", "y"), Exists("z", And(Rel("x", "z"), Rel("y", "z"))))))


def test_unicode_quantifiers_and_precedence():
    assert parse_condition("∀x. ∃y. R(x,y)") == parse_condition("forall x. exists y. R(x,y)")
    c = parse_condition("R(x,y) & R(y,x) | x = y -> ~R(x,x)")
    assert isinstance(c.body.body, Implies)
    assert isinstance(c.body.body.left, Or)


def test_implicit_closure_order():
    c = parse_condition("R(y,x) -> exists z. R(z,y)")
    assert c.var == "y" and c.body.var == "x"
    assert free_variables(parse_condition("forall x. R(x,x)")) == []


@pytest.mark.parametrize("text", ["R(x,)", "forall . R(x,x)", "R(x,y) &", "x == y", "(R(x,y)", "S(x,y)"])
def test_condition_syntax_errors(text):
    with pytest.raises(ConditionSyntaxError) as info:
        parse_condition(text)
    assert 0 <= info.value.pos <= len(text)


def test_eval_condition_examples():
    c = parse_condition(N3)
    assert eval_condition(Frame(2, frozenset({(0, 0), (1, 1)})), c)
    assert not eval_condition(Frame(2, frozenset({(0, 1)})), c)
    assert eval_condition(Frame(3, frozenset()), parse_condition("forall x y z. R(x,y) & R(y,z) -> R(x,z)"))


def test_shadowed_binders():
    c = parse_condition("forall x. (exists x. R(x,x)) -> R(x,x)")
    fr = Frame(2, frozenset({(1, 1)}))
    assert eval_condition(fr, c) == naive_condition(fr, c) is False


CONDITION_SAMPLES = [N3, B7, "forall x. R(x,x)", "forall x y. R(x,y) -> R(y,x)",
                     "forall x. exists y. R(x,y) & forall z. R(y,z) -> z = y",
                     "forall x y z. R(x,y) & R(x,z) -> y = z | R(y,z)"]


@given(frames_strategy(), st.sampled_from(CONDITION_SAMPLES))
@settings(max_examples=150)
def test_eval_condition_agrees_with_naive(fr, text):
    c = parse_condition(text)
    assert eval_condition(fr, c) == naive_condition(fr, c)


@pytest.mark.parametrize("text", CONDITION_SAMPLES)
def test_condition_text_round_trip(text):
    c = parse_condition(text)
    assert parse_condition(condition_text(c)) == c


# -- correspondence -----------------------------------------------------------

def test_scan_examples():
    assert correspondence_scan("[]A -> A", "forall x. R(x,x)").agrees
    assert correspondence_scan("[]A -> [][]A", "forall x y z. R(x,y) & R(y,z) -> R(x,z)").agrees
    rep = correspondence_scan("[]A -> [][]A", "forall x. R(x,x)")
    assert not rep.agrees
    assert rep.frames_scanned == 2 + 16 + 512
    assert any(m.frame.size == 3 and m.frame.is_reflexive() and not m.frame.is_transitive() for m in rep.mismatches)
    assert all(m.axiom_valid != m.condition_holds for m in rep.mismatches)


def test_scan_mismatches_are_genuine():
    rep = correspondence_scan("[]A -> [][]A", "forall x. R(x,x)", max_n=2)
    cond = parse_condition("forall x. R(x,x)")
    flagged = {m.frame for m in rep.mismatches}
    for n in (1, 2):
        for fr in enumerate_frames(n):
            differs = naive_valid(fr, parse("[]p -> [][]p")) != naive_condition(fr, cond)
            assert differs == (fr in flagged)


def test_scan_within_class():
    rep = correspondence_scan("[]A -> [][]A", "forall x y z. R(x,y) & R(y,z) -> R(x,z)", max_n=3, cls="reflexive")
    assert rep.agrees and rep.frames_scanned == 1 + 4 + 64


def test_budget():
    with pytest.raises(ResourceCapExceeded):
        correspondence_scan("[]A -> A", "forall x. R(x,x)", max_n=4, budget=1000)
    with pytest.raises(ValueError):
        correspondence_scan("[]A -> A", "forall x. R(x,x)", max_n=0)


def test_parallel_scan_matches_serial():
    args = ("[]A -> [][]A", "forall x. R(x,x)")
    serial = correspondence_scan(*args, max_n=3, chunk=64)
    parallel = correspondence_scan(*args, max_n=3, chunk=64, jobs=3)
    assert serial.to_json() == parallel.to_json()


def test_shipped_conditions_file():
    rows = load_conditions()
    names = [r.name for r in rows]
    assert len(names) == len(set(names))
    for must in ("T", "4", "B", "N3", "B1", "B7", "I_{P,t}^{P}"):
        assert must in names
    for r in rows:
        assert free_variables(r.condition) == []
    assert len(conditions_digest()) == 16


def test_conditions_loader_rejects_bad_rows():
    with pytest.raises(ValueError):
        load_conditions("X\t[]A -> A\n")
    with pytest.raises(ValueError):
        load_conditions("X\t[]A -> \tforall x. R(x,x)\tsrc\n")
