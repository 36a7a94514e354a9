import itertools
import json

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from nmlab.formula import Box, Impl, Meta, Neg, Var, closure_of, fresh_instance, instantiate, parse, variables
from nmlab.hilbert import builtin_system
from nmlab.nmatrix import (
    BUILTIN_NAMES, CellRestriction, ClosureTooLarge, EmptyCell, Nmatrix, NmatrixError, builtin_matrix,
    check_consequence, check_consequence_by_enumeration, check_tautology, compose, enumerate_valuations,
    load_matrix, refines, respects_tables,
)
from nmlab.strengthenings import TBAT_AXIOMS, strengthening

from strategies import formulas, with_repeats

W, WS, TBAT, TBAT0 = (builtin_matrix(n) for n in ("W", "W_SIMPLIFIED", "TBAT", "TBAT_ORIGINAL"))


def brute_force(premises, conclusion, m):
    """Independent oracle: scan the full value product in lexicographic order."""
    c = closure_of(list(premises) + [conclusion])
    for combo in itertools.product(m.values, repeat=len(c)):
        val = dict(zip(c, combo))
        ok = True
        for g in c:
            if isinstance(g, Neg):
                ok = val[g] in m.neg[val[g.body]]
            elif isinstance(g, Box):
                ok = val[g] in m.box[val[g.body]]
            elif isinstance(g, Impl):
                ok = val[g] in m.impl[val[g.left], val[g.right]]
            if not ok:
                break
        if not ok:
            continue
        if all(val[x] in m.designated for x in premises) and val[conclusion] not in m.designated:
            return combo
    return None


# -- built-ins --------------------------------------------------------------

def test_builtin_examples():
    assert TBAT.neg["P"] == {"R"}
    assert TBAT.impl["t", "t"] == {"P", "t"}
    assert W.box["P"] == {"P", "t"} and W.box["t"] == {"f", "R"}
    assert WS.neg["R"] == {"P"}
    for m in (W, WS, TBAT, TBAT0):
        assert m.designated == {"P", "t"}
        assert m.values == ("P", "t", "f", "R")


def test_original_differs_in_one_cell():
    diff = [(c, a) for c, a, cell in TBAT.cells() if TBAT0.cell(c, *a) != cell]
    assert diff == [("impl", ("f", "R"))]
    assert TBAT0.impl["f", "R"] == {"P", "t"} and TBAT.impl["f", "R"] == {"t"}


def test_unknown_builtin():
    with pytest.raises(NmatrixError):
        builtin_matrix("S4")


def test_names_are_case_insensitive():
    assert builtin_matrix("tbat").same_tables(TBAT)
    assert set(BUILTIN_NAMES) == {"TBAT", "TBAT_ORIGINAL", "W", "W_SIMPLIFIED"}


# -- compose / refines ------------------------------------------------------

def test_compose_single_row():
    m = compose(WS, [strengthening("N1").restriction])
    assert m.neg["P"] == {"R"}
    assert all(m.cell(c, *a) == WS.cell(c, *a) for c, a, _ in WS.cells() if (c, a) != ("neg", ("P",)))


def test_compose_tbat_rows_gives_tbat():
    m = compose(WS, [strengthening(n).restriction for n in TBAT_AXIOMS])
    assert len(TBAT_AXIOMS) == 17
    assert m.same_tables(TBAT)


def test_compose_conflict():
    with pytest.raises(EmptyCell) as info:
        compose(W, [CellRestriction("neg", ("P",), frozenset("R")), CellRestriction("neg", ("P",), frozenset("f"))])
    assert (info.value.connective, info.value.inputs) == ("neg", ("P",))


def test_restriction_validation():
    with pytest.raises(NmatrixError):
        CellRestriction("impl", ("P",), frozenset("P"))
    with pytest.raises(NmatrixError):
        CellRestriction("neg", ("P",), frozenset())
    with pytest.raises(NmatrixError):
        compose(W, [CellRestriction("neg", ("X",), frozenset("P"))])


def test_refines_examples():
    assert refines(TBAT, WS)
    assert refines(W, W)
    assert not refines(W, TBAT)
    assert refines(TBAT, TBAT0)
    assert refines(WS, W)


def test_refines_needs_same_carrier():
    other = Nmatrix(("1", "0"), frozenset("1"), {"1": frozenset("0"), "0": frozenset("1")},
                    {"1": frozenset("1"), "0": frozenset("0")},
                    {(a, b): frozenset("0" if (a, b) == ("1", "0") else "1") for a in "10" for b in "10"})
    with pytest.raises(NmatrixError):
        refines(other, W)


# -- enumeration ------------------------------------------------------------

@pytest.mark.parametrize("texts, m, count", [
    (["p"], W, 4), (["p"], TBAT, 4), (["~p"], TBAT, 4), (["[]p"], W, 8),
])
def test_enumeration_counts(texts, m, count):
    assert sum(1 for _ in enumerate_valuations(closure_of(parse(t) for t in texts), m)) == count


def test_enumeration_order_is_value_order():
    vals = [v.values for v in enumerate_valuations(closure_of([parse("[]p")]), W)]
    assert vals == [("P", "P"), ("P", "t"), ("t", "f"), ("t", "R"), ("f", "f"), ("f", "R"), ("R", "f"), ("R", "R")]


@given(formulas(max_leaves=4), st.sampled_from([W, WS, TBAT]))
@settings(max_examples=60)
def test_enumeration_matches_product_scan(f, m):
    c = closure_of([f])
    assume(len(c) <= 6)
    got = [v.values for v in enumerate_valuations(c, m)]
    assert all(respects_tables(v, m) for v in enumerate_valuations(c, m))
    assert got == sorted(set(got), key=lambda t: [m.values.index(x) for x in t])


def test_closure_guard():
    f = parse("p")
    for _ in range(30):
        f = Box(f)
    with pytest.raises(ClosureTooLarge):
        check_tautology(f, W)
    assert check_tautology(f, W, max_closure=None).valid is False


# -- consequence ------------------------------------------------------------

def test_consequence_examples():
    assert check_tautology(parse("[]p -> p"), W).valid
    assert check_consequence([parse("p"), parse("p -> q")], parse("q"), TBAT).valid
    v = check_tautology(parse("[](p -> p)"), TBAT)
    assert not v.valid
    assert v.witness.as_dict() == {"p": "t", "p -> p": "t", "[](p -> p)": "f"}
    n1 = parse("[]p -> []~~p")
    assert not check_tautology(n1, W).valid
    assert check_tautology(n1, compose(WS, [strengthening("N1").restriction])).valid


@pytest.mark.parametrize("text", ["p -> p", "p <-> ~~p", "[]p \\/ ~[]p"])
def test_w_tautologies(text):
    assert check_tautology(parse(text), W).valid


def test_hyperintensionality_witness():
    v = check_tautology(parse("[]p -> []~~p"), W)
    assert not v.valid
    # [DERIVED] first counter-valuation of the product-scan oracle, frozen
    assert v.witness.render() == "v(p)=P, v([]p)=P, v(~p)=f, v(~~p)=t, v([]~~p)=f, v([]p -> []~~p)=f"
    assert v.witness.values == brute_force([], parse("[]p -> []~~p"), W)
    assert respects_tables(v.witness, W)


def test_premise_that_is_conclusion():
    assert check_consequence([parse("[]q")], parse("[]q"), TBAT).valid


@given(formulas(max_leaves=5), st.lists(formulas(max_leaves=3), max_size=2), st.sampled_from([W, WS, TBAT, TBAT0]))
@settings(max_examples=150, suppress_health_check=[HealthCheck.filter_too_much])
def test_solver_agrees_with_brute_force(f, prem, m):
    assume(len(closure_of(prem + [f])) <= 7)
    fast = check_consequence(prem, f, m)
    slow = check_consequence_by_enumeration(prem, f, m)
    oracle = brute_force(prem, f, m)
    assert fast.valid == slow.valid == (oracle is None)
    if oracle is not None:
        assert fast.witness.values == slow.witness.values == oracle
        assert respects_tables(fast.witness, m)
        assert all(fast.witness[x] in m.designated for x in prem)
        assert fast.witness[f] not in m.designated


@given(with_repeats(), st.sampled_from([W, WS, TBAT]))
@settings(max_examples=120, suppress_health_check=[HealthCheck.filter_too_much])
def test_shared_subformulas_get_one_value(f, m):
    assume(len(closure_of([f])) <= 7)
    fast = check_tautology(f, m)
    oracle = brute_force([], f, m)
    assert fast.valid == (oracle is None)
    if oracle is not None:
        assert fast.witness.values == oracle
        assert respects_tables(fast.witness, m)


def test_regression_shared_operands_in_implication():
    # once reported invalid with a witness giving p -> p two different readings
    prem = [parse("[]~(p -> p)"), parse("[]~~r")]
    assert check_consequence(prem, parse("~r"), TBAT).valid
    assert brute_force(prem, parse("~r"), TBAT) is None


# -- structural properties --------------------------------------------------

PAIRS = [(W, WS), (WS, TBAT), (W, TBAT), (TBAT0, TBAT)]


@given(formulas(max_leaves=5), st.lists(formulas(max_leaves=3), max_size=2), st.sampled_from(PAIRS))
@settings(max_examples=120)
def test_refinement_only_adds_validities(f, prem, pair):
    coarse, fine = pair
    assert refines(fine, coarse)
    if check_consequence(prem, f, coarse).valid:
        assert check_consequence(prem, f, fine).valid


@given(st.lists(formulas(max_leaves=4), min_size=1, max_size=3), st.data(), st.sampled_from([W, TBAT]))
@settings(max_examples=80)
def test_tarskian_laws(gamma, data, m):
    f = data.draw(st.sampled_from(gamma))
    assert check_consequence(gamma, f, m).valid
    g, extra = data.draw(formulas(max_leaves=4)), data.draw(formulas(max_leaves=3))
    if check_consequence(gamma, g, m).valid:
        assert check_consequence(gamma + [extra], g, m).valid
    # cut: gamma |= g and gamma, g |= h give gamma |= h
    h = data.draw(formulas(max_leaves=4))
    if check_consequence(gamma, g, m).valid and check_consequence(gamma + [g], h, m).valid:
        assert check_consequence(gamma, h, m).valid


VALID_SCHEMAS = {
    "W": [s for _, s in builtin_system("W").schemas],
    "TBAT": [s for _, s in builtin_system("TBAT").schemas],
}


@given(st.sampled_from(["W", "TBAT"]), st.data())
@settings(max_examples=100)
def test_substitution_preserves_validity(name, data):
    m = builtin_matrix(name)
    schema = data.draw(st.sampled_from(VALID_SCHEMAS[name]))
    base = fresh_instance(schema)
    assert check_tautology(base, m).valid
    letters = variables(base)
    sub = {x: data.draw(formulas(max_leaves=3)) for x in letters}
    inst = instantiate(_lift(base), {x.upper(): g for x, g in sub.items()})
    assume(len(closure_of([inst])) <= 24)
    assert check_tautology(inst, m).valid


def _lift(g):
    if isinstance(g, Var):
        return Meta(g.name.upper())
    if isinstance(g, Neg):
        return Neg(_lift(g.body))
    if isinstance(g, Box):
        return Box(_lift(g.body))
    return Impl(_lift(g.left), _lift(g.right))


# -- strengthenings ---------------------------------------------------------

@pytest.mark.parametrize("name, conn, inputs, allowed, axiom", [
    ("N1", "neg", ("P",), {"R"}, "[]A -> []~~A"),
    ("B7", "box", ("R",), {"R"}, "[]~A -> []~[]A"),
    ("I_{P,R}^{R}", "impl", ("P", "R"), {"R"}, "[]A /\\ []~B -> []~(A -> B)"),
])
def test_strengthening_examples(name, conn, inputs, allowed, axiom):
    from nmlab.formula import parse_schema

    s = strengthening(name)
    assert (s.restriction.connective, s.restriction.inputs, s.restriction.allowed) == (conn, inputs, allowed)
    assert s.axiom == parse_schema(axiom)


def test_strengthening_unknown():
    with pytest.raises(KeyError):
        strengthening("N9")


# -- file format ------------------------------------------------------------

@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_json_round_trip(name, tmp_path):
    m = builtin_matrix(name)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(m.to_json()))
    back = load_matrix(path)
    assert back.same_tables(m)
    assert back.name == "m"


@pytest.mark.parametrize("mutate", [
    lambda d: d["neg"].update(P=[]),
    lambda d: d.update(designated=[]),
    lambda d: d["impl"].pop("P,P"),
    lambda d: d["box"].update(P=["X"]),
    lambda d: d.update(extra=1),
    lambda d: d.pop("neg"),
])
def test_loader_rejects_bad_files(mutate, tmp_path):
    d = W.to_json()
    mutate(d)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    with pytest.raises(NmatrixError):
        load_matrix(path)
