from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import atoms, stream
from ldsrlars.errors import FragmentViolation, UnsupportedProgramError, ValidationError
from ldsrlars.harness.campaign import SOURCE_FRAGMENT
from ldsrlars.harness.generate import DESK, gen_fragment_instance, stratified
from ldsrlars.harness.profiles import LTuple, Profile, check_expressibility
from ldsrlars.lars import AtomF, Box, LarsProgram, Or, eval_answer_stream_lars, format_formula, parse_formula, parse_lars, satisfiable
from ldsrlars.ldsr import SKind, StreamingAtom, check_stratified, entails_atom, eval_answer_stream, parse_ldsr
from ldsrlars.stream import Stream
from ldsrlars.terms import Atom, Var, is_reserved
from ldsrlars.transpile import (
    STRICT,
    Fresh,
    c_alpha_rules,
    canonical_program,
    count_atom,
    d_p,
    f_translate,
    rho1,
    rho2,
    rho4,
    rho5,
    rho6,
    rho7,
    sigma,
    translate,
)

T = Var("T")

TRAFFIC_LDSR = (
    "inNetwork(Veh) :- onLane(Veh,X,Y).\n"
    "#temp appears(Veh) :- onLane(Veh,X,Y), not inNetwork(Veh) in {1}.\n"
    "#temp disappears(Veh) :- inNetwork(Veh) in {1}, not inNetwork(Veh).\n"
)
TRAIN_LARS = (
    "box( irregular <- wplus[0] at[T] true, (at[T1] train_pass and T1 = T-0),"
    " (at[T2] train_pass and (T2 = T-1 or T2 = T-2)) ).\n"
)


def sa(text: str) -> StreamingAtom:
    return parse_ldsr(f"h :- {text}.", validate=False).rules[0].body[0].atom


def same_program(a, b) -> bool:
    return canonical_program(a) == canonical_program(b)


def every_stream(n: int, pool):
    subsets = [frozenset(c) for k in range(len(pool) + 1) for c in itertools.combinations(pool, k)]
    for slots in itertools.product(subsets, repeat=n + 1):
        yield Stream(slots)


def sigma_agrees(alpha: StreamingAtom, max_n: int = 3) -> bool:
    phi = sigma(alpha, T)
    for n in range(max_n + 1):
        for s in every_stream(n, [alpha.atom]):
            if satisfiable(s, phi, n, env={T: n}) != entails_atom(s, alpha):
                return False
    return True


# -- goldens ------------------------------------------------------------------------


def test_traffic_translation_applies_f_rule_by_rule(traffic_text):
    out = rho2(parse_lars(traffic_text))
    assert same_program(out.program, parse_ldsr(TRAFFIC_LDSR))
    assert out.aux_predicates == frozenset()


def test_printed_traffic_variant_is_bound_equal(traffic_text):
    # reads the previous lane observation instead of the previous inNetwork atom
    printed = parse_ldsr(TRAFFIC_LDSR.replace("inNetwork(Veh) in {1}, not", "onLane(Veh,X,Y) in {1}, not"))
    assert not same_program(printed, parse_ldsr(TRAFFIC_LDSR))
    src = parse_lars(traffic_text)
    for slots in itertools.product(["", "onLane(v,1,2)", "onLane(v,1,2) onLane(w,2,2)"], repeat=3):
        assert _bound_equal(src, printed, stream(*slots))


def test_train_golden(train_text):
    out = rho7(parse_ldsr(train_text))
    assert same_program(out.program, parse_lars(TRAIN_LARS))


# -- LARS_D to LDSR ------------------------------------------------------------------


@pytest.mark.parametrize(
    "formula,literal",
    [
        ("wplus[2] diamond q(X)", "q(X) at least 1 in [2]"),
        ("wplus[1] box q", "q always in [1]"),
        ("not (wplus[0] at[T] true and at[T-1] inNetwork(V))", "not inNetwork(V) in {1}"),
        ("onLane(V,X,Y)", "onLane(V,X,Y)"),
    ],
)
def test_f_translate(formula, literal):
    got = f_translate(parse_formula(formula))
    (want,) = parse_ldsr(f"h :- {literal}.", validate=False).rules[0].body
    assert got == want


def test_f_rejects_other_formulas():
    with pytest.raises(Exception):
        f_translate(parse_formula("diamond q"))


def test_rho1_empty_program():
    assert rho1(parse_lars("")).program.rules == ()


def test_rho1_box_window():
    out = rho1(parse_lars("box(p <- wplus[1] box q)."))
    assert out.program.rules == parse_ldsr("p :- q always in [1].").rules


def test_rho1_refuses_rules_without_a_safe_image():
    with pytest.raises(UnsupportedProgramError, match="rule 0"):
        rho1(parse_lars("a <- not p(X)."))


def test_rho2_refuses_outside_f2():
    with pytest.raises(FragmentViolation) as info:
        rho2(parse_lars("box(p <- q).\nq <- s."))
    assert info.value.violations


# -- sigma -----------------------------------------------------------------------------


def test_sigma_at_least_shape():
    assert format_formula(sigma(sa("a at least 1 in {1,2}"), T)) == "at[T2] a and (T2 = T-1 or T2 = T-2)"


def test_sigma_singleton_always():
    assert format_formula(sigma(sa("a always in {0}"), T)) == "at[T2] a and T2 = T"


def test_sigma_count_one():
    want = "at[T2] a and (T2 = T or T2 = T-1) and not (at[T3] a and T3 != T2 and (T3 = T or T3 = T-1))"
    assert format_formula(sigma(sa("a count 1 in {0,1}"), T)) == want


def test_sigma_count_variable_is_an_atom():
    phi = sigma(sa("b(X) count N in {0,1}"), T)
    assert isinstance(phi, AtomF) and phi.atom == count_atom(sa("b(X) count N in {0,1}"))
    assert phi.atom.args == ("b", Var("X"), 0, 1, Var("N"))


@pytest.mark.parametrize(
    "text",
    ["a at least 1 in {1,2}", "a always in {0}", "a count 1 in {0,1}", "a count 2 in {0,2}", "a always in {1,3}"],
)
def test_sigma_matches_table(text):
    assert sigma_agrees(sa(text))


@st.composite
def ground_atoms(draw):
    kind = draw(st.sampled_from(list(SKind)))
    offs = draw(st.frozensets(st.integers(0, 3), min_size=1, max_size=3))
    bound = None if kind is SKind.ALWAYS_IN else draw(st.integers(1, 3))
    return StreamingAtom(kind, Atom("a"), offs, bound)


@settings(max_examples=40, deadline=None)
@given(ground_atoms())
def test_sigma_sample(alpha):
    assert sigma_agrees(alpha, max_n=3)


# -- auxiliary count rules -------------------------------------------------------------------


def test_c_alpha_rule_counts():
    assert len(c_alpha_rules(sa("b count C in {0,1}"))) == 4
    assert len(c_alpha_rules(sa("b count C in {3}"))) == 2


def test_c_alpha_needs_a_variable():
    with pytest.raises(ValidationError):
        c_alpha_rules(sa("b count 1 in {0}"))


def test_c_alpha_derives_the_count():
    alpha = sa("b count C in {0,1}")
    prog = LarsProgram(tuple(c_alpha_rules(alpha)))
    res = eval_answer_stream_lars(prog, stream("", "b", "b"), (), 2)
    counts = {a for a in res.stream[2] if a.pred.startswith("aux__count")}
    assert counts == {count_atom(alpha, bound=2)}


# -- LDSR to LARS_D ------------------------------------------------------------------


def test_rho4_fact():
    out = rho4(parse_ldsr("p :- ."))
    assert same_program(out.program, parse_lars("box(p <- wplus[0] at[T] true)."))


def test_rho4_temp_rule_gets_a_companion():
    out = rho4(parse_ldsr("#temp h :- b."))
    assert same_program(out.program, parse_lars("h <- wplus[0] at[T] true, b.\nbox(h__temp <- wplus[0] at[T] true, b)."))
    assert out.aux_predicates == {"h__temp"}


def test_rho4_window_literal():
    out = rho4(parse_ldsr("p :- q at least 1 in {0,1}."))
    want = parse_lars("box(p <- wplus[0] at[T] true, q or (at[T1] q and T1 = T-1)).")
    assert same_program(out.program, want)


def test_rho4_current_of_a_temp_head_reads_the_mirror():
    out = rho4(parse_ldsr("#temp q :- r.\np :- q."))
    (prem,) = [r for r in out.program.rules if isinstance(r.head, Box) and r.head.arg.cons == AtomF(Atom("p"))]
    assert Or((AtomF(Atom("q")), AtomF(Atom("q__temp")))) in prem.head.arg.ante.args


def test_rho5_bare_atom():
    out = rho5(parse_ldsr("#temp h :- b."))
    assert same_program(out.program, parse_lars("h <- wplus[0] at[T] true, at[T1] b and T1 = T."))


def test_rho5_count_variable_adds_aux_rules():
    out = rho5(parse_ldsr("#temp h(N) :- b(X) count N in {0,1}, c(X)."))
    assert out.aux_predicates == {"aux__present_b", "aux__count_b"}
    assert [h for _, _, h in out.provenance].count("c_alpha") == 4


def test_rho6_is_strict_on_f6():
    assert rho6(parse_ldsr("#temp h :- b always in {0,1}, not c count 1 in {1}.")).aux_predicates == frozenset()


def test_rho6_refuses_count_variables():
    with pytest.raises(FragmentViolation):
        rho6(parse_ldsr("#temp h(N) :- b count N in {0,1}."))


def test_rho5_refuses_the_train_program(train_text):
    with pytest.raises(FragmentViolation):
        rho5(parse_ldsr(train_text))


def test_reserved_names_are_rejected():
    with pytest.raises(ValidationError):
        rho5(parse_ldsr("#temp aux__x :- b."))


# -- definitions and g'' --------------------------------------------------------------------


def test_d_p_without_rules():
    assert d_p(Atom("a"), parse_ldsr("p :- b.")) == [Atom("a")]


def test_d_p_single_rule():
    (a, (rule, eqs)) = d_p(Atom("a"), parse_ldsr("#temp a :- b."))
    assert a == Atom("a") and rule.body[0].atom.atom == Atom("b") and eqs == ()


def test_d_p_with_arguments():
    (a, (rule, eqs)) = d_p(Atom("a", (Var("Y"),)), parse_ldsr("#temp a(X) :- b(X)."))
    (x,) = rule.head.args
    assert eqs == ((Var("Y"), x),) and x != Var("Y")


def _bound_equal(src, dst, sigma_, strict=True, phi=Profile.BOUND):
    a = LTuple(src, sigma_)
    b = LTuple(dst, sigma_)
    return all(check_expressibility(a, b, t, phi, strict).equal for t in range(sigma_.n + 1))


def test_rho7_unfolds_temp_definitions():
    p = parse_ldsr("p :- q in {1}.\n#temp q :- r.")
    out = rho7(p)
    assert out.aux_predicates == frozenset()
    for slots in itertools.product(["", "r"], repeat=4):
        assert _bound_equal(p, out.program, stream(*slots))


def test_rho7_count_one_with_definition():
    p = parse_ldsr("p :- q count 1 in {0,1}.\n#temp q :- r.")
    out = rho7(p)
    for slots in itertools.product(["", "r"], repeat=4):
        assert _bound_equal(p, out.program, stream(*slots))


def test_traffic_round_trip_is_bound_equal(traffic_text):
    src = parse_lars(traffic_text)
    dst = rho2(src).program
    s = stream("onLane(v,1,1)", "onLane(v,1,1) onLane(w,2,1)", "onLane(w,2,1)", "")
    assert _bound_equal(src, dst, s)


def test_translate_rejects_unknown_mapping(train_text):
    with pytest.raises(ValidationError):
        translate(parse_ldsr(train_text), 8)


# -- invariants over generated programs -------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10**6))
def test_translations_are_strict_or_reserved_and_stratified(rho, seed):
    inst = gen_fragment_instance(SOURCE_FRAGMENT[rho], seed, DESK)
    out = translate(inst.program, rho)
    extra = set(out.program.preds()) - set(inst.program.preds())
    if rho in STRICT:
        assert not extra and not out.aux_predicates
    assert all(is_reserved(p) for p in extra)
    if rho <= 3:
        check_stratified(out.program)
    else:
        assert stratified(out.program)
