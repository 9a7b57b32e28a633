from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import atoms, stream
from ldsrlars.errors import GenerationBudgetExhausted, ValidationError
from ldsrlars.fragments import Shape, classify_lars_fragments, classify_ldsr_fragments, classify_rule_shape
from ldsrlars.harness.campaign import (
    TABLE_ROWS,
    differential_campaign,
    replay,
    run_trial,
    validate_config,
)
from ldsrlars.harness.generate import DESK, TINY, Bounds, acceptance_rate, gen_fragment_instance, gen_lemma1_case
from ldsrlars.harness.profiles import (
    Language,
    LTuple,
    Profile,
    adding_after,
    check_expressibility,
    clear_after,
    lemma1_property,
    profile_output,
    profile_outputs,
)
from ldsrlars.harness.witnesses import (
    input_deriver,
    input_deriver_output,
    input_deriver_stream,
    lars_rejects_input_derivation,
    ldsr_cannot_separate,
    past_writer,
    past_writer_outputs,
    past_writer_pair,
    random_candidates,
)
from ldsrlars.lars import parse_lars
from ldsrlars.ldsr import parse_ldsr
from ldsrlars.stream import Stream
from ldsrlars.terms import Atom
from ldsrlars.transpile import rho2

TRAIN = "irregular :- train_pass, train_pass at least 1 in {1,2}.\n"
TRAIN_STREAM = stream("train_pass", "", "train_pass")


# -- profiles --------------------------------------------------------------------------


def test_ldsr_atomic_output_of_input_deriver():
    out = profile_output(LTuple(input_deriver(), input_deriver_stream(3)), 2, Profile.ATOMIC)
    assert out.stream == Stream((frozenset(), frozenset(), atoms("a(1) a(2) b(1,2)"), frozenset()))


def test_lars_atomic_output_of_past_writer():
    pair = past_writer_pair(2)
    assert past_writer_outputs(pair) == (atoms("a"), frozenset())


@pytest.mark.parametrize("language", ["ldsr", "lars"])
def test_empty_program_full_profile_is_input_plus_background(language):
    program = parse_ldsr("#background k/0.") if language == "ldsr" else parse_lars("#background k/0.")
    s = stream("a", "", "b")
    out = profile_output(LTuple(program, s, [Atom("k")]), 0, Profile.FULL)
    assert out.stream == s.union_each([Atom("k")])


def test_profile_shapes():
    tup = LTuple(parse_ldsr(TRAIN), TRAIN_STREAM)
    outs = profile_outputs(tup, 1)
    assert outs[Profile.ATOMIC].stream == stream("", "", "")
    assert outs[Profile.BOUND].stream == stream("train_pass", "", "")
    assert outs[Profile.FULL].stream == stream("train_pass", "", "train_pass")
    assert tup.language is Language.LDSR


def test_bound_profile_of_lars_sees_the_future():
    # the LARS answer stream at t is computed over the whole input
    pair = past_writer_pair(1)
    out = profile_output(LTuple(past_writer(), pair.first), 1, Profile.BOUND)
    assert Atom("a") in out.stream[1]


def test_unknown_profile():
    with pytest.raises(ValidationError):
        profile_output(LTuple(parse_ldsr(TRAIN), TRAIN_STREAM), 0, "partial")


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(TABLE_ROWS)), st.integers(0, 10**5))
def test_profiles_are_coherent(row, seed):
    inst = gen_fragment_instance(row[0], seed, TINY)
    tup = LTuple(inst.program, inst.stream, inst.background)
    for t in range(inst.stream.n + 1):
        outs = profile_outputs(tup, t)
        atomic, bound, full = (outs[p].stream for p in Profile)
        assert atomic[t] == bound[t] == full[t]
        assert all(not atomic[i] for i in range(len(atomic)) if i != t)
        assert all(not bound[i] for i in range(t + 1, len(bound)))
        assert full.slots[: t + 1] == bound.slots[: t + 1]


# -- expressibility -------------------------------------------------------------------------


def test_traffic_is_bound_equal_to_its_translation(traffic_text):
    src = parse_lars(traffic_text)
    s = stream("onLane(v,1,2)", "onLane(v,1,2) onLane(w,1,1)", "", "onLane(w,1,1)")
    left = LTuple(src, s)
    right = left.with_program(rho2(src).program)
    for t in range(s.n + 1):
        assert check_expressibility(left, right, t, Profile.BOUND, True).equal


def test_train_is_bound_equal_to_its_translation():
    from ldsrlars.transpile import rho7

    src = parse_ldsr(TRAIN)
    left = LTuple(src, TRAIN_STREAM)
    right = left.with_program(rho7(src).program)
    assert all(check_expressibility(left, right, t, "bound", True).equal for t in range(3))


def test_unequal_verdict_reports_first_difference():
    pair = past_writer_pair(2)
    lars = LTuple(past_writer(), pair.first)
    ldsr = lars.with_program(parse_ldsr("#stream c/0."))
    v = check_expressibility(lars, ldsr, 2, Profile.ATOMIC, True)
    assert not v.equal and v.first_diff == (2, [Atom("a")], [])
    assert v.to_obj()["first_diff"] == {"t": 2, "only_left": ["a"], "only_right": []}


def test_filtered_comparison_hides_other_predicates():
    left = LTuple(parse_ldsr("#stream s/0.\np :- s."), stream("s"))
    right = left.with_program(parse_ldsr("#stream s/0.\np :- s.\nq :- s."))
    assert not check_expressibility(left, right, 0, "atomic", True).equal
    v = check_expressibility(left, right, 0, "atomic", False)
    assert v.equal and v.filtered


def test_tuples_must_share_input():
    p = parse_ldsr(TRAIN)
    with pytest.raises(ValidationError):
        check_expressibility(LTuple(p, TRAIN_STREAM), LTuple(p, stream("", "", "")), 0, "atomic", True)


# -- witness scenarios ---------------------------------------------------------------------------


@pytest.mark.parametrize("tau", [1, 2, 3])
def test_past_writer_separates_the_pair(tau):
    assert past_writer_outputs(past_writer_pair(tau)) == (atoms("a"), frozenset())


@pytest.mark.parametrize("tau", [1, 2, 3])
def test_ldsr_candidates_cannot_separate_the_pair(tau):
    pair = past_writer_pair(tau)
    for program in random_candidates(20, seed=tau):
        assert ldsr_cannot_separate(pair, program).equal


def test_pair_needs_room_after_tau():
    with pytest.raises(ValueError):
        past_writer_pair(4, n=4)


@pytest.mark.parametrize("tau", [0, 2, 4])
def test_input_deriver_output(tau):
    assert input_deriver_output(tau) == atoms("a(1) a(2) b(1,2)")


def test_lars_rejects_the_derived_input_atom():
    p = parse_lars("#stream a/1.\n#stream b/2.")
    assert lars_rejects_input_derivation(p, 2) == "atom a(2) at 2 is new but its predicate is not intensional"


@pytest.mark.parametrize("tau", [1, 2, 3])
def test_atomic_inequality_carries_to_bound_and_full(tau):
    pair = past_writer_pair(tau)
    separated = 0
    for candidate in random_candidates(10, seed=10 + tau):
        for s in (pair.first, pair.second):
            src, dst = LTuple(past_writer(), s), LTuple(candidate, s)
            verdicts = {phi: check_expressibility(src, dst, tau, phi, False).equal for phi in Profile}
            if not verdicts[Profile.ATOMIC]:
                separated += 1
                assert not verdicts[Profile.BOUND] and not verdicts[Profile.FULL]
    assert separated >= 10  # every candidate fails on at least one stream of the pair


# -- output locality --------------------------------------------------------------------------


def test_train_future_is_ignored():
    assert lemma1_property(parse_ldsr(TRAIN), TRAIN_STREAM, (), 1, clear_after).equal


def test_last_point_is_vacuous():
    assert lemma1_property(parse_ldsr(TRAIN), TRAIN_STREAM, (), 2, lambda s, t: s).equal


def test_input_deriver_ignores_later_additions():
    p = input_deriver()
    s = input_deriver_stream(2)
    assert lemma1_property(p, s, (), 0, adding_after(atoms("b(2,3) a(3)"))).equal


def test_mutating_the_past_is_rejected():
    with pytest.raises(ValidationError):
        lemma1_property(parse_ldsr(TRAIN), TRAIN_STREAM, (), 1, lambda s, t: s.replace(0, ()))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_locality_on_generated_cases(seed):
    c = gen_lemma1_case(seed, TINY)
    assert lemma1_property(c.program, c.stream, c.background, c.t, lambda s, t: c.mutated).equal


# -- generation ---------------------------------------------------------------------------


def test_generation_is_deterministic():
    assert gen_fragment_instance("F5", 7) == gen_fragment_instance("F5", 7)
    assert gen_lemma1_case(3) == gen_lemma1_case(3)


def test_f3_instances_have_only_type_two_rules():
    inst = gen_fragment_instance("F3", 1)
    assert all(classify_rule_shape(r).shape is Shape.TYPE_II for r in inst.program.rules)
    assert classify_lars_fragments(inst.program).member("F3")


def test_f7_instances_respect_the_conditions():
    inst = gen_fragment_instance("F7", 2)
    p = inst.program
    heads2 = {r.head.pred for r in p.form2()}
    assert all(not (r.body_preds() & heads2) for r in p.form2())
    assert not any(l.atom.has_count_variable for r in p.rules for l in r.body)
    assert classify_ldsr_fragments(p).member("F7")


@pytest.mark.parametrize("fragment", ["F1", "F2", "F3", "F4", "F5", "F6", "F7"])
def test_generators_are_alive(fragment):
    assert acceptance_rate(fragment, 40) > 0.05


def test_bounds_are_validated():
    with pytest.raises(ValidationError):
        Bounds(max_n=0)


def test_instances_respect_bounds():
    inst = gen_fragment_instance("F4", 11, DESK)
    assert inst.stream.n <= DESK.max_n
    assert len(inst.program.rules) <= DESK.max_rules


def test_budget_exhaustion_reports_rate(monkeypatch):
    import ldsrlars.harness.generate as gen

    monkeypatch.setattr(gen, "accepts", lambda f, p: False)
    with pytest.raises(GenerationBudgetExhausted):
        gen.gen_fragment_instance("F1", 0, budget=5)


# -- campaigns -------------------------------------------------------------------------------


def test_full_profile_is_not_granted_for_f4():
    with pytest.raises(ValidationError, match="full"):
        validate_config("F4", 4, "full", False)


def test_fragment_must_fit_the_mapping():
    with pytest.raises(ValidationError):
        validate_config("F1", 4, "bound", False)


def test_aux_mappings_need_the_filtered_comparison():
    with pytest.raises(ValidationError):
        validate_config("F5", 5, "full", True)


def test_subfragment_is_allowed():
    assert validate_config("F3", 1, "atomic", True).fragment == "F3"


@pytest.mark.parametrize("row", TABLE_ROWS, ids=lambda r: f"{r[0]}-rho{r[1]}")
def test_small_campaigns_pass(row):
    report = differential_campaign(*row, trials=15)
    assert report.ok, report.failures()
    assert report.summary().endswith("15/15 passed")


def test_records_and_replay():
    report = differential_campaign("F2", 2, "bound", True, trials=3, seed=40)
    rec = report.records()
    assert [r["seed"] for r in rec] == [40, 41, 42]
    assert rec[0]["verdict"] == "pass" and rec[0]["profile"] == "bound"
    again = replay("F2", 2, "bound", True, 41, 0)
    assert again.passed and again.seed == 41


def test_parallel_campaign_matches_serial():
    a = differential_campaign("F6", 6, "full", True, trials=6, workers=2)
    b = differential_campaign("F6", 6, "full", True, trials=6)
    assert a.records() == b.records()


def test_trial_records_a_crash(monkeypatch):
    import ldsrlars.harness.campaign as campaign

    def boom(program):
        raise RuntimeError("boom")

    monkeypatch.setitem(campaign.RHO, 2, boom)
    r = run_trial(validate_config("F2", 2, "bound", True), 0)
    assert not r.passed and "boom" in r.error
