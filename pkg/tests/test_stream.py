from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import atoms, stream
from ldsrlars.errors import ValidationError
from ldsrlars.stream import (
    Stream,
    backward_observation,
    dumps_stream,
    format_stream,
    loads_stream,
    parse_facts,
    parse_stream,
    restrict_to_preds,
    restrict_to_time,
    slot_diff,
    time_window,
)
from ldsrlars.terms import Atom

GROUND = [Atom("a"), Atom("b"), Atom("a", (1,)), Atom("a", (2,)), Atom("b", (1, 2)), Atom("c", ("x",))]
streams = st.lists(st.frozensets(st.sampled_from(GROUND), max_size=3), min_size=1, max_size=6).map(
    lambda slots: Stream(tuple(slots))
)


def test_restrict_to_time_examples():
    assert restrict_to_time(stream("a", "b", "c"), 1) == stream("a", "b")
    assert restrict_to_time(stream("a"), 0) == stream("a")
    assert restrict_to_time(stream("", "a", ""), 2) == stream("", "a", "")
    with pytest.raises(ValidationError):
        restrict_to_time(stream("a"), 1)


def test_restrict_to_preds_examples():
    assert restrict_to_preds(stream("a(1) b(2)", "b(3)"), {"a"}) == stream("a(1)", "")
    s = stream("a(1) b(2)", "b(3)")
    assert restrict_to_preds(s, s.predicates()) == s
    assert restrict_to_preds(stream("a", "a"), set()) == stream("", "")


def test_backward_observation_examples():
    assert backward_observation(stream("a", "", "a"), {0, 1, 2}).indices == (2, 1, 0)
    assert backward_observation(stream("a", "b"), {5}).indices == ()
    obs = backward_observation(stream("a", "b", "c"), {1})
    assert [s for _, s in obs] == [atoms("b")]
    with pytest.raises(ValidationError):
        backward_observation(stream("a"), set())


def test_observation_counts_equal_slots_separately():
    obs = backward_observation(stream("a", "a", "b"), {1, 2})
    assert obs.count(Atom("a")) == 2


def test_time_window_examples():
    w = time_window(stream("a", "b", "c"), 2, 1)
    assert list(w.interval) == [1, 2]
    assert w.slots == (frozenset(), atoms("b"), atoms("c"))
    w0 = time_window(stream("a", "b", "c"), 1, 0)
    assert list(w0.interval) == [1] and w0.slots[1] == atoms("b")
    clamped = time_window(stream("a", "b"), 0, 5)
    assert list(clamped.interval) == [0] and clamped.slots[0] == atoms("a")
    with pytest.raises(ValidationError):
        time_window(stream("a"), 3, 1)


def test_text_format_fills_missing_indices():
    s = parse_stream("0: a(1) b(1,2)\n2: c\n")
    assert s == stream("a(1) b(1,2)", "", "c")
    assert format_stream(s) == "0: a(1) b(1,2)\n1:\n2: c\n"


def test_background_file():
    assert parse_facts("edge(1,2). edge(2,3).\n% comment\nnode(1).") == atoms("edge(1,2) edge(2,3) node(1)")


def test_slot_diff_reports_first_difference():
    assert slot_diff(stream("a", "b").slots, stream("a", "c").slots) == (1, [Atom("b")], [Atom("c")])
    assert slot_diff(stream("a").slots, stream("a").slots) is None


@given(streams)
def test_text_round_trip(s):
    assert parse_stream(format_stream(s)) == s


@given(streams)
def test_structured_round_trip(s):
    assert loads_stream(dumps_stream(s)) == s


@given(streams, st.data())
def test_restrict_to_time_composes(s, data):
    m = data.draw(st.integers(0, s.n))
    k = data.draw(st.integers(0, m))
    assert restrict_to_time(restrict_to_time(s, m), k) == restrict_to_time(s, k)


@given(streams, st.sets(st.sampled_from(["a", "b", "c"])), st.sets(st.sampled_from(["a", "b", "c"])))
def test_restrict_to_preds_idempotent_and_monotone(s, f, g):
    once = restrict_to_preds(s, f)
    assert restrict_to_preds(once, f) == once
    assert once.issubset(restrict_to_preds(s, f | g))


@given(streams, st.sets(st.integers(0, 8), min_size=1))
def test_observation_indices_are_offsets_back(s, offsets):
    obs = backward_observation(s, offsets)
    assert len(obs.indices) <= len(offsets)
    assert all(i >= 0 and s.n - i in offsets for i in obs.indices)


@given(streams, st.data())
def test_time_window_is_a_substream(s, data):
    t = data.draw(st.integers(0, s.n))
    w = data.draw(st.integers(0, 4))
    win = time_window(s, t, w)
    assert win.issubset_of(s)
    assert list(win.interval) == list(range(max(0, t - w), t + 1))
