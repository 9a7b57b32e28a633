"""Fixed scenarios showing that neither language covers the other.

``@[T-1] a <- @[T] c`` writes into the past, which no LDSR program can match
at the atomic profile: LDSR outputs up to ``t`` never depend on later input.
``a(Y) :- a(X), b(X,Y)`` derives atoms of an input predicate, which no LARS_D
answer stream may contain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..lars.oracle import explain_answer_stream
from ..lars.semantics import LarsAnswerStream
from ..lars.syntax import LarsProgram, parse_lars
from ..ldsr.syntax import LdsrProgram, parse_ldsr
from ..stream import Stream
from ..terms import Atom, PredicateDecl, PredKind, Signature
from .generate import Bounds, gen_ldsr_program, stratified
from .profiles import LTuple, Profile, Verdict, lemma1_property, profile_output

PAST_WRITER = "#stream c/0.\nat[T-1] a <- at[T] c.\n"
INPUT_DERIVER = "#stream a/1.\n#stream b/2.\na(Y) :- a(X), b(X,Y).\n"


def past_writer() -> LarsProgram:
    return parse_lars(PAST_WRITER)


def input_deriver() -> LdsrProgram:
    return parse_ldsr(INPUT_DERIVER)


def c_stream(n: int, marks) -> Stream:
    return Stream(tuple(frozenset({Atom("c")}) if i in marks else frozenset() for i in range(n + 1)))


@dataclass(frozen=True)
class StreamPair:
    tau: int
    first: Stream  # c exactly at tau + 1
    second: Stream  # the same with that slot cleared


def past_writer_pair(tau: int, n: int = 4) -> StreamPair:
    if not 0 < tau < n:
        raise ValueError(f"need 0 < tau < n, got tau={tau}, n={n}")
    first = c_stream(n, {tau + 1})
    return StreamPair(tau, first, first.replace(tau + 1, ()))


def past_writer_outputs(pair: StreamPair) -> tuple[frozenset, frozenset]:
    """Atomic outputs of the past writer at ``tau`` for both streams."""
    p = past_writer()
    left = profile_output(LTuple(p, pair.first), pair.tau, Profile.ATOMIC).stream[pair.tau]
    right = profile_output(LTuple(p, pair.second), pair.tau, Profile.ATOMIC).stream[pair.tau]
    return left, right


def ldsr_cannot_separate(pair: StreamPair, program: LdsrProgram) -> Verdict:
    """Bound outputs at ``tau`` of an LDSR program on the pair (always equal)."""
    return lemma1_property(program, pair.first, (), pair.tau, lambda s, t: pair.second)


def random_candidates(count: int, seed: int = 0, bounds: Bounds | None = None) -> list[LdsrProgram]:
    """LDSR programs over ``c`` (input) and ``a`` (derived), plus helpers."""
    bounds = bounds or Bounds(max_n=4, max_constants=2, max_predicates=4, max_arity=0, max_rules=4, max_window=3)
    sig = Signature(
        (
            PredicateDecl("c", PredKind.STREAM, 0),
            PredicateDecl("a", PredKind.INTENSIONAL, 0),
            PredicateDecl("h", PredKind.INTENSIONAL, 0),
        )
    )
    rng = random.Random(seed)
    out: list[LdsrProgram] = []
    while len(out) < count:
        program = gen_ldsr_program(rng, bounds, sig=sig)
        if stratified(program):
            out.append(program)
    return out


def input_deriver_stream(n: int) -> Stream:
    return Stream(tuple(frozenset({Atom("a", (1,)), Atom("b", (1, 2))}) for _ in range(n + 1)))


def input_deriver_output(tau: int, n: int = 4) -> frozenset:
    tup = LTuple(input_deriver(), input_deriver_stream(n))
    return profile_output(tup, tau, Profile.ATOMIC).stream[tau]


def lars_rejects_input_derivation(program: LarsProgram, tau: int, n: int = 4) -> str | None:
    """Reason the validator gives for a candidate holding ``a(2)`` at ``tau``."""
    sigma = input_deriver_stream(n)
    candidate = LarsAnswerStream(sigma.replace(tau, sigma[tau] | {Atom("a", (2,))}), tau)
    return explain_answer_stream(program, sigma, (), tau, candidate)
