"""Output profiles (atomic, bound, full) and expressibility verdicts."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

from ..errors import ValidationError
from ..lars.semantics import eval_answer_stream_lars
from ..lars.syntax import LarsProgram
from ..ldsr.semantics import eval_answer_stream
from ..ldsr.syntax import LdsrProgram
from ..stream import Stream, restrict_to_preds, restrict_to_time, slot_diff
from ..terms import Atom


class Language(enum.Enum):
    LDSR = "LDSR"
    LARS = "LARS_D"


class Profile(enum.Enum):
    ATOMIC = "atomic"
    BOUND = "bound"
    FULL = "full"


def as_profile(phi: Profile | str) -> Profile:
    try:
        return phi if isinstance(phi, Profile) else Profile(phi)
    except ValueError:
        raise ValidationError(f"unknown profile {phi!r}") from None


@dataclass(frozen=True)
class LTuple:
    """An input stream, background facts and a program of either language."""

    program: LdsrProgram | LarsProgram
    input: Stream
    background: frozenset = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "background", frozenset(self.background))

    @property
    def language(self) -> Language:
        return Language.LDSR if isinstance(self.program, LdsrProgram) else Language.LARS

    def with_program(self, program) -> "LTuple":
        return LTuple(program, self.input, self.background)

    def with_input(self, sigma: Stream) -> "LTuple":
        return LTuple(self.program, sigma, self.background)

    def predicates(self) -> set[str]:
        """pred(P ∪ I ∪ B)."""
        return self.program.preds() | self.input.predicates() | {b.pred for b in self.background}


@dataclass(frozen=True)
class ProfileOutput:
    profile: Profile
    t: int
    stream: Stream


@dataclass(frozen=True)
class Verdict:
    equal: bool
    first_diff: tuple | None = None  # (time point, only-left atoms, only-right atoms)
    filtered: bool = False

    def to_obj(self) -> dict:
        diff = None
        if self.first_diff is not None:
            i, left, right = self.first_diff
            diff = {"t": i, "only_left": [str(a) for a in left], "only_right": [str(a) for a in right]}
        return {"equal": self.equal, "first_diff": diff, "filtered": self.filtered}


def _shape(slots: list[frozenset], t: int, phi: Profile, tail: list[frozenset]) -> Stream:
    out = []
    for i, s in enumerate(slots):
        if phi is Profile.ATOMIC:
            out.append(s if i == t else frozenset())
        elif i <= t:
            out.append(s)
        else:
            out.append(tail[i] if phi is Profile.FULL else frozenset())
    return Stream(tuple(out))


def profile_outputs(tup: LTuple, t: int) -> dict[Profile, ProfileOutput]:
    """All three profiles from a single evaluation, checked for coherence."""
    sigma = tup.input
    if not 0 <= t <= sigma.n:
        raise ValidationError(f"evaluation point {t} outside 0..{sigma.n}")
    bg = tup.background
    if tup.language is Language.LDSR:
        answer = eval_answer_stream(tup.program, restrict_to_time(sigma, t), bg).answer_stream
        slots = list(answer.pad_to(sigma.n).slots)
        tail = [s | bg for s in sigma.slots]
    else:
        answer = eval_answer_stream_lars(tup.program, sigma, bg, t).stream
        slots = [s | bg for s in answer.slots]
        tail = slots
    outs = {phi: ProfileOutput(phi, t, _shape(slots, t, phi, tail)) for phi in Profile}
    _assert_coherent(outs, t)
    return outs


def _assert_coherent(outs: dict[Profile, ProfileOutput], t: int) -> None:
    atomic, bound, full = (outs[p].stream for p in Profile)
    if bound[t] != atomic[t] or full.slots[: t + 1] != bound.slots[: t + 1]:
        raise AssertionError(f"profile outputs disagree at time point {t}")


def profile_output(tup: LTuple, t: int, phi: Profile | str) -> ProfileOutput:
    return profile_outputs(tup, t)[as_profile(phi)]


def compare_streams(left: Stream, right: Stream, filtered: bool = False) -> Verdict:
    diff = slot_diff(left.slots, right.slots)
    return Verdict(diff is None, diff, filtered)


def check_expressibility(source: LTuple, target: LTuple, t: int, phi: Profile | str, strict: bool) -> Verdict:
    if source.input != target.input or source.background != target.background:
        raise ValidationError("source and target tuples must share input and background")
    phi = as_profile(phi)
    left = profile_output(source, t, phi).stream
    right = profile_output(target, t, phi).stream
    if not strict:
        keep = source.predicates()
        left, right = restrict_to_preds(left, keep), restrict_to_preds(right, keep)
    return compare_streams(left, right, not strict)


Mutator = Callable[[Stream, int], Stream]


def lemma1_property(program: LdsrProgram, sigma: Stream, background: Iterable[Atom], t: int, mutator: Mutator) -> Verdict:
    """Bound outputs at ``t`` agree for ``sigma`` and ``mutator(sigma, t)``."""
    other = mutator(sigma, t)
    if len(other) != len(sigma) or other.slots[: t + 1] != sigma.slots[: t + 1]:
        raise ValidationError("mutator changed a slot at or before the evaluation point")
    base = LTuple(program, sigma, background)
    left = profile_output(base, t, Profile.BOUND).stream
    right = profile_output(base.with_input(other), t, Profile.BOUND).stream
    return compare_streams(left, right)


def clear_after(sigma: Stream, t: int) -> Stream:
    return Stream(sigma.slots[: t + 1] + tuple(frozenset() for _ in range(sigma.n - t)))


def adding_after(atoms: Iterable[Atom]) -> Mutator:
    extra = frozenset(atoms)

    def mutate(sigma: Stream, t: int) -> Stream:
        return Stream(tuple(s | extra if i > t else s for i, s in enumerate(sigma.slots)))

    return mutate
