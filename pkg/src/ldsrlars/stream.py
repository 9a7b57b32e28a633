"""Streams, restrictions, backward observations and time-based windows."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ParseError, ValidationError
from .lexer import TokenStream
from .parsing import parse_atom
from .terms import Atom, sorted_atoms


@dataclass(frozen=True)
class Stream:
    """Dense stream ``<S_0, ..., S_n>``; index = time point."""

    slots: tuple = ()

    def __post_init__(self) -> None:
        slots = tuple(frozenset(s) for s in self.slots)
        if not slots:
            raise ValidationError("a stream has at least one time point")
        for s in slots:
            for a in s:
                if not a.is_ground:
                    raise ValidationError(f"stream atom {a} is not ground")
        object.__setattr__(self, "slots", slots)

    @classmethod
    def empty(cls, n: int) -> "Stream":
        return cls(tuple(frozenset() for _ in range(n + 1)))

    @classmethod
    def of(cls, *slots: Iterable[Atom]) -> "Stream":
        return cls(tuple(frozenset(s) for s in slots))

    @property
    def n(self) -> int:
        return len(self.slots) - 1

    def __len__(self) -> int:
        return len(self.slots)

    def __getitem__(self, i: int) -> frozenset:
        return self.slots[i]

    def atoms(self) -> set[Atom]:
        out: set[Atom] = set()
        for s in self.slots:
            out |= s
        return out

    def predicates(self) -> set[str]:
        return {a.pred for a in self.atoms()}

    def issubset(self, other: "Stream") -> bool:
        return len(self) == len(other) and all(a <= b for a, b in zip(self.slots, other.slots))

    def replace(self, i: int, slot: Iterable[Atom]) -> "Stream":
        slots = list(self.slots)
        slots[i] = frozenset(slot)
        return Stream(tuple(slots))

    def union_each(self, atoms: Iterable[Atom]) -> "Stream":
        extra = frozenset(atoms)
        return Stream(tuple(s | extra for s in self.slots))

    def pad_to(self, n: int) -> "Stream":
        if n < self.n:
            raise ValidationError("cannot pad to a shorter length")
        return Stream(self.slots + tuple(frozenset() for _ in range(n - self.n)))

    def __str__(self) -> str:
        return format_stream(self)


def restrict_to_time(sigma: Stream, m: int) -> Stream:
    if not 0 <= m <= sigma.n:
        raise ValidationError(f"time point {m} outside 0..{sigma.n}")
    return Stream(sigma.slots[: m + 1])


def restrict_to_preds(sigma: Stream, preds: Iterable[str]) -> Stream:
    keep = set(preds)
    return Stream(tuple(frozenset(a for a in s if a.pred in keep) for s in sigma.slots))


@dataclass(frozen=True)
class ObservationSet:
    """Backward observation as (index, slot) pairs, ordered by decreasing index.

    Pairs rather than a family of sets: equal slots at different indices must
    be counted separately when evaluating counting constructs.
    """

    members: tuple = ()

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.members)

    def count(self, atom: Atom) -> int:
        return sum(1 for _, s in self.members if atom in s)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def observation_indices(n: int, offsets: Iterable[int]) -> list[int]:
    return sorted({n - d for d in offsets if n - d >= 0}, reverse=True)


def backward_observation(sigma: Stream, offsets: Iterable[int]) -> ObservationSet:
    offsets = frozenset(offsets)
    if not offsets:
        raise ValidationError("backward observation needs a nonempty offset set")
    if any(d < 0 for d in offsets):
        raise ValidationError("offsets are natural numbers")
    return ObservationSet(tuple((i, sigma.slots[i]) for i in observation_indices(sigma.n, offsets)))


@dataclass(frozen=True)
class Substream:
    """A subset of a stream: same length, empty outside ``interval``."""

    slots: tuple
    interval: range = field(default_factory=lambda: range(0))

    @property
    def n(self) -> int:
        return len(self.slots) - 1

    def issubset_of(self, sigma: Stream) -> bool:
        if len(self.slots) != len(sigma):
            return False
        for i, s in enumerate(self.slots):
            if i not in self.interval and s:
                return False
            if not s <= sigma[i]:
                return False
        return True


def time_window(sigma: Stream, t: int, w: int) -> Substream:
    """Time-based window of width ``w`` at ``t``: slots ``max(0,t-w)..t``."""
    if not 0 <= t <= sigma.n:
        raise ValidationError(f"time point {t} outside 0..{sigma.n}")
    if w < 0:
        raise ValidationError("window width is a natural number")
    lo = max(0, t - w)
    interval = range(lo, t + 1)
    slots = tuple(s if i in interval else frozenset() for i, s in enumerate(sigma.slots))
    return Substream(slots, interval)


# -- text and structured formats ------------------------------------------------


def format_stream(sigma: Stream) -> str:
    lines = []
    for i, s in enumerate(sigma.slots):
        atoms = " ".join(str(a) for a in sorted_atoms(s))
        lines.append(f"{i}: {atoms}".rstrip())
    return "\n".join(lines) + "\n"


def parse_atom_list(text: str) -> list[Atom]:
    ts = TokenStream(text)
    out = []
    while not ts.at_eof():
        a = parse_atom(ts)
        if not a.is_ground:
            raise ts.error(f"stream atom {a} must be ground")
        out.append(a)
        ts.accept_op(",")
    return out


def parse_stream(text: str) -> Stream:
    slots: dict[int, set[Atom]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if not sep or not head.strip().isdigit():
            raise ParseError("expected '<time point>: atoms'", lineno, 1)
        i = int(head)
        if i in slots:
            raise ParseError(f"time point {i} listed twice", lineno, 1)
        try:
            slots[i] = set(parse_atom_list(rest))
        except ParseError as e:
            raise ParseError(str(e), lineno, e.column) from None
    if not slots:
        return Stream.empty(0)
    n = max(slots)
    return Stream(tuple(frozenset(slots.get(i, ())) for i in range(n + 1)))


def stream_to_obj(sigma: Stream) -> dict:
    return {"n": sigma.n, "slots": [[str(a) for a in sorted_atoms(s)] for s in sigma.slots]}


def stream_from_obj(obj: dict) -> Stream:
    slots = obj["slots"]
    if obj.get("n", len(slots) - 1) != len(slots) - 1:
        raise ValidationError("field n disagrees with the number of slots")
    return Stream(tuple(frozenset(parse_atom_list(" ".join(s))) for s in slots))


def dumps_stream(sigma: Stream) -> str:
    return json.dumps(stream_to_obj(sigma), sort_keys=True)


def loads_stream(text: str) -> Stream:
    return stream_from_obj(json.loads(text))


def parse_facts(text: str) -> frozenset[Atom]:
    """Background files: ground atoms separated by whitespace, commas or dots."""
    cleaned = "\n".join(line.split("%", 1)[0] for line in text.splitlines())
    return frozenset(parse_atom_list(cleaned.replace(".", " ")))


def format_facts(atoms: Iterable[Atom]) -> str:
    return "".join(f"{a}.\n" for a in sorted_atoms(atoms))


def slot_diff(left: Sequence[frozenset], right: Sequence[frozenset]):
    """First index where two slot sequences differ, with one-sided atoms."""
    for i, (a, b) in enumerate(zip(left, right)):
        if a != b:
            return i, sorted_atoms(a - b), sorted_atoms(b - a)
    if len(left) != len(right):
        return min(len(left), len(right)), [], []
    return None
