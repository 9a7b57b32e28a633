"""Terms, predicate atoms and predicate declarations.

Constants are plain Python values: ``int`` for naturals and ``str`` for
symbols.  Variables are :class:`Var` instances (capitalised names in the
surface syntax).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .errors import ValidationError


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Const = Union[int, str]
Term = Union[Var, int, str]
Env = Mapping[Var, Const]

_SYMBOL = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def is_var(term: object) -> bool:
    return isinstance(term, Var)


def term_key(term: Term) -> tuple:
    """Total order over mixed int/str/Var terms (for deterministic output)."""
    if isinstance(term, bool):
        raise TypeError("booleans are not terms")
    if isinstance(term, int):
        return (0, term, "")
    if isinstance(term, str):
        return (1, 0, term)
    return (2, 0, term.name)


def format_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, int):
        return str(term)
    if not _SYMBOL.match(term):
        raise ValidationError(f"constant {term!r} is not a printable symbol")
    return term


@dataclass(frozen=True)
class Atom:
    """A predicate atom ``pred(args)``; ground when no argument is a variable."""

    pred: str
    args: tuple = ()

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(a, Var) for a in self.args)

    def variables(self) -> Iterator[Var]:
        for a in self.args:
            if isinstance(a, Var):
                yield a

    def substitute(self, env: Env) -> "Atom":
        if not self.args:
            return self
        return Atom(self.pred, tuple(env.get(a, a) if isinstance(a, Var) else a for a in self.args))

    def sort_key(self) -> tuple:
        return (self.pred, len(self.args), tuple(term_key(a) for a in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(format_term(a) for a in self.args)})"

    def __repr__(self) -> str:
        return f"Atom({self})"


GroundAtom = Atom


def unify(pattern: Atom, ground: Atom, env: Env) -> dict | None:
    """Match ``pattern`` against a ground atom, extending ``env``; None on clash."""
    if pattern.pred != ground.pred or len(pattern.args) != len(ground.args):
        return None
    out = dict(env)
    for p, g in zip(pattern.args, ground.args):
        if isinstance(p, Var):
            bound = out.get(p, _UNBOUND)
            if bound is _UNBOUND:
                out[p] = g
            elif bound != g:
                return None
        elif p != g:
            return None
    return out


_UNBOUND = object()


def sorted_atoms(atoms: Iterable[Atom]) -> list[Atom]:
    return sorted(atoms, key=Atom.sort_key)


class PredKind(enum.Enum):
    STREAM = "stream"
    BACKGROUND = "background"
    INTENSIONAL = "intensional"

    @property
    def extensional(self) -> bool:
        return self is not PredKind.INTENSIONAL


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    kind: PredKind
    arity: int


@dataclass(frozen=True)
class Signature:
    """Explicit predicate declarations; undeclared predicates get defaults.

    Defaults: a predicate occurring in some rule head is intensional, any other
    predicate is stream-extensional.  Names starting with ``aux__`` or ending
    in ``__temp`` are reserved for translation output and may not be declared
    by users.
    """

    decls: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        seen: dict[str, PredicateDecl] = {}
        for d in self.decls:
            old = seen.get(d.name)
            if old is not None and old != d:
                raise ValidationError(f"conflicting declarations for {d.name}: {old} vs {d}")
            seen[d.name] = d
        object.__setattr__(self, "decls", tuple(sorted(seen.values(), key=lambda d: d.name)))

    def get(self, name: str) -> PredicateDecl | None:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def kind(self, name: str, head_preds: Iterable[str] = ()) -> PredKind:
        d = self.get(name)
        if d is not None:
            return d.kind
        return PredKind.INTENSIONAL if name in set(head_preds) else PredKind.STREAM

    def merge(self, other: "Signature") -> "Signature":
        return Signature(self.decls + other.decls)

    def with_decls(self, extra: Iterable[PredicateDecl]) -> "Signature":
        return Signature(self.decls + tuple(extra))

    def names(self, kind: PredKind) -> set[str]:
        return {d.name for d in self.decls if d.kind is kind}


def is_reserved(pred: str) -> bool:
    return pred.startswith("aux__") or pred.endswith("__temp")


def check_arities(atoms: Iterable[Atom], sig: Signature | None = None) -> dict[str, int]:
    """Return pred -> arity, raising on the first clash (reserved names exempt)."""
    arity: dict[str, int] = {}
    if sig is not None:
        for d in sig.decls:
            arity[d.name] = d.arity
    for a in atoms:
        if is_reserved(a.pred):
            continue
        known = arity.setdefault(a.pred, a.arity)
        if known != a.arity:
            raise ValidationError(f"predicate {a.pred} used with arity {a.arity} and {known}")
    return arity
