"""LDSR abstract syntax, surface parser and canonical printer.

Surface grammar::

    program   ::= (decl | rule)*
    decl      ::= ("#stream" | "#background" | "#intensional") pred "/" arity "."
    rule      ::= ["#temp"] atom [":-" [literal ("," literal)*]] "."
    literal   ::= ["not"] satom
    satom     ::= atom
                | atom "at" "least" INT "in" offsets
                | atom "always" "in" offsets
                | atom "count" (INT | VAR) "in" offsets
                | atom "in" offsets                    (= at least 1)
    offsets   ::= "{" INT ("," INT)* "}" | "[" INT "]"
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from ..errors import ParseError, SafetyError, ValidationError
from ..lexer import TokenStream
from ..parsing import format_decl, format_offsets, parse_atom, parse_declaration, parse_offsets
from ..terms import Atom, PredicateDecl, PredKind, Signature, Var, check_arities, format_term


class SKind(enum.Enum):
    AT_LEAST = "at_least"
    ALWAYS_IN = "always_in"
    COUNT = "count"


@dataclass(frozen=True)
class StreamingAtom:
    kind: SKind
    atom: Atom
    offsets: frozenset
    bound: int | Var | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "offsets", frozenset(self.offsets))
        if not self.offsets:
            raise ValidationError("a streaming atom needs a nonempty offset set")
        if any((not isinstance(d, int)) or d < 0 for d in self.offsets):
            raise ValidationError("offsets are natural numbers")
        if self.kind is SKind.ALWAYS_IN:
            if self.bound is not None:
                raise ValidationError("'always in' takes no bound")
        elif isinstance(self.bound, int):
            if self.bound < 1:
                raise ValidationError(f"{self.kind.value} bound must be a positive natural")
        elif not (self.kind is SKind.COUNT and isinstance(self.bound, Var)):
            raise ValidationError(f"bad bound {self.bound!r} for {self.kind.value}")

    @classmethod
    def plain(cls, atom: Atom) -> "StreamingAtom":
        return cls(SKind.AT_LEAST, atom, frozenset({0}), 1)

    @property
    def has_count_variable(self) -> bool:
        return self.kind is SKind.COUNT and isinstance(self.bound, Var)

    @property
    def pred(self) -> str:
        return self.atom.pred

    def variables(self) -> Iterator[Var]:
        yield from self.atom.variables()
        if isinstance(self.bound, Var):
            yield self.bound

    def substitute(self, env) -> "StreamingAtom":
        bound = env.get(self.bound, self.bound) if isinstance(self.bound, Var) else self.bound
        return StreamingAtom(self.kind, self.atom.substitute(env), self.offsets, bound)

    @property
    def is_ground(self) -> bool:
        return self.atom.is_ground and not isinstance(self.bound, Var)

    def __str__(self) -> str:
        d = format_offsets(self.offsets)
        if self.kind is SKind.AT_LEAST:
            if self.bound == 1:
                return str(self.atom) if self.offsets == {0} else f"{self.atom} in {d}"
            return f"{self.atom} at least {self.bound} in {d}"
        if self.kind is SKind.ALWAYS_IN:
            return f"{self.atom} always in {d}"
        return f"{self.atom} count {format_term(self.bound)} in {d}"


@dataclass(frozen=True)
class Literal:
    atom: StreamingAtom
    positive: bool = True

    @property
    def harmless(self) -> bool:
        return self.positive and self.atom.kind in (SKind.AT_LEAST, SKind.ALWAYS_IN)

    @property
    def pred(self) -> str:
        return self.atom.pred

    def substitute(self, env) -> "Literal":
        return Literal(self.atom.substitute(env), self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


@dataclass(frozen=True)
class LdsrRule:
    head: Atom
    body: tuple = ()
    temp: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def form(self) -> int:
        return 2 if self.temp else 1

    def variables(self) -> set[Var]:
        out = set(self.head.variables())
        for lit in self.body:
            out.update(lit.atom.variables())
        return out

    @property
    def is_ground(self) -> bool:
        return not self.variables()

    def substitute(self, env) -> "LdsrRule":
        return LdsrRule(self.head.substitute(env), tuple(l.substitute(env) for l in self.body), self.temp)

    def body_preds(self) -> set[str]:
        return {l.pred for l in self.body}

    def __str__(self) -> str:
        prefix = "#temp " if self.temp else ""
        if not self.body:
            return f"{prefix}{self.head}."
        return f"{prefix}{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class LdsrProgram:
    rules: tuple = ()
    signature: Signature = field(default_factory=Signature)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))

    def head_preds(self) -> set[str]:
        return {r.head.pred for r in self.rules}

    def preds(self) -> set[str]:
        out = self.head_preds()
        for r in self.rules:
            out |= r.body_preds()
        out |= {d.name for d in self.signature.decls}
        return out

    def kind(self, pred: str) -> PredKind:
        return self.signature.kind(pred, self.head_preds())

    def form1(self) -> list[LdsrRule]:
        return [r for r in self.rules if not r.temp]

    def form2(self) -> list[LdsrRule]:
        return [r for r in self.rules if r.temp]

    def constants(self) -> set:
        out: set = set()
        for r in self.rules:
            out.update(a for a in r.head.args if not isinstance(a, Var))
            for l in r.body:
                out.update(a for a in l.atom.atom.args if not isinstance(a, Var))
                if isinstance(l.atom.bound, int):
                    out.add(l.atom.bound)
        return out

    def max_offsets(self) -> int:
        return max((len(l.atom.offsets) for r in self.rules for l in r.body), default=0)

    def all_atoms(self) -> Iterator[Atom]:
        for r in self.rules:
            yield r.head
            for l in r.body:
                yield l.atom.atom

    def with_facts(self, facts: Iterable[Atom]) -> "LdsrProgram":
        """``P ∪ {b. | b ∈ facts}`` (facts as bodiless permanent rules)."""
        extra = tuple(LdsrRule(a) for a in sorted(set(facts), key=Atom.sort_key))
        return LdsrProgram(self.rules + extra, self.signature)

    def __str__(self) -> str:
        return format_program(self)


def check_safety(rule: LdsrRule) -> None:
    """Head and negative-literal variables must occur in a positive literal."""
    positive: set[Var] = set()
    for lit in rule.body:
        if lit.positive:
            positive.update(lit.atom.variables())
    needed = set(rule.head.variables())
    for lit in rule.body:
        if not lit.positive:
            needed.update(lit.atom.variables())
    missing = needed - positive
    if missing:
        names = ", ".join(sorted(v.name for v in missing))
        raise SafetyError(f"unsafe rule '{rule}': variable(s) {names} not bound by a positive literal")


def validate_program(program: LdsrProgram) -> None:
    check_arities(program.all_atoms(), program.signature)
    for r in program.rules:
        check_safety(r)


# -- parser -----------------------------------------------------------------------


def _parse_satom(ts: TokenStream) -> StreamingAtom:
    atom = parse_atom(ts)
    if ts.peek().is_word("at"):
        ts.next()
        ts.expect_word("least")
        c = int(ts.expect_kind("int", "a positive bound").text)
        ts.expect_word("in")
        return StreamingAtom(SKind.AT_LEAST, atom, parse_offsets(ts), c)
    if ts.accept_word("always"):
        ts.expect_word("in")
        return StreamingAtom(SKind.ALWAYS_IN, atom, parse_offsets(ts))
    if ts.accept_word("count"):
        tok = ts.next()
        if tok.kind == "int":
            bound: int | Var = int(tok.text)
        elif tok.kind == "var":
            bound = Var(tok.text)
        else:
            raise ts.error("expected a counting term", tok)
        ts.expect_word("in")
        return StreamingAtom(SKind.COUNT, atom, parse_offsets(ts), bound)
    if ts.accept_word("in"):
        return StreamingAtom(SKind.AT_LEAST, atom, parse_offsets(ts), 1)
    return StreamingAtom.plain(atom)


def _parse_literal(ts: TokenStream) -> Literal:
    positive = not ts.accept_word("not")
    tok = ts.peek()
    try:
        return Literal(_parse_satom(ts), positive)
    except ValidationError as e:
        raise ParseError(str(e), tok.line, tok.col) from None


def parse_ldsr(text: str, *, validate: bool = True) -> LdsrProgram:
    ts = TokenStream(text)
    rules: list[LdsrRule] = []
    decls: list[PredicateDecl] = []
    while not ts.at_eof():
        tok = ts.peek()
        if tok.kind == "directive" and tok.text != "#temp":
            decls.append(parse_declaration(ts))
            continue
        temp = False
        if tok.kind == "directive":
            ts.next()
            temp = True
        head = parse_atom(ts)
        body: list[Literal] = []
        if ts.accept_op(":-"):
            if not ts.peek().is_op("."):
                body.append(_parse_literal(ts))
                while ts.accept_op(","):
                    body.append(_parse_literal(ts))
        ts.expect_op(".")
        rules.append(LdsrRule(head, tuple(body), temp))
    program = LdsrProgram(tuple(rules), Signature(tuple(decls)))
    if validate:
        validate_program(program)
    return program


def format_program(program: LdsrProgram) -> str:
    lines = [format_decl(d) for d in program.signature.decls]
    lines += [str(r) for r in program.rules]
    return "\n".join(lines) + ("\n" if lines else "")
