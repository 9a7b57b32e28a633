"""LARS formulas and rules: AST, surface parser and canonical printer.

Surface grammar::

    program  ::= (decl | rule)*
    rule     ::= head ["<-" [body]] "."
    head     ::= atom | ("at" | "@") "[" texpr "]" atom | "box" "(" atom "<-" body ")"
    body     ::= formula ("," formula)*
    formula  ::= disj ["->" formula]
    disj     ::= conj ("or" conj)*
    conj     ::= unary ("and" unary)*
    unary    ::= ("not" | "diamond" | "box" | "reset"
                  | ("at" | "@") "[" texpr "]" | "wplus" "[" INT "]") unary
               | "(" formula ")" | "true" | "false" | atom | texpr ("=" | "!=") texpr
    texpr    ::= VAR [("+" | "-") INT] | INT | SYMBOL
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from ..errors import ParseError, ValidationError
from ..lexer import TokenStream
from ..parsing import format_decl, parse_atom, parse_declaration
from ..terms import Atom, PredicateDecl, PredKind, Signature, Var, check_arities


@dataclass(frozen=True)
class Expr:
    """``term + offset``; term is a variable, a natural or (offset 0) a symbol."""

    term: Var | int | str
    offset: int = 0

    @property
    def var(self) -> Var | None:
        return self.term if isinstance(self.term, Var) else None

    def value(self, env) -> int | str | None:
        term = env.get(self.term) if isinstance(self.term, Var) else self.term
        if term is None:
            return None
        if self.offset == 0:
            return term
        if not isinstance(term, int):
            return _NO_VALUE
        return term + self.offset

    def substitute(self, env) -> "Expr":
        if isinstance(self.term, Var) and self.term in env:
            v = env[self.term]
            if isinstance(v, int):
                return Expr(v + self.offset)
            if isinstance(v, Var):
                return Expr(v, self.offset)
            if self.offset:
                raise ValidationError(f"cannot add {self.offset} to symbol {v}")
            return Expr(v)
        return self

    def __str__(self) -> str:
        base = str(self.term)
        if self.offset > 0:
            return f"{base}+{self.offset}"
        if self.offset < 0:
            return f"{base}-{-self.offset}"
        return base


_NO_VALUE = object()  # arithmetic on a symbol: never equal to anything


class Formula:
    """Base class of formula nodes."""

    def children(self) -> tuple:
        return ()

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class AtomF(Formula):
    atom: Atom


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Implies(Formula):
    ante: Formula
    cons: Formula

    def children(self):
        return (self.ante, self.cons)


@dataclass(frozen=True)
class Diamond(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Box(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class At(Formula):
    time: Expr
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Window(Formula):
    width: int
    arg: Formula

    def __post_init__(self):
        if not isinstance(self.width, int) or self.width < 0:
            raise ValidationError("window width is a natural number")

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Reset(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Cmp(Formula):
    op: str  # "=" or "!="
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        if self.op not in ("=", "!="):
            raise ValidationError(f"unknown comparison {self.op!r}")


TRUE = Top()
FALSE = Bottom()


def conj(*parts: Formula) -> Formula:
    """n-ary conjunction, flattened, with ``true`` units dropped."""
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            out.extend(p.args)
        elif isinstance(p, Bottom):
            return FALSE
        elif not isinstance(p, Top):
            out.append(p)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*parts: Formula) -> Formula:
    """n-ary disjunction, flattened, with ``false`` units dropped."""
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            out.extend(p.args)
        elif isinstance(p, Top):
            return TRUE
        elif not isinstance(p, Bottom):
            out.append(p)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    for c in phi.children():
        yield from walk(c)


def formula_vars(phi: Formula) -> Iterator[Var]:
    for node in walk(phi):
        if isinstance(node, AtomF):
            yield from node.atom.variables()
        elif isinstance(node, At) and node.time.var is not None:
            yield node.time.var
        elif isinstance(node, Cmp):
            for e in (node.lhs, node.rhs):
                if e.var is not None:
                    yield e.var


def formula_atoms(phi: Formula) -> Iterator[Atom]:
    for node in walk(phi):
        if isinstance(node, AtomF):
            yield node.atom


def time_vars(phi: Formula) -> set[Var]:
    return {n.time.var for n in walk(phi) if isinstance(n, At) and n.time.var is not None}


def substitute(phi: Formula, env) -> Formula:
    if not env:
        return phi
    if isinstance(phi, AtomF):
        return AtomF(phi.atom.substitute(env))
    if isinstance(phi, (Top, Bottom)):
        return phi
    if isinstance(phi, Cmp):
        return Cmp(phi.op, phi.lhs.substitute(env), phi.rhs.substitute(env))
    if isinstance(phi, At):
        return At(phi.time.substitute(env), substitute(phi.arg, env))
    if isinstance(phi, Window):
        return Window(phi.width, substitute(phi.arg, env))
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(substitute(a, env) for a in phi.args))
    if isinstance(phi, Implies):
        return Implies(substitute(phi.ante, env), substitute(phi.cons, env))
    return type(phi)(substitute(phi.arg, env))


def rebuild(phi: Formula) -> Formula:
    """Structural copy with fresh node objects (so ``id`` identifies occurrences)."""
    if isinstance(phi, AtomF):
        return AtomF(phi.atom)
    if isinstance(phi, (Top, Bottom)):
        return type(phi)()
    if isinstance(phi, Cmp):
        return Cmp(phi.op, phi.lhs, phi.rhs)
    if isinstance(phi, At):
        return At(phi.time, rebuild(phi.arg))
    if isinstance(phi, Window):
        return Window(phi.width, rebuild(phi.arg))
    if isinstance(phi, (And, Or)):
        return type(phi)(tuple(rebuild(a) for a in phi.args))
    if isinstance(phi, Implies):
        return Implies(rebuild(phi.ante), rebuild(phi.cons))
    return type(phi)(rebuild(phi.arg))


# -- rules and programs --------------------------------------------------------------


@dataclass(frozen=True)
class LarsRule:
    """``head <- body``; head is an atom, an @-atom or a boxed implication."""

    head: Formula
    body: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))
        head_atom(self.head)  # validates the head shape

    def formulas(self) -> tuple:
        return (self.head,) + self.body

    def variables(self) -> set[Var]:
        out: set[Var] = set()
        for f in self.formulas():
            out.update(formula_vars(f))
        return out

    def __str__(self) -> str:
        return format_rule(self)


def head_atom(head: Formula) -> Atom:
    """The predicate atom a head derives; raises for unsupported head shapes."""
    if isinstance(head, AtomF):
        return head.atom
    if isinstance(head, At) and isinstance(head.arg, AtomF):
        return head.arg.atom
    if isinstance(head, Box) and isinstance(head.arg, Implies) and isinstance(head.arg.cons, AtomF):
        return head.arg.cons.atom
    raise ValidationError(f"unsupported rule head {format_formula(head)}: expected an atom, @-atom or box(atom <- ...)")


@dataclass(frozen=True)
class LarsProgram:
    rules: tuple = ()
    signature: Signature = field(default_factory=Signature)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))

    def head_preds(self) -> set[str]:
        return {head_atom(r.head).pred for r in self.rules}

    def kind(self, pred: str) -> PredKind:
        return self.signature.kind(pred, self.head_preds())

    def atoms(self) -> Iterator[Atom]:
        for r in self.rules:
            for f in r.formulas():
                yield from formula_atoms(f)

    def preds(self) -> set[str]:
        return {a.pred for a in self.atoms()} | {d.name for d in self.signature.decls}

    def constants(self) -> set:
        out: set = set()
        for a in self.atoms():
            out.update(x for x in a.args if not isinstance(x, Var))
        return out

    def __str__(self) -> str:
        return format_lars(self)


def validate_lars(program: LarsProgram) -> None:
    check_arities(program.atoms(), program.signature)


# -- printer -------------------------------------------------------------------------

_BINARY = (And, Or, Implies)


def _wrap(phi: Formula) -> str:
    s = format_formula(phi)
    return f"({s})" if isinstance(phi, _BINARY) else s


def format_formula(phi: Formula) -> str:
    if isinstance(phi, AtomF):
        return str(phi.atom)
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Cmp):
        return f"{phi.lhs} {phi.op} {phi.rhs}"
    if isinstance(phi, And):
        return " and ".join(_wrap(a) for a in phi.args)
    if isinstance(phi, Or):
        return " or ".join(_wrap(a) for a in phi.args)
    if isinstance(phi, Implies):
        return f"{_wrap(phi.ante)} -> {_wrap(phi.cons)}"
    if isinstance(phi, Cmp):
        return f"{phi.lhs} {phi.op} {phi.rhs}"
    if isinstance(phi, Not):
        prefix = "not"
    elif isinstance(phi, Diamond):
        prefix = "diamond"
    elif isinstance(phi, Box):
        prefix = "box"
    elif isinstance(phi, Reset):
        prefix = "reset"
    elif isinstance(phi, At):
        prefix = f"at[{phi.time}]"
    elif isinstance(phi, Window):
        prefix = f"wplus[{phi.width}]"
    else:
        raise TypeError(f"not a formula: {phi!r}")
    arg = phi.arg
    inner = f"({format_formula(arg)})" if isinstance(arg, _BINARY + (Cmp,)) else format_formula(arg)
    return f"{prefix} {inner}"


def _format_body(parts: Iterable[Formula]) -> str:
    return ", ".join(_wrap(p) if isinstance(p, Implies) else format_formula(p) for p in parts)


def format_rule(rule: LarsRule) -> str:
    h = rule.head
    if isinstance(h, Box):
        imp = h.arg
        prem = imp.ante.args if isinstance(imp.ante, And) else (imp.ante,)
        head = f"box( {format_formula(imp.cons)} <- {_format_body(prem)} )"
    else:
        head = format_formula(h)
    if not rule.body:
        return f"{head}."
    return f"{head} <- {_format_body(rule.body)}."


def format_lars(program: LarsProgram) -> str:
    lines = [format_decl(d) for d in program.signature.decls]
    lines += [format_rule(r) for r in program.rules]
    return "\n".join(lines) + ("\n" if lines else "")


# -- parser --------------------------------------------------------------------------


def _parse_texpr(ts: TokenStream) -> Expr:
    tok = ts.next()
    if tok.kind == "int":
        return Expr(int(tok.text))
    if tok.kind == "ident":
        return Expr(tok.text)
    if tok.kind != "var":
        raise ts.error("expected a time expression", tok)
    var = Var(tok.text)
    if ts.peek().is_op("+") or ts.peek().is_op("-"):
        sign = 1 if ts.next().text == "+" else -1
        k = int(ts.expect_kind("int", "an integer offset").text)
        return Expr(var, sign * k)
    return Expr(var)


def _at_prefix(ts: TokenStream) -> bool:
    """``at[...]`` or its symbolic spelling ``@[...]``."""
    tok = ts.peek()
    return (tok.is_word("at") or tok.is_op("@")) and ts.peek(1).is_op("[")


def _parse_at_time(ts: TokenStream) -> Expr:
    ts.next()
    ts.next()
    e = _parse_texpr(ts)
    ts.expect_op("]")
    return e


def _parse_unary(ts: TokenStream) -> Formula:
    tok = ts.peek()
    if tok.is_word("not"):
        ts.next()
        return Not(_parse_unary(ts))
    if tok.is_word("diamond"):
        ts.next()
        return Diamond(_parse_unary(ts))
    if tok.is_word("box"):
        ts.next()
        return Box(_parse_unary(ts))
    if tok.is_word("reset"):
        ts.next()
        return Reset(_parse_unary(ts))
    if _at_prefix(ts):
        return At(_parse_at_time(ts), _parse_unary(ts))
    if tok.is_word("wplus") and ts.peek(1).is_op("["):
        ts.next()
        ts.next()
        w = int(ts.expect_kind("int", "a window width").text)
        ts.expect_op("]")
        return Window(w, _parse_unary(ts))
    if ts.accept_op("("):
        phi = _parse_formula(ts)
        ts.expect_op(")")
        return phi
    if tok.is_word("true"):
        ts.next()
        return TRUE
    if tok.is_word("false"):
        ts.next()
        return FALSE
    if tok.kind in ("var", "int") or (tok.kind == "ident" and (ts.peek(1).is_op("=") or ts.peek(1).is_op("!="))):
        lhs = _parse_texpr(ts)
        op = ts.next()
        if not (op.is_op("=") or op.is_op("!=")):
            raise ts.error("expected '=' or '!='", op)
        return Cmp(op.text, lhs, _parse_texpr(ts))
    return AtomF(parse_atom(ts))


def _parse_conj(ts: TokenStream) -> Formula:
    parts = [_parse_unary(ts)]
    while ts.accept_word("and"):
        parts.append(_parse_unary(ts))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_disj(ts: TokenStream) -> Formula:
    parts = [_parse_conj(ts)]
    while ts.accept_word("or"):
        parts.append(_parse_conj(ts))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_formula(ts: TokenStream) -> Formula:
    left = _parse_disj(ts)
    if ts.accept_op("->"):
        return Implies(left, _parse_formula(ts))
    return left


def _parse_body(ts: TokenStream, stop: str) -> list[Formula]:
    if ts.peek().is_op(stop):
        return []
    parts = [_parse_formula(ts)]
    while ts.accept_op(","):
        parts.append(_parse_formula(ts))
    return parts


def _parse_head(ts: TokenStream) -> Formula:
    if ts.peek().is_word("box") and ts.peek(1).is_op("("):
        ts.next()
        ts.next()
        cons = AtomF(parse_atom(ts))
        ts.expect_op("<-")
        prem = _parse_body(ts, ")")
        ts.expect_op(")")
        if not prem:
            raise ts.error("a boxed rule needs at least one premise")
        ante = prem[0] if len(prem) == 1 else And(tuple(prem))
        return Box(Implies(ante, cons))
    if _at_prefix(ts):
        return At(_parse_at_time(ts), AtomF(parse_atom(ts)))
    return AtomF(parse_atom(ts))


def parse_formula(text: str) -> Formula:
    ts = TokenStream(text)
    phi = _parse_formula(ts)
    if not ts.at_eof():
        raise ts.error("unexpected trailing input")
    return phi


def parse_lars(text: str, *, validate: bool = True) -> LarsProgram:
    ts = TokenStream(text)
    rules: list[LarsRule] = []
    decls: list[PredicateDecl] = []
    while not ts.at_eof():
        if ts.peek().kind == "directive":
            decls.append(parse_declaration(ts))
            continue
        tok = ts.peek()
        head = _parse_head(ts)
        body: list[Formula] = []
        if ts.accept_op("<-"):
            body = _parse_body(ts, ".")
        ts.expect_op(".")
        try:
            rules.append(LarsRule(head, tuple(body)))
        except ValidationError as e:
            raise ParseError(str(e), tok.line, tok.col) from None
    program = LarsProgram(tuple(rules), Signature(tuple(decls)))
    if validate:
        validate_lars(program)
    return program
