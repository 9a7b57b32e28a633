"""Grammar pieces common to both program languages and the stream format."""

from __future__ import annotations

from .errors import ParseError
from .lexer import TokenStream
from .terms import Atom, PredicateDecl, PredKind, Term, Var

DIRECTIVES = {
    "#stream": PredKind.STREAM,
    "#background": PredKind.BACKGROUND,
    "#intensional": PredKind.INTENSIONAL,
}


def parse_term(ts: TokenStream) -> Term:
    tok = ts.next()
    if tok.kind == "int":
        return int(tok.text)
    if tok.kind == "var":
        return Var(tok.text)
    if tok.kind == "ident":
        return tok.text
    raise ts.error("expected a term", tok)


def parse_atom(ts: TokenStream) -> Atom:
    tok = ts.expect_kind("ident", "a predicate name")
    args: list[Term] = []
    if ts.accept_op("("):
        args.append(parse_term(ts))
        while ts.accept_op(","):
            args.append(parse_term(ts))
        ts.expect_op(")")
    return Atom(tok.text, tuple(args))


def parse_declaration(ts: TokenStream) -> PredicateDecl:
    tok = ts.next()
    kind = DIRECTIVES.get(tok.text)
    if kind is None:
        raise ParseError(f"unknown directive {tok.text}", tok.line, tok.col)
    name = ts.expect_kind("ident", "a predicate name").text
    ts.expect_op("/")
    arity = int(ts.expect_kind("int", "an arity").text)
    ts.expect_op(".")
    return PredicateDecl(name, kind, arity)


def parse_offsets(ts: TokenStream) -> frozenset[int]:
    """``{d1,...,dm}`` or the window shorthand ``[w]`` (= ``{0,...,w}``)."""
    if ts.accept_op("["):
        w = int(ts.expect_kind("int", "a window width").text)
        ts.expect_op("]")
        return frozenset(range(w + 1))
    ts.expect_op("{")
    items = [int(ts.expect_kind("int", "an offset").text)]
    while ts.accept_op(","):
        items.append(int(ts.expect_kind("int", "an offset").text))
    ts.expect_op("}")
    return frozenset(items)


def format_offsets(offsets: frozenset[int]) -> str:
    ds = sorted(offsets)
    if len(ds) > 1 and ds == list(range(len(ds))):
        return f"[{ds[-1]}]"
    return "{" + ",".join(map(str, ds)) + "}"


def format_decl(d: PredicateDecl) -> str:
    return f"#{d.kind.value} {d.name}/{d.arity}."


def parse_signature(text: str) -> tuple[PredicateDecl, ...]:
    """A declarations-only file, as shared by several programs."""
    ts = TokenStream(text)
    decls: list[PredicateDecl] = []
    while not ts.at_eof():
        if ts.peek().kind != "directive":
            raise ts.error("expected a declaration", ts.peek())
        decls.append(parse_declaration(ts))
    return tuple(decls)
