"""Tokenizer shared by the LDSR, LARS and stream-file readers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<directive>\#[a-z]+)
  | (?P<int>\d+)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<ident>[a-z_][A-Za-z0-9_]*)
  | (?P<op>:-|<-|->|!=|[()\[\]{},.=+\-/:@])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # int | var | ident | op | directive | eof
    text: str
    line: int
    col: int

    def is_op(self, text: str) -> bool:
        return self.kind == "op" and self.text == text

    def is_word(self, text: str) -> bool:
        return self.kind == "ident" and self.text == text


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual peek/expect helpers."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return tok

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        found = tok.text or "end of input"
        return ParseError(f"{message} (found {found!r})", tok.line, tok.col)

    def accept_op(self, text: str) -> bool:
        if self.peek().is_op(text):
            self.next()
            return True
        return False

    def accept_word(self, text: str) -> bool:
        if self.peek().is_word(text):
            self.next()
            return True
        return False

    def expect_op(self, text: str) -> Token:
        if not self.peek().is_op(text):
            raise self.error(f"expected {text!r}")
        return self.next()

    def expect_word(self, text: str) -> Token:
        if not self.peek().is_word(text):
            raise self.error(f"expected {text!r}")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.peek().kind != kind:
            raise self.error(f"expected {what}")
        return self.next()
