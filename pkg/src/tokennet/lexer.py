"""Tokenizer shared by the rule-spec and expression parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NoReturn

from .errors import ParseError

# Backslashes count as whitespace so pasted line-continuations are harmless.
_TOKEN_RE = re.compile(
    r"""
     (?P<ws>[\s\\]+)
    |(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    |(?P<name>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<arrow>->)
    |(?P<cmp>[<>=!]+)
    |(?P<op>[-+*/])
    |(?P<punct>[.;()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, arrow, cmp, op, punct, end
    value: str
    pos: int  # character index into the source text


def byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def fail(text: str, index: int, message: str, exc: type[ParseError] = ParseError) -> NoReturn:
    raise exc(message, text, byte_offset(text, index))


def tokenize(text: str) -> list[Token]:
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}", "", 0)
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            fail(text, i, f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), i))
        i = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def describe(tok: Token) -> str:
    return "end of input" if tok.kind == "end" else repr(tok.value)


class TokenStream:
    """Cursor over a token list; ``tokens`` must end with an ``end`` token."""

    def __init__(self, text: str, tokens: list[Token]):
        self.text = text
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "end":
            self.i += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind: str, value: str | None, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            self.error(f"expected {what}, found {describe(tok)}", tok)
        return self.next()

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected {describe(tok)} after complete input", tok)

    def error(self, message: str, tok: Token | None = None, exc: type[ParseError] = ParseError) -> NoReturn:
        tok = tok or self.peek()
        fail(self.text, tok.pos, message, exc)
