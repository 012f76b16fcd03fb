"""Infix filter language used on the command line.

    expr := and ('|' and)*
    and  := unary ('&' unary)*
    unary := '~' unary | '(' expr ')' | NAME op literal
    op   := '>' | '<' | '==' | '%'

Numbers are bare, strings double-quoted (``\\"`` and ``\\\\`` escape).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import AfluxError
from .expr import FilterExpr, Not, Op, compare, combine

OPERATORS = {">": Op.GT, "<": Op.LT, "==": Op.EQ, "%": Op.CONTAINS}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<op>[<>=!%]+)
  | (?P<punct>[&|~()])
""", re.VERBOSE)


class DslSyntaxError(AfluxError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        self.message = message
        super().__init__(f"{message} at column {position + 1}")

    def render(self) -> str:
        return f"{self}\n  {self.text}\n  {' ' * self.position}^"


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == '"':
                raise DslSyntaxError("unterminated string", text, pos)
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind == "op" and m.group() not in OPERATORS:
            raise DslSyntaxError(f"unknown operator {m.group()!r}; expected one of > < == %",
                                 text, pos)
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str) -> DslSyntaxError:
        return DslSyntaxError(message, self.text, self.tok.pos)

    def punct(self, ch: str) -> bool:
        if self.tok.kind == "punct" and self.tok.text == ch:
            self.i += 1
            return True
        return False

    def parse(self) -> FilterExpr:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> FilterExpr:
        node = self.conj()
        while self.punct("|"):
            node = combine("OR", node, self.conj())
        return node

    def conj(self) -> FilterExpr:
        node = self.unary()
        while self.punct("&"):
            node = combine("AND", node, self.unary())
        return node

    def unary(self) -> FilterExpr:
        if self.punct("~"):
            return Not(self.unary())
        if self.punct("("):
            node = self.expr()
            if not self.punct(")"):
                raise self.error("expected ')'")
            return node
        if self.tok.kind != "name":
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected a keyword, found {what}")
        name = self.tok.text
        self.i += 1
        if self.tok.kind != "op":
            raise self.error("expected one of > < == %")
        op_token = self.tok
        self.i += 1
        literal = self.literal()
        try:
            return compare(name, OPERATORS[op_token.text], literal)
        except AfluxError as exc:
            raise DslSyntaxError(str(exc), self.text, op_token.pos) from None

    def literal(self):
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return float(tok.text)
        if tok.kind == "string":
            self.i += 1
            return re.sub(r"\\(.)", r"\1", tok.text[1:-1])
        raise self.error("expected a number or a double-quoted string")


def parse_filter_dsl(text: str) -> FilterExpr:
    return _Parser(text).parse()
