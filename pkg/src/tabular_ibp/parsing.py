"""Text to expression parsing.

Grammar: infix + - * / ^ with standard precedence, ^ right-associative and
binding tighter than unary minus, explicit * required (no implicit
multiplication), integer literals (rationals are written p/q), whitelisted
function calls like ln(x), and parentheses.  Results come back canonicalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import (
    Expr, Const, Sym, FUNCTIONS, add, mul, power, negate, subtract, divide,
    canonicalize, _build_fun,
)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | eof
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                raise ParseError("decimal literals are not supported; use p/q rationals",
                                 SourceSpan(i, j + 1))
            tokens.append(_Token("num", text[i:j], SourceSpan(i, j)))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], SourceSpan(i, j)))
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, SourceSpan(i, i + 1)))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, SourceSpan(i, i + 1)))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, SourceSpan(i, i + 1)))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", SourceSpan(i, i + 1))
    tokens.append(_Token("eof", "", SourceSpan(n, n)))
    return tokens


_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25  # binds tighter than * but looser than ^, so -x^2 = -(x^2)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_rparen(self, open_span: SourceSpan) -> None:
        tok = self.peek()
        if tok.kind != "rparen":
            if tok.kind == "eof":
                raise ParseError("unbalanced parenthesis", open_span)
            raise ParseError(f"expected ')' but found {tok.text!r}", tok.span)
        self.next()

    def parse_expr(self, rbp: int) -> Expr:
        left = self.parse_prefix()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in _BINARY_BP:
                lbp = _BINARY_BP[tok.text]
                if lbp <= rbp:
                    break
                self.next()
                # right-associativity for ^ via a lowered right binding power
                right = self.parse_expr(lbp - 1 if tok.text == "^" else lbp)
                left = self.combine(tok.text, left, right)
                continue
            if tok.kind in ("num", "ident", "lparen"):
                raise ParseError(
                    "implicit multiplication is not allowed; write '*'", tok.span)
            break
        return left

    def parse_prefix(self) -> Expr:
        tok = self.next()
        if tok.kind == "num":
            return Const(Fraction(int(tok.text)))
        if tok.kind == "ident":
            if self.peek().kind == "lparen":
                if tok.text not in FUNCTIONS:
                    raise ParseError(
                        f"unknown function {tok.text!r} (expected one of {', '.join(FUNCTIONS)})",
                        tok.span)
                open_tok = self.next()
                arg = self.parse_expr(0)
                self.expect_rparen(open_tok.span)
                return _build_fun(tok.text, arg)
            return Sym(tok.text)
        if tok.kind == "lparen":
            inner = self.parse_expr(0)
            self.expect_rparen(tok.span)
            return inner
        if tok.kind == "op" and tok.text == "-":
            return negate(self.parse_expr(_UNARY_BP))
        if tok.kind == "op" and tok.text == "+":
            return self.parse_expr(_UNARY_BP)
        if tok.kind == "eof":
            raise ParseError("unexpected end of input", tok.span)
        raise ParseError(f"unexpected token {tok.text!r}", tok.span)

    @staticmethod
    def combine(op: str, a: Expr, b: Expr) -> Expr:
        if op == "+":
            return add(a, b)
        if op == "-":
            return subtract(a, b)
        if op == "*":
            return mul(a, b)
        if op == "/":
            return divide(a, b)
        return power(a, b)


def parse(text: str) -> Expr:
    """Parse the ASCII expression grammar into a canonical Expr.

    Raises ParseError (with a SourceSpan into the input) on malformed input.
    """
    if not text.strip():
        raise ParseError("empty input", SourceSpan(0, len(text)))
    p = _Parser(text)
    result = p.parse_expr(0)
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.span)
    return canonicalize(result)


def parse_rational(text: str) -> Fraction:
    """Parse an integer or p/q literal as an exact rational."""
    got = parse(text)
    if not isinstance(got, Const):
        raise ParseError("expected a rational literal", SourceSpan(0, len(text)))
    return got.value
