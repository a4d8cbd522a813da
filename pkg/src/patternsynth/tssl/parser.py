"""Recursive-descent parser for the formula language.

Grammar (CTL-like, LL(1) after tokenization; `#` starts a line comment):

    formula  := and_expr ('|' and_expr)*
    and_expr := unary ('&' unary)*
    unary    := '!' unary | quant | primary
    quant    := ('E' | 'A') dirset tail
    tail     := 'X' unary
              | 'F' INT unary
              | 'G' INT unary
              | '[' formula 'U' INT formula ']'
    primary  := 'true' | 'false' | '(' formula ')' | VAR ('<=' | '>=') NUMBER
    dirset   := '*' | '{' DIR (',' DIR)* '}'

Disjunction and F/G desugar while parsing, so the result uses core nodes
only. VAR is `m` (alias of `m1`) or `m<index>`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import UsageError
from ..quadtree import DIRECTIONS
from . import syntax as S


class ParseError(UsageError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        loc = f"{line}:{col}"
        exp = f" (expected {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{loc}: {message}{exp}")
        self.line = line
        self.col = col
        self.expected = tuple(sorted(expected))


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM, NAME, SYM, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<num>\d+(\.\d*)?([eE][-+]?\d+)?|\.\d+([eE][-+]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<sym><=|>=|[(){}\[\],&|!*])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        pos = m.end()
        if m.lastgroup == "nl":
            line += 1
            col = 1
            continue
        if m.lastgroup in ("ws", "comment"):
            col += len(m.group())
            continue
        kind = {"num": "NUM", "name": "NAME", "sym": "SYM"}[m.lastgroup]
        tokens.append(_Token(kind, m.group(), line, col))
        col += len(m.group())
    tokens.append(_Token("EOF", "", line, col))
    return tokens


_VAR_RE = re.compile(r"m([1-9]\d*)?\Z")


class _Parser:
    def __init__(self, tokens: list[_Token], value_bound: float):
        self.tokens = tokens
        self.pos = 0
        self.bound = value_bound

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, expected=(), tok: _Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col, expected)

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            self.error(f"got {tok.text or 'end of input'!r}", expected=(repr(text),))
        return self.advance()

    def parse_formula(self) -> S.Formula:
        node = self.parse_and()
        while self.peek().text == "|":
            self.advance()
            node = S.or_(node, self.parse_and())
        return node

    def parse_and(self) -> S.Formula:
        node = self.parse_unary()
        while self.peek().text == "&":
            self.advance()
            node = S.And(node, self.parse_unary())
        return node

    def parse_unary(self) -> S.Formula:
        tok = self.peek()
        if tok.text == "!":
            self.advance()
            return S.Not(self.parse_unary())
        if tok.text in ("E", "A"):
            return self.parse_quantified()
        return self.parse_primary()

    def parse_quantified(self) -> S.Formula:
        quant = self.advance().text
        dirs = self.parse_dirset()
        tok = self.peek()
        if tok.text == "X":
            self.advance()
            sub = self.parse_unary()
            return S.ExistsNext(dirs, sub) if quant == "E" else S.ForallNext(dirs, sub)
        if tok.text in ("F", "G"):
            self.advance()
            bound = self.parse_bound()
            sub = self.parse_unary()
            if tok.text == "F":
                return (S.exists_finally(dirs, bound, sub) if quant == "E"
                        else S.forall_finally(dirs, bound, sub))
            return (S.exists_globally(dirs, bound, sub) if quant == "E"
                    else S.forall_globally(dirs, bound, sub))
        if tok.text == "[":
            self.advance()
            left = self.parse_formula()
            self.expect("U")
            bound = self.parse_bound()
            right = self.parse_formula()
            self.expect("]")
            return (S.ExistsUntil(dirs, left, bound, right) if quant == "E"
                    else S.ForallUntil(dirs, left, bound, right))
        self.error(f"got {tok.text or 'end of input'!r} after path quantifier",
                   expected=("'X'", "'F'", "'G'", "'['"))

    def parse_dirset(self) -> frozenset:
        tok = self.peek()
        if tok.text == "*":
            self.advance()
            return frozenset(DIRECTIONS)
        if tok.text != "{":
            self.error(f"got {tok.text or 'end of input'!r}", expected=("'*'", "'{'"))
        self.advance()
        dirs = set()
        if self.peek().text == "}":
            self.error("empty direction set", expected=tuple(DIRECTIONS))
        while True:
            tok = self.advance()
            if tok.text not in DIRECTIONS:
                self.error(f"got {tok.text or 'end of input'!r}",
                           expected=tuple(DIRECTIONS), tok=tok)
            dirs.add(tok.text)
            tok = self.advance()
            if tok.text == "}":
                return frozenset(dirs)
            if tok.text != ",":
                self.error(f"got {tok.text or 'end of input'!r}",
                           expected=("','", "'}'"), tok=tok)

    def parse_bound(self) -> int:
        tok = self.peek()
        if tok.kind != "NUM" or "." in tok.text or "e" in tok.text.lower():
            self.error(f"got {tok.text or 'end of input'!r}",
                       expected=("positive integer bound",))
        self.advance()
        bound = int(tok.text)
        if bound < 1:
            self.error("until/eventually bound must be >= 1", tok=tok)
        return bound

    def parse_primary(self) -> S.Formula:
        tok = self.peek()
        if tok.text == "true":
            self.advance()
            return S.Top()
        if tok.text == "false":
            self.advance()
            return S.Bottom()
        if tok.text == "(":
            self.advance()
            node = self.parse_formula()
            self.expect(")")
            return node
        if tok.kind == "NAME":
            if not _VAR_RE.match(tok.text):
                self.error(f"got {tok.text!r}",
                           expected=("variable m or m<index>", "'true'", "'false'", "'('"))
            self.advance()
            var = "m1" if tok.text == "m" else tok.text
            op_tok = self.peek()
            if op_tok.text not in ("<=", ">="):
                self.error(f"got {op_tok.text or 'end of input'!r}",
                           expected=("'<='", "'>='"))
            self.advance()
            num_tok = self.peek()
            if num_tok.kind != "NUM":
                self.error(f"got {num_tok.text or 'end of input'!r}",
                           expected=("number",))
            self.advance()
            threshold = float(num_tok.text)
            if not (0.0 <= threshold <= self.bound):
                self.error(f"threshold {num_tok.text} outside [0, {self.bound:g}]",
                           tok=num_tok)
            return S.Atom(var, op_tok.text, threshold)
        self.error(f"got {tok.text or 'end of input'!r}",
                   expected=("'true'", "'false'", "'('", "'!'", "'E'", "'A'", "variable"))


def parse(text: str, value_bound: float = 1.0) -> S.Formula:
    """Parse a formula; raises ParseError with line/column and the expected
    tokens on malformed input."""
    parser = _Parser(_tokenize(text), value_bound)
    node = parser.parse_formula()
    tok = parser.peek()
    if tok.kind != "EOF":
        parser.error(f"trailing input {tok.text!r}", expected=("end of input",))
    return node


def parse_file(path, value_bound: float = 1.0) -> S.Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), value_bound)
