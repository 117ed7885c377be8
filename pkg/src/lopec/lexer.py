"""Tokenizer for ``.lope`` source.

Fortran-flavoured lexical rules:

* keywords and identifiers are case-insensitive and normalized to lowercase;
* ``!`` starts a comment running to end of line;
* a trailing ``&`` continues the logical line onto the next physical line
  (an optional leading ``&`` on the continued line is consumed as well);
* physical line ends otherwise produce NEWLINE tokens, which terminate
  statements.

Tokens carry their 1-based source position.  Unknown characters raise
``LexError`` (code E001) at the offending position; the lexer never returns
a partial stream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, auto

from .diagnostics import LEX_ERROR, LexError, SourcePos, error


class TokenKind(Enum):
    KW = auto()
    IDENT = auto()
    INT = auto()
    REAL = auto()
    STRING = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACK = auto()
    RBRACK = auto()
    DLBRACK = auto()   # [[
    DRBRACK = auto()   # ]]
    COMMA = auto()
    COLON = auto()
    DCOLON = auto()    # ::
    PLUS = auto()
    MINUS = auto()
    STAR = auto()
    SLASH = auto()
    ASSIGN = auto()    # =
    EQ = auto()        # ==
    NE = auto()        # /=
    LT = auto()
    GT = auto()
    NEWLINE = auto()
    EOF = auto()


KEYWORDS = frozenset({
    "program", "end", "subroutine", "pure", "concurrent",
    "real", "integer", "logical",
    "allocatable", "dimension", "codimension",
    "halo", "halo_src", "halo_transfer", "get_subimage",
    "allocate", "deallocate",
    "do", "call", "if", "then", "bc", "cyclic",
})


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    pos: SourcePos

    def is_kw(self, word: str) -> bool:
        return self.kind is TokenKind.KW and self.text == word

    def __repr__(self) -> str:  # compact, for test failure readability
        return f"{self.kind.name}({self.text!r}@{self.pos.line}:{self.pos.col})"


# Longest alternatives first so maximal munch wins ([[ before [, == before =,
# reals before ints).
_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>![^\n]*)
  | (?P<cont>&)
  | (?P<newline>\n)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eEdD][+-]?\d+)?|\d+[eEdD][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<dlbrack>\[\[)
  | (?P<drbrack>\]\])
  | (?P<dcolon>::)
  | (?P<eq>==)
  | (?P<ne>/=)
  | (?P<op>[()\[\],:+\-*/=<>])
""", re.VERBOSE)

_SINGLE_OPS = {
    "(": TokenKind.LPAREN, ")": TokenKind.RPAREN,
    "[": TokenKind.LBRACK, "]": TokenKind.RBRACK,
    ",": TokenKind.COMMA, ":": TokenKind.COLON,
    "+": TokenKind.PLUS, "-": TokenKind.MINUS,
    "*": TokenKind.STAR, "/": TokenKind.SLASH,
    "=": TokenKind.ASSIGN, "<": TokenKind.LT, ">": TokenKind.GT,
}


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    """Convert source text into a token list ending in a single EOF token."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)

    def here() -> SourcePos:
        return SourcePos(filename, line, pos - line_start + 1)

    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(error(
                LEX_ERROR, here(), f"illegal character {text[pos]!r}"))
        kind = m.lastgroup
        lexeme = m.group()
        start = here()
        pos = m.end()

        if kind == "ws" or kind == "comment":
            continue
        if kind == "newline":
            tokens.append(Token(TokenKind.NEWLINE, "\n", start))
            line += 1
            line_start = pos
            continue
        if kind == "cont":
            # Trailing continuation: absorb spaces, an optional comment, the
            # line break, leading spaces on the next line, and an optional
            # leading '&' marker.  No NEWLINE token is produced.
            while pos < n and text[pos] in " \t\r":
                pos += 1
            if pos < n and text[pos] == "!":
                while pos < n and text[pos] != "\n":
                    pos += 1
            if pos >= n or text[pos] != "\n":
                raise LexError(error(
                    LEX_ERROR, start, "line continuation '&' not at end of line"))
            pos += 1
            line += 1
            line_start = pos
            while pos < n and text[pos] in " \t\r":
                pos += 1
            if pos < n and text[pos] == "&":
                pos += 1
            continue
        if kind == "ident":
            word = lexeme.lower()
            tk = TokenKind.KW if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(tk, word, start))
            continue
        if kind == "real":
            tokens.append(Token(TokenKind.REAL, lexeme, start))
            continue
        if kind == "int":
            tokens.append(Token(TokenKind.INT, lexeme, start))
            continue
        if kind == "string":
            tokens.append(Token(TokenKind.STRING, lexeme[1:-1], start))
            continue
        if kind == "dlbrack":
            tokens.append(Token(TokenKind.DLBRACK, lexeme, start))
            continue
        if kind == "drbrack":
            tokens.append(Token(TokenKind.DRBRACK, lexeme, start))
            continue
        if kind == "dcolon":
            tokens.append(Token(TokenKind.DCOLON, lexeme, start))
            continue
        if kind == "eq":
            tokens.append(Token(TokenKind.EQ, lexeme, start))
            continue
        if kind == "ne":
            tokens.append(Token(TokenKind.NE, lexeme, start))
            continue
        if kind == "op":
            tokens.append(Token(_SINGLE_OPS[lexeme], lexeme, start))
            continue
        raise AssertionError(f"unhandled token class {kind}")  # pragma: no cover

    tokens.append(Token(TokenKind.EOF, "", here()))
    return tokens


def real_value(text: str) -> float:
    """Numeric value of a REAL token (Fortran 'd' exponents accepted)."""
    return float(text.replace("d", "e").replace("D", "e"))
