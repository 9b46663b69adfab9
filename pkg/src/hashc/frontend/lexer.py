"""Tokenizer for configuration sources.

Comments are `--` to end of line and nested `{- ... -}` blocks. Comments whose
first word is `@collective` (or any `@word`) are kept aside as pragmas: the
skeleton library uses them to tag components with collective-operation
metadata. Host-code spans `{# ... #}` become single HOSTCODE tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from hashc.errors import LexError
from hashc.frontend.tokens import (
    KEYWORDS,
    MULTI_SYMBOLS,
    SINGLE_SYMBOLS,
    UNICODE_ALIASES,
    Token,
    TokenKind,
)


@dataclass
class Pragma:
    line: int
    text: str  # comment body without the leading marker, stripped


@dataclass
class LexResult:
    tokens: list[Token]
    pragmas: list[Pragma] = field(default_factory=list)


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_'"


class Lexer:
    def __init__(self, source: str):
        for alias, repl in UNICODE_ALIASES.items():
            source = source.replace(alias, repl)
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.pragmas: list[Pragma] = []

    def run(self) -> LexResult:
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch in " \t\r":
                self._advance(1)
            elif ch == "\n":
                self._advance(1)
            elif self.src.startswith("--", self.pos):
                self._line_comment()
            elif self.src.startswith("{-", self.pos):
                self._block_comment()
            elif self.src.startswith("{#", self.pos):
                self._hostcode()
            elif ch.isdigit():
                self._number()
            elif _is_ident_start(ch):
                self._word()
            else:
                self._symbol()
        self.tokens.append(Token(TokenKind.EOF, "", self.line, self.col))
        return LexResult(self.tokens, self.pragmas)

    # pieces

    def _line_comment(self) -> None:
        start_line = self.line
        end = self.src.find("\n", self.pos)
        if end < 0:
            end = len(self.src)
        body = self.src[self.pos + 2 : end].strip()
        if body.startswith("@"):
            self.pragmas.append(Pragma(start_line, body))
        self._advance(end - self.pos)

    def _block_comment(self) -> None:
        start_line, start_col = self.line, self.col
        depth = 0
        i = self.pos
        while i < len(self.src):
            if self.src.startswith("{-", i):
                depth += 1
                i += 2
            elif self.src.startswith("-}", i):
                depth -= 1
                i += 2
                if depth == 0:
                    break
            else:
                i += 1
        if depth != 0:
            raise LexError("unterminated block comment", line=start_line, col=start_col)
        body = self.src[self.pos + 2 : i - 2].strip()
        if body.startswith("@"):
            self.pragmas.append(Pragma(start_line, body))
        self._advance(i - self.pos)

    def _hostcode(self) -> None:
        start_line, start_col = self.line, self.col
        end = self.src.find("#}", self.pos + 2)
        if end < 0:
            raise LexError("unterminated host-code span", line=start_line, col=start_col)
        body = self.src[self.pos + 2 : end].strip()
        self.tokens.append(Token(TokenKind.HOSTCODE, body, start_line, start_col))
        self._advance(end + 2 - self.pos)

    def _number(self) -> None:
        start = self.pos
        start_line, start_col = self.line, self.col
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self._advance(1)
        # keep `1..n` splittable: a digit run followed by `..` is a plain INT
        self.tokens.append(Token(TokenKind.INT, self.src[start : self.pos], start_line, start_col))

    def _word(self) -> None:
        start = self.pos
        start_line, start_col = self.line, self.col
        while self.pos < len(self.src) and _is_ident_char(self.src[self.pos]):
            self._advance(1)
        text = self.src[start : self.pos]
        kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
        self.tokens.append(Token(kind, text, start_line, start_col))

    def _symbol(self) -> None:
        start_line, start_col = self.line, self.col
        for multi in MULTI_SYMBOLS:
            if self.src.startswith(multi, self.pos):
                self.tokens.append(Token(TokenKind.SYMBOL, multi, start_line, start_col))
                self._advance(len(multi))
                return
        ch = self.src[self.pos]
        if ch in SINGLE_SYMBOLS:
            self.tokens.append(Token(TokenKind.SYMBOL, ch, start_line, start_col))
            self._advance(1)
            return
        raise LexError(f"unexpected character {ch!r}", line=start_line, col=start_col)

    def _advance(self, n: int) -> None:
        for _ in range(n):
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1


def lex(source: str) -> LexResult:
    return Lexer(source).run()
