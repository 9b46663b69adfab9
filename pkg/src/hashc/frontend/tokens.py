from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    INT = "int"
    SYMBOL = "symbol"
    HOSTCODE = "hostcode"  # {# ... #} span, verbatim
    EOF = "eof"


# Terminals of the configuration grammar. `with` appears in every configuration
# header; the rest of the tail are accepted extensions (see NONSTANDARD).
KEYWORDS = frozenset(
    {
        "component",
        "iterator",
        "range",
        "use",
        "interface",
        "behavior",
        "behaviour",
        "unit",
        "assign",
        "to",
        "wire",
        "connect",
        "unify",
        "factorize",
        "replicate",
        "replace",
        "bind",
        "repeat",
        "until",
        "counter",
        "seq",
        "par",
        "alt",
        "if",
        "then",
        "else",
        "signal",
        "wait",
        "sem",
        "all",
        "any",
        "synchronous",
        "buffered",
        "ready",
        "adjust",
        "into",
        "by",
        "where",
        "import",
        "groups",
        "skip",
        "do",
        "with",
        "mod",
        "configuration",
        "from",
        "specializes",
        "generalization",
    }
)

# Accepted but flagged with a nonstandard-syntax warning by the parser.
NONSTANDARD = frozenset({"configuration", "from", "specializes", "generalization"})

MULTI_SYMBOLS = ("->", "<-", "=>", "::", "..", "[/", "/]")
SINGLE_SYMBOLS = set("()[]{}<>,;:.#@*!?_|&+-/%=")

# Unicode spellings that occur in hand-written sources.
UNICODE_ALIASES = {
    "→": "->",  # right arrow
    "←": "<-",
    "⟨": "<",  # angle brackets of sync conjunctions
    "⟩": ">",
    "×": "*",
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int

    def is_kw(self, *names: str) -> bool:
        if self.kind is not TokenKind.KEYWORD:
            return False
        return not names or self.text in names

    def is_sym(self, *texts: str) -> bool:
        if self.kind is not TokenKind.SYMBOL:
            return False
        return not texts or self.text in texts

    def __repr__(self) -> str:  # compact, for diagnostics
        return f"{self.kind.value}:{self.text!r}@{self.line}:{self.col}"
