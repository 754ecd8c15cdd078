"""Tokenizer for the supported SELECT-statement grammar.

Bare words are emitted as NAME tokens; the parser decides keyword-ness
case-insensitively so that non-reserved words remain usable as identifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

# Token kinds
NAME = "name"          # bare or quoted identifier (quoted flag set for quoted)
INT = "int"
FLOAT = "float"
STRING = "string"
OP = "op"              # operators and punctuation
EOF = "eof"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>--[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<float>(\d+\.\d*|\.\d+)([eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<qname>"(?:[^"]|"")*"|`(?:[^`]|``)*`|\[[^\]]*\])
  | (?P<name>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op><>|!=|<=|>=|\|\||[-+*/%<>=(),.;])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int

    def is_kw(self, *words: str) -> bool:
        return self.kind == NAME and self.text.upper() in words


def tokenize(text: str, dialect: str = "sqlite") -> list[Token]:
    """Tokenize SQL text, raising ParseError on unlexable input."""
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        i = m.end()
        kind = m.lastgroup
        if kind in ("ws", "line_comment", "block_comment"):
            continue
        raw = m.group()
        if kind == "string":
            tokens.append(Token(STRING, raw[1:-1].replace("''", "'"), m.start()))
        elif kind == "qname":
            if raw[0] == '"':
                inner = raw[1:-1].replace('""', '"')
            elif raw[0] == "`":
                inner = raw[1:-1].replace("``", "`")
            else:  # [bracketed]
                inner = raw[1:-1]
            tokens.append(Token(NAME, inner, m.start()))
        elif kind == "name":
            tokens.append(Token(NAME, raw, m.start()))
        elif kind == "int":
            tokens.append(Token(INT, raw, m.start()))
        elif kind == "float":
            tokens.append(Token(FLOAT, raw, m.start()))
        else:
            tokens.append(Token(OP, raw, m.start()))
    tokens.append(Token(EOF, "", n))
    return tokens
