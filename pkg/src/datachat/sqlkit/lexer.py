"""SQL tokenizer.

Produces word, quoted-identifier, string, number and operator tokens with
source offsets. Comments are skipped. Word tokens keep their original text;
keyword-ness is decided by the parser from context, so quoted identifiers and
unquoted column names (e.g. ``created``) can never collide with keywords like
``CREATE``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError

WORD = "word"
QUOTED = "quoted"
STRING = "string"
NUMBER = "number"
OP = "op"
EOF = "eof"

_OPERATORS = (
    "||", "<=", ">=", "<>", "!=", "==",
    "(", ")", ",", ".", ";", "*", "=", "<", ">", "+", "-", "/", "%", "?",
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    @property
    def upper(self) -> str:
        return self.text.upper()

    def is_word(self, *words: str) -> bool:
        return self.kind == WORD and self.upper in words


def tokenize(sql: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if sql.startswith("--", i):
            nl = sql.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if sql.startswith("/*", i):
            close = sql.find("*/", i + 2)
            if close < 0:
                raise ParseError("unterminated block comment")
            i = close + 2
            continue
        if ch == "'":
            j = i + 1
            while True:
                j = sql.find("'", j)
                if j < 0:
                    raise ParseError("unterminated string literal")
                if j + 1 < n and sql[j + 1] == "'":
                    j += 2
                    continue
                break
            tokens.append(Token(STRING, sql[i + 1:j].replace("''", "'"), i, j + 1))
            i = j + 1
            continue
        if ch in '"`[':
            closer = {'"': '"', "`": "`", "[": "]"}[ch]
            j = sql.find(closer, i + 1)
            if j < 0:
                raise ParseError("unterminated quoted identifier")
            tokens.append(Token(QUOTED, sql[i + 1:j], i, j + 1))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and sql[i + 1].isdigit()):
            j = i
            if sql.startswith(("0x", "0X"), i):
                j = i + 2
                while j < n and sql[j] in "0123456789abcdefABCDEF":
                    j += 1
            else:
                seen_dot = seen_exp = False
                while j < n:
                    c = sql[j]
                    if c.isdigit():
                        j += 1
                    elif c == "." and not seen_dot and not seen_exp:
                        seen_dot = True
                        j += 1
                    elif c in "eE" and not seen_exp and j + 1 < n and (
                        sql[j + 1].isdigit() or (sql[j + 1] in "+-" and j + 2 < n and sql[j + 2].isdigit())
                    ):
                        seen_exp = True
                        j += 2 if sql[j + 1] in "+-" else 1
                    else:
                        break
            tokens.append(Token(NUMBER, sql[i:j], i, j))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (sql[j].isalnum() or sql[j] == "_"):
                j += 1
            tokens.append(Token(WORD, sql[i:j], i, j))
            i = j
            continue
        for op in _OPERATORS:
            if sql.startswith(op, i):
                tokens.append(Token(OP, op, i, i + len(op)))
                i += len(op)
                break
        else:
            raise ParseError(f"unexpected character {ch!r} at offset {i}")
    tokens.append(Token(EOF, "", n, n))
    return tokens


def split_statements(tokens: list[Token]) -> list[list[Token]]:
    """Split a token stream on top-level semicolons; empty groups dropped."""
    groups: list[list[Token]] = []
    current: list[Token] = []
    for tok in tokens:
        if tok.kind == EOF:
            break
        if tok.kind == OP and tok.text == ";":
            if current:
                groups.append(current)
                current = []
            continue
        current.append(tok)
    if current:
        groups.append(current)
    return groups
