"""Indentation-significant lexer for vPython source.

Produces a flat token stream ending in EOF, with indentation changes
converted to INDENT/DEDENT tokens. Indentation must use spaces; a tab
anywhere outside a string literal is a LexError. Newlines inside
parentheses or brackets are implicitly joined.
"""

import re
from dataclasses import dataclass

from .errors import LexError

KEYWORDS = {
    "if", "elif", "else", "while", "for", "in", "def", "return",
    "nonlocal", "pass", "print", "lambda", "and", "or", "not",
    "True", "False",
    # recognized Python keywords outside the subset; the parser reports
    # these with a SubsetError rather than a generic syntax error
    "class", "import", "from", "global", "del", "try", "except",
    "finally", "raise", "with", "as", "yield", "assert", "break",
    "continue", "is", "None",
}

# order matters: longest first
_OPERATORS = [
    "**", "+=", "-=", "==", "!=", "<=", ">=",
    "+", "-", "*", "/", "%", "<", ">", "=",
    "(", ")", "[", "]", ",", ":", ".", "&", "@",
]
_OPEN = {"(", "["}
_CLOSE = {")", "]"}

_NUMBER_RE = re.compile(
    r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[jJ]?"
)
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "0": "\0"}


@dataclass
class Token:
    kind: str  # NAME INT_LIT REAL_LIT STR_LIT IMAG_LIT KEYWORD OP NEWLINE INDENT DEDENT EOF
    lexeme: str
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind}, {self.lexeme!r}, {self.line}:{self.col})"


def tokenize(source: str) -> list[Token]:
    """Lex `source` into a token list ending in EOF."""
    tokens: list[Token] = []
    indents = [0]
    depth = 0  # ( [ nesting; newlines inside are joined
    lines = source.split("\n")
    line_no = 0

    for line_no, raw in enumerate(lines, start=1):
        pos = 0
        if depth == 0:
            # measure indentation
            while pos < len(raw) and raw[pos] == " ":
                pos += 1
            if pos < len(raw) and raw[pos] == "\t":
                raise LexError(line_no, pos + 1, "tab in indentation (spaces only)")
            rest = raw[pos:]
            if rest == "" or rest.lstrip().startswith("#") or rest.strip() == "":
                continue  # blank or comment-only line
            indent = pos
            if indent > indents[-1]:
                indents.append(indent)
                tokens.append(Token("INDENT", " " * indent, line_no, 1))
            else:
                while indent < indents[-1]:
                    indents.pop()
                    tokens.append(Token("DEDENT", "", line_no, 1))
                if indent != indents[-1]:
                    raise LexError(line_no, pos + 1, "inconsistent dedent")
        had_token = False
        while pos < len(raw):
            ch = raw[pos]
            if ch == " ":
                pos += 1
                continue
            if ch == "\t":
                raise LexError(line_no, pos + 1, "tab character (spaces only)")
            if ch == "#":
                break
            col = pos + 1
            if ch in "\"'":
                text, pos = _scan_string(raw, pos, line_no)
                tokens.append(Token("STR_LIT", text, line_no, col))
                had_token = True
                continue
            m = _NUMBER_RE.match(raw, pos)
            if m and (ch.isdigit() or (ch == "." and pos + 1 < len(raw) and raw[pos + 1].isdigit())):
                text = m.group(0)
                pos = m.end()
                if text[-1] in "jJ":
                    kind = "IMAG_LIT"
                elif "." in text or "e" in text or "E" in text:
                    kind = "REAL_LIT"
                else:
                    kind = "INT_LIT"
                tokens.append(Token(kind, text, line_no, col))
                had_token = True
                continue
            m = _NAME_RE.match(raw, pos)
            if m:
                text = m.group(0)
                pos = m.end()
                kind = "KEYWORD" if text in KEYWORDS else "NAME"
                tokens.append(Token(kind, text, line_no, col))
                had_token = True
                continue
            for op in _OPERATORS:
                if raw.startswith(op, pos):
                    tokens.append(Token("OP", op, line_no, col))
                    pos += len(op)
                    if op in _OPEN:
                        depth += 1
                    elif op in _CLOSE:
                        depth = max(0, depth - 1)
                    had_token = True
                    break
            else:
                raise LexError(line_no, col, f"unexpected character {ch!r}")
        if had_token and depth == 0:
            tokens.append(Token("NEWLINE", "", line_no, len(raw) + 1))

    end_line = line_no + 1 if lines else 1
    if depth > 0:
        # unbalanced bracket: let the parser report it at EOF
        if tokens and tokens[-1].kind != "NEWLINE":
            tokens.append(Token("NEWLINE", "", end_line, 1))
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("DEDENT", "", end_line, 1))
    tokens.append(Token("EOF", "", end_line, 1))
    return tokens


def _scan_string(raw: str, pos: int, line_no: int) -> tuple[str, int]:
    quote = raw[pos]
    col = pos + 1
    pos += 1
    out = []
    while pos < len(raw):
        ch = raw[pos]
        if ch == quote:
            return "".join(out), pos + 1
        if ch == "\\":
            if pos + 1 >= len(raw):
                break
            esc = raw[pos + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                pos += 2
                continue
            if esc == "x" and pos + 3 < len(raw):
                try:
                    out.append(chr(int(raw[pos + 2:pos + 4], 16)))
                    pos += 4
                    continue
                except ValueError:
                    raise LexError(line_no, pos + 1, "bad \\x escape") from None
            raise LexError(line_no, pos + 1, f"unknown escape \\{esc}")
        out.append(ch)
        pos += 1
    raise LexError(line_no, col, "unterminated string literal")
