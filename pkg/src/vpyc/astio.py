"""Textual AST serialization: the `.oast` pipe format.

One s-expression per module: `(kind pos* (:attr value)* child*)`.
Values are integers, decimals, quoted strings, `L<level>.<offset>` slots,
`line:col` locations, bare words, or `?` placeholders. `#` starts a line
comment. Serialization is canonical (single line, single spaces), so equal
trees produce byte-identical text.
"""

import re

from .astnodes import (AstNode, KINDS, NATIVE_SLOT, SlotRef, node,
                       type_from_str)
from .errors import AstFormatError

# positional attributes per kind, in order
_POS = {
    "ident": ("name",),
    "decl": ("name",),
    "lit": ("littype", "value"),
    "binop": ("op",),
    "unop": ("op",),
    "compare": ("op",),
    "boolop": ("op",),
    "attr": ("attr",),
    "attrassign": ("attr",),
    "nonlocal": ("name",),
    "funcdef": ("name",),
    "forrange": ("var",),
}

# optional keyword attributes, in canonical emission order
_KW_ORDER = ("nparams", "nthen", "native", "builtin", "fnid",
             "framesize", "slotmap", "intwidth", "realwidth")
_KW_INT = {"nparams", "nthen", "native", "fnid", "framesize",
           "intwidth", "realwidth"}
_KW_STR = {"builtin", "slotmap"}

# kinds that always carry :type/:slot (with ? placeholders pre-inference);
# a funcdef doubles as the declaration of its own name in the enclosing frame
_SLOTTED = {"ident", "decl", "funcdef"}
_TYPED = {"ident", "decl", "funcdef", "lit", "binop", "unop", "compare",
          "boolop", "call", "index", "attr", "ref", "listlit", "lambda"}


def serialize_ast(root: AstNode) -> str:
    """Render a module AST in canonical .oast text."""
    assert root.kind == "module"
    out = []
    _emit(root, out)
    return "".join(out)


def _emit(n: AstNode, out: list):
    out.append("(")
    out.append(n.kind)
    for name in _POS.get(n.kind, ()):
        out.append(" ")
        out.append(_emit_value(name, n.attrs.get(name), n))
    if n.kind != "module":
        out.append(f" :loc {n.loc[0]}:{n.loc[1]}")
    if n.kind in _TYPED:
        out.append(" :type ")
        out.append("?" if n.type is None else str(n.type))
    if n.kind in _SLOTTED:
        out.append(" :slot ")
        out.append(_slot_str(n.slot))
    for key in _KW_ORDER:
        if key in n.attrs:
            val = n.attrs[key]
            if key in _KW_STR:
                out.append(f" :{key} {_quote(str(val))}")
            else:
                out.append(f" :{key} {val}")
    for child in n.children:
        out.append(" ")
        _emit(child, out)
    out.append(")")


def _slot_str(slot) -> str:
    if slot is None:
        return "?"
    if slot == NATIVE_SLOT:
        return "native"
    return str(slot)


def _emit_value(name: str, value, n: AstNode) -> str:
    if name == "littype":
        return value
    if name == "value":
        lt = n.attrs["littype"]
        if lt == "int":
            return str(value)
        if lt in ("real", "imag"):
            return _real_str(value)
        if lt == "bool":
            return "true" if value else "false"
        if lt == "string":
            return _quote(value)
        raise AssertionError(lt)
    return _quote(str(value))


def _real_str(v: float) -> str:
    text = repr(float(v))
    return text


_LOC_RE = re.compile(r"\d+:\d+\Z")
_SLOTTOK_RE = re.compile(r"L\d+\.\d+\Z")
_NUM_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?\Z")
_ATTR_RE = re.compile(r":[a-z][a-z0-9]*\Z")


def _lex_oast(text: str):
    tokens = []
    pos = 0
    line = 1
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            continue
        if ch in " \t\r":
            pos += 1
            continue
        if ch == "#":
            while pos < n and text[pos] != "\n":
                pos += 1
            continue
        if ch == "(":
            tokens.append(("open", "(", line))
            pos += 1
            continue
        if ch == ")":
            tokens.append(("close", ")", line))
            pos += 1
            continue
        if ch == '"':
            end = pos + 1
            while end < n:
                if text[end] == "\\":
                    end += 2
                    continue
                if text[end] == '"':
                    break
                if text[end] == "\n":
                    raise AstFormatError(line, "unterminated string")
                end += 1
            if end >= n:
                raise AstFormatError(line, "unterminated string")
            tokens.append(("str", text[pos:end + 1], line))
            pos = end + 1
            continue
        # bare atom: attr, loc, slot, number or word (types may nest parens)
        end = pos
        depth = 0
        while end < n:
            c = text[end]
            if c in ' \t\r\n"#':
                break
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            end += 1
        atom = text[pos:end]
        if not atom:
            raise AstFormatError(line, f"bad character {ch!r}")
        pos = end
        if _ATTR_RE.match(atom):
            tokens.append(("attr", atom, line))
        elif _LOC_RE.match(atom):
            tokens.append(("loc", atom, line))
        elif _SLOTTOK_RE.match(atom):
            tokens.append(("slot", atom, line))
        elif _NUM_RE.match(atom):
            tokens.append(("real", atom, line))
        else:
            tokens.append(("word", atom, line))
    return tokens


def deserialize_ast(text: str) -> AstNode:
    """Parse .oast text into an AST; inverse of serialize_ast on its image."""
    tokens = _lex_oast(text)
    if not tokens:
        raise AstFormatError(1, "empty input")
    root, pos = _parse_form(tokens, 0)
    if pos != len(tokens):
        raise AstFormatError(tokens[pos][2], "trailing content after module form")
    if root.kind != "module":
        raise AstFormatError(tokens[0][2], f"top-level form must be module, got {root.kind}")
    return root


def _parse_form(tokens, pos) -> tuple[AstNode, int]:
    kind_tok, text, line = tokens[pos]
    if kind_tok != "open":
        raise AstFormatError(line, f"expected '(', found {text!r}")
    pos += 1
    if pos >= len(tokens) or tokens[pos][0] != "word":
        raise AstFormatError(line, "expected node kind after '('")
    kind = tokens[pos][1]
    if kind not in KINDS:
        raise AstFormatError(tokens[pos][2], f"unknown node kind {kind!r}")
    pos += 1

    n = node(kind)
    # positionals
    for name in _POS.get(kind, ()):
        if pos >= len(tokens) or tokens[pos][0] in ("open", "close", "attr"):
            raise AstFormatError(line, f"{kind}: missing positional {name!r}")
        n.attrs[name] = _decode_pos(kind, name, tokens[pos], n)
        pos += 1
    # keyword attrs
    while pos < len(tokens) and tokens[pos][0] == "attr":
        key = tokens[pos][1][1:]
        attr_line = tokens[pos][2]
        pos += 1
        if pos >= len(tokens):
            raise AstFormatError(attr_line, f"missing value for :{key}")
        tok = tokens[pos]
        pos += 1
        _apply_attr(n, key, tok, attr_line)
    # children
    while pos < len(tokens) and tokens[pos][0] == "open":
        child, pos = _parse_form(tokens, pos)
        n.children.append(child)
    if pos >= len(tokens) or tokens[pos][0] != "close":
        raise AstFormatError(line, f"unterminated ({kind} ...) form")
    return n, pos + 1


def _decode_pos(kind, name, tok, n):
    tkind, text, line = tok
    if name == "littype":
        if tkind != "word" or text not in ("int", "real", "string", "bool", "imag"):
            raise AstFormatError(line, f"bad literal type {text!r}")
        return text
    if name == "value":
        lt = n.attrs["littype"]
        if lt == "int":
            if tkind != "real" or not re.fullmatch(r"[+-]?\d+", text):
                raise AstFormatError(line, f"bad int literal {text!r}")
            return int(text)
        if lt in ("real", "imag"):
            if tkind == "real":
                return float(text)
            if tkind == "word" and text in ("inf", "nan"):
                return float(text)
            raise AstFormatError(line, f"bad real literal {text!r}")
        if lt == "bool":
            if tkind != "word" or text not in ("true", "false"):
                raise AstFormatError(line, f"bad bool literal {text!r}")
            return text == "true"
        if lt == "string":
            if tkind != "str":
                raise AstFormatError(line, f"bad string literal {text!r}")
            return _unquote(text, line)
        raise AssertionError(lt)
    if tkind != "str":
        raise AstFormatError(line, f"{kind}: positional {name} must be a quoted string")
    return _unquote(text, line)


def _apply_attr(n, key, tok, line):
    tkind, text, tok_line = tok
    if key == "loc":
        if tkind == "loc":
            ln, col = text.split(":")
            n.loc = (int(ln), int(col))
            return
        raise AstFormatError(tok_line, f"bad :loc value {text!r}")
    if key == "type":
        if tkind == "word" and text == "?":
            n.type = None
            return
        if tkind == "word":
            try:
                n.type = type_from_str(text)
                return
            except ValueError as e:
                raise AstFormatError(tok_line, str(e)) from None
        raise AstFormatError(tok_line, f"bad :type value {text!r}")
    if key == "slot":
        if tkind == "slot":
            n.slot = SlotRef.from_str(text)
            return
        if tkind == "word" and text == "?":
            n.slot = None
            return
        if tkind == "word" and text == "native":
            n.slot = NATIVE_SLOT
            return
        raise AstFormatError(tok_line, f"bad :slot value {text!r}")
    if key in _KW_INT:
        if tkind == "real" and re.fullmatch(r"[+-]?\d+", text):
            n.attrs[key] = int(text)
            return
        raise AstFormatError(tok_line, f":{key} must be an integer, got {text!r}")
    if key in _KW_STR:
        if tkind != "str":
            raise AstFormatError(tok_line, f":{key} must be a quoted string")
        n.attrs[key] = _unquote(text, tok_line)
        return
    raise AstFormatError(tok_line, f"unknown attribute :{key}")


def _quote(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 32:
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


_UNESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'", "0": "\0"}


def _unquote(text: str, line: int) -> str:
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            esc = body[i + 1]
            if esc in _UNESCAPES:
                out.append(_UNESCAPES[esc])
                i += 2
                continue
            if esc == "x":
                out.append(chr(int(body[i + 2:i + 4], 16)))
                i += 4
                continue
            raise AstFormatError(line, f"unknown escape \\{esc}")
        out.append(ch)
        i += 1
    return "".join(out)
