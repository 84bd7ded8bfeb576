"""Phase 4 backend: Olympus abstract-machine mnemonic C source.

The emitted translation unit includes olympus.h and consists purely of
mnemonics from the ISA below; object addressing (ADDRL/ADDRF) is separate
from the operation mnemonics, expressions render as nested mnemonic calls,
and no runtime type dispatch of any kind is emitted: every operation is
chosen statically from the frozen types.

ISA is the normative contract with the runtime header.
"""

from .astnodes import AstNode, NATIVE_SLOT, SlotRef
from . import errors

# The complete mnemonic ISA. Typed variants follow one suffix scheme:
# I int (and bool), R real, S string, B bool, C complex, V vector, L lambda;
# CR/CI complex real/imag part; A<T> array of T; trailing H = by-handle.
ISA = frozenset([
    # addressing and references
    "ADDRL", "ADDRF", "ID",
    # scalar/handle loads
    "LDI", "LDR", "LDB", "LDS", "LDC", "LDV", "LDL",
    "LDCR", "LDCI", "LDCRH", "LDCIH",
    # array element loads (by slot address / by handle)
    "LDAI", "LDAR", "LDAB", "LDAS", "LDAC", "LDAV", "LDAL",
    "LDAIH", "LDARH", "LDABH", "LDASH", "LDACH", "LDAVH", "LDALH",
    # scalar/handle stores
    "STI", "STR", "STB", "STS", "STC", "STV", "STL", "STCR", "STCI",
    # array element stores
    "STAI", "STAR", "STAB", "STAS", "STAC", "STAV", "STAL",
    "STAIH", "STARH", "STABH", "STASH", "STACH", "STAVH", "STALH",
    # declarations
    "DECLI", "DECLR", "DECLB", "DECLS", "DECLC", "DECLV", "DECLL",
    # control
    "FOR", "WHILE", "IF", "ELSE", "END",
    # functions and frames
    "OFUNC", "OFUNC_DECL", "ENDFUNC", "FRAME", "OMAIN", "ENDMAIN",
    "PARAM_I", "PARAM_R", "PARAM_B", "PARAM_S", "PARAM_C", "PARAM_V", "PARAM_L",
    "RET", "RET_I", "RET_R", "RET_B", "RET_S", "RET_C", "RET_V", "RET_L",
    "MKLAMBDA", "APPLY",
    "APPLY_I", "APPLY_R", "APPLY_B", "APPLY_S", "APPLY_C", "APPLY_V", "APPLY_L",
    "ARGI", "ARGR", "ARGB", "ARGS", "ARGC", "ARGV", "ARGL",
    # builtins
    "PRINT_I", "PRINT_R", "PRINT_B", "PRINT_S", "PRINT_C", "LEN",
    # values and operators
    "TRUE", "FALSE", "SLIT", "MKC", "MKVECI", "MKVECR", "MKVECS",
    "MKVECC", "MKVECV", "MKVECL", "REPV",
    "CADD", "CSUB", "CMUL", "CDIV", "CNEG", "CEQ", "CNE",
    "SCAT", "SEQ", "SNE", "SIDX",
    "DIVR", "MODI", "MODR", "POWI", "POWR",
    "TOI_R", "TOI_S", "TOR_I", "TOR_S", "TOS_I", "TOS_R", "TOS_B",
    # statement plumbing and module prologue
    "EXPR", "OLY_HEAP_CONST", "OLY_STRLITS",
    # IEEE specials that constant folding may produce
    "INFINITY", "NAN",
])

_SFX = {"int": "I", "real": "R", "bool": "I", "string": "S",
        "complex": "C", "vector": "V", "lambda": "L"}
_PRINT_SFX = {"int": "I", "real": "R", "bool": "B", "string": "S", "complex": "C"}
_CMP_OPS = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "==", "!=": "!="}


def emit_address(slot: SlotRef) -> str:
    """ADDRL(offset) for level 0, else ADDRF(level, offset)."""
    if slot.level == 0:
        return f"ADDRL({slot.offset})"
    return f"ADDRF({slot.level},{slot.offset})"


class _Emitter:
    def __init__(self, root: AstNode, heap_bytes: int):
        self.root = root
        self.heap_bytes = heap_bytes
        self.int_width = root.attrs.get("intwidth", 32)
        self.real_width = root.attrs.get("realwidth", 64)
        self.int_min = -(1 << (self.int_width - 1))
        self.strlits: list[str] = []
        self.strlit_ids: dict[str, int] = {}
        self.fns: list[tuple[AstNode, int]] = []  # (node, body depth)
        self.lines: list[str] = []

    # -- gathering -----------------------------------------------------------

    def collect(self):
        def walk(n: AstNode, depth: int):
            if n.kind == "lit" and n.attrs["littype"] == "string":
                v = n.attrs["value"]
                if v not in self.strlit_ids:
                    self.strlit_ids[v] = len(self.strlits)
                    self.strlits.append(v)
            for c in n.children:
                if c.kind in ("funcdef", "lambda"):
                    self.fns.append((c, depth + 1))
                    walk(c, depth + 1)
                else:
                    walk(c, depth)
        walk(self.root, 0)

    def fn_symbol(self, fn: AstNode) -> str:
        name = fn.attrs.get("name", "lambda")
        safe = "".join(ch if ch.isalnum() else "_" for ch in name)
        return f"_oly_f{fn.attrs['fnid']}_{safe}"

    # -- module ---------------------------------------------------------------

    def guard_typed(self):
        """Compiler bug guard: untyped/unslotted nodes must not reach here."""
        for n in self.root.walk():
            if n.kind in ("ident", "decl") and (n.type is None or n.slot is None):
                raise errors.InternalError(
                    f"untyped/unslotted {n.kind} {n.attrs.get('name')!r} at {n.loc}")
            if n.kind == "funcdef" and (n.type is None or "framesize" not in n.attrs):
                raise errors.InternalError(
                    f"funcdef {n.attrs.get('name')!r} reached the backend "
                    "without a frozen signature/layout")

    def emit_module(self) -> str:
        self.guard_typed()
        self.collect()
        w = self.lines.append
        w("/* Olympus abstract machine translation unit (generated) */")
        w('#include "olympus.h"')
        w("")
        w(f"OLY_HEAP_CONST({self.heap_bytes});")
        lits = ",".join(_cstring(s) for s in self.strlits + [""])
        w(f"OLY_STRLITS({len(self.strlits)},{lits});")
        w("")
        w("/* frame table:")
        w(f"   module size {self.root.attrs['framesize']} map \"{self.root.attrs['slotmap']}\"")
        for fn, depth in self.fns:
            w(f"   {self.fn_symbol(fn)} depth {depth} size {fn.attrs['framesize']}"
              f" map \"{fn.attrs['slotmap']}\"")
        w("*/")
        for fn, _depth in self.fns:
            w(f"OFUNC_DECL({self.fn_symbol(fn)});")
        if self.fns:
            w("")
        for fn, depth in self.fns:
            self.emit_function(fn, depth)
            w("")
        w(f"OMAIN({self.root.attrs['framesize']},\"{self.root.attrs['slotmap']}\")")
        for st in self.root.children:
            self.stmt(st, 0)
        w("ENDMAIN")
        return "\n".join(self.lines) + "\n"

    def emit_function(self, fn: AstNode, depth: int):
        w = self.lines.append
        nparams = fn.attrs["nparams"]
        w(f"OFUNC({self.fn_symbol(fn)})")
        w(f"FRAME({depth},{fn.attrs['framesize']},\"{fn.attrs['slotmap']}\")")
        for k in range(nparams):
            p = fn.children[k]
            w(f"PARAM_{_SFX[p.type.tag]}({p.slot.offset},{k});")
        if fn.kind == "lambda":
            body = fn.children[nparams]
            if body.type.tag == "none":
                w(f"EXPR({self.expr(body, depth)});")
                w("RET;")
            else:
                w(f"RET_{_SFX[body.type.tag]}({self.expr(body, depth)});")
        else:
            for st in fn.children[nparams:]:
                self.stmt(st, depth)
        w("ENDFUNC")

    # -- statements -------------------------------------------------------------

    def stmt(self, st: AstNode, depth: int):
        w = self.lines.append
        k = st.kind
        if k == "pass" or k == "nonlocal":
            return
        if k == "exprstmt":
            w(f"EXPR({self.expr(st.children[0], depth)});")
            return
        if k == "print":
            e = st.children[0]
            w(f"PRINT_{_PRINT_SFX[e.type.tag]}({self.expr(e, depth)});")
            return
        if k == "assign":
            target, value = st.children
            addr = self.addr_of(target)
            tag = target.type.tag
            if tag == "lambda" and target.kind == "decl":
                w(f"DECLL({target.slot.offset},{self.expr(value, depth)});")
                return
            if value.kind == "ref":
                # a reference is stored through the bare address mnemonic
                w(f"ST{_SFX[tag]}({addr},{self.addr_of(value.children[0])});")
                return
            w(f"ST{_SFX[tag]}({addr},{self.expr(value, depth)});")
            return
        if k == "indexassign":
            base, idx, value = st.children
            ek = _SFX[base.type.elem.tag]
            iv = self.expr(idx, depth)
            vv = self.expr(value, depth)
            if base.kind == "ident":
                w(f"STA{ek}({self.addr_of(base)},{iv},{vv});")
            else:
                w(f"STA{ek}H({self.expr(base, depth)},{iv},{vv});")
            return
        if k == "attrassign":
            base, value = st.children
            part = "CR" if st.attrs["attr"] == "real" else "CI"
            w(f"ST{part}({self.addr_of(base)},{self.expr(value, depth)});")
            return
        if k == "return":
            if not st.children:
                w("RET;")
                return
            e = st.children[0]
            if e.type.tag == "none":
                w(f"EXPR({self.expr(e, depth)});")
                w("RET;")
                return
            w(f"RET_{_SFX[e.type.tag]}({self.expr(e, depth)});")
            return
        if k == "if":
            nthen = st.attrs["nthen"]
            w(f"IF({self.expr(st.children[0], depth)})")
            for s in st.children[1:1 + nthen]:
                self.stmt(s, depth)
            orelse = st.children[1 + nthen:]
            if orelse:
                w("ELSE")
                for s in orelse:
                    self.stmt(s, depth)
            w("END")
            return
        if k == "while":
            w(f"WHILE({self.expr(st.children[0], depth)})")
            for s in st.children[1:]:
                self.stmt(s, depth)
            w("END")
            return
        if k == "forrange":
            if not st.attrs.get("native"):
                raise errors.InternalError(
                    "for-range reached the backend without native lowering")
            name = f"$iter_{st.attrs['var']}$"
            start = self.expr(st.children[1], depth)
            end = self.expr(st.children[2], depth)
            step = self.expr(st.children[3], depth)
            w(f"FOR({name},{start},{end},{step})")
            for s in st.children[4:]:
                self.stmt(s, depth)
            w("END")
            return
        if k == "funcdef":
            w(f"DECLL({st.slot.offset},MKLAMBDA({self.fn_symbol(st)},{depth + 1}));")
            return
        raise errors.InternalError(f"unknown statement kind {k}")

    # -- expressions --------------------------------------------------------------

    def addr_of(self, n: AstNode) -> str:
        if n.slot is None or n.slot == NATIVE_SLOT:
            raise errors.InternalError(
                f"no addressable slot for {n.attrs.get('name')} at {n.loc}")
        return emit_address(n.slot)

    def expr(self, e: AstNode, depth: int) -> str:
        k = e.kind
        if k == "lit":
            return self.literal(e)
        if k == "ident":
            if e.slot == NATIVE_SLOT:
                return f"$iter_{e.attrs['name']}$"
            return f"LD{_SFX[e.type.tag]}({self.addr_of(e)})"
        if k == "binop":
            return self.binop(e, depth)
        if k == "unop":
            v = self.expr(e.children[0], depth)
            if e.attrs["op"] == "-":
                if e.type.tag == "complex":
                    return f"CNEG({v})"
                return f"(-{v})"
            return f"(!{v})"
        if k == "compare":
            return self.compare(e, depth)
        if k == "boolop":
            op = "&&" if e.attrs["op"] == "and" else "||"
            l = self.expr(e.children[0], depth)
            r = self.expr(e.children[1], depth)
            return f"({l}{op}{r})"
        if k == "call":
            return self.call(e, depth)
        if k == "index":
            base, idx = e.children
            iv = self.expr(idx, depth)
            if base.type.tag == "string":
                return f"SIDX({self.expr(base, depth)},{iv})"
            ek = _SFX[base.type.elem.tag]
            if base.kind == "ident":
                return f"LDA{ek}({self.addr_of(base)},{iv})"
            return f"LDA{ek}H({self.expr(base, depth)},{iv})"
        if k == "attr":
            base = e.children[0]
            part = "CR" if e.attrs["attr"] == "real" else "CI"
            if base.kind == "ident":
                return f"LD{part}({self.addr_of(base)})"
            return f"LD{part}H({self.expr(base, depth)})"
        if k == "ref":
            return f"ID({self.addr_of(e.children[0])})"
        if k == "listlit":
            ek = _SFX[e.type.elem.tag]
            elems = ",".join(self.expr(c, depth) for c in e.children)
            return f"MKVEC{ek}({len(e.children)},{elems})"
        if k == "lambda":
            return f"MKLAMBDA({self.fn_symbol(e)},{depth + 1})"
        raise errors.InternalError(f"unknown expression kind {k}")

    def literal(self, e: AstNode) -> str:
        lt = e.attrs["littype"]
        v = e.attrs["value"]
        if lt == "int":
            if v == self.int_min:
                return f"({v + 1}-1)"  # avoid the INT_MIN literal pitfall
            if v < 0:
                return f"({v})"  # never let '-' tokens pair up into '--'
            return str(v)
        if lt == "real":
            text = self.real_literal(v)
            return f"({text})" if text.startswith("-") else text
        if lt == "imag":
            return f"MKC(0.0,{self.real_literal(v)})"
        if lt == "bool":
            return "TRUE" if v else "FALSE"
        if lt == "string":
            return f"SLIT({self.strlit_ids[v]})"
        raise errors.InternalError(f"bad literal type {lt}")

    def real_literal(self, v: float) -> str:
        if v != v:
            return "NAN"
        if v == float("inf"):
            return "INFINITY"
        if v == float("-inf"):
            return "(-INFINITY)"
        text = repr(float(v))
        if self.real_width == 32:
            return text + "f"
        return text

    def binop(self, e: AstNode, depth: int) -> str:
        op = e.attrs["op"]
        l_node, r_node = e.children
        if op == "+" and l_node.type.tag == "string":
            return f"SCAT({self.expr(l_node, depth)},{self.expr(r_node, depth)})"
        if op == "*" and l_node.type.tag == "vector":
            return f"REPV({self.expr(l_node, depth)},{self.expr(r_node, depth)})"
        if e.type.tag == "complex":
            l = self.as_complex(l_node, depth)
            r = self.as_complex(r_node, depth)
            mn = {"+": "CADD", "-": "CSUB", "*": "CMUL", "/": "CDIV"}[op]
            return f"{mn}({l},{r})"
        l = self.expr(l_node, depth)
        r = self.expr(r_node, depth)
        if op == "/":
            return f"DIVR({l},{r})"
        if op == "%":
            return f"MODI({l},{r})" if e.type.tag == "int" else f"MODR({l},{r})"
        if op == "**":
            return f"POWI({l},{r})" if e.type.tag == "int" else f"POWR({l},{r})"
        return f"({l}{op}{r})"

    def as_complex(self, n: AstNode, depth: int) -> str:
        v = self.expr(n, depth)
        if n.type.tag == "complex":
            return v
        if n.type.tag == "int":
            return f"MKC(TOR_I({v}),0.0)"
        return f"MKC({v},0.0)"

    def compare(self, e: AstNode, depth: int) -> str:
        op = e.attrs["op"]
        l_node, r_node = e.children
        if l_node.type.tag == "complex" or r_node.type.tag == "complex":
            l = self.as_complex(l_node, depth)
            r = self.as_complex(r_node, depth)
            return f"{'CEQ' if op == '==' else 'CNE'}({l},{r})"
        if l_node.type.tag == "string":
            l = self.expr(l_node, depth)
            r = self.expr(r_node, depth)
            return f"{'SEQ' if op == '==' else 'SNE'}({l},{r})"
        l = self.expr(l_node, depth)
        r = self.expr(r_node, depth)
        return f"({l}{_CMP_OPS[op]}{r})"

    def call(self, e: AstNode, depth: int) -> str:
        builtin = e.attrs.get("builtin")
        if builtin is not None:
            return self.builtin(e, builtin, depth)
        callee = e.children[0]
        args = e.children[1:]
        parts = [self.expr(callee, depth), str(len(args))]
        for a in args:
            parts.append(f"ARG{_SFX[a.type.tag]}({self.expr(a, depth)})")
        inner = ",".join(parts)
        if e.type.tag == "none":
            return f"APPLY({inner})"
        return f"APPLY_{_SFX[e.type.tag]}({inner})"

    def builtin(self, e: AstNode, name: str, depth: int) -> str:
        arg = e.children[0]
        if name == "len":
            return f"LEN({self.expr(arg, depth)})"
        if name == "id":
            return f"ID({self.addr_of(arg)})"
        v = self.expr(arg, depth)
        src = arg.type.tag
        if name == "int":
            return {"int": v, "bool": v, "real": f"TOI_R({v})",
                    "string": f"TOI_S({v})"}[src]
        if name == "float":
            return {"real": v, "int": f"TOR_I({v})", "string": f"TOR_S({v})"}[src]
        if name == "str":
            return {"string": v, "int": f"TOS_I({v})", "real": f"TOS_R({v})",
                    "bool": f"TOS_B({v})"}[src]
        raise errors.InternalError(f"unknown builtin {name}")


def _cstring(s: str) -> str:
    out = ['"']
    for ch in s:
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
        elif ord(ch) < 32 or ord(ch) > 126:
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def emit_module(root: AstNode, heap_bytes: int = 8388608) -> str:
    """Emit the complete compilable translation unit for a lowered module."""
    assert root.kind == "module"
    return _Emitter(root, heap_bytes).emit_module()


def emit_statement(node: AstNode, depth: int = 0) -> str:
    """Emit one statement (testing aid; string literals are not pooled)."""
    em = _Emitter(AstNode("module", {"framesize": 0, "slotmap": ""}), 0)
    em.collect = lambda: None
    em.stmt(node, depth)
    return "\n".join(em.lines) + "\n"


def emit_function(fn: AstNode, depth: int = 1) -> str:
    """Emit one function body (testing aid)."""
    em = _Emitter(AstNode("module", {"framesize": 0, "slotmap": ""}), 0)
    em.emit_function(fn, depth)
    return "\n".join(em.lines) + "\n"
