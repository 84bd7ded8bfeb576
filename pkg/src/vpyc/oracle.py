"""Reference tree-walking interpreter over the typed, slotted AST.

Defines ground-truth semantics for differential testing of the compiled
output. Execution is type-directed: the frozen types on the tree choose
every operation, so the interpreter performs no value tag checks, exactly
like the generated code.

Pinned behaviours shared with the runtime:
  - ints wrap at the configured width (32/64-bit two's complement)
  - int/int division is true division yielding real; % is floored
  - real printing is the shortest round-trip form (Python repr style)
  - complex prints as (RE+IMj) with both parts in real format
  - index traps on i < 0 or i >= len; division by zero traps
"""

import math
import re
import struct
import sys

from .astnodes import AstNode, NATIVE_SLOT
from . import errors

_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_REAL_RE = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")


class Closure:
    __slots__ = ("fn", "display")

    def __init__(self, fn, display):
        self.fn = fn
        self.display = display


class _Return(Exception):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


def _r32(x: float) -> float:
    return struct.unpack("f", struct.pack("f", x))[0]


class Interp:
    def __init__(self, root: AstNode, stdin: str = "", heap_bytes: int = 8388608,
                 bounds_check: bool = True):
        assert root.kind == "module"
        self.root = root
        self.stdin = stdin
        self.heap_bytes = heap_bytes
        self.bounds_check = bounds_check
        self.int_width = root.attrs.get("intwidth", 32)
        self.real_width = root.attrs.get("realwidth", 64)
        self.int_mask = (1 << self.int_width) - 1
        self.int_min = -(1 << (self.int_width - 1))
        self.out: list[str] = []
        self.iters: dict[str, list[int]] = {}
        self.frame_serial = 0
        self.frame_ids: dict[int, int] = {}

    # -- helpers -----------------------------------------------------------

    def wrap(self, v: int) -> int:
        v &= self.int_mask
        if v >= -self.int_min:
            v += 2 * self.int_min
        return v

    def real(self, v: float) -> float:
        return _r32(v) if self.real_width == 32 else v

    def new_frame(self, owner: AstNode) -> list:
        size = owner.attrs["framesize"]
        slotmap = owner.attrs.get("slotmap", "")
        frame = []
        for k in range(size):
            ch = slotmap[k] if k < len(slotmap) else "i"
            frame.append(0 if ch == "i" else 0.0 if ch == "r"
                         else False if ch == "b" else None)
        self.frame_serial += 1
        self.frame_ids[id(frame)] = self.frame_serial
        return frame

    def slot_addr(self, frame: list, offset: int) -> int:
        # synthetic stable address for & and id(); only equality is portable
        return self.wrap(self.frame_ids[id(frame)] * 256 + offset)

    def check_alloc(self, nbytes: int, loc):
        # a single allocation larger than the whole heap can never succeed,
        # even after compaction
        if nbytes + 16 > self.heap_bytes:
            raise errors.TrapHeapExhausted(*loc, nbytes)

    def elem_bytes(self, ty) -> int:
        if ty.tag == "int" or ty.tag == "bool":
            return self.int_width // 8
        if ty.tag == "real":
            return self.real_width // 8
        return 4  # handle

    # -- formatting ----------------------------------------------------------

    def fmt_real(self, v: float) -> str:
        if self.real_width == 64:
            return repr(v)  # shortest round-trip, fixed for exp in [-4, 16)
        # same algorithm at float32 precision
        if v != v:
            return "nan"
        if v == math.inf:
            return "inf"
        if v == -math.inf:
            return "-inf"
        for p in range(0, 9):
            text = "%.*e" % (p, v)
            if _r32(float(text)) == v:
                break
        mant, _, exp_s = text.partition("e")
        neg = mant.startswith("-")
        digits = mant.lstrip("-").replace(".", "")
        exp10 = int(exp_s)
        nd = len(digits)
        sign = "-" if neg else ""
        if exp10 < -4 or exp10 >= 16:
            frac = "." + digits[1:] if nd > 1 else ""
            return f"{sign}{digits[0]}{frac}e{exp10:+03d}"
        if exp10 >= nd - 1:
            return f"{sign}{digits}{'0' * (exp10 - nd + 1)}.0"
        if exp10 >= 0:
            return f"{sign}{digits[:exp10 + 1]}.{digits[exp10 + 1:]}"
        return f"{sign}0.{'0' * (-exp10 - 1)}{digits}"

    def fmt_complex(self, c) -> str:
        re, im = c
        sign = "-" if math.copysign(1.0, im) < 0 else "+"
        return f"({self.fmt_real(re)}{sign}{self.fmt_real(abs(im))}j)"

    def fmt(self, value, ty) -> str:
        t = ty.tag
        if t == "int":
            return str(value)
        if t == "real":
            return self.fmt_real(value)
        if t == "bool":
            return "True" if value else "False"
        if t == "string":
            return value
        if t == "complex":
            return self.fmt_complex(value)
        raise errors.InternalError(f"cannot format {t}")

    # -- execution ------------------------------------------------------------

    def run(self) -> int:
        frame = self.new_frame(self.root)
        display = [frame]
        try:
            for st in self.root.children:
                self.stmt(st, display)
        except errors.Trap:
            raise
        return 0

    def stmt(self, st: AstNode, display):
        k = st.kind
        if k == "pass":
            return
        if k == "exprstmt":
            self.eval(st.children[0], display)
            return
        if k == "print":
            e = st.children[0]
            self.out.append(self.fmt(self.eval(e, display), e.type) + "\n")
            return
        if k == "assign":
            target, value = st.children
            v = self.eval(value, display)
            frame = display[len(display) - 1 - target.slot.level]
            frame[target.slot.offset] = v
            return
        if k == "indexassign":
            base, idx, value = st.children
            vec = self.eval(base, display)
            i = self.eval(idx, display)
            v = self.eval(value, display)
            if self.bounds_check and (i < 0 or i >= len(vec)):
                raise errors.TrapIndexOutOfRange(*st.loc, i, len(vec))
            vec[i] = v
            return
        if k == "attrassign":
            base, value = st.children
            c = self.eval(base, display)
            v = self.eval(value, display)
            v = self.real(float(v))
            c[0 if st.attrs["attr"] == "real" else 1] = v
            return
        if k == "return":
            raise _Return(self.eval(st.children[0], display) if st.children else None)
        if k == "nonlocal":
            return
        if k == "if":
            nthen = st.attrs["nthen"]
            if self.eval(st.children[0], display):
                body = st.children[1:1 + nthen]
            else:
                body = st.children[1 + nthen:]
            for s in body:
                self.stmt(s, display)
            return
        if k == "while":
            cond = st.children[0]
            while self.eval(cond, display):
                for s in st.children[1:]:
                    self.stmt(s, display)
            return
        if k == "forrange":
            self.for_stmt(st, display)
            return
        if k == "funcdef":
            clo = Closure(st, list(display))
            frame = display[len(display) - 1]
            frame[st.slot.offset] = clo
            return
        raise errors.InternalError(f"unknown statement kind {k}")

    def for_stmt(self, st: AstNode, display):
        it_decl, start_e, end_e, step_e = st.children[:4]
        body = st.children[4:]
        native = st.attrs.get("native")
        name = st.attrs["var"]
        i = self.eval(start_e, display)
        if native:
            stack = self.iters.setdefault(name, [])
            stack.append(i)
        frame = display[len(display) - 1]
        try:
            while True:
                # mirror the FOR macro: step, then end, evaluated per iteration
                step = self.eval(step_e, display)
                end = self.eval(end_e, display)
                if not (i < end if step > 0 else i > end):
                    break
                if native:
                    stack[-1] = i
                else:
                    frame[it_decl.slot.offset] = i
                for s in body:
                    self.stmt(s, display)
                i = self.wrap(i + self.eval(step_e, display))
        finally:
            if native:
                stack.pop()

    def apply(self, clo: Closure, args, loc):
        fn = clo.fn
        frame = self.new_frame(fn)
        for k, a in enumerate(args):
            frame[k] = a
        display = clo.display + [frame]
        nparams = fn.attrs["nparams"]
        if fn.kind == "lambda":
            return self.eval(fn.children[nparams], display)
        try:
            for st in fn.children[nparams:]:
                self.stmt(st, display)
        except _Return as r:
            return r.value
        return None

    # -- expressions ------------------------------------------------------------

    def eval(self, e: AstNode, display):
        k = e.kind
        if k == "lit":
            lt = e.attrs["littype"]
            v = e.attrs["value"]
            if lt == "int":
                return v
            if lt == "real":
                return self.real(v)
            if lt == "imag":
                return [0.0, self.real(v)]
            return v
        if k == "ident":
            if e.slot == NATIVE_SLOT:
                return self.iters[e.attrs["name"]][-1]
            frame = display[len(display) - 1 - e.slot.level]
            return frame[e.slot.offset]
        if k == "binop":
            return self.binop(e, display)
        if k == "unop":
            v = self.eval(e.children[0], display)
            if e.attrs["op"] == "-":
                ty = e.type.tag
                if ty == "int":
                    return self.wrap(-v)
                if ty == "real":
                    return self.real(-v)
                return [self.real(-v[0]), self.real(-v[1])]
            return not v
        if k == "compare":
            return self.compare(e, display)
        if k == "boolop":
            l = self.eval(e.children[0], display)
            if e.attrs["op"] == "and":
                return bool(l) and bool(self.eval(e.children[1], display))
            return bool(l) or bool(self.eval(e.children[1], display))
        if k == "call":
            return self.call(e, display)
        if k == "index":
            base, idx = e.children
            seq = self.eval(base, display)
            i = self.eval(idx, display)
            if base.type.tag == "string":
                # string indexing is always checked (it allocates)
                if i < 0 or i >= len(seq):
                    raise errors.TrapIndexOutOfRange(*e.loc, i, len(seq))
                self.check_alloc(2, e.loc)
                return seq[i]
            if self.bounds_check and (i < 0 or i >= len(seq)):
                raise errors.TrapIndexOutOfRange(*e.loc, i, len(seq))
            return seq[i]
        if k == "attr":
            c = self.eval(e.children[0], display)
            return c[0 if e.attrs["attr"] == "real" else 1]
        if k == "ref":
            ident = e.children[0]
            frame = display[len(display) - 1 - ident.slot.level]
            return self.slot_addr(frame, ident.slot.offset)
        if k == "listlit":
            elems = [self.eval(c, display) for c in e.children]
            self.check_alloc(len(elems) * self.elem_bytes(e.type.elem), e.loc)
            return elems
        if k == "lambda":
            return Closure(e, list(display))
        raise errors.InternalError(f"unknown expression kind {k}")

    def promote(self, v, from_tag, to_tag):
        if from_tag == to_tag:
            return v
        if to_tag == "real":
            return self.real(float(v))
        if to_tag == "complex":
            if from_tag == "complex":
                return v
            return [self.real(float(v)), 0.0]
        return v

    def binop(self, e: AstNode, display):
        op = e.attrs["op"]
        l_node, r_node = e.children
        l = self.eval(l_node, display)
        r = self.eval(r_node, display)
        lt, rt = l_node.type.tag, r_node.type.tag
        res = e.type.tag
        if op == "+" and lt == "string":
            self.check_alloc(len(l) + len(r) + 1, e.loc)
            return l + r
        if op == "*" and lt == "vector":
            n = max(r, 0)
            self.check_alloc(n * len(l) * self.elem_bytes(e.type.elem), e.loc)
            return l * n
        if res == "complex" or lt == "complex" or rt == "complex":
            return self.complex_op(op, self.promote(l, lt, "complex"),
                                   self.promote(r, rt, "complex"), e.loc)
        if op == "/":
            if float(r) == 0.0:
                raise errors.TrapDivByZero(*e.loc)
            return self.real(float(l) / float(r))
        if res == "int":
            if op == "+":
                return self.wrap(l + r)
            if op == "-":
                return self.wrap(l - r)
            if op == "*":
                return self.wrap(l * r)
            if op == "%":
                if r == 0:
                    raise errors.TrapDivByZero(*e.loc)
                return l % r  # floored; |result| < |r|, no wrap needed
            if op == "**":
                return self.int_pow(l, r)
        else:  # real result
            a, b = self.real(float(l)), self.real(float(r))
            if op == "+":
                return self.real(a + b)
            if op == "-":
                return self.real(a - b)
            if op == "*":
                return self.real(a * b)
            if op == "%":
                if b == 0.0:
                    raise errors.TrapDivByZero(*e.loc)
                return self.real(self.real_mod(a, b))
            if op == "**":
                return self.real(self.real_pow(a, b))
        raise errors.InternalError(f"unhandled binop {op} on {lt},{rt}")

    @staticmethod
    def real_mod(a: float, b: float) -> float:
        r = math.fmod(a, b)
        if r != 0.0:
            if (r < 0.0) != (b < 0.0):
                r += b
        else:
            r = math.copysign(0.0, b)
        return r

    @staticmethod
    def real_pow(a: float, b: float) -> float:
        try:
            return math.pow(a, b)
        except (ValueError, OverflowError):
            return math.nan

    def int_pow(self, base: int, exp: int) -> int:
        if exp < 0:
            return 0
        result = 1
        b = self.wrap(base)
        e = exp
        while e > 0:
            if e & 1:
                result = self.wrap(result * b)
            b = self.wrap(b * b)
            e >>= 1
        return result

    def complex_op(self, op, l, r, loc):
        a, b = l
        c, d = r
        R = self.real
        if op == "+":
            v = [R(a + c), R(b + d)]
        elif op == "-":
            v = [R(a - c), R(b - d)]
        elif op == "*":
            v = [R(R(a * c) - R(b * d)), R(R(a * d) + R(b * c))]
        elif op == "/":
            den = R(R(c * c) + R(d * d))
            if den == 0.0:
                raise errors.TrapDivByZero(*loc)
            v = [R(R(R(a * c) + R(b * d)) / den), R(R(R(b * c) - R(a * d)) / den)]
        else:
            raise errors.InternalError(f"complex op {op}")
        self.check_alloc(2 * (self.real_width // 8), loc)
        return v

    def compare(self, e: AstNode, display):
        op = e.attrs["op"]
        l_node, r_node = e.children
        l = self.eval(l_node, display)
        r = self.eval(r_node, display)
        lt, rt = l_node.type.tag, r_node.type.tag
        if lt == "complex" or rt == "complex":
            lc = self.promote(l, lt, "complex")
            rc = self.promote(r, rt, "complex")
            eq = lc[0] == rc[0] and lc[1] == rc[1]
            return eq if op == "==" else not eq
        if op == "==":
            return l == r
        if op == "!=":
            return l != r
        if op == "<":
            return l < r
        if op == "<=":
            return l <= r
        if op == ">":
            return l > r
        return l >= r

    def call(self, e: AstNode, display):
        builtin = e.attrs.get("builtin")
        if builtin is not None:
            return self.builtin(e, builtin, display)
        callee = e.children[0]
        clo = self.eval(callee, display)
        args = [self.eval(a, display) for a in e.children[1:]]
        return self.apply(clo, args, e.loc)

    def builtin(self, e: AstNode, name, display):
        if name == "len":
            return len(self.eval(e.children[0], display))
        if name == "id":
            ident = e.children[0]
            frame = display[len(display) - 1 - ident.slot.level]
            return self.slot_addr(frame, ident.slot.offset)
        arg = e.children[0]
        v = self.eval(arg, display)
        ty = arg.type.tag
        if name == "int":
            if ty == "int":
                return v
            if ty == "bool":
                return 1 if v else 0
            if ty == "real":
                return self.real_to_int(v)
            if not _INT_RE.match(v):
                raise errors.Trap(*e.loc, f"invalid int literal {v!r}")
            return self.wrap(int(v))
        if name == "float":
            if ty == "real":
                return v
            if ty == "int":
                return self.real(float(v))
            if not _REAL_RE.match(v):
                raise errors.Trap(*e.loc, f"invalid real literal {v!r}")
            return self.real(float(v))
        if name == "str":
            if ty == "string":
                return v
            text = self.fmt(v, arg.type)
            self.check_alloc(len(text) + 1, e.loc)
            return text
        raise errors.InternalError(f"unknown builtin {name}")

    def real_to_int(self, v: float) -> int:
        # mirrors x86 cvttsd2si: out-of-range and NaN give INT_MIN
        if v != v or v >= -self.int_min or v < self.int_min:
            return self.int_min
        return int(v)


def interpret(root: AstNode, stdin: str = "", heap_bytes: int = 8388608,
              bounds_check: bool = True) -> tuple[str, int]:
    """Execute a typed module; returns (stdout, exit status).

    Traps yield the pinned exit code (70) with the output produced so far;
    the trap message is re-raised to the caller through `interpret_full`.
    """
    out, _err, code = interpret_full(root, stdin, heap_bytes, bounds_check)
    return out, code


def interpret_full(root: AstNode, stdin: str = "", heap_bytes: int = 8388608,
                   bounds_check: bool = True) -> tuple[str, str, int]:
    interp = Interp(root, stdin, heap_bytes, bounds_check)
    limit = sys.getrecursionlimit()
    if limit < 50000:
        sys.setrecursionlimit(50000)  # each applied function costs a few frames
    try:
        interp.run()
    except errors.Trap as trap:
        return "".join(interp.out), f"TRAP: {trap.message}\n", trap.exit_code
    finally:
        sys.setrecursionlimit(limit)
    return "".join(interp.out), "", 0


def main(argv=None) -> int:
    """CLI: oracle run file.vpy [< stdin]"""
    import argparse

    from .parser import parse_source
    from .typeinfer import infer_pipeline

    ap = argparse.ArgumentParser(prog="oracle", description=main.__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    runp = sub.add_parser("run", help="interpret a vPython source file")
    runp.add_argument("file")
    runp.add_argument("--heap-bytes", type=int, default=8388608)
    runp.add_argument("--int-width", type=int, default=32, choices=(32, 64))
    runp.add_argument("--real-width", type=int, default=64, choices=(32, 64))
    runp.add_argument("--no-bounds-check", action="store_true")
    args = ap.parse_args(argv)

    try:
        with open(args.file, encoding="utf-8") as f:
            source = f.read()
        typed = infer_pipeline(parse_source(source), args.int_width, args.real_width)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (errors.VpycError, errors.AstFormatError) as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return 2
    # the language has no input construct; stdin is accepted but unread
    out, err, code = interpret_full(typed, "", args.heap_bytes,
                                    not args.no_bounds_check)
    sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
