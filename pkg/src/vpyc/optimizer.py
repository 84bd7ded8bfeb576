"""Phase 3: AST-to-AST rewrites on the slotted tree.

`lower_for_range` turns every for-range induction variable into a
backend-native name: the variable loses its frame slot (the layout is
renumbered) and body reads are marked native. Writes to the induction
variable are compile errors; the iterator is immutable.

`fold_constants` folds literal-only arithmetic with the configured int
width's wrap semantics.
"""

import copy

from .astnodes import (AstNode, BOOL, INT, NATIVE_SLOT, REAL, SlotRef)
from . import errors


def optimize(root: AstNode) -> AstNode:
    """Phase 3 entry: constant folding, then loop lowering."""
    root = fold_constants(root)
    return lower_for_range(root)


# -- for-range lowering --------------------------------------------------------

def lower_for_range(root: AstNode) -> AstNode:
    root = copy.deepcopy(root)
    _lower_in(root, root)
    return root


def _lower_in(fn: AstNode, root: AstNode):
    """Lower loops belonging to function `fn` (module or funcdef/lambda)."""
    nparams = fn.attrs.get("nparams", 0)
    body = fn.children[nparams:] if fn.kind in ("funcdef", "lambda") else fn.children
    for st in body:
        _lower_stmt(st, fn)


def _lower_stmt(st: AstNode, fn: AstNode):
    if st.kind in ("funcdef", "lambda"):
        _lower_in(st, st)
        return
    if st.kind == "forrange" and not st.attrs.get("native"):
        _lower_loop(st, fn)
    for child in st.children:
        _lower_stmt(child, fn)


def _lower_loop(loop: AstNode, fn: AstNode):
    it_decl = loop.children[0]
    if it_decl.slot is None or it_decl.slot == NATIVE_SLOT:
        raise errors.InternalError("for-range iterator has no slot to lower")
    k = it_decl.slot.offset
    name = it_decl.attrs["name"]
    _check_iterator_use(loop.children[4:], k, name, 0)
    loop.attrs["native"] = 1
    it_decl.slot = NATIVE_SLOT
    for st in loop.children[4:]:
        _mark_native_reads(st, k, 0)
    _remove_frame_slot(fn, k)


def _check_iterator_use(body, k, name, depth):
    """Reject writes, & and id() of the induction variable."""
    for st in body:
        if st.kind in ("funcdef", "lambda"):
            continue  # capture was already rejected during inference
        if st.kind == "assign":
            target = st.children[0]
            if target.kind == "ident" and _is_iter_ref(target, k, depth):
                raise errors.IteratorMutationError(*st.loc, name)
        if st.kind == "ref" and _is_iter_ref(st.children[0], k, depth):
            raise errors.TypeError(
                *st.loc, f"cannot take a reference to loop iterator {name!r}")
        if st.kind == "call" and st.attrs.get("builtin") == "id" \
                and st.children and _is_iter_ref(st.children[0], k, depth):
            raise errors.TypeError(
                *st.loc, f"id() of loop iterator {name!r} is not supported")
        _check_iterator_use(st.children, k, name, depth)


def _is_iter_ref(n: AstNode, k: int, depth: int) -> bool:
    return (n.kind == "ident" and isinstance(n.slot, SlotRef)
            and n.slot.level == depth and n.slot.offset == k)


def _mark_native_reads(n: AstNode, k: int, depth: int):
    if n.kind in ("funcdef", "lambda"):
        return
    if _is_iter_ref(n, k, depth):
        n.slot = NATIVE_SLOT
    for child in n.children:
        _mark_native_reads(child, k, depth)


def _remove_frame_slot(fn: AstNode, k: int):
    """Drop offset k from fn's frame and renumber every reference to it."""
    _shift_refs(fn, fn, k, 0)
    fn.attrs["framesize"] -= 1
    m = fn.attrs["slotmap"]
    fn.attrs["slotmap"] = m[:k] + m[k + 1:]


def _shift_refs(n: AstNode, fn: AstNode, k: int, depth: int):
    if n is not fn and n.kind in ("funcdef", "lambda"):
        # the funcdef node itself is a declaration in the enclosing frame
        if isinstance(n.slot, SlotRef) and depth == 0 and n.slot.offset > k:
            n.slot = SlotRef(0, n.slot.offset - 1)
        for child in n.children:
            _shift_refs(child, fn, k, depth + 1)
        return
    if n.kind in ("ident", "decl") and isinstance(n.slot, SlotRef):
        if n.slot.level == depth and n.slot.offset > k:
            n.slot = SlotRef(n.slot.level, n.slot.offset - 1)
    for child in n.children:
        _shift_refs(child, fn, k, depth)


# -- constant folding ------------------------------------------------------------

def fold_constants(root: AstNode) -> AstNode:
    root = copy.deepcopy(root)
    int_width = root.attrs.get("intwidth", 32)
    _Folder(int_width).fold(root)
    return root


class _Folder:
    def __init__(self, int_width):
        self.mask = (1 << int_width) - 1
        self.min = -(1 << (int_width - 1))

    def wrap(self, v: int) -> int:
        v &= self.mask
        if v >= -self.min:
            v += 2 * self.min
        return v

    def fold(self, n: AstNode):
        for i, child in enumerate(n.children):
            self.fold(child)
            folded = self.try_fold(child)
            if folded is not None:
                n.children[i] = folded

    def try_fold(self, n: AstNode) -> AstNode | None:
        k = n.kind
        if k == "binop":
            return self.fold_binop(n)
        if k == "unop":
            return self.fold_unop(n)
        if k == "compare":
            return self.fold_compare(n)
        if k == "boolop":
            return self.fold_boolop(n)
        if k == "call" and n.attrs.get("builtin") == "len" and n.children \
                and n.children[0].kind == "listlit":
            return self.lit(n, "int", len(n.children[0].children))
        return None

    @staticmethod
    def numeric_lit(n: AstNode):
        if n.kind == "lit" and n.attrs["littype"] in ("int", "real"):
            return n.attrs["littype"], n.attrs["value"]
        return None

    def lit(self, src: AstNode, littype: str, value) -> AstNode:
        out = AstNode("lit", {"littype": littype, "value": value}, [], src.loc)
        out.type = {"int": INT, "real": REAL, "bool": BOOL}[littype]
        return out

    def fold_binop(self, n: AstNode) -> AstNode | None:
        lv = self.numeric_lit(n.children[0])
        rv = self.numeric_lit(n.children[1])
        if lv is None or rv is None:
            return None
        op = n.attrs["op"]
        (lt, l), (rt, r) = lv, rv
        both_int = lt == "int" and rt == "int"
        try:
            if op == "+":
                v = l + r
            elif op == "-":
                v = l - r
            elif op == "*":
                v = l * r
            elif op == "/":
                if r == 0:
                    return None  # keep the runtime trap
                return self.lit(n, "real", l / r)
            elif op == "%":
                if r == 0:
                    return None
                v = l % r
            elif op == "**":
                if both_int:
                    v = self.int_pow(l, r)
                else:
                    v = float(l) ** float(r)
            else:
                return None
        except (OverflowError, ValueError, ZeroDivisionError):
            return None
        if both_int:
            return self.lit(n, "int", self.wrap(int(v)))
        return self.lit(n, "real", float(v))

    def int_pow(self, base: int, exp: int) -> int:
        # mirrors the runtime POWI loop: square-and-multiply with per-step wrap
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

    def fold_unop(self, n: AstNode) -> AstNode | None:
        child = n.children[0]
        op = n.attrs["op"]
        if op == "-":
            v = self.numeric_lit(child)
            if v is None:
                return None
            lt, val = v
            if lt == "int":
                return self.lit(n, "int", self.wrap(-val))
            return self.lit(n, "real", -val)
        if op == "not" and child.kind == "lit" and child.attrs["littype"] == "bool":
            return self.lit(n, "bool", not child.attrs["value"])
        return None

    def fold_compare(self, n: AstNode) -> AstNode | None:
        lv = self.numeric_lit(n.children[0])
        rv = self.numeric_lit(n.children[1])
        if lv is None or rv is None:
            return None
        op = n.attrs["op"]
        l, r = lv[1], rv[1]
        v = {"<": l < r, "<=": l <= r, ">": l > r, ">=": l >= r,
             "==": l == r, "!=": l != r}[op]
        return self.lit(n, "bool", v)

    def fold_boolop(self, n: AstNode) -> AstNode | None:
        l, r = n.children
        if l.kind == "lit" and l.attrs["littype"] == "bool" \
                and r.kind == "lit" and r.attrs["littype"] == "bool":
            a, b = l.attrs["value"], r.attrs["value"]
            v = (a and b) if n.attrs["op"] == "and" else (a or b)
            return self.lit(n, "bool", v)
        return None
