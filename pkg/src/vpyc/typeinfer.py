"""Phase 2: flow-order type inference with type freezing.

Every name is frozen to one type per program point. A dynamic retype
creates a new declaration at a fresh frame offset; identifiers after the
retype bind to the new declaration. Function signatures are monomorphic,
fixed by the first call site. After inference, `resolve_scopes` assigns
dense (level, offset) slot coordinates and `check_frozen` re-verifies the
whole tree as the gate guaranteeing the backend emits no type dispatch.
"""

import copy

from .astnodes import (AstNode, BOOL, COMPLEX, FrozenType, INT, NONE, REAL,
                       STRING, SlotRef, node, vector_of)
from . import errors

BUILTINS = ("len", "range", "int", "float", "str", "id", "print")

_NUMERIC = ("int", "real", "complex")
_PRINTABLE = ("int", "real", "bool", "string", "complex")


class _Scope:
    """One lexical frame: the module or one function body."""

    def __init__(self, owner: AstNode, parent, depth: int):
        self.owner = owner
        self.parent = parent
        self.depth = depth
        self.bindings: dict[str, AstNode] = {}
        self.decls: list[AstNode] = []
        self.returns: list[tuple[FrozenType, tuple]] = []
        self.partial_result: FrozenType | None = None
        self.join_decls: dict[str, AstNode] | None = None

    def declare(self, decl: AstNode, ty: FrozenType):
        decl.type = ty
        decl._scope = self
        decl._captured = False
        decl._nrefs = 0
        decl._idents = []
        if not hasattr(decl, "_isiter"):
            decl._isiter = False
        self.decls.append(decl)
        self.bindings[decl.attrs["name"]] = decl

    def lookup(self, name: str):
        scope = self
        while scope is not None:
            decl = scope.bindings.get(name)
            if decl is not None:
                return decl
            scope = scope.parent
        return None


class _FnInfo:
    """Deferred inference state for one funcdef or lambda."""

    def __init__(self, fn_node: AstNode, def_scope: _Scope):
        self.node = fn_node
        self.def_scope = def_scope
        self.state = "pending"  # pending | inferring | done
        self.scope: _Scope | None = None
        self.container = None   # statement list to prune a dead def from
        self.stmt = None
        self.decl = None        # the declaration holding this fn, if any

    @property
    def name(self):
        return self.node.attrs.get("name", "<lambda>")


def infer(root: AstNode, int_width: int = 32, real_width: int = 64) -> AstNode:
    """Infer and freeze types over a fresh copy of `root`."""
    root = copy.deepcopy(root)
    _Inferencer(int_width, real_width).run(root)
    return root


class _Inferencer:
    def __init__(self, int_width, real_width):
        assert int_width in (32, 64) and real_width in (32, 64)
        self.int_width = int_width
        self.int_min = -(1 << (int_width - 1))
        self.int_mask = (1 << int_width) - 1
        self.real_width = real_width
        self.fninfos: list[_FnInfo] = []
        self.scopes: list[_Scope] = []

    def wrap_int(self, v: int) -> int:
        v &= self.int_mask
        if v >= -self.int_min:
            v += 2 * self.int_min
        return v

    def run(self, root: AstNode):
        assert root.kind == "module"
        root.attrs["intwidth"] = self.int_width
        root.attrs["realwidth"] = self.real_width
        scope = _Scope(root, None, 0)
        root._scope = scope
        self.scopes.append(scope)
        self.stmts(scope, root.children)
        self.prune_dead_functions()
        self.restamp_lambda_types(root)
        root._all_scopes = self.scopes

    # -- statements ---------------------------------------------------------

    def stmts(self, scope, body) -> bool:
        definite = False
        for st in list(body):
            definite = self.stmt(scope, st, body) or definite
        return definite

    def stmt(self, scope, st: AstNode, container) -> bool:
        k = st.kind
        if k == "pass":
            return False
        if k == "exprstmt":
            self.expr(scope, st.children[0])
            return False
        if k == "print":
            ty = self.expr(scope, st.children[0])
            if ty.tag not in _PRINTABLE:
                raise errors.TypeError(*st.loc, f"cannot print a value of type {ty}")
            return False
        if k == "assign":
            self.assign(scope, st, container)
            return False
        if k == "indexassign":
            self.index_assign(scope, st)
            return False
        if k == "attrassign":
            self.attr_assign(scope, st)
            return False
        if k == "return":
            return self.return_stmt(scope, st)
        if k == "nonlocal":
            self.nonlocal_stmt(scope, st)
            return False
        if k == "if":
            return self.if_stmt(scope, st)
        if k == "while":
            cond = self.expr(scope, st.children[0])
            if cond.tag != "bool":
                raise errors.TypeError(*st.loc, f"while condition must be bool, got {cond}")
            before = dict(scope.bindings)
            self.stmts(scope, st.children[1:])
            self.check_loop_carried(scope, before, st)
            return False
        if k == "forrange":
            self.for_stmt(scope, st)
            return False
        if k == "funcdef":
            self.def_stmt(scope, st, container)
            return False
        raise errors.InternalError(f"unknown statement kind {k}")

    def assign(self, scope, st: AstNode, container):
        target, value = st.children
        assert target.kind == "ident"
        name = target.attrs["name"]
        if name in BUILTINS:
            raise errors.TypeError(*target.loc, f"cannot assign to builtin name {name!r}")
        ty = self.expr(scope, value)
        if ty.tag == "none":
            raise errors.TypeError(*st.loc, "cannot assign a none value")
        current = scope.bindings.get(name)
        if current is not None and ty.tag == "lambda" and current.type.tag == "lambda":
            # reassigning a function-valued name: dispatch happens through the
            # stored closure, so only the frozen signature must agree
            cur_ty = self.live_type(current.type)
            if not cur_ty.resolved:
                raise errors.TypeError(
                    *st.loc,
                    f"cannot reassign {name!r} before its signature is frozen "
                    "(call it first)")
            self.coerce_arg(ty, cur_ty, st.loc, what=f"reassignment of {name!r}")
            self.bind_ident(scope, target, current)
            return
        if current is not None and current.type == ty:
            self.bind_ident(scope, target, current)
            return
        if current is not None and current._captured:
            raise errors.TypeError(
                *st.loc,
                f"cannot retype {name!r}: it is referenced by an inner function")
        join = scope.join_decls
        if join is not None and name in join and join[name].type == ty:
            # the other branch of this if already declared the name with the
            # same type; share its slot so the join reads one location
            decl = join[name]
            scope.bindings[name] = decl
            self.bind_ident(scope, target, decl)
            return
        decl = node("decl", loc=target.loc, attrs={"name": name})
        scope.declare(decl, ty)
        st.children[0] = decl
        if join is not None:
            join[name] = decl
        if ty.tag == "lambda" and ty.fninfo is not None and ty.fninfo.state == "pending":
            info = ty.fninfo
            if info.decl is None:
                info.decl = decl
                info.container = container
                info.stmt = st

    def index_assign(self, scope, st: AstNode):
        base, idx, value = st.children
        base_ty = self.expr(scope, base)
        idx_ty = self.expr(scope, idx)
        val_ty = self.expr(scope, value)
        if base_ty.tag != "vector":
            raise errors.TypeError(*st.loc, f"cannot index-assign into {base_ty}")
        if idx_ty.tag != "int":
            raise errors.TypeError(*idx.loc, "index must be int")
        if val_ty != base_ty.elem:
            raise errors.TypeError(
                *st.loc, f"element type {base_ty.elem} expected, got {val_ty}")

    def attr_assign(self, scope, st: AstNode):
        base, value = st.children
        base_ty = self.expr(scope, base)
        val_ty = self.expr(scope, value)
        if base_ty.tag != "complex":
            raise errors.TypeError(
                *st.loc, f".{st.attrs['attr']} assignment needs complex, got {base_ty}")
        if val_ty.tag not in ("int", "real"):
            raise errors.TypeError(*st.loc, f"complex part must be numeric, got {val_ty}")

    def return_stmt(self, scope, st: AstNode) -> bool:
        if scope.owner.kind == "module":
            raise errors.TypeError(*st.loc, "return outside function")
        ty = self.expr(scope, st.children[0]) if st.children else NONE
        scope.returns.append((ty, st.loc))
        if scope.partial_result is None:
            scope.partial_result = ty
        elif scope.partial_result != ty:
            raise errors.TypeError(
                *st.loc,
                f"conflicting return types {scope.partial_result} and {ty}")
        return True

    def nonlocal_stmt(self, scope, st: AstNode):
        name = st.attrs["name"]
        if scope.owner.kind == "module":
            raise errors.NonlocalError(*st.loc, "nonlocal outside function")
        if name in scope.bindings and scope.bindings[name]._scope is scope:
            raise errors.NonlocalError(*st.loc, f"nonlocal {name!r} after local binding")
        outer = scope.parent
        decl = None
        while outer is not None and outer.owner.kind != "module":
            d = outer.bindings.get(name)
            if d is not None and d._scope is outer:
                decl = d
                break
            outer = outer.parent
        if decl is None:
            raise errors.NonlocalError(
                *st.loc, f"no binding for nonlocal {name!r} in an enclosing function")
        decl._captured = True
        scope.bindings[name] = decl

    def if_stmt(self, scope, st: AstNode) -> bool:
        cond = st.children[0]
        nthen = st.attrs["nthen"]
        cond_ty = self.expr(scope, cond)
        if cond_ty.tag != "bool":
            raise errors.TypeError(*st.loc, f"if condition must be bool, got {cond_ty}")
        pre = dict(scope.bindings)
        prev_join = scope.join_decls
        join: dict[str, AstNode] = {}
        scope.join_decls = join
        then_definite = self.stmts(scope, st.children[1:1 + nthen])
        then_end = dict(scope.bindings)
        scope.bindings = dict(pre)
        else_definite = self.stmts(scope, st.children[1 + nthen:])
        else_end = scope.bindings
        scope.join_decls = prev_join
        merged = {}
        for name, decl in then_end.items():
            other = else_end.get(name)
            if other is decl:
                merged[name] = decl
            elif other is None:
                continue  # declared in the then-branch only: unbound after join
            elif name in pre and pre[name] in (decl, other):
                raise errors.TypeError(
                    *st.loc, f"{name!r} retyped in only one branch of if/else")
            elif decl.type != other.type:
                raise errors.TypeError(
                    *st.loc,
                    f"{name!r} has type {decl.type} in one branch and "
                    f"{other.type} in the other")
            else:
                merged[name] = decl
        scope.bindings = merged
        has_else = nthen < len(st.children) - 1
        return then_definite and else_definite and has_else

    def check_loop_carried(self, scope, before, st):
        for name, decl in before.items():
            now = scope.bindings.get(name)
            if now is not None and now is not decl and now.type != decl.type:
                raise errors.TypeError(
                    *st.loc,
                    f"{name!r} changes type across loop iterations "
                    f"({decl.type} -> {now.type})")

    def for_stmt(self, scope, st: AstNode):
        it_decl = st.children[0]
        name = it_decl.attrs["name"]
        if name in BUILTINS:
            raise errors.TypeError(*it_decl.loc, f"cannot shadow builtin {name!r}")
        for bound in st.children[1:4]:
            ty = self.expr(scope, bound)
            if ty.tag != "int":
                raise errors.TypeError(*bound.loc, f"range bounds must be int, got {ty}")
        saved = scope.bindings.get(name)
        it_decl._isiter = True
        scope.declare(it_decl, INT)
        before = dict(scope.bindings)
        self.stmts(scope, st.children[4:])
        self.check_loop_carried(scope, before, st)
        # the iterator is loop-block scoped: restore the outer binding
        if saved is not None:
            scope.bindings[name] = saved
        else:
            scope.bindings.pop(name, None)

    def def_stmt(self, scope, st: AstNode, container):
        name = st.attrs["name"]
        if name in BUILTINS:
            raise errors.TypeError(*st.loc, f"cannot redefine builtin {name!r}")
        current = scope.bindings.get(name)
        if current is not None and current._captured:
            raise errors.TypeError(
                *st.loc, f"cannot retype {name!r}: it is referenced by an inner function")
        info = _FnInfo(st, scope)
        info.container = container
        info.stmt = st
        info.decl = st  # the funcdef node doubles as its own declaration
        self.fninfos.append(info)
        st._fninfo = info
        scope.declare(st, FrozenType("lambda", fninfo=info))

    # -- deferred function-body inference -------------------------------------

    def live_type(self, ty: FrozenType) -> FrozenType:
        """A lambda type whose function froze later reads through to the
        frozen signature (tree-wide restamping happens at the end)."""
        if (ty is not None and ty.tag == "lambda" and not ty.resolved
                and ty.fninfo is not None and ty.fninfo.state == "done"):
            return ty.fninfo.node.type
        return ty

    def coerce_arg(self, got: FrozenType, want: FrozenType, loc, what="argument"):
        """Check `got` against frozen `want`, inferring pending lambdas."""
        got = self.live_type(got)
        want = self.live_type(want)
        if got == want:
            return
        if (want.tag == "lambda" and got.tag == "lambda" and not got.resolved
                and got.fninfo is not None):
            result = self.infer_function(got.fninfo, want.params, loc)
            if result != want.result:
                raise errors.TypeError(
                    *loc, f"{what}: function returns {result}, expected {want.result}")
            return
        raise errors.TypeError(*loc, f"{what}: type {got} conflicts with frozen {want}")

    def infer_function(self, info: _FnInfo, arg_types, loc):
        fn = info.node
        nparams = fn.attrs["nparams"]
        if len(arg_types) != nparams:
            raise errors.TypeError(
                *loc, f"{info.name}() takes {nparams} arguments, got {len(arg_types)}")
        if info.state == "done":
            sig = fn.type
            for got, want in zip(arg_types, sig.params):
                self.coerce_arg(got, want, loc, what=f"{info.name}() argument")
            return sig.result
        if info.state == "inferring":
            # recursive call: params are frozen, use the partial return type
            for got, want in zip(arg_types, [p.type for p in fn.children[:nparams]]):
                self.coerce_arg(got, want, loc, what=f"{info.name}() recursive argument")
            if info.scope.partial_result is None:
                raise errors.TypeError(
                    *loc,
                    f"cannot infer the return type of recursive {info.name}(); "
                    "return a value before the recursive call")
            return info.scope.partial_result
        for ty in arg_types:
            if ty.tag == "none":
                raise errors.TypeError(*loc, "cannot pass a none value as an argument")
        info.state = "inferring"
        fscope = _Scope(fn, info.def_scope, info.def_scope.depth + 1)
        fn._body_scope = fscope  # _scope stays the declaring scope
        self.scopes.append(fscope)
        info.scope = fscope
        for p, ty in zip(fn.children[:nparams], arg_types):
            if p.attrs["name"] in BUILTINS:
                raise errors.TypeError(*p.loc, f"cannot shadow builtin {p.attrs['name']!r}")
            fscope.declare(p, ty)
        if fn.kind == "lambda":
            result = self.expr(fscope, fn.children[nparams])
        else:
            definite = self.stmts(fscope, fn.children[nparams:])
            result = fscope.returns[0][0] if fscope.returns else NONE
            if result.tag != "none" and not definite:
                raise errors.TypeError(
                    *fn.loc, f"{info.name}() returns {result} on some paths but "
                    "falls off the end on others")
        # unresolved lambda params freeze to the signature their first
        # invocation inside the body produced
        params = tuple(
            self.resolved_type(p.type, p.loc, f"parameter {p.attrs['name']!r} of {info.name}()")
            for p in fn.children[:nparams])
        result = self.resolved_type(result, fn.loc, f"return value of {info.name}()")
        fn.type = FrozenType("lambda", params=params, result=result, fninfo=info)
        info.state = "done"
        return result

    def resolved_type(self, ty: FrozenType, loc, what) -> FrozenType:
        if ty.tag == "lambda" and not ty.resolved:
            info = ty.fninfo
            if info is not None and info.state == "done":
                return info.node.type
            raise errors.TypeError(
                *loc, f"{what} is a function that is never called; its signature "
                "cannot be frozen")
        return ty

    def prune_dead_functions(self):
        for info in self.fninfos:
            if info.state == "done":
                continue
            if info.state == "inferring":
                raise errors.InternalError(f"{info.name}() left mid-inference")
            decl = info.decl
            if decl is not None and getattr(decl, "_nrefs", 0) == 0:
                # declared but never called or referenced: the statement
                # becomes a pass in place (list surgery would break branch
                # counts) and the slot leaves the frame layout
                name = decl.attrs.get("name")
                if name and info.def_scope.bindings.get(name) is decl:
                    del info.def_scope.bindings[name]
                if decl in info.def_scope.decls:
                    info.def_scope.decls.remove(decl)
                if info.stmt is not None:
                    info.stmt.kind = "pass"
                    info.stmt.attrs = {}
                    info.stmt.children = []
                    info.stmt.type = None
                    info.stmt.slot = None
                continue
            raise errors.TypeError(
                *info.node.loc,
                f"{info.name}() is referenced but never called; its signature "
                "cannot be frozen (call it, or remove it)")

    def restamp_lambda_types(self, root: AstNode):
        def fixed(ty):
            if (ty is not None and ty.tag == "lambda" and not ty.resolved
                    and ty.fninfo is not None and ty.fninfo.state == "done"):
                return ty.fninfo.node.type
            return ty

        for n in root.walk():
            n.type = fixed(n.type)

    # -- expressions ----------------------------------------------------------

    def bind_ident(self, scope, ident: AstNode, decl: AstNode):
        ident.type = decl.type
        ident._decl = decl
        ident._use_scope = scope
        decl._nrefs += 1
        decl._idents.append(ident)
        if decl._scope is not scope:
            if decl._isiter:
                raise errors.TypeError(
                    *ident.loc,
                    f"loop iterator {ident.attrs['name']!r} cannot be used from "
                    "a nested function")
            decl._captured = True

    def expr(self, scope, e: AstNode) -> FrozenType:
        ty = self._expr(scope, e)
        e.type = ty
        return ty

    def _expr(self, scope, e: AstNode) -> FrozenType:
        k = e.kind
        if k == "lit":
            lt = e.attrs["littype"]
            if lt == "int":
                e.attrs["value"] = self.wrap_int(e.attrs["value"])
                return INT
            return {"real": REAL, "bool": BOOL, "string": STRING,
                    "imag": COMPLEX}[lt]
        if k == "ident":
            name = e.attrs["name"]
            if name in BUILTINS:
                raise errors.TypeError(*e.loc, f"builtin {name!r} can only be called")
            decl = scope.lookup(name)
            if decl is None:
                raise errors.NameError(*e.loc, name)
            self.bind_ident(scope, e, decl)
            return decl.type
        if k == "binop":
            return self.binop(scope, e)
        if k == "unop":
            ty = self.expr(scope, e.children[0])
            if e.attrs["op"] == "-":
                if ty.tag not in _NUMERIC:
                    raise errors.TypeError(*e.loc, f"unary - needs a number, got {ty}")
                return ty
            if ty.tag != "bool":
                raise errors.TypeError(*e.loc, f"'not' needs bool, got {ty}")
            return BOOL
        if k == "compare":
            return self.compare(scope, e)
        if k == "boolop":
            l = self.expr(scope, e.children[0])
            r = self.expr(scope, e.children[1])
            if l.tag != "bool" or r.tag != "bool":
                raise errors.TypeError(
                    *e.loc, f"'{e.attrs['op']}' needs bool operands, got {l} and {r}")
            return BOOL
        if k == "call":
            return self.call(scope, e)
        if k == "index":
            base = self.expr(scope, e.children[0])
            idx = self.expr(scope, e.children[1])
            if idx.tag != "int":
                raise errors.TypeError(*e.children[1].loc, "index must be int")
            if base.tag == "vector":
                return base.elem
            if base.tag == "string":
                return STRING
            raise errors.TypeError(*e.loc, f"cannot index a value of type {base}")
        if k == "attr":
            base = self.expr(scope, e.children[0])
            if base.tag != "complex":
                raise errors.TypeError(
                    *e.loc, f".{e.attrs['attr']} needs a complex value, got {base}")
            return REAL
        if k == "ref":
            self.expr(scope, e.children[0])
            return INT
        if k == "listlit":
            if not e.children:
                raise errors.TypeError(*e.loc, "cannot infer the element type of []")
            elem = self.expr(scope, e.children[0])
            for child in e.children[1:]:
                ty = self.expr(scope, child)
                if ty != elem:
                    raise errors.TypeError(
                        *child.loc, f"list elements must share one type ({elem} vs {ty})")
            if elem.tag == "none" or not elem.resolved:
                raise errors.TypeError(*e.loc, f"cannot build a vector of {elem}")
            return vector_of(elem)
        if k == "lambda":
            info = _FnInfo(e, scope)
            self.fninfos.append(info)
            e._fninfo = info
            return FrozenType("lambda", fninfo=info)
        raise errors.InternalError(f"unknown expression kind {k}")

    def binop(self, scope, e: AstNode) -> FrozenType:
        op = e.attrs["op"]
        l = self.expr(scope, e.children[0])
        r = self.expr(scope, e.children[1])
        if op == "+" and l.tag == "string" and r.tag == "string":
            return STRING
        if op == "*" and l.tag == "vector" and r.tag == "int":
            return l
        if l.tag in _NUMERIC and r.tag in _NUMERIC:
            wide = l if _NUMERIC.index(l.tag) >= _NUMERIC.index(r.tag) else r
            if op == "/":
                return COMPLEX if wide.tag == "complex" else REAL
            if op in ("%", "**") and wide.tag == "complex":
                raise errors.TypeError(*e.loc, f"'{op}' is not defined for complex")
            return wide
        raise errors.TypeError(*e.loc, f"'{op}' is not defined for {l} and {r}")

    def compare(self, scope, e: AstNode) -> FrozenType:
        op = e.attrs["op"]
        l = self.expr(scope, e.children[0])
        r = self.expr(scope, e.children[1])
        if op in ("==", "!="):
            if l.tag in _NUMERIC and r.tag in _NUMERIC:
                return BOOL
            if l == r and l.tag in ("bool", "string"):
                return BOOL
            raise errors.TypeError(*e.loc, f"'{op}' is not defined for {l} and {r}")
        if l.tag in ("int", "real") and r.tag in ("int", "real"):
            return BOOL
        raise errors.TypeError(*e.loc, f"'{op}' is not defined for {l} and {r}")

    def call(self, scope, e: AstNode) -> FrozenType:
        callee = e.children[0]
        args = e.children[1:]
        if callee.kind == "ident" and callee.attrs["name"] in BUILTINS:
            return self.builtin_call(scope, e, callee.attrs["name"], args)
        callee_ty = self.live_type(self.expr(scope, callee))
        if callee_ty.tag != "lambda":
            raise errors.TypeError(*e.loc, f"cannot call a value of type {callee_ty}")
        arg_types = tuple(self.expr(scope, a) for a in args)
        info = callee_ty.fninfo
        if info is None:
            if not callee_ty.resolved:
                raise errors.TypeError(
                    *e.loc, "cannot infer the signature of this call target")
            for got, want in zip(arg_types, callee_ty.params):
                self.coerce_arg(got, want, e.loc)
            return callee_ty.result
        return self.infer_function(info, arg_types, e.loc)

    def builtin_call(self, scope, e: AstNode, name: str, args) -> FrozenType:
        e.attrs["builtin"] = name
        e.children = list(args)  # the callee ident is implied by the attr
        if name == "print":
            raise errors.TypeError(*e.loc, "print is a statement, not a function")
        if name == "range":
            raise errors.TypeError(*e.loc, "range() is only valid as a for-loop header")
        if name == "len":
            if len(args) != 1:
                raise errors.TypeError(*e.loc, "len() takes exactly one argument")
            ty = self.expr(scope, args[0])
            if ty.tag not in ("vector", "string"):
                raise errors.TypeError(*e.loc, f"len() needs a vector or string, got {ty}")
            return INT
        if name == "id":
            if len(args) != 1 or args[0].kind != "ident":
                raise errors.TypeError(*e.loc, "id() takes exactly one plain name")
            self.expr(scope, args[0])
            return INT
        if len(args) != 1:
            raise errors.TypeError(*e.loc, f"{name}() takes exactly one argument")
        ty = self.expr(scope, args[0])
        if name == "int":
            if ty.tag not in ("int", "real", "bool", "string"):
                raise errors.TypeError(*e.loc, f"int() cannot convert {ty}")
            return INT
        if name == "float":
            if ty.tag not in ("int", "real", "string"):
                raise errors.TypeError(*e.loc, f"float() cannot convert {ty}")
            return REAL
        if name == "str":
            if ty.tag not in ("int", "real", "bool", "string"):
                raise errors.TypeError(*e.loc, f"str() cannot convert {ty}")
            return STRING
        raise errors.InternalError(f"unhandled builtin {name}")


# -- slot resolution ----------------------------------------------------------

_SLOT_CHAR = {"int": "i", "real": "r", "bool": "b", "string": "h",
              "complex": "h", "vector": "h", "lambda": "h"}


def resolve_scopes(root: AstNode) -> AstNode:
    """Assign (level, offset) slots to every declaration and identifier."""
    scopes = getattr(root, "_all_scopes", None)
    if scopes is None:
        raise errors.InternalError(
            "resolve_scopes consumes the tree produced by infer() in-process")
    for scope in scopes:
        slotmap = []
        for offset, decl in enumerate(scope.decls):
            decl.slot = SlotRef(0, offset)
            slotmap.append(_SLOT_CHAR[decl.type.tag])
            for ident in decl._idents:
                level = ident._use_scope.depth - scope.depth
                ident.slot = SlotRef(level, offset)
        scope.owner.attrs["framesize"] = len(scope.decls)
        scope.owner.attrs["slotmap"] = "".join(slotmap)
    return root


# -- the freeze gate ------------------------------------------------------------

def check_frozen(root: AstNode) -> list[str]:
    """Re-verify that every operation is statically typed and compatible.

    Returns a list of diagnostics; an empty list means the backend can emit
    straight-line typed mnemonics with no runtime dispatch.
    """
    diags: list[str] = []

    def complain(n, msg):
        diags.append(f"{n.loc[0]}:{n.loc[1]}: {msg}")

    def visit(n: AstNode):
        k = n.kind
        if k in ("ident", "decl"):
            if n.type is None or not n.type.resolved:
                complain(n, f"{k} {n.attrs.get('name')!r} has no frozen type")
            if n.slot is None:
                complain(n, f"{k} {n.attrs.get('name')!r} has no slot")
        elif k == "funcdef":
            if n.type is None or not n.type.resolved:
                complain(n, f"function {n.attrs.get('name')!r} has no frozen signature")
            if "framesize" not in n.attrs:
                complain(n, f"function {n.attrs.get('name')!r} has no frame layout")
        elif k in ("binop", "unop", "compare", "boolop", "call", "index",
                   "attr", "ref", "lit", "listlit", "lambda"):
            if n.type is None or not n.type.resolved:
                complain(n, f"expression ({k}) has no frozen type")
        if k in ("index", "indexassign"):
            idx = n.children[1]
            if idx.type is not None and idx.type.tag != "int":
                complain(n, "index must be int")
        if k == "binop" and n.children[0].type is not None \
                and n.children[1].type is not None:
            l, r = n.children[0].type, n.children[1].type
            op = n.attrs["op"]
            ok = ((l.tag in _NUMERIC and r.tag in _NUMERIC)
                  or (op == "+" and l.tag == "string" and r.tag == "string")
                  or (op == "*" and l.tag == "vector" and r.tag == "int"))
            if not ok:
                complain(n, f"'{op}' has incompatible operand types {l} and {r}")
        for c in n.children:
            visit(c)

    visit(root)
    return diags


def infer_pipeline(root: AstNode, int_width: int = 32, real_width: int = 64) -> AstNode:
    """infer + resolve_scopes + check_frozen as one phase-2 step."""
    typed = infer(root, int_width, real_width)
    resolve_scopes(typed)
    diags = check_frozen(typed)
    if diags:
        raise errors.TypeError(1, 1, "type freeze failed:\n  " + "\n  ".join(diags))
    return typed
