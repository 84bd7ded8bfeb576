"""Recursive-descent parser for the vPython subset.

Builds the untyped AST from the token stream. Recognized Python
constructs outside the subset (class, import, decorators, generic
for-loops, ...) raise SubsetError with a targeted message; everything
else raises ParseError.

`pretty_print` renders an AST back to source; parse(tokenize(pretty_print(t)))
is structurally equal to t for every tree the grammar can produce.
"""

from .astnodes import AstNode, node
from .errors import ParseError, SubsetError
from .lexer import Token, tokenize

_SUBSET_MSGS = {
    "class": "classes are not in the vPython subset",
    "import": "imports are not in the vPython subset",
    "from": "imports are not in the vPython subset",
    "try": "exceptions are not in the vPython subset",
    "except": "exceptions are not in the vPython subset",
    "finally": "exceptions are not in the vPython subset",
    "raise": "exceptions are not in the vPython subset",
    "with": "context managers are not in the vPython subset",
    "global": "global is not in the vPython subset (module names are readable everywhere)",
    "del": "del is not in the vPython subset",
    "yield": "generators are not in the vPython subset",
    "assert": "assert is not in the vPython subset",
    "break": "break is not in the vPython subset",
    "continue": "continue is not in the vPython subset",
    "is": "'is' is not in the vPython subset",
    "as": "'as' is not in the vPython subset",
    "None": "None is not in the vPython subset",
}

_COMPARE_OPS = {"<", "<=", ">", ">=", "==", "!="}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.fn_counter = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind, lexeme=None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (lexeme is None or tok.lexeme == lexeme)

    def expect(self, kind, lexeme=None) -> Token:
        tok = self.peek()
        if not self.at(kind, lexeme):
            want = lexeme if lexeme is not None else kind
            raise ParseError(tok.line, tok.col,
                             f"expected {want!r}, found {tok.lexeme or tok.kind!r}",
                             expected=(str(want),))
        return self.advance()

    def error(self, message) -> ParseError:
        tok = self.peek()
        return ParseError(tok.line, tok.col, message)

    def subset_guard(self):
        tok = self.peek()
        if tok.kind == "KEYWORD" and tok.lexeme in _SUBSET_MSGS:
            raise SubsetError(tok.line, tok.col, _SUBSET_MSGS[tok.lexeme])
        if tok.kind == "OP" and tok.lexeme == "@":
            raise SubsetError(tok.line, tok.col, "decorators are not supported")

    # -- statements --------------------------------------------------------

    def parse_module(self) -> AstNode:
        stmts = []
        while not self.at("EOF"):
            stmts.append(self.parse_statement())
        return node("module", loc=(1, 1), children=stmts)

    def parse_block(self) -> list[AstNode]:
        self.expect("OP", ":")
        self.expect("NEWLINE")
        self.expect("INDENT")
        stmts = [self.parse_statement()]
        while not self.at("DEDENT") and not self.at("EOF"):
            stmts.append(self.parse_statement())
        self.expect("DEDENT")
        return stmts

    def parse_statement(self) -> AstNode:
        self.subset_guard()
        tok = self.peek()
        if tok.kind == "KEYWORD":
            if tok.lexeme == "pass":
                self.advance()
                self.expect("NEWLINE")
                return node("pass", loc=(tok.line, tok.col))
            if tok.lexeme == "return":
                self.advance()
                children = []
                if not self.at("NEWLINE"):
                    children.append(self.parse_expr())
                self.expect("NEWLINE")
                return node("return", loc=(tok.line, tok.col), children=children)
            if tok.lexeme == "nonlocal":
                return self.parse_nonlocal()
            if tok.lexeme == "print":
                self.advance()
                expr = self.parse_expr()
                self.expect("NEWLINE")
                return node("print", loc=(tok.line, tok.col), children=[expr])
            if tok.lexeme == "if":
                return self.parse_if()
            if tok.lexeme == "while":
                self.advance()
                cond = self.parse_expr()
                body = self.parse_block()
                return node("while", loc=(tok.line, tok.col), children=[cond] + body)
            if tok.lexeme == "for":
                return self.parse_for()
            if tok.lexeme == "def":
                return self.parse_def()
            raise self.error(f"unexpected keyword {tok.lexeme!r}")
        # assignment or expression statement
        expr = self.parse_expr()
        if self.at("OP", "=") or self.at("OP", "+=") or self.at("OP", "-="):
            return self.parse_assignment(expr)
        self.expect("NEWLINE")
        return node("exprstmt", loc=expr.loc, children=[expr])

    def parse_nonlocal(self) -> AstNode:
        tok = self.advance()
        name = self.expect("NAME")
        if self.at("OP", ","):
            raise ParseError(tok.line, tok.col, "one name per nonlocal statement")
        self.expect("NEWLINE")
        return node("nonlocal", loc=(tok.line, tok.col), attrs={"name": name.lexeme})

    def parse_assignment(self, target: AstNode) -> AstNode:
        op = self.advance()
        value = self.parse_expr()
        self.expect("NEWLINE")
        if op.lexeme in ("+=", "-="):
            if target.kind != "ident":
                raise ParseError(op.line, op.col,
                                 "augmented assignment requires a plain name target")
            read = node("ident", loc=target.loc, attrs=dict(target.attrs))
            value = node("binop", loc=(op.line, op.col),
                         attrs={"op": op.lexeme[0]}, children=[read, value])
        if target.kind == "ident":
            return node("assign", loc=(op.line, op.col), children=[target, value])
        if target.kind == "index":
            base, idx = target.children
            return node("indexassign", loc=(op.line, op.col),
                        children=[base, idx, value])
        if target.kind == "attr":
            return node("attrassign", loc=(op.line, op.col),
                        attrs={"attr": target.attrs["attr"]},
                        children=[target.children[0], value])
        raise ParseError(op.line, op.col, "invalid assignment target")

    def parse_if(self) -> AstNode:
        tok = self.advance()  # if / elif
        cond = self.parse_expr()
        then = self.parse_block()
        orelse: list[AstNode] = []
        if self.at("KEYWORD", "elif"):
            orelse = [self.parse_if()]
        elif self.at("KEYWORD", "else"):
            self.advance()
            orelse = self.parse_block()
        return node("if", loc=(tok.line, tok.col), attrs={"nthen": len(then)},
                    children=[cond] + then + orelse)

    def parse_for(self) -> AstNode:
        tok = self.advance()
        var = self.expect("NAME")
        self.expect("KEYWORD", "in")
        head = self.peek()
        if not (head.kind == "NAME" and head.lexeme == "range"):
            raise SubsetError(head.line, head.col,
                              "only 'for NAME in range(start, end[, step])' is supported")
        self.advance()
        self.expect("OP", "(")
        args = [self.parse_expr()]
        while self.at("OP", ","):
            self.advance()
            args.append(self.parse_expr())
        self.expect("OP", ")")
        if len(args) == 1:
            start = node("lit", loc=args[0].loc, attrs={"littype": "int", "value": 0})
            args = [start, args[0]]
        if len(args) == 2:
            args.append(node("lit", loc=args[1].loc, attrs={"littype": "int", "value": 1}))
        if len(args) != 3:
            raise ParseError(head.line, head.col, "range takes 1 to 3 arguments")
        body = self.parse_block()
        iter_decl = node("decl", loc=(var.line, var.col), attrs={"name": var.lexeme})
        return node("forrange", loc=(tok.line, tok.col),
                    attrs={"var": var.lexeme, "native": 0},
                    children=[iter_decl] + args + body)

    def parse_def(self) -> AstNode:
        tok = self.advance()
        name = self.expect("NAME")
        self.expect("OP", "(")
        params = []
        if not self.at("OP", ")"):
            params.append(self.expect("NAME"))
            while self.at("OP", ","):
                self.advance()
                params.append(self.expect("NAME"))
        self.expect("OP", ")")
        body = self.parse_block()
        self.fn_counter += 1
        param_nodes = [node("decl", loc=(p.line, p.col), attrs={"name": p.lexeme})
                       for p in params]
        return node("funcdef", loc=(tok.line, tok.col),
                    attrs={"name": name.lexeme, "nparams": len(params),
                           "fnid": self.fn_counter},
                    children=param_nodes + body)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> AstNode:
        if self.at("KEYWORD", "lambda"):
            return self.parse_lambda()
        return self.parse_or()

    def parse_lambda(self) -> AstNode:
        tok = self.advance()
        params = []
        if not self.at("OP", ":"):
            params.append(self.expect("NAME"))
            while self.at("OP", ","):
                self.advance()
                params.append(self.expect("NAME"))
        self.expect("OP", ":")
        body = self.parse_expr()
        self.fn_counter += 1
        param_nodes = [node("decl", loc=(p.line, p.col), attrs={"name": p.lexeme})
                       for p in params]
        return node("lambda", loc=(tok.line, tok.col),
                    attrs={"nparams": len(params), "fnid": self.fn_counter},
                    children=param_nodes + [body])

    def parse_or(self) -> AstNode:
        left = self.parse_and()
        while self.at("KEYWORD", "or"):
            tok = self.advance()
            right = self.parse_and()
            left = node("boolop", loc=(tok.line, tok.col), attrs={"op": "or"},
                        children=[left, right])
        return left

    def parse_and(self) -> AstNode:
        left = self.parse_not()
        while self.at("KEYWORD", "and"):
            tok = self.advance()
            right = self.parse_not()
            left = node("boolop", loc=(tok.line, tok.col), attrs={"op": "and"},
                        children=[left, right])
        return left

    def parse_not(self) -> AstNode:
        if self.at("KEYWORD", "not"):
            tok = self.advance()
            operand = self.parse_not()
            return node("unop", loc=(tok.line, tok.col), attrs={"op": "not"},
                        children=[operand])
        return self.parse_comparison()

    def parse_comparison(self) -> AstNode:
        self.subset_guard()
        left = self.parse_arith()
        if self.at("OP") and self.peek().lexeme in _COMPARE_OPS:
            tok = self.advance()
            right = self.parse_arith()
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.lexeme in _COMPARE_OPS:
                raise ParseError(nxt.line, nxt.col,
                                 "chained comparisons are not supported")
            return node("compare", loc=(tok.line, tok.col), attrs={"op": tok.lexeme},
                        children=[left, right])
        if self.at("KEYWORD", "is"):
            self.subset_guard()
        return left

    def parse_arith(self) -> AstNode:
        left = self.parse_term()
        while self.at("OP") and self.peek().lexeme in ("+", "-"):
            tok = self.advance()
            right = self.parse_term()
            left = node("binop", loc=(tok.line, tok.col), attrs={"op": tok.lexeme},
                        children=[left, right])
        return left

    def parse_term(self) -> AstNode:
        left = self.parse_unary()
        while self.at("OP") and self.peek().lexeme in ("*", "/", "%"):
            tok = self.advance()
            right = self.parse_unary()
            left = node("binop", loc=(tok.line, tok.col), attrs={"op": tok.lexeme},
                        children=[left, right])
        return left

    def parse_unary(self) -> AstNode:
        tok = self.peek()
        if self.at("OP", "-"):
            self.advance()
            operand = self.parse_unary()
            return node("unop", loc=(tok.line, tok.col), attrs={"op": "-"},
                        children=[operand])
        if self.at("OP", "&"):
            self.advance()
            operand = self.parse_unary()
            if operand.kind != "ident":
                raise ParseError(tok.line, tok.col, "& requires a plain name operand")
            return node("ref", loc=(tok.line, tok.col), children=[operand])
        return self.parse_power()

    def parse_power(self) -> AstNode:
        left = self.parse_postfix()
        if self.at("OP", "**"):
            tok = self.advance()
            right = self.parse_unary()  # right-assoc; -2**-2 parses naturally
            return node("binop", loc=(tok.line, tok.col), attrs={"op": "**"},
                        children=[left, right])
        return left

    def parse_postfix(self) -> AstNode:
        expr = self.parse_atom()
        while True:
            if self.at("OP", "("):
                tok = self.advance()
                args = []
                if not self.at("OP", ")"):
                    args.append(self.parse_expr())
                    while self.at("OP", ","):
                        self.advance()
                        args.append(self.parse_expr())
                self.expect("OP", ")")
                expr = node("call", loc=(tok.line, tok.col), children=[expr] + args)
            elif self.at("OP", "["):
                tok = self.advance()
                idx = self.parse_expr()
                self.expect("OP", "]")
                expr = node("index", loc=(tok.line, tok.col), children=[expr, idx])
            elif self.at("OP", "."):
                tok = self.advance()
                name = self.expect("NAME")
                if name.lexeme not in ("real", "imag"):
                    raise SubsetError(name.line, name.col,
                                      "only .real and .imag attribute access is supported")
                expr = node("attr", loc=(tok.line, tok.col),
                            attrs={"attr": name.lexeme}, children=[expr])
            else:
                return expr

    def parse_atom(self) -> AstNode:
        self.subset_guard()
        tok = self.peek()
        if tok.kind == "INT_LIT":
            self.advance()
            return node("lit", loc=(tok.line, tok.col),
                        attrs={"littype": "int", "value": int(tok.lexeme)})
        if tok.kind == "REAL_LIT":
            self.advance()
            return node("lit", loc=(tok.line, tok.col),
                        attrs={"littype": "real", "value": float(tok.lexeme)})
        if tok.kind == "IMAG_LIT":
            self.advance()
            return node("lit", loc=(tok.line, tok.col),
                        attrs={"littype": "imag", "value": float(tok.lexeme[:-1])})
        if tok.kind == "STR_LIT":
            self.advance()
            return node("lit", loc=(tok.line, tok.col),
                        attrs={"littype": "string", "value": tok.lexeme})
        if tok.kind == "KEYWORD" and tok.lexeme in ("True", "False"):
            self.advance()
            return node("lit", loc=(tok.line, tok.col),
                        attrs={"littype": "bool", "value": tok.lexeme == "True"})
        if tok.kind == "KEYWORD" and tok.lexeme == "lambda":
            return self.parse_lambda()
        if tok.kind == "NAME":
            self.advance()
            return node("ident", loc=(tok.line, tok.col), attrs={"name": tok.lexeme})
        if self.at("OP", "("):
            self.advance()
            expr = self.parse_expr()
            self.expect("OP", ")")
            return expr
        if self.at("OP", "["):
            self.advance()
            elems = []
            if not self.at("OP", "]"):
                elems.append(self.parse_expr())
                while self.at("OP", ","):
                    self.advance()
                    if self.at("OP", "]"):
                        break  # trailing comma
                    elems.append(self.parse_expr())
            self.expect("OP", "]")
            return node("listlit", loc=(tok.line, tok.col), children=elems)
        raise self.error(f"unexpected {tok.lexeme or tok.kind!r} in expression")


def parse(tokens: list[Token]) -> AstNode:
    """Parse a token stream (from tokenize) into an untyped module AST."""
    return _Parser(tokens).parse_module()


def parse_source(source: str) -> AstNode:
    return parse(tokenize(source))


# -- pretty printing ---------------------------------------------------------

def pretty_print(root: AstNode) -> str:
    """Render an AST as vPython source that re-parses to an equal tree."""
    assert root.kind == "module"
    out = []
    for stmt in root.children:
        _pp_stmt(stmt, 0, out)
    return "".join(out)


def _pp_stmt(n: AstNode, depth: int, out: list):
    pad = "    " * depth
    k = n.kind
    if k == "pass":
        out.append(f"{pad}pass\n")
    elif k == "return":
        if n.children:
            out.append(f"{pad}return {_pp_expr(n.children[0])}\n")
        else:
            out.append(f"{pad}return\n")
    elif k == "nonlocal":
        out.append(f"{pad}nonlocal {n.attrs['name']}\n")
    elif k == "print":
        out.append(f"{pad}print({_pp_expr(n.children[0])})\n")
    elif k == "exprstmt":
        out.append(f"{pad}{_pp_expr(n.children[0])}\n")
    elif k == "assign":
        target, value = n.children
        out.append(f"{pad}{_pp_expr(target)} = {_pp_expr(value)}\n")
    elif k == "indexassign":
        base, idx, value = n.children
        out.append(f"{pad}{_pp_expr(base)}[{_pp_expr(idx)}] = {_pp_expr(value)}\n")
    elif k == "attrassign":
        base, value = n.children
        out.append(f"{pad}{_pp_expr(base)}.{n.attrs['attr']} = {_pp_expr(value)}\n")
    elif k == "if":
        nthen = n.attrs["nthen"]
        cond, rest = n.children[0], n.children[1:]
        out.append(f"{pad}if {_pp_expr(cond)}:\n")
        for s in rest[:nthen]:
            _pp_stmt(s, depth + 1, out)
        orelse = rest[nthen:]
        if orelse:
            out.append(f"{pad}else:\n")
            for s in orelse:
                _pp_stmt(s, depth + 1, out)
    elif k == "while":
        out.append(f"{pad}while {_pp_expr(n.children[0])}:\n")
        for s in n.children[1:]:
            _pp_stmt(s, depth + 1, out)
    elif k == "forrange":
        start, end, step = n.children[1:4]
        out.append(f"{pad}for {n.attrs['var']} in range({_pp_expr(start)}, "
                   f"{_pp_expr(end)}, {_pp_expr(step)}):\n")
        for s in n.children[4:]:
            _pp_stmt(s, depth + 1, out)
    elif k == "funcdef":
        nparams = n.attrs["nparams"]
        params = ", ".join(p.attrs["name"] for p in n.children[:nparams])
        out.append(f"{pad}def {n.attrs['name']}({params}):\n")
        for s in n.children[nparams:]:
            _pp_stmt(s, depth + 1, out)
    else:
        raise AssertionError(f"unknown statement kind {k}")


def _pp_expr(n: AstNode) -> str:
    k = n.kind
    if k == "lit":
        lt, v = n.attrs["littype"], n.attrs["value"]
        if lt == "int":
            return str(v)
        if lt == "real":
            return repr(v)
        if lt == "imag":
            return repr(v) + "j"
        if lt == "bool":
            return "True" if v else "False"
        if lt == "string":
            return _quote(v)
        raise AssertionError(lt)
    if k == "ident":
        return n.attrs["name"]
    if k == "binop":
        l, r = n.children
        return f"({_pp_expr(l)} {n.attrs['op']} {_pp_expr(r)})"
    if k == "unop":
        op = n.attrs["op"]
        sep = " " if op == "not" else ""
        return f"({op}{sep}{_pp_expr(n.children[0])})"
    if k == "compare":
        l, r = n.children
        return f"({_pp_expr(l)} {n.attrs['op']} {_pp_expr(r)})"
    if k == "boolop":
        l, r = n.children
        return f"({_pp_expr(l)} {n.attrs['op']} {_pp_expr(r)})"
    if k == "call":
        callee = n.children[0]
        args = ", ".join(_pp_expr(a) for a in n.children[1:])
        return f"{_pp_expr(callee)}({args})"
    if k == "index":
        base, idx = n.children
        return f"{_pp_expr(base)}[{_pp_expr(idx)}]"
    if k == "attr":
        return f"{_pp_expr(n.children[0])}.{n.attrs['attr']}"
    if k == "ref":
        return f"(&{_pp_expr(n.children[0])})"
    if k == "listlit":
        return "[" + ", ".join(_pp_expr(e) for e in n.children) + "]"
    if k == "lambda":
        nparams = n.attrs["nparams"]
        params = ", ".join(p.attrs["name"] for p in n.children[:nparams])
        body = _pp_expr(n.children[nparams])
        return f"(lambda {params}: {body})" if params else f"(lambda: {body})"
    raise AssertionError(f"unknown expression kind {k}")


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
