"""AST node vocabulary shared by every phase.

All phases operate on one generic node class rather than per-kind
classes; `kind` selects the shape, `attrs` carries kind-specific scalars
and `children` the ordered subtrees. After type inference every decl and
ident node carries a FrozenType and a SlotRef.
"""

from dataclasses import dataclass, field

KINDS = {
    "module", "funcdef", "lambda", "decl", "ident", "assign", "indexassign",
    "attrassign", "if", "while", "forrange", "return", "nonlocal", "pass",
    "print", "exprstmt", "binop", "unop", "compare", "boolop", "call",
    "index", "attr", "ref", "lit", "listlit",
}

# marker used as the slot of a for-range iterator after lowering
NATIVE_SLOT = "native"


@dataclass(frozen=True)
class FrozenType:
    tag: str  # int real bool string complex vector lambda none
    elem: "FrozenType | None" = None
    params: "tuple[FrozenType, ...] | None" = None
    result: "FrozenType | None" = None
    # inference-internal handle to the function this lambda type came from;
    # never serialized, excluded from equality
    fninfo: object = field(default=None, compare=False, repr=False)

    def __str__(self):
        if self.tag == "vector":
            return f"vector({self.elem})"
        if self.tag == "lambda":
            if self.params is None:
                return "lambda(?)"
            ps = ",".join(str(p) for p in self.params)
            return f"lambda({ps}->{self.result})"
        return self.tag

    @property
    def resolved(self) -> bool:
        if self.tag == "lambda":
            return self.params is not None and self.result is not None
        return True

    @property
    def compound(self) -> bool:
        return self.tag in ("vector", "complex")

    @property
    def heap_resident(self) -> bool:
        # values whose frame slot holds a heap handle
        return self.tag in ("vector", "complex", "string", "lambda")


INT = FrozenType("int")
REAL = FrozenType("real")
BOOL = FrozenType("bool")
STRING = FrozenType("string")
COMPLEX = FrozenType("complex")
NONE = FrozenType("none")


def vector_of(elem: FrozenType) -> FrozenType:
    return FrozenType("vector", elem=elem)


def lambda_of(params, result) -> FrozenType:
    return FrozenType("lambda", params=tuple(params), result=result)


def type_from_str(text: str) -> FrozenType:
    """Parse the compact type token used in the .oast format."""
    ty, rest = _parse_type(text, 0)
    if rest != len(text):
        raise ValueError(f"trailing characters in type {text!r}")
    return ty


def _parse_type(text, pos):
    start = pos
    while pos < len(text) and text[pos].isalpha():
        pos += 1
    word = text[start:pos]
    if word == "vector":
        if pos >= len(text) or text[pos] != "(":
            raise ValueError(f"bad vector type in {text!r}")
        elem, pos = _parse_type(text, pos + 1)
        if pos >= len(text) or text[pos] != ")":
            raise ValueError(f"bad vector type in {text!r}")
        return vector_of(elem), pos + 1
    if word == "lambda":
        if pos >= len(text) or text[pos] != "(":
            raise ValueError(f"bad lambda type in {text!r}")
        pos += 1
        params = []
        if not text.startswith("->", pos):
            while True:
                ty, pos = _parse_type(text, pos)
                params.append(ty)
                if text.startswith(",", pos):
                    pos += 1
                    continue
                break
        if not text.startswith("->", pos):
            raise ValueError(f"bad lambda type in {text!r}")
        result, pos = _parse_type(text, pos + 2)
        if pos >= len(text) or text[pos] != ")":
            raise ValueError(f"bad lambda type in {text!r}")
        return lambda_of(params, result), pos + 1
    if word in ("int", "real", "bool", "string", "complex", "none"):
        return FrozenType(word), pos
    raise ValueError(f"unknown type {word!r} in {text!r}")


@dataclass(frozen=True)
class SlotRef:
    level: int  # 0 = local, increasing outward
    offset: int

    def __str__(self):
        return f"L{self.level}.{self.offset}"

    @staticmethod
    def from_str(text: str) -> "SlotRef":
        level, offset = text[1:].split(".")
        return SlotRef(int(level), int(offset))


@dataclass(eq=False)  # identity comparison; use ast_equal for structure
class AstNode:
    kind: str
    attrs: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    loc: tuple = (1, 1)  # (line, col), 1-based
    type: FrozenType | None = None
    slot: "SlotRef | str | None" = None  # SlotRef, NATIVE_SLOT or None

    def __repr__(self):
        bits = [self.kind]
        if self.attrs:
            bits.append(str(self.attrs))
        if self.type is not None:
            bits.append(f"type={self.type}")
        if self.slot is not None:
            bits.append(f"slot={self.slot}")
        return f"<{' '.join(bits)} kids={len(self.children)}>"

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def node(kind, loc=(1, 1), attrs=None, children=None, type=None, slot=None):
    assert kind in KINDS, kind
    return AstNode(kind, attrs or {}, children or [], loc, type, slot)


def ast_equal(a: AstNode, b: AstNode, ignore_loc=True) -> bool:
    """Structural equality; locations ignored by default."""
    if a.kind != b.kind or a.attrs != b.attrs:
        return False
    if a.type != b.type or a.slot != b.slot:
        return False
    if not ignore_loc and a.loc != b.loc:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(ast_equal(x, y, ignore_loc) for x, y in zip(a.children, b.children))


def count_nodes(root: AstNode) -> int:
    return sum(1 for _ in root.walk())
