"""Phase 4 backend: Graphviz DOT rendering of the AST for inspection."""

from .astnodes import AstNode, NATIVE_SLOT


def _label(n: AstNode) -> str:
    head = n.kind
    if n.kind == "lit":
        head = f"lit {n.attrs['littype']} {n.attrs['value']}"
    elif "name" in n.attrs:
        head = f"{n.kind} {n.attrs['name']}"
    elif "var" in n.attrs:
        head = f"{n.kind} {n.attrs['var']}"
    elif "op" in n.attrs:
        head = f"{n.kind} {n.attrs['op']}"
    elif "attr" in n.attrs:
        head = f"{n.kind} .{n.attrs['attr']}"
    elif n.attrs.get("builtin"):
        head = f"{n.kind} {n.attrs['builtin']}"
    parts = [head]
    if n.type is not None:
        parts.append(str(n.type))
    if n.slot is not None:
        parts.append("native" if n.slot == NATIVE_SLOT else str(n.slot))
    return "\\n".join(_escape(p) for p in parts)


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def emit_dot(root: AstNode) -> str:
    """Render the AST as a DOT digraph; node ids are pre-order indices."""
    lines = ["digraph ast {"]
    counter = [0]

    def visit(n: AstNode) -> int:
        my_id = counter[0]
        counter[0] += 1
        lines.append(f'  n{my_id} [label="{_label(n)}"];')
        for child in n.children:
            child_id = visit(child)
            lines.append(f"  n{my_id} -> n{child_id};")
        return my_id

    visit(root)
    lines.append("}")
    return "\n".join(lines) + "\n"
