import re

import pytest

from vpyc.astnodes import count_nodes, node
from vpyc.codegen_dot import emit_dot
from vpyc.optimizer import optimize
from vpyc.parser import parse_source
from vpyc.typeinfer import infer_pipeline

from conftest import CORPUS

_NODE_RE = re.compile(r'^\s*n(\d+) \[label="((?:[^"\\]|\\.)*)"\];$')
_EDGE_RE = re.compile(r"^\s*n(\d+) -> n(\d+);$")


def check_dot(text: str) -> tuple[int, int]:
    """Minimal DOT grammar check: returns (node count, edge count)."""
    lines = text.strip().splitlines()
    assert lines[0] == "digraph ast {"
    assert lines[-1] == "}"
    nodes, edges = 0, 0
    declared = set()
    for line in lines[1:-1]:
        m = _NODE_RE.match(line)
        if m:
            nodes += 1
            declared.add(m.group(1))
            continue
        m = _EDGE_RE.match(line)
        if m:
            edges += 1
            assert m.group(1) in declared and m.group(2) in declared
            continue
        raise AssertionError(f"bad DOT line: {line!r}")
    return nodes, edges


def test_module_pass():
    tree = node("module", children=[node("pass")])
    nodes, edges = check_dot(emit_dot(tree))
    assert (nodes, edges) == (2, 1)


def test_typed_ident_label():
    tree = infer_pipeline(parse_source("a = 3\nprint(a)\n"))
    text = emit_dot(tree)
    assert '[label="ident a\\nint\\nL0.0"];' in text
    assert '[label="decl a\\nint\\nL0.0"];' in text


def test_label_escaping():
    tree = infer_pipeline(parse_source('s = "say \\"hi\\""\nprint(s)\n'))
    check_dot(emit_dot(tree))


@pytest.mark.parametrize("path", CORPUS, ids=[p.stem for p in CORPUS])
def test_corpus_dot_counts(path):
    for stage in (parse_source(path.read_text()),
                  optimize(infer_pipeline(parse_source(path.read_text())))):
        nodes, edges = check_dot(emit_dot(stage))
        assert nodes == count_nodes(stage)
        assert edges == nodes - 1


def test_untyped_tree_accepted():
    tree = parse_source("x = 1 + 2\n")
    nodes, _ = check_dot(emit_dot(tree))
    assert nodes == count_nodes(tree)
