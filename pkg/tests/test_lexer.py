import pytest
from hypothesis import given, strategies as st

from vpyc.errors import LexError
from vpyc.lexer import tokenize

from conftest import CORPUS


def kinds(tokens):
    return [t.kind for t in tokens]


def test_empty_input():
    toks = tokenize("")
    assert kinds(toks) == ["EOF"]


def test_minimal_assignment():
    toks = tokenize("a = 3\n")
    assert [(t.kind, t.lexeme) for t in toks] == [
        ("NAME", "a"), ("OP", "="), ("INT_LIT", "3"), ("NEWLINE", ""), ("EOF", ""),
    ]


def test_for_range_line():
    toks = tokenize("for i in range(0,len(arr)):\n")
    assert [(t.kind, t.lexeme) for t in toks[:-1]] == [
        ("KEYWORD", "for"), ("NAME", "i"), ("KEYWORD", "in"), ("NAME", "range"),
        ("OP", "("), ("INT_LIT", "0"), ("OP", ","), ("NAME", "len"), ("OP", "("),
        ("NAME", "arr"), ("OP", ")"), ("OP", ")"), ("OP", ":"), ("NEWLINE", ""),
    ]


def test_literals():
    toks = tokenize("1 2.5 .5 1e3 4j 2.5j 'a' \"b\\n\"\n")
    got = [(t.kind, t.lexeme) for t in toks[:-2]]
    assert got == [
        ("INT_LIT", "1"), ("REAL_LIT", "2.5"), ("REAL_LIT", ".5"),
        ("REAL_LIT", "1e3"), ("IMAG_LIT", "4j"), ("IMAG_LIT", "2.5j"),
        ("STR_LIT", "a"), ("STR_LIT", "b\n"),
    ]


def test_indent_dedent_blocks():
    src = "if a:\n    b = 1\n    if c:\n        d = 2\ne = 3\n"
    toks = tokenize(src)
    ks = kinds(toks)
    assert ks.count("INDENT") == 2
    assert ks.count("DEDENT") == 2


def test_blank_and_comment_lines_ignored():
    src = "a = 1\n\n# comment\n   \nb = 2\n"
    toks = tokenize(src)
    assert kinds(toks).count("NEWLINE") == 2


def test_paren_continuation():
    src = "a = [1,\n     2,\n     3]\n"
    toks = tokenize(src)
    assert kinds(toks).count("NEWLINE") == 1
    assert kinds(toks).count("INDENT") == 0


def test_tab_is_error():
    with pytest.raises(LexError):
        tokenize("\tx = 1\n")
    with pytest.raises(LexError):
        tokenize("x =\t1\n")


def test_unterminated_string():
    with pytest.raises(LexError):
        tokenize('s = "abc\n')


def test_bad_character():
    with pytest.raises(LexError):
        tokenize("a = 1 ~ 2\n")


def test_inconsistent_dedent():
    with pytest.raises(LexError):
        tokenize("if a:\n        b = 1\n    c = 2\n")


def balanced(tokens) -> bool:
    depth = 0
    for t in tokens:
        if t.kind == "INDENT":
            depth += 1
        elif t.kind == "DEDENT":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def positions_monotonic(tokens) -> bool:
    prev = (0, 0)
    for t in tokens:
        if (t.line, t.col) < prev:
            return False
        prev = (t.line, t.col)
    return True


@pytest.mark.parametrize("path", CORPUS, ids=[p.stem for p in CORPUS])
def test_corpus_lexes_balanced(path):
    toks = tokenize(path.read_text())
    assert balanced(toks)
    assert positions_monotonic(toks)
    assert toks[-1].kind == "EOF"


@given(st.lists(st.sampled_from(
    ["a = 1", "if a:", "    b = 2", "while c:", "    pass", "d = [1, 2]",
     "print(a)", "# note", "", "e = 'x'"]), max_size=30))
def test_random_linewise_balance(lines):
    src = "\n".join(lines) + "\n"
    try:
        toks = tokenize(src)
    except LexError:
        return  # inconsistent dedents are fine to reject
    assert balanced(toks)
    assert positions_monotonic(toks)
