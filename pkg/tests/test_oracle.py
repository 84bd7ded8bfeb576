import struct

import pytest
from hypothesis import given, strategies as st

from vpyc.oracle import Interp, interpret, interpret_full
from vpyc.optimizer import optimize
from vpyc.parser import parse_source
from vpyc.typeinfer import infer_pipeline


def run(src, lowered=False, **kw):
    tree = infer_pipeline(parse_source(src))
    if lowered:
        tree = optimize(tree)
    return interpret_full(tree, **kw)


def out_of(src, **kw):
    stdout, stderr, code = run(src, **kw)
    assert code == 0, stderr
    return stdout


def test_print_addition():
    assert interpret(infer_pipeline(parse_source("print(1 + 2)\n")))[0] == "3\n"


def test_retype_semantics():
    assert out_of("a = 3\na = a + 0.5\nprint(a)\n") == "3.5\n"


def trial_division_count(size):
    count = 0
    for i in range(size + 1):
        n = 2 * i + 3
        d = 2
        while d * d <= n:
            if n % d == 0:
                break
            d += 1
        else:
            count += 1
    return count


SIEVE = """size = {size}
count = 0
flags = [True] * (size + 1)
for i in range(0, size + 1):
    flags[i] = True
for i in range(0, size + 1):
    if flags[i]:
        prime = i + i + 3
        for k in range(i + prime, size + 1, prime):
            flags[k] = False
        count = count + 1
print(count)
"""


@pytest.mark.parametrize("size,frozen", [(100, 45), (4095, 1027), (8190, 1899)])
def test_sieve_against_trial_division(size, frozen):
    assert trial_division_count(size) == frozen
    assert out_of(SIEVE.format(size=size)) == f"{frozen}\n"
    assert out_of(SIEVE.format(size=size), lowered=True) == f"{frozen}\n"


def test_trap_div_by_zero():
    stdout, stderr, code = run("print(1)\nprint(1 / 0)\n")
    assert stdout == "1\n"
    assert stderr == "TRAP: divide by zero\n"
    assert code == 70


def test_trap_real_div_by_zero():
    _, stderr, code = run("print(1.0 / 0.0)\n")
    assert code == 70 and "divide by zero" in stderr


def test_trap_index():
    stdout, stderr, code = run("v = [1, 2]\nprint(v[2])\n")
    assert code == 70
    assert stderr == "TRAP: index 2 out of range (len 2)\n"


def test_trap_negative_index():
    _, stderr, code = run("v = [1, 2]\ni = 0 - 1\nprint(v[i])\n")
    assert code == 70
    assert "index -1 out of range" in stderr


def test_trap_single_alloc_exceeding_heap():
    _, stderr, code = run("v = [0] * 100000\nprint(len(v))\n", heap_bytes=24576)
    assert code == 70
    assert "heap exhausted" in stderr


def test_no_bounds_check_mode():
    stdout, _, code = run("v = [1, 2, 3]\nprint(v[1])\n", bounds_check=False)
    assert code == 0 and stdout == "2\n"


def test_bound_mutation_tracks_reeval():
    src = ("bound = 3\ncount = 0\n"
           "for i in range(0, bound):\n"
           "    count += 1\n"
           "    if i == 0:\n"
           "        bound = 6\n"
           "print(count)\n")
    assert out_of(src) == "6\n"
    assert out_of(src, lowered=True) == "6\n"


def test_closure_shares_frames():
    src = ("def make():\n"
           "    n = 0\n"
           "    def inc():\n"
           "        nonlocal n\n"
           "        n = n + 1\n"
           "        return n\n"
           "    print(inc())\n"
           "    print(inc())\n"
           "    return n\n"
           "print(make())\n")
    assert out_of(src) == "1\n2\n2\n"


def test_vector_alias_visible():
    assert out_of("a = [1]\nb = a\nb[0] = 9\nprint(a[0])\n") == "9\n"


def test_real_formatting_matches_repr():
    vals = [0.1, 10.0, 4.0, 1e16, 1e15, 0.0001, 0.00001, -0.0, 2.0 ** 0.5,
            123456789.0, 5e-324, 1.7976931348623157e308]
    src = "".join(f"print({v!r})\n" for v in vals)
    expect = "".join(repr(v) + "\n" for v in vals)
    assert out_of(src) == expect


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_random_reals(v):
    src = f"print({v!r})\n"
    assert out_of(src) == repr(v) + "\n"


def test_real32_mode_formatting():
    tree = infer_pipeline(parse_source("print(0.1)\nprint(4.0)\nprint(1.0 / 3.0)\n"),
                          real_width=32)
    stdout, _, code = interpret_full(tree)
    assert code == 0
    f32 = struct.unpack("f", struct.pack("f", 1 / 3))[0]
    assert stdout.splitlines()[2] == Interp(tree).fmt_real(f32)
    assert stdout.splitlines()[1] == "4.0"


def test_stdin_is_accepted_and_ignored():
    assert interpret(infer_pipeline(parse_source("print(1)\n")), stdin="junk")[0] == "1\n"


def test_int_width_wrap():
    assert out_of("print(2147483647 + 1)\n") == "-2147483648\n"


def test_complex_division():
    assert out_of("print((3 + 4j) / (1 - 2j))\n") == "(-1.0+2.0j)\n"
