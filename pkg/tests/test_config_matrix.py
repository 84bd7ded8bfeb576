"""Corpus differential re-run across build configurations.

The oracle honours the same width knobs as the toolchain flags, so each
configuration must agree with its own compiled output.
"""

import pytest

from vpyc.driver import BuildConfig
from vpyc.oracle import interpret_full

from conftest import (CORPUS, RUNTIME, build_program, outputs_match, pipeline,
                      requires_runtime, run_exe)

pytestmark = requires_runtime

# programs that are cheap and exercise width-sensitive behaviour
_SUBSET = [p for p in CORPUS if p.stem in (
    "c02_int_arith", "c03_real_arith", "c04_mixed_arith", "c06_compare",
    "c10_for_step", "c13_vectors", "c18_string_conv", "c20_recursion",
    "c25_retype_scalar", "c27_complex_parts", "c28_complex_arith",
    "c31_sieve_for_8190", "c39_imag_literals",
)]

_CONFIGS = [
    pytest.param(dict(int_width=64), id="int64"),
    pytest.param(dict(real_width=32), id="real32"),
    pytest.param(dict(int_width=64, real_width=32), id="int64-real32"),
    pytest.param(dict(heap_bytes=131072), id="heap128k"),
]


@pytest.mark.parametrize("overrides", _CONFIGS)
@pytest.mark.parametrize("path", _SUBSET, ids=[p.stem for p in _SUBSET])
def test_corpus_across_configs(path, overrides, workdir):
    source = path.read_text()
    cfg = BuildConfig(runtime=str(RUNTIME), **overrides)
    tree = pipeline(source, cfg)
    o_out, o_err, o_code = interpret_full(tree, heap_bytes=cfg.heap_bytes)
    exe = build_program(source, workdir, cfg)
    c_out, c_err, c_code = run_exe(exe)
    assert c_code == o_code, f"{path.stem}: exit {c_code} vs {o_code}\n{c_err}"
    assert outputs_match(c_out, o_out), (
        f"{path.stem} diverged\ncompiled: {c_out!r}\noracle:   {o_out!r}")


def test_sieve_micro_profile(workdir):
    """SIZE=4095 sieve runs inside the 24KB micro-core heap profile."""
    from test_oracle import SIEVE
    cfg = BuildConfig(heap_bytes=24576, runtime=str(RUNTIME))
    source = SIEVE.format(size=4095)
    exe = build_program(source, workdir, cfg)
    out, err, code = run_exe(exe)
    assert code == 0 and out == "1027\n", err
    o_out, _, o_code = interpret_full(pipeline(source, cfg), heap_bytes=24576)
    assert (out, code) == (o_out, o_code)


def test_debug_build_runs(workdir, tmp_path):
    """OLYMPUS_DEBUG asserts display levels without changing behaviour."""
    import subprocess
    from vpyc.driver import compile_c
    source = CORPUS[21].read_text()  # nonlocal counter: deep ADDRF traffic
    cfg = BuildConfig(runtime=str(RUNTIME))
    c_text = compile_c(pipeline(source, cfg), cfg)
    gen = tmp_path / "gen.c"
    gen.write_text(c_text)
    exe = tmp_path / "dbg"
    cmd = ["gcc", "-std=c11", "-O0", "-g", "-DOLYMPUS_DEBUG", "-fwrapv",
           f"-I{RUNTIME}", str(gen), str(RUNTIME / "olympus.c"), "-lm",
           "-o", str(exe)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    out, _, code = run_exe(exe)
    o_out, _, o_code = interpret_full(pipeline(source, cfg))
    assert (out, code) == (o_out, o_code)
