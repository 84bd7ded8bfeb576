import subprocess
import sys
from pathlib import Path

import pytest

from vpyc.driver import (BuildConfig, compile_c, compile_file, front_to_ast,
                         main, run_phases, size_report)

from conftest import CORPUS, RUNTIME, requires_runtime


def vpyc(*args, stdin=""):
    proc = subprocess.run([sys.executable, "-m", "vpyc.driver", *args],
                          input=stdin, capture_output=True, text=True)
    return proc


def test_emit_ast_phase2_has_no_placeholders(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("a = 3\nprint(a)\n")
    out = tmp_path / "p.oast"
    rc = main(["compile", str(src), "--emit", "ast", "--phase", "2",
               "-o", str(out)])
    assert rc == 0
    text = out.read_text()
    assert ":type ?" not in text
    assert ":slot L0.0" in text


def test_merlin_backend_reserved(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("print(1)\n")
    rc = main(["compile", str(src), "--backend", "merlin"])
    assert rc == 2


def test_dot_backend(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("print(1)\n")
    out = tmp_path / "p.dot"
    rc = main(["compile", str(src), "--backend", "dot", "-o", str(out)])
    assert rc == 0
    assert out.read_text().startswith("digraph ast {")


def test_compile_errors_reported(tmp_path):
    src = tmp_path / "bad.vpy"
    src.write_text("print(zz)\n")
    proc = vpyc("compile", str(src), "--backend", "ast")
    assert proc.returncode == 2
    assert "not defined" in proc.stderr


@pytest.mark.parametrize("path", CORPUS[::5], ids=[p.stem for p in CORPUS[::5]])
def test_pipe_equivalence(path, tmp_path):
    """Four-process .oast-piped pipeline == in-process pipeline, byte-equal."""
    cfg = BuildConfig()
    in_process = compile_c(run_phases(front_to_ast(str(path)), cfg), cfg)

    p1 = vpyc("ast", "--phase", "1", str(path))
    assert p1.returncode == 0, p1.stderr
    p2 = vpyc("ast", "--phase", "2", "-", stdin=p1.stdout)
    assert p2.returncode == 0, p2.stderr
    p3 = vpyc("ast", "--phase", "3", "-", stdin=p2.stdout)
    assert p3.returncode == 0, p3.stderr
    oast = tmp_path / "piped.oast"
    oast.write_text(p3.stdout)
    from vpyc.astio import deserialize_ast
    piped = compile_c(deserialize_ast(p3.stdout), cfg)
    assert piped == in_process


def test_ast_phase_order_guards(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("a = 1\nprint(a)\n")
    p1 = vpyc("ast", "--phase", "1", str(src))
    assert p1.returncode == 0
    # phase 3 on untyped input
    p3 = vpyc("ast", "--phase", "3", "-", stdin=p1.stdout)
    assert p3.returncode == 2 and "phase 2 first" in p3.stderr
    # phase 2 twice
    p2 = vpyc("ast", "--phase", "2", "-", stdin=p1.stdout)
    assert p2.returncode == 0
    p2b = vpyc("ast", "--phase", "2", "-", stdin=p2.stdout)
    assert p2b.returncode == 2 and "already typed" in p2b.stderr


@requires_runtime
def test_run_check(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("print(2 + 2)\n")
    proc = vpyc("run", str(src), "--check", "--runtime", str(RUNTIME))
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == "4\n"
    assert "CHECK OK" in proc.stderr


@requires_runtime
def test_size_report_desktop_heap(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("print(1)\n")
    exe = tmp_path / "p"
    compile_file(str(src), BuildConfig(runtime=str(RUNTIME)), str(exe),
                 workdir=str(tmp_path / "w"))
    report = size_report(str(exe))
    assert report["size_zeroinit"] >= 8_000_000
    assert report["heap_dominates_zeroinit"]


@requires_runtime
def test_empty_module_builds_and_text_budget(tmp_path):
    """An empty module compiles, runs, exits 0; its stripped text segment
    stays under the pinned 32 KiB budget (measured 10,283 bytes)."""
    src = tmp_path / "empty.vpy"
    src.write_text("")
    exe = tmp_path / "empty"
    compile_file(str(src), BuildConfig(opt="size", runtime=str(RUNTIME)),
                 str(exe), workdir=str(tmp_path / "w"))
    proc = subprocess.run([str(exe)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == ""
    subprocess.run(["strip", str(exe)], check=True)
    assert size_report(str(exe))["size_text"] < 32768


def test_run_check_reports_mismatch(tmp_path, monkeypatch):
    from vpyc import driver, oracle
    src = tmp_path / "p.vpy"
    src.write_text("print(1)\n")
    monkeypatch.setattr(oracle, "interpret_full",
                        lambda *a, **k: ("2\n", "", 0))
    if not RUNTIME.joinpath("olympus.h").exists():
        pytest.skip("needs the runtime")
    rc = main(["run", str(src), "--check", "--runtime", str(RUNTIME)])
    assert rc == 1


@requires_runtime
def test_size_report_micro_heap(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("print(1)\n")
    exe = tmp_path / "p24k"
    compile_file(str(src), BuildConfig(heap_bytes=24576, runtime=str(RUNTIME)),
                 str(exe), workdir=str(tmp_path / "w"))
    report = size_report(str(exe))
    assert 24576 <= report["size_zeroinit"] <= 40960


def test_oracle_subcommand(tmp_path):
    src = tmp_path / "p.vpy"
    src.write_text("print(5 * 5)\n")
    proc = vpyc("oracle", "run", str(src))
    assert proc.returncode == 0
    assert proc.stdout == "25\n"


@requires_runtime
def test_bench_cli_report(tmp_path):
    import json
    out = tmp_path / "bench.jsonl"
    proc = vpyc("bench", "--suite", "sieve", "--opt", "size", "--reps", "1",
                "--passes", "20", "--sieve-size", "200",
                "--runtime", str(RUNTIME), "--json-out", str(out))
    assert proc.returncode == 0, proc.stderr
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert {r["variant"] for r in rows} == {"sieve-for", "sieve-while",
                                            "sieve-native"}
    for r in rows:
        for field in ("suite", "variant", "opt", "seconds_median", "size_text",
                      "size_data", "size_zeroinit", "output_digest", "config"):
            assert field in r
        assert r["config"]["flags"].startswith("-std=c11")
    assert len({r["output_digest"] for r in rows}) == 1
    assert "while/for ratio" in proc.stdout
