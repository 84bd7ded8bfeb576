"""vpyc CLI: compile | run | bench | size | ast | oracle.

Orchestrates the pipeline either in-process or through `.oast` pipe
phases, invokes the platform C toolchain against the runtime, executes
artifacts, and produces benchmark and binary-size reports.
"""

import argparse
import hashlib
import json
import os
import statistics
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import errors, oracle
from .astio import deserialize_ast, serialize_ast
from .astnodes import AstNode
from .codegen_dot import emit_dot
from .codegen_olympus import emit_module
from .optimizer import optimize
from .parser import parse_source
from .typeinfer import infer_pipeline

_OPT_FLAGS = {"size": "-Os", "speed": "-O3"}
# -fwrapv pins two's-complement wrap; -ffp-contract=off forbids FMA so
# compiled real arithmetic is bit-identical to the oracle's
_BASE_CFLAGS = ["-std=c11", "-fwrapv", "-ffp-contract=off", "-Wall"]


@dataclass
class BuildConfig:
    backend: str = "olympus"
    opt: str = "size"
    heap_bytes: int = 8388608
    int_width: int = 32
    real_width: int = 64
    bounds: bool = True
    cc: str | None = None
    runtime: str | None = None

    def toolchain(self) -> str:
        return self.cc or os.environ.get("VPYC_CC") or "gcc"

    def runtime_dir(self) -> Path:
        if self.runtime:
            return Path(self.runtime)
        env = os.environ.get("VPYC_RUNTIME")
        if env:
            return Path(env)
        here = Path(__file__).resolve()
        for base in (Path.cwd(), here.parents[2], here.parents[3]):
            cand = base / "runtime"
            if (cand / "olympus.h").exists():
                return cand
        raise errors.ToolchainError(
            "cannot locate the Olympus runtime (looked for runtime/olympus.h); "
            "pass --runtime DIR or set VPYC_RUNTIME")

    def cc_flags(self) -> list[str]:
        return _BASE_CFLAGS + [
            _OPT_FLAGS[self.opt],
            f"-DOLYMPUS_HEAP_BYTES={self.heap_bytes}",
            f"-DOLYMPUS_INT64={1 if self.int_width == 64 else 0}",
            f"-DOLYMPUS_REAL32={1 if self.real_width == 32 else 0}",
            f"-DOLYMPUS_BOUNDS={1 if self.bounds else 0}",
        ]

    def provenance(self) -> dict:
        return {
            "opt": self.opt, "cc": self.toolchain(),
            "heap_bytes": self.heap_bytes, "int_width": self.int_width,
            "real_width": self.real_width,
            "bounds": "on" if self.bounds else "off",
            "flags": " ".join(self.cc_flags()),
        }


# -- pipeline -------------------------------------------------------------------

def front_to_ast(path: str) -> AstNode:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".oast"):
        return deserialize_ast(text)
    return parse_source(text)


def run_phases(tree: AstNode, cfg: BuildConfig, upto: int = 3) -> AstNode:
    """Run phases 2..upto on a tree (phase 1 = parsing happened already)."""
    if "intwidth" not in tree.attrs:  # untyped: needs phase 2
        if upto >= 2:
            tree = infer_pipeline(tree, cfg.int_width, cfg.real_width)
    if upto >= 3:
        tree = optimize(tree)  # idempotent on already-lowered trees
    return tree


def compile_c(tree: AstNode, cfg: BuildConfig) -> str:
    return emit_module(tree, heap_bytes=cfg.heap_bytes)


def build_executable(c_text: str, cfg: BuildConfig, out_path: str,
                     workdir: str | None = None) -> str:
    rt = cfg.runtime_dir()
    tmp = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="vpyc-"))
    tmp.mkdir(parents=True, exist_ok=True)
    gen = tmp / "generated.c"
    gen.write_text(c_text, encoding="utf-8")
    cmd = [cfg.toolchain(), *cfg.cc_flags(), f"-I{rt}", str(gen),
           str(rt / "olympus.c"), "-lm", "-o", out_path]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise errors.ToolchainError(
            f"toolchain failed: {' '.join(cmd)}", proc.stdout + proc.stderr)
    return out_path


def compile_file(src: str, cfg: BuildConfig, out: str | None = None,
                 emit: str | None = None, phase: int = 3,
                 workdir: str | None = None) -> str:
    """cmd_compile: returns the artifact path (or writes text output)."""
    if cfg.backend == "merlin":
        raise errors.UnsupportedBackend("merlin")
    if cfg.backend not in ("olympus", "dot", "ast"):
        raise errors.UnsupportedBackend(cfg.backend)
    tree = front_to_ast(src)
    stem = Path(src).stem
    if emit == "ast" or cfg.backend == "ast":
        tree = run_phases(tree, cfg, upto=phase)
        out = out or f"{stem}.oast"
        _write(out, serialize_ast(tree) + "\n")
        return out
    tree = run_phases(tree, cfg, upto=3)
    if cfg.backend == "dot":
        out = out or f"{stem}.dot"
        _write(out, emit_dot(tree))
        return out
    c_text = compile_c(tree, cfg)
    out = out or str(Path(src).with_suffix(""))
    return build_executable(c_text, cfg, out, workdir)


def _write(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def run_artifact(path: str, stdin: str | None = "") -> tuple[str, str, int]:
    """Run an executable capturing output; stdin=None inherits the caller's."""
    proc = subprocess.run([os.path.abspath(path)], input=stdin,
                          capture_output=True, text=True)
    return proc.stdout, proc.stderr, proc.returncode


# -- subcommands -------------------------------------------------------------------

def cmd_compile(args) -> int:
    cfg = _config(args)
    try:
        out = compile_file(args.src, cfg, args.output, args.emit, args.phase)
    except errors.UnsupportedBackend as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (errors.VpycError, errors.AstFormatError) as e:
        print(f"{args.src}:{e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except errors.ToolchainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    if out != "-":
        print(out)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    stdin = ""  # compiled programs take no input; nothing to forward
    src = args.artifact
    if src.endswith(".vpy") or src.endswith(".oast"):
        with tempfile.TemporaryDirectory(prefix="vpyc-run-") as td:
            exe = str(Path(td) / "prog")
            try:
                compile_file(src, cfg, exe, workdir=td)
            except (errors.VpycError, errors.AstFormatError) as e:
                print(f"{src}:{e}", file=sys.stderr)
                return 2
            except OSError as e:
                print(f"error: {e}", file=sys.stderr)
                return 2
            except errors.ToolchainError as e:
                print(f"error: {e}", file=sys.stderr)
                return 3
            out, err, code = run_artifact(exe, stdin)
    else:
        out, err, code = run_artifact(src, stdin)
    sys.stdout.write(out)
    sys.stderr.write(err)
    if args.check:
        if not (src.endswith(".vpy") or src.endswith(".oast")):
            print("--check needs a source file", file=sys.stderr)
            return 2
        tree = run_phases(front_to_ast(src), cfg)
        o_out, o_err, o_code = oracle.interpret_full(
            tree, stdin, cfg.heap_bytes, cfg.bounds)
        if (out, code) != (o_out, o_code):
            print("CHECK FAILED: compiled output differs from oracle",
                  file=sys.stderr)
            print(f"  compiled: exit={code} stdout={out!r}", file=sys.stderr)
            print(f"  oracle:   exit={o_code} stdout={o_out!r}", file=sys.stderr)
            return 1
        print("CHECK OK", file=sys.stderr)
    return code


def cmd_size(args) -> int:
    try:
        report = size_report(args.artifact)
    except errors.ToolchainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    print(json.dumps(report, indent=2))
    return 0


def size_report(artifact: str) -> dict:
    proc = subprocess.run(["size", artifact], capture_output=True, text=True)
    if proc.returncode != 0:
        raise errors.ToolchainError("size failed", proc.stdout + proc.stderr)
    lines = proc.stdout.strip().splitlines()
    fields = lines[1].split()
    text_b, data_b, bss_b = int(fields[0]), int(fields[1]), int(fields[2])
    return {
        "artifact": artifact,
        "size_text": text_b,
        "size_data": data_b,
        "size_zeroinit": bss_b,
        "heap_dominates_zeroinit": bss_b >= 0.5 * (text_b + data_b + bss_b),
    }


# -- benchmarks ----------------------------------------------------------------------

_SUITES = {
    "sieve-for": ("sieve_for.vpy.tmpl", "vpy"),
    "sieve-while": ("sieve_while.vpy.tmpl", "vpy"),
    "sieve-native": ("sieve_native.c.tmpl", "c"),
    "linpack": ("linpack.vpy.tmpl", "vpy"),
    "linpack-native": ("linpack_native.c.tmpl", "c"),
}


def bench_template(name: str, **subst) -> str:
    text = (resources.files("vpyc") / "benchprogs" / name).read_text("utf-8")
    for key, value in subst.items():
        text = text.replace(f"@{key}@", str(value))
    return text


def build_variant(variant: str, cfg: BuildConfig, td: Path, **subst) -> Path:
    tmpl, kind = _SUITES[variant]
    text = bench_template(tmpl, **subst)
    exe = td / f"{variant}-{cfg.opt}"
    if kind == "c":
        csrc = td / f"{variant}.c"
        csrc.write_text(text, encoding="utf-8")
        cmd = [cfg.toolchain(), *_BASE_CFLAGS, _OPT_FLAGS[cfg.opt],
               str(csrc), "-lm", "-o", str(exe)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise errors.ToolchainError("native build failed",
                                        proc.stdout + proc.stderr)
    else:
        src = td / f"{variant}.vpy"
        src.write_text(text, encoding="utf-8")
        compile_file(str(src), cfg, str(exe), workdir=str(td / f"{variant}-work"))
    return exe


def time_artifact(exe: Path, reps: int) -> tuple[float, str]:
    times = []
    outputs = set()
    for _ in range(reps):
        t0 = time.monotonic()
        out, err, code = run_artifact(str(exe))
        dt = time.monotonic() - t0
        if code != 0:
            raise errors.ToolchainError(f"benchmark run failed: {err}")
        times.append(dt)
        outputs.add(out)
    if len(outputs) != 1:
        raise errors.ToolchainError("benchmark output is not deterministic")
    digest = hashlib.sha256(outputs.pop().encode()).hexdigest()[:16]
    return statistics.median(times), digest


def cmd_bench(args) -> int:
    cfg = _config(args)
    suite = args.suite
    if suite == "sieve":
        variants = ["sieve-for", "sieve-while", "sieve-native"]
        subst = {"SIZE": args.sieve_size, "PASSES": args.passes}
    elif suite == "linpack":
        variants = ["linpack", "linpack-native"]
        subst = {"N": args.n}
    else:
        print(f"unknown suite {suite!r}", file=sys.stderr)
        return 2
    opts = ["size", "speed"] if args.opt == "both" else [args.opt]
    rows = []
    with tempfile.TemporaryDirectory(prefix="vpyc-bench-") as td_s:
        td = Path(td_s)
        for opt in opts:
            run_cfg = BuildConfig(**{**cfg.__dict__, "opt": opt})
            for variant in variants:
                exe = build_variant(variant, run_cfg, td, **subst)
                seconds, digest = time_artifact(exe, args.reps)
                size_row = size_report(str(exe))
                rows.append({
                    "suite": suite, "variant": variant, "opt": opt,
                    "seconds_median": round(seconds, 6),
                    "size_text": size_row["size_text"],
                    "size_data": size_row["size_data"],
                    "size_zeroinit": size_row["size_zeroinit"],
                    "output_digest": digest,
                    "config": run_cfg.provenance(),
                })
    digests = {r["variant"]: r["output_digest"] for r in rows}
    comparable = len(set(digests.values())) == 1
    _print_bench(rows, comparable)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r) + "\n")
    if not comparable:
        print("error: variant outputs differ; ratio rows aborted",
              file=sys.stderr)
        return 1
    return 0


def _print_bench(rows, comparable):
    hdr = f"{'variant':14} {'opt':6} {'median(s)':>10} {'text':>8} {'data':>8} {'bss':>9} digest"
    print(hdr)
    print("-" * len(hdr))
    for r in rows:
        print(f"{r['variant']:14} {r['opt']:6} {r['seconds_median']:>10.4f} "
              f"{r['size_text']:>8} {r['size_data']:>8} {r['size_zeroinit']:>9} "
              f"{r['output_digest']}")
    if not comparable:
        print("WARNING: output digests differ across variants; no ratios")
        return
    by = {(r["variant"], r["opt"]): r["seconds_median"] for r in rows}
    for opt in ("size", "speed"):
        if ("sieve-for", opt) in by and ("sieve-while", opt) in by:
            ratio = by[("sieve-while", opt)] / max(by[("sieve-for", opt)], 1e-9)
            print(f"while/for ratio ({opt}): {ratio:.2f}x")
        if ("sieve-for", opt) in by and ("sieve-native", opt) in by:
            ratio = by[("sieve-for", opt)] / max(by[("sieve-native", opt)], 1e-9)
            print(f"for/native ratio ({opt}): {ratio:.2f}x")
        if ("linpack", opt) in by and ("linpack-native", opt) in by:
            ratio = by[("linpack", opt)] / max(by[("linpack-native", opt)], 1e-9)
            print(f"olympus/native ratio ({opt}): {ratio:.2f}x")


# -- argument plumbing ------------------------------------------------------------------

def _config(args) -> BuildConfig:
    return BuildConfig(
        backend=getattr(args, "backend", "olympus"),
        opt=getattr(args, "opt", "size") or "size",
        heap_bytes=args.heap_bytes,
        int_width=args.int_width,
        real_width=args.real_width,
        bounds=args.bounds == "on",
        cc=args.cc,
        runtime=args.runtime,
    )


def _common_flags(p):
    p.add_argument("--heap-bytes", type=int, default=8388608)
    p.add_argument("--int-width", type=int, choices=(32, 64), default=32)
    p.add_argument("--real-width", type=int, choices=(32, 64), default=64)
    p.add_argument("--bounds", choices=("on", "off"), default="on")
    p.add_argument("--cc", default=None, help="toolchain path (or $VPYC_CC)")
    p.add_argument("--runtime", default=None,
                   help="directory holding olympus.h/olympus.c (or $VPYC_RUNTIME)")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="vpyc", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("compile", help="compile a .vpy (or .oast) source")
    p.add_argument("src")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--backend", choices=("olympus", "dot", "ast", "merlin"),
                   default="olympus")
    p.add_argument("--opt", choices=("size", "speed"), default="size")
    p.add_argument("--emit", choices=("ast",), default=None)
    p.add_argument("--phase", type=int, choices=(1, 2, 3), default=3)
    _common_flags(p)
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="run an artifact or source, optionally checking against the oracle")
    p.add_argument("artifact")
    p.add_argument("--check", action="store_true")
    p.add_argument("--opt", choices=("size", "speed"), default="size")
    _common_flags(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="build and time benchmark variants")
    p.add_argument("--suite", choices=("sieve", "linpack"), required=True)
    p.add_argument("--opt", choices=("size", "speed", "both"), default="both")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--sieve-size", type=int, default=8190)
    p.add_argument("--passes", type=int, default=400)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--json-out", default=None)
    _common_flags(p)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("size", help="report text/data/zero-init segment sizes")
    p.add_argument("artifact")
    p.set_defaults(fn=cmd_size)

    p = sub.add_parser("ast", help="run a single pipe phase over .oast text")
    p.add_argument("src", help=".vpy for phase 1, .oast for later phases")
    p.add_argument("--phase", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("-o", "--output", default="-")
    _common_flags(p)
    p.set_defaults(fn=cmd_ast)

    p = sub.add_parser("oracle", help="reference interpreter (oracle run FILE)")
    p.add_argument("verb", choices=("run",))
    p.add_argument("file")
    p.add_argument("--heap-bytes", type=int, default=8388608)
    p.add_argument("--int-width", type=int, choices=(32, 64), default=32)
    p.add_argument("--real-width", type=int, choices=(32, 64), default=64)
    p.add_argument("--no-bounds-check", action="store_true")
    p.set_defaults(fn=None)

    args = ap.parse_args(argv)
    if args.cmd == "oracle":
        return oracle.main(["run", args.file,
                            "--heap-bytes", str(args.heap_bytes),
                            "--int-width", str(args.int_width),
                            "--real-width", str(args.real_width)]
                           + (["--no-bounds-check"] if args.no_bounds_check else []))
    return args.fn(args)


def cmd_ast(args) -> int:
    cfg = _config(args)
    try:
        if args.phase == 1:
            if not args.src.endswith(".vpy") and args.src != "-":
                print("phase 1 consumes .vpy source", file=sys.stderr)
                return 2
            text = sys.stdin.read() if args.src == "-" else \
                Path(args.src).read_text(encoding="utf-8")
            tree = parse_source(text)
        else:
            text = sys.stdin.read() if args.src == "-" else \
                Path(args.src).read_text(encoding="utf-8")
            tree = deserialize_ast(text)
            typed = "intwidth" in tree.attrs
            if args.phase == 2:
                if typed:
                    print("phase 2 consumes untyped .oast (already typed input)",
                          file=sys.stderr)
                    return 2
                tree = infer_pipeline(tree, cfg.int_width, cfg.real_width)
            else:
                if not typed:
                    print("phase 3 consumes typed .oast (run phase 2 first)",
                          file=sys.stderr)
                    return 2
                tree = optimize(tree)
        _write(args.output, serialize_ast(tree) + "\n")
        return 0
    except (errors.VpycError, errors.AstFormatError) as e:
        print(f"{args.src}:{e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
