import shutil
import subprocess
from pathlib import Path

import pytest

from vpyc.driver import BuildConfig, build_executable, compile_c, run_phases
from vpyc.parser import parse_source

REPO = Path(__file__).resolve().parents[1]
CORPUS = sorted((Path(__file__).parent / "corpus").glob("*.vpy"))
RUNTIME = REPO / "runtime"


def have_toolchain() -> bool:
    return shutil.which("gcc") is not None and (RUNTIME / "olympus.h").exists()


requires_runtime = pytest.mark.skipif(
    not have_toolchain(),
    reason="needs gcc and the Olympus runtime (secondary component)")


def corpus_ids():
    return [p.stem for p in CORPUS]


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("build")


def pipeline(source: str, cfg: BuildConfig | None = None):
    cfg = cfg or BuildConfig()
    return run_phases(parse_source(source), cfg)


_builds: dict = {}


def build_program(source: str, workdir: Path, cfg: BuildConfig | None = None) -> Path:
    """Compile vPython source text to an executable (cached per content)."""
    cfg = cfg or BuildConfig(runtime=str(RUNTIME))
    if cfg.runtime is None:
        cfg.runtime = str(RUNTIME)
    key = (source, repr(sorted(cfg.__dict__.items())))
    if key in _builds:
        return _builds[key]
    tree = pipeline(source, cfg)
    c_text = compile_c(tree, cfg)
    exe = workdir / f"prog{len(_builds)}"
    build_executable(c_text, cfg, str(exe), workdir=str(workdir / f"w{len(_builds)}"))
    _builds[key] = exe
    return exe


def run_exe(exe: Path, stdin: str = "") -> tuple[str, str, int]:
    proc = subprocess.run([str(exe)], input=stdin, capture_output=True, text=True)
    return proc.stdout, proc.stderr, proc.returncode


def outputs_match(compiled: str, oracle: str, rel_tol: float = 1e-9) -> bool:
    """Byte-exact for int/bool/string lines; real lines may differ within
    a relative tolerance (they are byte-exact in practice)."""
    if compiled == oracle:
        return True
    clines = compiled.splitlines()
    olines = oracle.splitlines()
    if len(clines) != len(olines):
        return False
    for c, o in zip(clines, olines):
        if c == o:
            continue
        if not any(ch in o for ch in ".e"):  # not a real: must be exact
            return False
        try:
            cv, ov = float(c), float(o)
        except ValueError:
            return False
        if ov == 0.0:
            if abs(cv) > rel_tol:
                return False
        elif abs(cv - ov) / abs(ov) > rel_tol:
            return False
    return True
