"""Smoke test for the Python extension.

Build first:

    cargo build -p bispectral-py --release --features extension-module

then run `python3 python/smoke_test.py`. The script loads the freshly built
shared library straight from the cargo target directory.
"""

import importlib.util
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_extension():
    for profile in ("release", "debug"):
        for name in ("libbispectral_py.so", "libbispectral_py.dylib", "bispectral_py.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                suffix = ".pyd" if name.endswith(".dll") else ".so"
                dest = pathlib.Path(tempfile.mkdtemp()) / f"bispectral_py{suffix}"
                shutil.copy(lib, dest)
                spec = importlib.util.spec_from_file_location("bispectral_py", dest)
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                return module
    sys.exit("extension not built; run: cargo build -p bispectral-py --release --features extension-module")


def main():
    bp = load_extension()

    x, d = bp.Operator.x(), bp.Operator.d()
    assert str(d.commutator(x)) == "1"
    assert str(bp.Operator("D*x")) == "1 * x * D + 1"
    assert bp.canonical_poly("t^3/3") == "1/3*t^3"

    word = bp.Word.from_pairs([("t^3/3", "t^3/3")])
    assert word.m == 1
    ops = word.quadruple()
    assert ops["L"] == "1 * D^4 + -2 * x * D^2 + -1 * D + 1 * x^2", ops["L"]
    assert word.classify()["verdict"] == "NewBispectral"

    psi, err = word.eval_psi(0.5, -0.5)
    assert isinstance(psi, complex) and err < 1e-10

    report = word.verify(grid=[(0.5, -0.5), (0.0, 1.0)], probes=[x * x])
    assert report["pass"], report["max_residual"]
    assert len(report["residuals"]) == 2 * 5

    quadratic = bp.Word.from_pairs([("t^2", "t^2")])
    assert quadratic.classify()["verdict"] == "Rank1OrTrivial"
    try:
        quadratic.eval_psi(0.0, 0.0)
    except bp.DivergentError as e:
        assert "p1,q1" in str(e)
    else:
        raise AssertionError("expected DivergentError")

    sym = bp.symmetry()
    assert sym["rank"] == 3

    print(f"ok: psi(0.5, -0.5) = {psi:.12g}, max residual {report['max_residual']:.2e}")


if __name__ == "__main__":
    main()
