"""Builds the extension with cargo, imports it and checks a few known values."""

import importlib.util
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "eigmax-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libeigmax_py.so"
    dest = pathlib.Path(tempfile.mkdtemp()) / "eigmax_py.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("eigmax_py", dest)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    em = load()
    a9 = [[1, 2, 3], [1, 2, 1], [3, 2, 1]]
    rho = 3 + math.sqrt(5)

    r = em.solve(a9)
    assert r["status"] == "converged", r
    assert abs(r["eigenvalue"] - rho) < 1e-9, r

    r = em.solve([[0.25, 0.40], [0.14, 0.12]], strategy="tridiag")
    assert abs(r["estimates"][0] - (0.65 - 0.212077)) < 1e-6, r
    assert abs(r["eigenvalue"] - (37 + math.sqrt(2409)) / 200) < 1e-12, r

    lower, upper = em.bounds(a9, [1, 1, 1])
    assert (lower, upper) == (4.0, 6.0)

    t = em.lanczos(a9)
    assert abs(t[0][1] - 11 / math.sqrt(10)) < 1e-10

    qa = [
        [-30, 30, 0, 0],
        [1 / 5, -17, 84 / 5, 0],
        [11 / 28, 275 / 42, -20, 1097 / 84],
        [55 / 3291, 330 / 1097, 588 / 1097, -2809 / 3291],
    ]
    r = em.next_eigenpair(qa, variant="scan")
    assert abs(r["eigenvalue"] - 8.17131) < 1e-5, r

    try:
        em.solve([[1, 1, -1], [0, 1, 1], [1, 0, 1]])
    except ValueError as e:
        assert "negative" in str(e)
    else:
        raise AssertionError("negative off-diagonal accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
