"""Smoke test for the pygroundlap extension module.

Builds the extension with cargo if it is not importable, then exercises the
main entry points on graphs with known answers.

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        import pygroundlap

        return pygroundlap
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "groundlap-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = Path(tempfile.mkdtemp())
    shutil.copy(ROOT / "target" / "release" / "libpygroundlap.so", target / "pygroundlap.so")
    sys.path.insert(0, str(target))
    import pygroundlap

    return pygroundlap


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    gl = load_module()

    path = gl.Graph(3, [(0, 1), (1, 2)])
    sys_p3 = gl.GroundedSystem(path, [2])
    lam, vec = sys_p3.smallest_eigenpair()
    assert close(lam, (3 - math.sqrt(5)) / 2), lam
    assert close(max(vec), 1.0) and min(vec) > 0
    assert sys_p3.min_cut_ratio() == (1, 2, [0, 1])

    cert = json.loads(sys_p3.certificate())
    assert cert["upper_cut_ratio"] == "1/2"
    assert all(f["pass"] for f in cert["flags"])

    triangle = gl.GroundedSystem(gl.Graph.complete(3), [2])
    assert json.loads(triangle.certificate())["tight"] is True

    assert gl.isoperimetric_constant(gl.Graph.complete(4)) == (2, 1, [0, 1])

    p4 = gl.GroundedSystem(gl.Graph(4, [(0, 1), (1, 2), (2, 3)]), [0, 3])
    y = p4.equilibrium([0.0, 1.0])
    assert close(y[0], 1 / 3) and close(y[1], 2 / 3), y

    report, trace = triangle.simulate([0.0], initial=[1.0, 1.0], horizon=20.0)
    assert close(json.loads(report)["fitted_rate"], 1.0, 1e-6)
    assert close(trace[0][1], math.sqrt(2))

    g = gl.sample_er(200, 0.1, seed=7)
    assert g.edges == gl.sample_er(200, 0.1, seed=7).edges
    reg = gl.sample_regular(50, 4, seed=1)
    assert set(reg.degrees()) == {4}

    try:
        gl.Graph(3, [(0, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("self-loop accepted")

    print("pygroundlap smoke test passed")


if __name__ == "__main__":
    main()
