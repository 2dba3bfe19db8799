"""Smoke test for the Python bindings.

Build first with `cargo build -p cuspforge-py`, then run
`python3 python/smoke_test.py`. The extension is loaded straight from
target/debug (or $CUSPFORGE_PY_LIB).
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "crates" / "cuspforge" / "fixtures"


def load():
    path = os.environ.get("CUSPFORGE_PY_LIB")
    if path is None:
        for name in ("libcuspforge_py.so", "libcuspforge_py.dylib", "cuspforge_py.dll"):
            candidate = ROOT / "target" / "debug" / name
            if candidate.exists():
                path = str(candidate)
                break
    if path is None:
        sys.exit("extension not built; run `cargo build -p cuspforge-py`")
    loader = importlib.machinery.ExtensionFileLoader("cuspforge_py", path)
    spec = importlib.util.spec_from_file_location("cuspforge_py", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    cf = load()
    fig8 = (FIXTURES / "FIG8.itri").read_text()
    dbl = (FIXTURES / "DBL.itri").read_text()

    assert sorted(cf.edge_indices(fig8)) == [6, 6]
    assert cf.cusp_count(fig8) == 1
    assert sorted(cf.edge_indices(dbl)) == [2] * 6
    assert cf.cusp_count(dbl) == 4
    assert cf.is_negatively_curved(fig8) and not cf.is_negatively_curved(dbl)

    h0, l0, side, corner = cf.geom_constants()
    assert h0 == 2.0
    assert abs(l0 - math.acosh(1.5)) < 1e-9
    assert abs(side - l0) < 1e-9
    assert abs(corner - math.acos(0.2)) < 1e-9

    total, degree = cf.cover(dbl)
    assert degree == 8
    assert cf.unique_common_simplex(total)

    ncrd = cf.construct_surface(total)
    cert = cf.certify_surface(total, ncrd)
    assert "hypothesis.surface_not_linking=true" in cert
    assert "verdict=refuted-hypothesis" in cert

    code, _ = cf.pipeline(dbl)
    assert code == 2

    try:
        cf.edge_indices("not a triangulation")
    except ValueError:
        pass
    else:
        raise AssertionError("bad input accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
