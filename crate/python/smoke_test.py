"""Smoke test for the matdist_py extension module.

Locates the built cdylib under target/, copies it next to this script under
the importable name, and exercises the bindings end to end. Run from the
repository root after `cargo build -p matdist-py`:

    python python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def locate_extension():
    candidates = []
    for profile in ("release", "debug"):
        for name in ("libmatdist_py.so", "libmatdist_py.dylib", "matdist_py.dll"):
            p = ROOT / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit("matdist_py cdylib not found; run `cargo build -p matdist-py` first")
    src = max(candidates, key=lambda p: p.stat().st_mtime)
    dst = HERE / ("matdist_py" + (".pyd" if src.suffix == ".dll" else ".so"))
    shutil.copy2(src, dst)
    return dst


locate_extension()
sys.path.insert(0, str(HERE))
import matdist_py  # noqa: E402


def check(cond, msg):
    if not cond:
        sys.exit(f"FAIL: {msg}")
    print(f"ok: {msg}")


names = matdist_py.catalog_names()
check("uniform_frame" in names and "fgm_axis" in names, f"catalog lists {names}")

# jet arithmetic: identity, composition, inverse
e = matdist_py.Jet.identity([0.25, 0.5])
check(e.is_holonomic(), "identity jet is holonomic")

g = matdist_py.Jet(
    x=[0.0, 0.0],
    y=[1.0, 2.0],
    a=[[1.0, 0.2], [0.0, 1.0]],
    b=[[1.0, 0.0], [0.3, 1.0]],
    c=[[[0.1, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, -0.2]]],
)
gi = g.inverse()
round_trip = gi.compose(g)
check(
    round_trip.max_diff(matdist_py.Jet.identity([0.0, 0.0])) < 1e-12,
    "inverse(g) . g is the identity",
)

# law evaluation and gradients
law = matdist_py.Law.catalog("uniform_frame", 2)
value, grads = law.evaluate_with_gradient(g)
check(len(value) == law.out_dim(), "evaluation length matches out_dim")
check(all(len(r) == len(grads[0]) for r in grads), "gradient rows share the layout")

custom = matdist_py.Law.parse("x[1] + yA[1][1]^2 ; x[2]", 2, 2)
v = custom.evaluate(g)
check(abs(v[0] - (0.0 + 1.0**2)) < 1e-15 and v[1] == 0.0, "parsed law evaluates")

# point solve: the frame law has a full-dimensional base at every point
sol = matdist_py.solve_point_dims(law, [0.4, 0.6], seed=3)
check(sol.rank_saturated, "solver saturates the rank")
check(sol.base_dim_nonholonomic == 2, f"frame law base dimension {sol.base_dim_nonholonomic}")
check(sol.dim_holonomic < sol.dim_nonholonomic, "holonomic space is smaller")

# grid classification
summary = matdist_py.classify_grid(law, [0.0, 0.0], [1.0, 1.0], [3, 3], seed=1, threads=2)
check(summary.classification == "smoothly_uniform", f"classification {summary.classification}")
check(summary.dims_nonholonomic == [2] * 9, "full fibre dimension at every grid point")
check(not summary.warnings, "no warnings")

graded = matdist_py.Law.catalog("fgm_axis", 2)
summary = matdist_py.classify_grid(graded, [0.0, 0.0], [1.0, 1.0], [3, 3])
check(summary.classification == "non_uniform", f"graded law classification {summary.classification}")

# isomorphism probe: identity passes, a stretch does not
ok, dev = matdist_py.check_isomorphism(law, matdist_py.Jet.identity([0.3, 0.3]))
check(ok and dev < 1e-12, "identity jet is a material isomorphism")
stretch = matdist_py.Jet(
    x=[0.3, 0.3],
    y=[0.7, 0.1],
    a=[[2.0, 0.0], [0.0, 2.0]],
    b=[[1.0, 0.0], [0.0, 1.0]],
    c=[[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
)
ok, dev = matdist_py.check_isomorphism(law, stretch)
check(not ok and dev > 1e-3, "a frame stretch is rejected")
check(math.isfinite(dev), "deviation is finite")

print("smoke test passed")
