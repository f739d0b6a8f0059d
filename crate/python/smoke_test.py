#!/usr/bin/env python3
"""Smoke test for the mixedmf_py extension module.

Builds nothing itself: it looks for the compiled cdylib under ../target
(release first, then debug), copies it next to this file under the module
name, imports it, and exercises the main entry points against known values.

    cargo build -p mixedmf-py --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def ensure_module():
    dest = HERE / "mixedmf_py.so"
    candidates = [
        ROOT / "target" / "release" / "libmixedmf_py.so",
        ROOT / "target" / "debug" / "libmixedmf_py.so",
    ]
    built = [c for c in candidates if c.exists()]
    if not built:
        sys.exit("build the module first: cargo build -p mixedmf-py --release")
    newest = max(built, key=lambda c: c.stat().st_mtime)
    if not dest.exists() or dest.stat().st_mtime < newest.stat().st_mtime:
        shutil.copy2(newest, dest)
    sys.path.insert(0, str(HERE))


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    ensure_module()
    import mixedmf_py as mf

    checks = 0

    def ok(cond, what):
        nonlocal checks
        if not cond:
            sys.exit(f"FAIL: {what}")
        checks += 1
        print(f"ok  {what}")

    # Cascade oracle on the binomial family.
    spec = mf.CascadeSpec(2, 1, 12, [[0.25, 0.75], [0.5, 0.5]])
    ok(close(spec.solve_exponent([2.0]), math.log2(0.625), 1e-11),
       "oracle exponent at q=2 is log2(0.625)")
    ok(close(spec.solve_exponent([-1.0]), math.log2(16.0 / 3.0), 1e-11),
       "oracle exponent at q=-1 is log2(16/3)")
    ok(abs(spec.solve_exponent([1.0])) <= 1e-12, "exponent vanishes at e_1")
    gamma, value = spec.oracle_spectrum([0.0])
    ok(close(gamma[0], 1.2075187496394219) and close(value, 1.0),
       "oracle spectrum apex at q=0")
    lo, hi = spec.spectral_bounds()
    ok(close(lo[0], -math.log2(0.75), 1e-12) and close(hi[0], 2.0, 1e-12),
       "spectral bounds are the branch ratios")

    # Engine equals oracle on the same family.
    xi = mf.build_cascade(spec)
    for level in (4, 8, 12):
        ok(close(xi.solve_t_star([2.0], level), math.log2(0.625)),
           f"t* at level {level} matches the oracle")
    est = xi.estimate_dimensions([2.0], 7, 12)
    ok(est["b_hat"] <= est["B_hat"] <= est["Lambda_hat"],
       "estimate ordering chain")
    ok(close(est["Lambda_hat"], math.log2(0.625), 1e-9), "fitted exponent")

    # Spectrum estimators.
    cg, cf = xi.canonical_spectrum([0.0], 12)
    ok(close(cg[0], gamma[0]) and close(cf, 1.0),
       "canonical spectrum equals the oracle at q=0")
    count, dim = xi.classify_boxes([1.207518], 0.01, 12)
    ok(count == math.comb(12, 6), "balanced boxes counted exactly")
    ok(close(dim, math.log2(math.comb(12, 6)) / 12.0),
       "relative dimension of the balanced family")
    hist = xi.histogram_spectrum(12, 0.05)
    peak = max(v for _, v in hist)
    ok(close(peak, math.log2(math.comb(12, 6)) / 12.0),
       "histogram peak matches counting")

    # Legendre transform of the oracle table.
    table = [([q / 100.0], spec.solve_exponent([q / 100.0]))
             for q in range(-600, 601)]
    lvalue, _ = mf.legendre(table, [gamma[0]])
    ok(abs(lvalue - 1.0) <= 1e-3, "Legendre transform at the apex")

    # Empirical ingestion.
    pts = [[0.1], [0.3], [0.6], [0.9]]
    tree = mf.ingest_samples(pts, 2, 1, 1)
    ok(tree.mass([0]) == 0.5 and tree.mass([1]) == 0.5,
       "four samples split evenly at level 1")

    # Gauge diagnostics.
    skew = mf.CascadeSpec(2, 1, 10, [[0.5, 0.5], [0.7, 0.3]])
    alpha, trace = mf.build_cascade(skew).gauge().ahlfors_index(1, 10)
    ok(close(alpha, -math.log2(0.7)), "regularity index of the skew gauge")
    ok(len(trace) == 10, "per-level trace covers the window")

    # The property-check suite.
    report = mf.run_verify(seed=17)
    ok(report["passed"] and len(report["checks"]) == 10,
       "verify suite: 10 checks, all green")

    print(f"\nsmoke test passed ({checks} checks)")


if __name__ == "__main__":
    main()
