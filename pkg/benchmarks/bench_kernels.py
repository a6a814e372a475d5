"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times both kernels on identical inputs, checks that the outputs agree, and
times one ``invert_Lbar`` call (which uses both kernels) per backend in a
subprocess so the import-time selection is exercised.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from sobogeo import _kernels_py

try:
    from sobogeo import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

END_TO_END = """
import timeit, numpy as np
from sobogeo import kernels
from sobogeo.metric import MetricCoeffs, apply_Lbar, invert_Lbar
from sobogeo.shapes import reparametrized_circle
c = reparametrized_circle({n}, 0.6)
m = MetricCoeffs((1, 0, 1))
th = c.theta
p = apply_Lbar(c, np.c_[np.cos(3 * th), np.sin(2 * th)], m)
t = min(timeit.repeat(lambda: invert_Lbar(c, p, m), number=5, repeat={repeat})) / 5
print(kernels.BACKEND, t)
"""


def _inputs(n, m, rng):
    f = rng.normal(size=(n, 2))
    F = np.fft.rfft(f, axis=0)
    x = rng.uniform(0, 2 * np.pi, m)
    # periodic part of an increasing map: small smooth perturbation of the identity
    th = 2 * np.pi * np.arange(n) / n
    q = 0.3 * np.sin(th) + 0.1 * np.cos(2 * th) - 0.1
    Q = np.fft.rfft(q)
    y = np.sort(rng.uniform(0, 2 * np.pi, m))
    return F, x, Q, y


def _best(fn, repeat):
    number = 3
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_rows(sizes, repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        for factor in (1, 4):
            m = n * factor
            F, x, Q, y = _inputs(n, m, rng)
            row = {"n": n, "m": m}
            for name, mod in (("python", _kernels_py), ("cython", _kernels_c)):
                if mod is None:
                    continue
                row[f"interp_{name}"] = _best(lambda: mod.interp_rfft(F, n, x), repeat)
                row[f"inverse_{name}"] = _best(lambda: mod.monotone_inverse(Q, n, y), repeat)
            if _kernels_c is not None:
                row["interp_maxdiff"] = float(np.max(np.abs(
                    _kernels_c.interp_rfft(F, n, x) - _kernels_py.interp_rfft(F, n, x))))
                row["inverse_maxdiff"] = float(np.max(np.abs(
                    _kernels_c.monotone_inverse(Q, n, y) - _kernels_py.monotone_inverse(Q, n, y))))
            rows.append(row)
    return rows


def end_to_end(sizes, repeat):
    out = []
    for n in sizes:
        row = {"n": n}
        for pure in ("1", "0"):
            env = dict(os.environ, SOBOGEO_PURE_PYTHON=pure)
            r = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n, repeat=repeat)],
                               env=env, capture_output=True, text=True, check=True)
            backend, secs = r.stdout.split()
            row[backend] = float(secs)
        out.append(row)
    return out


def _ms(x):
    return f"{1e3 * x:9.3f}" if x is not None else f"{'-':>9s}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels_c is None:
        print("compiled extension not built; only the numpy fallback is timed")
    rows = kernel_rows(sizes, args.repeat)
    print(f"{'n':>5s} {'m':>6s} | {'interp py':>9s} {'interp cy':>9s} {'speedup':>7s} | "
          f"{'inverse py':>10s} {'inverse cy':>10s} {'speedup':>7s}  (ms)")
    for r in rows:
        ic, vc = r.get("interp_cython"), r.get("inverse_cython")
        s1 = f"{r['interp_python'] / ic:7.1f}" if ic else f"{'-':>7s}"
        s2 = f"{r['inverse_python'] / vc:7.1f}" if vc else f"{'-':>7s}"
        print(f"{r['n']:5d} {r['m']:6d} | {_ms(r['interp_python'])} {_ms(ic)} {s1} | "
              f"{_ms(r['inverse_python']):>10s} {_ms(vc):>10s} {s2}")
    if _kernels_c is not None:
        worst = max(max(r["interp_maxdiff"], r["inverse_maxdiff"]) for r in rows)
        print(f"max |cython - python| over all inputs: {worst:.2e}")

    e2e = end_to_end(sizes, args.repeat)
    print("\ninvert_Lbar on a curve with speed ratio 4 (ms per call)")
    for r in e2e:
        py, cy = r.get("python"), r.get("cython")
        ratio = f"{py / cy:.1f}x" if py and cy else "-"
        print(f"  n={r['n']:4d}  python {_ms(py)}  cython {_ms(cy)}  {ratio}")

    if args.json:
        with open(args.json, "w") as f:
            json.dump({"kernels": rows, "invert_Lbar": e2e}, f, indent=1)


if __name__ == "__main__":
    main()
