"""Benchmark the compiled geometry kernels against the NumPy fallback.

Run:  python benchmarks/bench_kernels.py
The workloads mirror the package's hot paths: 4D FPS + kNN during patch
extraction, and segment distance / parity queries during observation
synthesis and SDF target generation.
"""

import time

import numpy as np

from pcsim.geom import _kernels_py

try:
    from pcsim.geom import _kernels_c
except ImportError:
    _kernels_c = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng):
    lifted = rng.random((3328, 4))  # 13 frames x 256 points
    centers = lifted[rng.choice(3328, size=333, replace=False)]
    pts2 = rng.random((2048, 2))
    seg_a = rng.random((160, 2))
    seg_b = seg_a + rng.normal(0, 0.1, size=(160, 2))
    return [
        ("fps 333/3328 4D", lambda k: k.farthest_point_sample(lifted, 333, 0)),
        ("knn16 333q/3328 4D", lambda k: k.knn_batch(centers, lifted, 16)),
        ("segdist 2048x160", lambda k: k.segment_min_dist(pts2, seg_a, seg_b)),
        ("parity 2048x160", lambda k: k.polyline_parity(pts2, seg_a, seg_b)),
    ]


def main():
    rng = np.random.default_rng(0)
    rows = []
    for name, fn in workloads(rng):
        t_py = timeit(lambda: fn(_kernels_py))
        if _kernels_c is not None:
            t_c = timeit(lambda: fn(_kernels_c))
            out_c, out_py = fn(_kernels_c), fn(_kernels_py)
            match = np.array_equal(np.asarray(out_c), np.asarray(out_py))
            rows.append((name, t_py, t_c, t_py / t_c, match))
        else:
            rows.append((name, t_py, None, None, True))

    print(f"{'workload':22s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}  identical")
    for name, t_py, t_c, speedup, match in rows:
        c_str = f"{t_c * 1e3:9.2f}ms" if t_c is not None else "   (n/a)  "
        s_str = f"{speedup:7.1f}x" if speedup is not None else "       -"
        print(f"{name:22s} {t_py * 1e3:9.2f}ms {c_str} {s_str}  {match}")
    if _kernels_c is None:
        print("\ncompiled backend not built; showing the NumPy fallback only")


if __name__ == "__main__":
    main()
