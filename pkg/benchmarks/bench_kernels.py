"""Time the numba and numpy kernel paths on the flag-volume workload.

    python benchmarks/bench_kernels.py [--dims 3 4 5] [--repeat 200]

The first numba call compiles (or loads the on-disk cache); it is excluded
from the timings.
"""

import argparse
import time

import numpy as np

from mahlercube import _kernels
from mahlercube.flags import _flag_tables, enumerate_faces


def _time(fn, repeat):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dims", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba not importable; only the numpy path can run")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>3}{'flags':>8}{'numpy us':>12}{'numba us':>12}{'speedup':>9}")
    for n in args.dims:
        _, _, flags, table, signs, _ = _flag_tables(n)
        m = len(enumerate_faces(n))
        pts, d = rng.normal(size=(m, n)), rng.normal(size=(m, n))
        normals, cloud = rng.normal(size=(4 * m, n)), rng.normal(size=(2 * m, n))
        cases = [
            ("flag_volume", lambda: _kernels.flag_volume_sum_numpy(pts, table, signs),
             lambda: _kernels.flag_volume_sum_numba(pts, table, signs)),
            ("first_order", lambda: _kernels.first_order_numpy(pts, d, table, signs),
             lambda: _kernels.first_order_numba(pts, d, table, signs)),
            ("max_violation", lambda: _kernels.max_violation_numpy(normals, cloud, 1.0),
             lambda: _kernels.max_violation_numba(normals, cloud, 1.0)),
        ]
        for name, slow, fast in cases:
            t_np = _time(slow, args.repeat) * 1e6
            if _kernels.HAVE_NUMBA:
                t_nb = _time(fast, args.repeat) * 1e6
                print(f"{name:<16}{n:>3}{len(flags):>8}{t_np:>12.1f}{t_nb:>12.1f}{t_np / t_nb:>8.1f}x")
            else:
                print(f"{name:<16}{n:>3}{len(flags):>8}{t_np:>12.1f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
