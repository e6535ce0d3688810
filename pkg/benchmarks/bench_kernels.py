"""Time the numba and numpy breakpoint kernels on one configuration.

    python benchmarks/bench_kernels.py --N 200 --N 1000 --repeat 5
"""
import argparse
import time

import numpy as np

from densitylab import _kernels
from densitylab.constructions import CmsnParams, build_cmsn


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(N, repeat):
    C = build_cmsn(CmsnParams.optimal(N))
    sc = C.scaled
    e_i, G_i = sc.e64, sc.G64
    e_f, G_f = e_i / sc.denom, G_i / sc.denom
    m = e_f.shape[0]
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    # compile outside the timed region
    _kernels.float_extrema_numba(e_f, G_f)
    _kernels.int_rows_numba(e_i, G_i, 0, 1)

    a = _kernels.float_extrema_numba(e_f, G_f)
    b = _kernels.float_extrema_numpy(e_f, G_f)
    assert all(np.allclose(x, y, rtol=0, atol=1e-12) for x, y in zip(a, b))

    rows = []
    for name, nb, npy, args in (
        ("float_extrema", _kernels.float_extrema_numba, _kernels.float_extrema_numpy, (e_f, G_f)),
        ("int_rows", _kernels.int_rows_numba, _kernels.int_rows_numpy, (e_i, G_i, 0, m)),
    ):
        t_nb = best_of(lambda: nb(*args), repeat)
        t_np = best_of(lambda: npy(*args), repeat)
        rows.append((name, m, t_nb, t_np))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, action="append", help="cmsn size (repeatable)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<14}{'endpoints':>10}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>9}")
    for N in args.N or [100, 500, 1000]:
        for name, m, t_nb, t_np in bench(N, args.repeat):
            print(f"{name:<14}{m:>10}{t_nb:>12.5f}{t_np:>12.5f}{t_np / t_nb:>9.1f}")


if __name__ == "__main__":
    main()
