"""Time the numba and pure-numpy kernels side by side.

    python benchmarks/bench_kernels.py [--sizes 31 61 127] [--repeat 5]

Each kernel is warmed up once (this triggers numba compilation) and then
timed as the best of ``--repeat`` runs. Outputs of both paths are compared
before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from dprtconv import _kernels as K
from dprtconv.convolution import linconv2d


def _cases(N, rng):
    f = rng.integers(0, 256, (N, N))
    F = K.dprt_forward_np(f)
    G = rng.integers(0, 1 << 16, (N + 1, N))
    H = rng.integers(0, 1 << 16, (N + 1, N))
    P = (N + 1) // 2
    g = rng.integers(0, 256, (P, P))
    h = rng.integers(-128, 128, (P, P))
    X = rng.normal(size=(P, P))
    row = rng.normal(size=P)
    return {
        "dprt_forward": ((f,), K.dprt_forward_np, K.dprt_forward_nb),
        "idprt_numerators": ((F,), K.idprt_numerators_np, K.idprt_numerators_nb),
        "circconv_rows": ((G, H), K.circconv_rows_np, K.circconv_rows_nb),
        "linconv2d_direct": ((g, h), K.linconv2d_direct_np, K.linconv2d_direct_nb),
        "linconv_rows": ((X, row), K.linconv_rows_np, K.linconv_rows_nb),
    }


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[31, 61, 127])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if K.nb is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18} {'N':>5} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for N in args.sizes:
        for name, (inp, f_np, f_nb) in _cases(N, rng).items():
            a, b = f_np(*inp), f_nb(*inp)
            ok = np.allclose(a, b) if a.dtype.kind == "f" else np.array_equal(a, b)
            if not ok:
                raise SystemExit(f"{name} N={N}: numba and numpy outputs differ")
            t_np = best(f_np, inp, args.repeat)
            t_nb = best(f_nb, inp, args.repeat)
            print(f"{name:<18} {N:>5} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")
    # end-to-end pipeline through the dispatcher (whichever path is active)
    for N in args.sizes:
        P = (N + 1) // 2
        g = rng.integers(0, 256, (P, P))
        h = rng.integers(-128, 128, (P, P))
        linconv2d(g, h)
        t = best(linconv2d, (g, h), args.repeat)
        print(f"linconv2d[{K.backend_name()}] P={P} (N={N}): {t * 1e3:.3f} ms")


if __name__ == "__main__":
    main()
