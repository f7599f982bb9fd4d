"""Command-line entry point.

Machine-readable payloads go to --out (or stdout); human summaries go to
stderr. Exit codes: 0 ok, 2 usage error, 3 data error, 4 validation failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import costmodel as cm
from . import io as dio
from . import validate as dval
from ._kernels import backend_name
from .convolution import linconv2d, linconv2d_direct, overlap_add, transform_size
from .core import (
    MAX_PRIME,
    DprtConvError,
    InvalidConfigError,
    RankOutOfRangeError,
    bit_budget,
    is_prime,
    magnitude_bits,
    next_prime,
)
from .dprt import DprtArray, dprt_forward, dprt_inverse, zero_pad

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VALIDATION = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _summary(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True), file=sys.stderr)


# ------------------------------------------------------------ convolve

def cmd_convolve(args) -> int:
    g = dio.read_image(args.image)
    h = dio.read_kernel(args.kernel)
    if g.min() < 0:
        raise dio.FormatError("image pixels must be non-negative")
    backend = args.backend
    if backend == "rank":
        if args.rank is None:
            raise UsageError("--backend rank needs --rank")
        if not 1 <= args.rank <= min(h.shape):
            raise RankOutOfRangeError(f"rank {args.rank} outside [1, {min(h.shape)}]")
    elif h.dtype.kind == "f":
        raise dio.FormatError(f"backend {backend} needs an integer kernel")
    (R, Cc), (Q1, Q2) = g.shape, h.shape
    summary: dict = {"mode": args.mode, "backend": backend, "numba": backend_name(),
                     "output_shape": [R + Q1 - 1, Cc + Q2 - 1]}
    block = args.block
    if block is None and transform_size(R, Cc, Q1, Q2) > MAX_PRIME:
        block = max(Q1, Q2)
    if block is not None:
        N = transform_size(min(block, R), min(block, Cc), Q1, Q2)
        summary["block"] = block
    else:
        N = transform_size(R, Cc, Q1, Q2)
    summary["N"] = N
    if h.dtype.kind != "f":
        summary["bit_budget"] = bit_budget(magnitude_bits(g), magnitude_bits(h) + 1, N).as_dict()
    if block is not None:
        result = overlap_add(g, h, args.mode, backend, block, args.rank)
    elif backend == "dprt":
        result = linconv2d(g, h, args.mode)
    elif backend == "direct":
        result = linconv2d_direct(g, h, args.mode)
    else:
        from .lowrank import rankconv2d

        hh = h.astype(np.float64)
        if args.mode == "xcorr":
            hh = hh[::-1, ::-1]
        rc = rankconv2d(g, hh, args.rank, method=args.lu_method)
        result = rc.output
    if backend == "rank":
        from .lowrank import decompose

        dec = decompose(h.astype(np.float64), args.rank, args.lu_method)
        summary["approximation"] = {
            "rank": dec.r,
            "frob_error": dec.frob_error,
            "dropped_sigma": [float(s) for s in dec.dropped_sigma],
            "max_abs_error_bound": dec.frob_error * float(np.linalg.norm(g)),
        }
    if args.mode == "xcorr":
        summary["lag_origin"] = [Q1 - 1, Q2 - 1]
    _emit(dio.FORMATTERS[args.format](result), args.out)
    _summary(summary)
    return EXIT_OK


# --------------------------------------------------------- dprt / idprt

def cmd_dprt(args) -> int:
    f = dio.read_image(args.image)
    rows, cols = f.shape
    if args.pad_to_prime:
        N = next_prime(max(rows, cols, 2))
        f = zero_pad(f, N)
    else:
        if rows != cols or not is_prime(rows):
            raise dio.FormatError(
                f"image is {rows}x{cols}; DPRT needs a prime square size (use --pad-to-prime)")
        N = rows
    F = dprt_forward(f, N)
    _emit(dio.format_csv(F.data), args.out)
    _summary({"N": N, "S": int(F.data[0].sum()), "rows": N + 1, "cols": N})
    return EXIT_OK


def cmd_idprt(args) -> int:
    F = dio.read_csv_matrix(args.input)
    if F.dtype.kind == "f":
        raise dio.FormatError("transform CSV must hold integers")
    N = F.shape[1]
    if F.shape[0] != N + 1 or not is_prime(N):
        raise dio.FormatError(f"expected an (N+1) x N transform with N prime, got {F.shape}")
    f = dprt_inverse(DprtArray(N, F, magnitude_bits(F)))
    _emit(dio.FORMATTERS[args.format](f), args.out)
    _summary({"N": N, "divisible": True})
    return EXIT_OK


# ------------------------------------------------------- cost / pareto

def _config_from_args(args) -> cm.ArchConfig:
    kw = {}
    for name in ("J", "H", "r", "P_A", "P_B", "D"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    return cm.ArchConfig.make(args.method, N=args.N, P=args.P, data_bits=args.data_bits,
                              image_bits=args.image_bits, fft_preset=args.fft_preset, **kw)


def cmd_cost(args) -> int:
    rep = cm.resources(_config_from_args(args))
    if args.format == "csv":
        text = cm.reports_to_csv([rep])
    else:
        text = json.dumps(rep.to_dict(), indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_pareto(args) -> int:
    kw = {}
    if args.r is not None:
        kw["r"] = args.r
    if args.P is not None:
        kw["P"] = args.P
    if args.Q is not None:
        kw["Q"] = args.Q
    if args.method.lower() not in ("fastrankconv",):
        kw.pop("r", None)
        kw.pop("Q", None)
    pts = cm.pareto_front(args.N, args.method, args.axis, data_bits=args.data_bits, **kw)
    if args.format == "json":
        text = json.dumps([{"J": p.config.J, "H": p.config.H, "cycles": p.cycles,
                            "resource": p.resource} for p in pts], indent=2) + "\n"
    else:
        text = cm.pareto_to_csv(pts)
    _emit(text, args.out)
    _summary({"method": cm.canonical_method(args.method), "N": args.N, "axis": args.axis,
              "points": len(pts)})
    return EXIT_OK


def cmd_runtime(args) -> int:
    Ns = [n for n in range(args.n_min, args.n_max + 1) if is_prime(n)]
    rows, notes = cm.normalized_runtime_table(args.methods, Ns)
    lines = ["method,N,cycles,normalized"]
    lines += [f"{r.method},{r.N},{r.cycles},{r.normalized:.6f}" for r in rows]
    _emit("\n".join(lines) + "\n", args.out)
    _summary({"rows": len(rows), "skipped": len(notes)})
    return EXIT_OK


def cmd_fps(args) -> int:
    cfg = _config_from_args(args)
    fps = cm.fps_estimate(args.rows, args.cols, args.kernel_size, cfg, args.clock)
    _emit(json.dumps({"config": cfg.label(), "cycles_per_block": cm.cycles(cfg),
                      "fps": fps, "frame_time_ms": 1e3 / fps}, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = dval.run_all(args.seed, args.max_size, args.inject_corruption)
    text = dval.render(results, args.seed, args.max_size)
    _emit(text, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


# -------------------------------------------------------------- parser

def _add_arch_args(p: argparse.ArgumentParser, with_method: bool = True) -> None:
    if with_method:
        p.add_argument("--method", required=True, help="fastconv, fastscaleconv, fastrankconv, "
                       "sersys, scasys, sliwin or fftr2")
    p.add_argument("--N", type=int, help="output block size")
    p.add_argument("--P", type=int, help="input block size (default (N+1)/2)")
    p.add_argument("--J", type=int, help="parallel 1D convolvers")
    p.add_argument("--H", type=int, help="rows processed in parallel by the DPRT stages")
    p.add_argument("--r", "--rank", dest="r", type=int, help="rank (FastRankConv)")
    p.add_argument("--PA", dest="P_A", type=int, help="ScaSys P_A")
    p.add_argument("--PB", dest="P_B", type=int, help="ScaSys P_B")
    p.add_argument("--D", type=int, help="parallel FFT cores (FFTr2)")
    p.add_argument("--data-bits", type=int, default=12)
    p.add_argument("--image-bits", type=int, default=8)
    p.add_argument("--fft-preset", default="table-calibrated", choices=sorted(cm.FFT_PRESETS))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dprtconv", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convolve", help="convolve or cross-correlate an image with a kernel")
    p.add_argument("--image", required=True, help="PGM (P2/P5) or CSV of integers")
    p.add_argument("--kernel", required=True, help="CSV (integers, or reals for --backend rank)")
    p.add_argument("--mode", choices=("conv", "xcorr"), default="conv",
                   help="xcorr output (k,l) is lag (k-(Q1-1), l-(Q2-1))")
    p.add_argument("--backend", choices=("dprt", "direct", "rank"), default="dprt")
    p.add_argument("--rank", type=int)
    p.add_argument("--lu-method", choices=("lu", "svd"), default="lu")
    p.add_argument("--block", type=int, help="overlap-add block size")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv", "pgm", "json"), default="csv")
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("dprt", help="forward DPRT of a square image, as CSV")
    p.add_argument("--image", required=True)
    p.add_argument("--pad-to-prime", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_dprt)

    p = sub.add_parser("idprt", help="inverse DPRT of an (N+1) x N CSV transform")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv", "pgm", "json"), default="csv")
    p.set_defaults(func=cmd_idprt)

    p = sub.add_parser("cost", help="cycles and resources of one architecture")
    _add_arch_args(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("pareto", help="non-dominated configurations of one method")
    p.add_argument("--method", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--axis", choices=cm.RESOURCE_AXES, default="multipliers")
    p.add_argument("--r", "--rank", dest="r", type=int)
    p.add_argument("--P", type=int)
    p.add_argument("--Q", type=int)
    p.add_argument("--data-bits", type=int, default=12)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("runtime", help="normalised cycles/N table over prime N")
    p.add_argument("--methods", nargs="+", default=["FastConv", "FastRankConv", "SerSys", "SliWin"])
    p.add_argument("--n-min", type=int, default=7)
    p.add_argument("--n-max", type=int, default=257)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_runtime)

    p = sub.add_parser("fps", help="frames per second for overlap-add processing")
    _add_arch_args(p)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--kernel-size", type=int, required=True)
    p.add_argument("--clock", type=float, required=True, help="clock in Hz")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fps)

    p = sub.add_parser("validate", help="run the built-in oracle and golden-value suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=31)
    p.add_argument("--inject-corruption", action="store_true",
                   help="perturb one DPRT entry per size (the divisibility suite must fail)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidConfigError, RankOutOfRangeError) as exc:
        print(f"dprtconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DprtConvError, dio.FormatError, OSError, TypeError, ValueError) as exc:
        print(f"dprtconv: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
