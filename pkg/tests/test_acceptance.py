"""Acceptance criteria 1-10, at their stated tolerances.

Each ``check_*`` returns ``(passed, detail)``. Under pytest every criterion is
one test, and a summary line per criterion is printed at the end of the run.
Run this file directly to get the same lines without pytest.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from dprtconv import costmodel as cm
from dprtconv.convolution import dprt_pipeline, linconv2d, linconv2d_direct, overlap_add
from dprtconv.core import ceil_log2, is_prime
from dprtconv.dprt import dprt_forward, dprt_inverse, inverse_numerators
from dprtconv.lowrank import rankconv2d

RESULTS: dict[int, tuple[bool, str]] = {}

PRIMES_101 = [p for p in range(2, 102) if is_prime(p)]
PRIMES_1021 = [p for p in range(7, 1022) if is_prime(p)]


def _golden(label):
    return next(r for r in cm.GOLDEN_N127 if r.label == label)


def _rel(a, b):
    return abs(a - b) / abs(b)


def check_1(cases=500, seed=1):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(cases):
        P1, P2, Q1, Q2 = (int(v) for v in rng.integers(1, 17, 4))
        B, C = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        g = rng.integers(0, 1 << B, (P1, P2))
        h = rng.integers(-(1 << (C - 1)), 1 << (C - 1), (Q1, Q2)) if C > 1 else rng.integers(0, 2, (Q1, Q2))
        for mode in ("conv", "xcorr"):
            if not np.array_equal(linconv2d(g, h, mode), linconv2d_direct(g, h, mode)):
                bad += 1
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 10, f"{cases} cases x 2 modes, mismatches={bad}, {dt:.2f}s (< 10 s)"


def check_2(images=10, seed=2):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    bad = 0
    for N in PRIMES_101:
        for _ in range(images):
            f = rng.integers(0, 256, (N, N))
            F = dprt_forward(f)
            if np.any(inverse_numerators(F) % N) or not np.array_equal(dprt_inverse(F), f):
                bad += 1
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 10, f"{len(PRIMES_101)} primes x {images} images, failures={bad}, {dt:.2f}s (< 10 s)"


def check_3(B=8, C=8):
    parts, ok = [], True
    for N in (7, 17, 37):
        n = ceil_log2(N)
        g = np.full((N, N), (1 << B) - 1, dtype=np.int64)
        h = np.full((N, N), (1 << C) - 1, dtype=np.int64)
        tr = dprt_pipeline(g, h, N)
        for name, arr, width in (("G", tr.G, B + n), ("H", tr.H, C + n),
                                 ("conv", tr.conv, B + C + 3 * n), ("prenorm", tr.numerators, B + C + 4 * n)):
            mx = int(np.abs(arr).max())
            ok &= mx < (1 << width)
        parts.append(f"N={N} prenorm {int(tr.numerators.max()).bit_length()}b <= {B + C + 4 * n}b")
    return ok, "; ".join(parts)


def check_4(seed=4):
    rng = np.random.default_rng(seed)
    g = rng.integers(0, 256, (64, 64))
    h = rng.integers(-128, 128, (9, 9))
    ref = linconv2d_direct(g, h)
    outs = [overlap_add(g, h, block=b) for b in (9, 16, 32)]
    same = all(np.array_equal(o, outs[0]) for o in outs)
    exact = np.array_equal(outs[0], ref)
    return same and exact, f"blockP 9/16/32 identical={same}, equal to direct={exact}"


def check_5(cases=100, seed=5):
    rng = np.random.default_rng(seed)
    worst_full = worst_ratio = worst_frob = 0.0
    for _ in range(cases):
        g = rng.integers(0, 256, (16, 16))
        h = rng.integers(-128, 128, (8, 8))
        exact = linconv2d(g, h).astype(np.float64)
        full = rankconv2d(g, h, 8).output
        worst_full = max(worst_full, np.abs(full - exact).max() / np.abs(exact).max())
        r = int(rng.integers(1, 8))
        res = rankconv2d(g, h, r)
        err = np.abs(res.output - exact).max()
        worst_ratio = max(worst_ratio, err / res.error_bound)
        s = np.linalg.svd(h.astype(float), compute_uv=False)
        ref = math.sqrt(float(np.sum(s[r:] ** 2)))
        worst_frob = max(worst_frob, abs(res.frob_error - ref) / ref)
    ok = worst_full <= 1e-9 and worst_ratio <= 1.0 and worst_frob <= 1e-12
    return ok, (f"full-rank rel err {worst_full:.2e} (<= 1e-9), max err/bound {worst_ratio:.3f} (<= 1), "
                f"frob rel err {worst_frob:.2e} (<= 1e-12)")


EXACT_6 = (
    ("SerSys", "cycles", 16255), ("SliWin", "cycles", 24270),
    ("FastRankConv J=4 r=2", "cycles", 12583), ("FastRankConv J=127 r=2", "cycles", 1023),
    ("FastConv", "multipliers", 16256), ("FastRankConv J=127 r=2", "multipliers", 8128),
    ("ScaSys P_A=16", "multipliers", 65536), ("SerSys", "multipliers", 4096),
    ("SliWin", "multipliers", 4096),
    ("FastConv", "kernel_memory", 195072), ("FastRankConv J=127 r=2", "memory", 422156),
    ("ScaSys P_A=16", "memory", 786432), ("SliWin", "memory", 291340),
    ("FFTr2 D=4", "memory", 1572864), ("SerSys", "kernel_memory", 49152),
)
_ATTR = {"cycles": "cycles", "multipliers": "multipliers", "memory": "memory_bits",
         "kernel_memory": "kernel_memory_bits", "flipflops": "flipflops", "adds": "onebit_adds"}


def _value(label, column):
    rep = cm.resources(cm.golden_config(_golden(label)))
    return getattr(rep, _ATTR[column])


def check_6():
    misses = [f"{l} {c}: {_value(l, c)} != {v}" for l, c, v in EXACT_6 if _value(l, c) != v]
    return not misses, f"{len(EXACT_6) - len(misses)}/{len(EXACT_6)} exact" + (
        "; " + "; ".join(misses) if misses else "")


NEAR_7 = (
    ("FastConv", "cycles", 810, 5), ("FastScaleConv J=128 H=127", "cycles", 1195, 5),
    ("FastScaleConv J=H=4", "cycles", 13093, 5), ("ScaSys P_A=16", "cycles", 1054, 2),
    ("FFTr2 D=4", "multipliers", 282, 1),
)


def check_7():
    fails = []
    for label, col, target, tol in NEAR_7:
        v = _value(label, col)
        if abs(v - target) > tol:
            fails.append(f"{label} {col} {v} vs {target}")
    worst = (0.0, "")
    for res in cm.golden_residuals():
        if res.column in ("flipflops", "adds"):
            rel = res.rel_diff
            if rel > worst[0]:
                worst = (rel, f"{res.label} {res.column}")
            if rel > 0.10:
                fails.append(f"{res.label} {res.column} {res.formula} vs {res.table} ({rel:.1%})")
    detail = f"worst ff/adds residual {worst[0]:.1%} ({worst[1]})"
    return not fails, detail + ("; out of tolerance: " + "; ".join(fails) if fails else "")


def check_8():
    rows, _ = cm.normalized_runtime_table(["FastConv", "FastRankConv", "SerSys", "SliWin"], PRIMES_1021)
    fails = []
    for r in rows:
        if r.method in ("FastConv", "FastRankConv") and not r.normalized < 10:
            fails.append(f"{r.method} N={r.N} {r.normalized:.2f}")
        if r.method in ("SerSys", "SliWin") and r.N >= 13 and not r.normalized > 10:
            fails.append(f"{r.method} N={r.N} {r.normalized:.2f}")
    return not fails, f"{len(rows)} rows" + ("; violations: " + ", ".join(fails) if fails else "")


def _within_7(rep, row):
    return (abs(rep.cycles - row.cycles) <= 5 and _rel(rep.flipflops, row.flipflops) <= 0.10
            and _rel(rep.onebit_adds, row.adds) <= 0.10 and rep.multipliers == row.multipliers
            and rep.memory_bits == row.memory)


def check_9(N=127):
    notes, ok = [], True
    for method in ("FastScaleConv", "FastRankConv"):
        mono = True
        for axis in cm.RESOURCE_AXES:
            pts = cm.pareto_front(N, method, axis)
            mono &= len(pts) >= 1 and all(
                a.cycles > b.cycles and a.resource < b.resource for a, b in zip(pts, pts[1:]))
        ok &= mono
        notes.append(f"{method} monotone on all axes={mono}")
    pts = cm.pareto_front(N, "FastScaleConv", "multipliers")
    fast = pts[-1]
    lin_ok = (fast.config.J, fast.config.H) == (128, 127) and _within_7(
        cm.resources(fast.config), _golden("FastScaleConv J=128 H=127"))
    quad = [p for p in pts if (p.config.J, p.config.H) == (4, 4)]
    slow = pts[0]
    quad_ok = (bool(quad) and slow.config.J <= 4 and slow.cycles >= quad[0].cycles
               and _within_7(cm.resources(quad[0].config), _golden("FastScaleConv J=H=4")))
    ok &= lin_ok and quad_ok
    notes.append(f"linear end J=128,H=127 {fast.cycles} cyc match={lin_ok}")
    notes.append(f"quadratic end J={slow.config.J} (class of J=H=4, {quad[0].cycles if quad else '-'} cyc) match={quad_ok}")
    return ok, "; ".join(notes)


def check_10():
    cfg = cm.ArchConfig.make("FastScaleConv", P=19, J=2, H=2)
    fps = cm.fps_estimate(480, 640, 19, cfg, 110e6)
    ms = 1e3 / fps
    return abs(ms - 19) <= 0.15 * 19 and fps >= 30, f"{fps:.1f} FPS, frame {ms:.2f} ms (19 ms +/- 15%, >= 30 FPS)"


CHECKS = {i: globals()[f"check_{i}"] for i in range(1, 11)}
TITLES = {
    1: "exactness at desk scale", 2: "DPRT roundtrip", 3: "bit-width bounds",
    4: "overlap-add block independence", 5: "low-rank correctness", 6: "golden cost values",
    7: "near-golden cost values", 8: "normalized runtime", 9: "Pareto fronts", 10: "FPS scenario",
}


def summary_lines():
    return [f"criterion {i:2d} {'PASS' if ok else 'FAIL'}  {TITLES[i]}: {detail}"
            for i, (ok, detail) in sorted(RESULTS.items())]


@pytest.mark.parametrize("criterion", sorted(CHECKS))
def test_criterion(criterion):
    ok, detail = CHECKS[criterion]()
    RESULTS[criterion] = (ok, detail)
    print(f"criterion {criterion} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    for i, fn in CHECKS.items():
        RESULTS[i] = fn()
    print("\n".join(summary_lines()))
