"""Self-check suites behind ``dprtconv validate``.

Each suite returns a SuiteResult; the report is deterministic for a given
seed (no timings, no addresses).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import costmodel as cm
from .convolution import dprt_pipeline, linconv2d, linconv2d_direct
from .core import ceil_log2, is_prime
from .dprt import DprtArray, dprt_forward, dprt_inverse, inverse_numerators


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    failures: list[str] = field(default_factory=list)
    info: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.checks} checks"
        if self.failures:
            head += f", {len(self.failures)} failed"
        return [head] + [f"    ! {f}" for f in self.failures[:10]] + [f"    {i}" for i in self.info]


def _primes_upto(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if is_prime(p)]


def roundtrip_suite(rng, max_size: int, per_size: int = 3) -> SuiteResult:
    res = SuiteResult("roundtrip", True, 0)
    for N in _primes_upto(max_size):
        for _ in range(per_size):
            f = rng.integers(0, 256, (N, N))
            res.checks += 1
            if not np.array_equal(dprt_inverse(dprt_forward(f)), f):
                res.failures.append(f"N={N}")
    res.passed = not res.failures
    return res


def oracle_suite(rng, max_size: int, cases: int = 40) -> SuiteResult:
    res = SuiteResult("oracle-equivalence", True, 0)
    lim = max(1, min(max_size, 16))
    for _ in range(cases):
        P1, P2, Q1, Q2 = (int(v) for v in rng.integers(1, lim + 1, 4))
        g = rng.integers(0, 256, (P1, P2))
        h = rng.integers(-128, 128, (Q1, Q2))
        for mode in ("conv", "xcorr"):
            res.checks += 1
            if not np.array_equal(linconv2d(g, h, mode), linconv2d_direct(g, h, mode)):
                res.failures.append(f"{mode} g={P1}x{P2} h={Q1}x{Q2}")
    res.passed = not res.failures
    return res


def divisibility_suite(rng, max_size: int, inject: bool = False) -> SuiteResult:
    """Every inverse numerator of a genuine transform is a multiple of N.

    ``inject`` adds 1 to one entry of each transform; the suite must then fail.
    """
    res = SuiteResult("divisibility", True, 0)
    for N in _primes_upto(max_size):
        f = rng.integers(0, 256, (N, N))
        F = dprt_forward(f).data.copy()
        if inject:
            F[int(rng.integers(0, N + 1)), int(rng.integers(0, N))] += 1
        num = inverse_numerators(DprtArray(N, F, 0))
        res.checks += 1
        bad = int(np.count_nonzero(num % N))
        if bad:
            res.failures.append(f"N={N}: {bad} numerators not divisible")
    res.passed = not res.failures
    return res


def bitbound_suite(sizes=(7, 17, 37), B: int = 8, C: int = 8) -> SuiteResult:
    """Worst-case nonnegative inputs stay inside the per-stage widths."""
    res = SuiteResult("bit-bounds", True, 0)
    for N in sizes:
        n = ceil_log2(N)
        g = np.full((N, N), (1 << B) - 1, dtype=np.int64)
        h = np.full((N, N), (1 << C) - 1, dtype=np.int64)
        tr = dprt_pipeline(g, h, N)
        checks = {
            "dprt(g)": (int(tr.G.max()), B + n),
            "conv": (int(tr.conv.max()), B + C + 3 * n),
            "prenorm": (int(tr.numerators.max()), B + C + 4 * n),
        }
        for stage, (mx, width) in checks.items():
            res.checks += 1
            if mx >= 1 << width:
                res.failures.append(f"N={N} {stage}: {mx} >= 2^{width}")
            res.info.append(f"N={N} {stage}: max bits {mx.bit_length()} <= {width}")
    res.passed = not res.failures
    return res


# (row label, column, tolerance) for values that must match closely but not exactly.
NEAR_GOLDEN = (
    ("FastConv", "cycles", 5),
    ("FastScaleConv J=128 H=127", "cycles", 5),
    ("FastScaleConv J=H=4", "cycles", 5),
    ("ScaSys P_A=16", "cycles", 2),
    ("FFTr2 D=4", "multipliers", 1),
)

EXACT_GOLDEN = (
    ("SerSys", "cycles"), ("SliWin", "cycles"), ("FastRankConv J=4 r=2", "cycles"),
    ("FastRankConv J=127 r=2", "cycles"),
    ("FastConv", "multipliers"), ("FastRankConv J=127 r=2", "multipliers"),
    ("ScaSys P_A=16", "multipliers"), ("SerSys", "multipliers"), ("SliWin", "multipliers"),
    ("FastConv", "memory"), ("FastRankConv J=127 r=2", "memory"), ("ScaSys P_A=16", "memory"),
    ("SliWin", "memory"), ("FFTr2 D=4", "memory"), ("SerSys", "memory"),
)

RESIDUAL_BAND = 0.10


def golden_suite() -> SuiteResult:
    res = SuiteResult("golden-table", True, 0)
    table = {(r.label, r.column): r for r in cm.golden_residuals()}
    for key in EXACT_GOLDEN:
        r = table[key]
        res.checks += 1
        if r.abs_diff != 0:
            res.failures.append(f"{key[0]} {key[1]}: {r.formula} != {r.table}")
    for label, col, tol in NEAR_GOLDEN:
        r = table[(label, col)]
        res.checks += 1
        if r.abs_diff > tol:
            res.failures.append(f"{label} {col}: |{r.formula} - {r.table}| > {tol}")
    for (label, col), r in table.items():
        if col in ("flipflops", "adds"):
            flag = "" if r.rel_diff <= RESIDUAL_BAND else "  (outside +/-10%)"
            res.info.append(f"residual {label} {col}: table={r.table} formula={r.formula} "
                            f"rel={r.rel_diff:.4f}{flag}")
    res.passed = not res.failures
    return res


def run_all(seed: int = 0, max_size: int = 31, inject_corruption: bool = False) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    return [
        roundtrip_suite(rng, max_size),
        oracle_suite(rng, max_size),
        divisibility_suite(rng, max_size, inject=inject_corruption),
        bitbound_suite(),
        golden_suite(),
    ]


def render(results: list[SuiteResult], seed: int, max_size: int) -> str:
    lines = [f"dprtconv validate seed={seed} max_size={max_size}"]
    for r in results:
        lines.extend(r.lines())
    ok = all(r.passed for r in results)
    lines.append("ALL SUITES PASSED" if ok else "VALIDATION FAILED")
    return "\n".join(lines) + "\n"
