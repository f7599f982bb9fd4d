"""Clock-cycle and resource model for 2D convolution architectures.

Covers the three DPRT / separable architectures (FastConv, FastScaleConv,
FastRankConv) and four reference designs (SerSys, ScaSys, SliWin, FFTr2)
for P x P blocks with N = 2P - 1 outputs per side (N = 2P for FFTr2).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, replace

from .core import InvalidConfigError, ceil_log2, is_prime

METHODS = ("FastConv", "FastScaleConv", "FastRankConv", "SerSys", "ScaSys", "SliWin", "FFTr2")
_BY_LOWER = {m.lower(): m for m in METHODS}

RESOURCE_AXES = ("flipflops", "adds", "multipliers", "memory")

# Float -> fixed-point conversion presets for FFTr2.
FFT_PRESETS = {
    # reproduces the N=127 comparison table
    "table-calibrated": {"adds_per_float_adder": 32, "mults_per_float_mult": 4.4},
    # 10x the cost of 32 one-bit additions per float adder
    "prose": {"adds_per_float_adder": 320, "mults_per_float_mult": 4.4},
}


def canonical_method(name: str) -> str:
    try:
        return _BY_LOWER[name.lower()]
    except KeyError:
        raise InvalidConfigError(f"unknown method {name!r}; expected one of {METHODS}") from None


def tree_resources(N: int, D: int, with_input_buffers: bool = True) -> tuple[int, int]:
    """Adder-tree cost for N operands of D bits: ``(A_FA, A_ffb)`` or ``(A_FA, A_ff)``.

    Each level halves the operand count (an odd leftover passes through a
    register) and widens by one bit. The input-buffer term adds one D-bit
    register per operand.
    """
    if N < 1 or D < 1:
        raise ValueError("tree_resources needs N >= 1 and D >= 1")
    fa = ff = 0
    a = N
    for z in range(1, ceil_log2(N) + 1):
        r = a % 2
        a //= 2
        fa += a * (D + z - 1)
        a += r
        ff += a * (D + z)
    if with_input_buffers:
        ff += N * D
    return fa, ff


def A_FA(N: int, D: int) -> int:
    return tree_resources(N, D, False)[0]


def A_ff(N: int, D: int) -> int:
    return tree_resources(N, D, False)[1]


def A_ffb(N: int, D: int) -> int:
    return tree_resources(N, D, True)[1]


@dataclass(frozen=True)
class ArchConfig:
    method: str
    N: int
    P: int
    J: int | None = None
    H: int | None = None
    r: int | None = None
    P_A: int | None = None
    P_B: int | None = None
    D: int | None = None
    data_bits: int = 12
    image_bits: int = 8
    fft_preset: str = "table-calibrated"

    @classmethod
    def make(cls, method: str, N: int | None = None, P: int | None = None, **kw) -> "ArchConfig":
        """Fill in the block size from N (or N from P) and method defaults."""
        method = canonical_method(method)
        if N is None and P is None:
            raise InvalidConfigError("need N or P")
        if method == "FFTr2":
            N = N if N is not None else 2 * P
            P = P if P is not None else N // 2
        else:
            N = N if N is not None else 2 * P - 1
            P = P if P is not None else (N + 1) // 2
        if method == "FastConv":
            kw.setdefault("J", N + 1)
            kw.setdefault("H", N)
        if method == "ScaSys" and kw.get("P_B") is None and kw.get("P_A"):
            kw["P_B"] = P // kw["P_A"]
        if method == "ScaSys" and kw.get("P_A") is None and kw.get("P_B"):
            kw["P_A"] = P // kw["P_B"]
        cfg = cls(method, N, P, **kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        m, N, P = self.method, self.N, self.P
        if m not in METHODS:
            raise InvalidConfigError(f"unknown method {m!r}")
        if N < 2 or P < 1:
            raise InvalidConfigError("N must be >= 2 and P >= 1")
        if self.data_bits < 1 or self.image_bits < 1:
            raise InvalidConfigError("bit widths must be positive")
        if m in ("FastConv", "FastScaleConv"):
            if not is_prime(N):
                raise InvalidConfigError(f"{m} requires prime N (got {N})")
        if m == "FastConv" and (self.J != N + 1 or self.H != N):
            raise InvalidConfigError("FastConv fixes J = N + 1 and H = N")
        if m == "FastScaleConv":
            if self.J is None or not 1 <= self.J <= N + 1:
                raise InvalidConfigError("FastScaleConv requires 1 <= J <= N + 1")
            if self.H is None or not 1 <= self.H <= N:
                raise InvalidConfigError("FastScaleConv requires 1 <= H <= N")
        if m == "FastRankConv":
            if self.J is None or self.J < 1:
                raise InvalidConfigError("FastRankConv requires J >= 1")
            if self.r is None or not 1 <= self.r <= P:
                raise InvalidConfigError("FastRankConv requires 1 <= r <= P")
        if m == "ScaSys":
            if not self.P_A or not self.P_B or self.P_A * self.P_B != P:
                raise InvalidConfigError(f"ScaSys requires P_A * P_B = P (P = {P})")
        if m == "FFTr2":
            if self.D not in (2, 4):
                raise InvalidConfigError("FFTr2 requires D in {2, 4}")
            if N & (N - 1):
                raise InvalidConfigError(f"FFTr2 requires N a power of two (got {N})")
            if self.fft_preset not in FFT_PRESETS:
                raise InvalidConfigError(f"unknown FFT preset {self.fft_preset!r}")

    def label(self) -> str:
        parts = [self.method, f"N={self.N}"]
        for k in ("J", "H", "r", "P_A", "P_B", "D"):
            v = getattr(self, k)
            if v is not None and not (self.method == "FastConv" and k in "JH"):
                parts.append(f"{k}={v}")
        return " ".join(parts)


@dataclass
class CostReport:
    config: ArchConfig
    cycles: int
    flipflops: int
    onebit_adds: int
    multipliers: float
    multiplier_desc: str
    memory_bits: int
    kernel_memory_bits: int
    notes: list[str] = field(default_factory=list)

    def resource(self, axis: str) -> float:
        return {
            "flipflops": self.flipflops,
            "adds": self.onebit_adds,
            "multipliers": self.multipliers,
            "memory": self.memory_bits,
        }[axis]

    def to_dict(self) -> dict:
        d = {
            "method": self.config.method,
            "N": self.config.N,
            "P": self.config.P,
            "J": self.config.J,
            "H": self.config.H,
            "r": self.config.r,
            "P_A": self.config.P_A,
            "P_B": self.config.P_B,
            "D": self.config.D,
            "data_bits": self.config.data_bits,
            "cycles": self.cycles,
            "flipflops": self.flipflops,
            "onebit_adds": self.onebit_adds,
            "multipliers": self.multipliers,
            "multiplier_desc": self.multiplier_desc,
            "memory_bits": self.memory_bits,
            "kernel_memory_bits": self.kernel_memory_bits,
            "notes": list(self.notes),
        }
        return d


def cycles(cfg: ArchConfig) -> int:
    cfg.validate()
    m, N, P = cfg.method, cfg.N, cfg.P
    n = ceil_log2(N)
    if m == "FastConv":
        return 6 * N + 5 * n + 17
    if m == "FastScaleConv":
        J, H = cfg.J, cfg.H
        dprt = -(-N // H) * (N + 3 * H + 3) + N + ceil_log2(H) + 1
        conv = -(-(N + 1) // J) * (J + N) + n + 1
        idprt = -(-N // H) * (N + H) + 2 * ceil_log2(N) + ceil_log2(H) + 12 + 3
        return dprt + conv + idprt
    if m == "FastRankConv":
        J = cfg.J
        return cfg.r * (J + N) * (-(-P // J) + -(-N // J)) + ceil_log2(P) + 1
    if m == "SerSys":
        return N * N + 2 * P - 2
    if m == "ScaSys":
        PA, PB = cfg.P_A, cfg.P_B
        return -(-N * N // PA) + 2 * PA + PB + ceil_log2(P * PA)
    if m == "SliWin":
        return N * P + N * N + 2 * ceil_log2(P) + 1
    if m == "FFTr2":
        return -(-(5 * N * N + 4 * N) // cfg.D)
    raise InvalidConfigError(m)  # pragma: no cover


def resources(cfg: ArchConfig) -> CostReport:
    cfg.validate()
    m, N, P = cfg.method, cfg.N, cfg.P
    n = ceil_log2(N)
    d, b = cfg.data_bits, cfg.image_bits
    fixed = f"{d}-bit fixed point"
    notes: list[str] = []
    if m == "FastConv":
        ff = ((N + 1) * (3 * d * N + A_ffb(N, d)) + N * (b * N + A_ff(N, b))
              + d * N * N + (N + 1) * A_ff(N, d) + N * (d + n))
        adds = 2 * (N + 1) * A_FA(N, d) + N * A_FA(N, b) + N * (d + n)
        mults = (N + 1) * N
        ker = d * N * (N + 1)
        mem = ker
    elif m == "FastScaleConv":
        J, H = cfg.J, cfg.H
        ff = (J * (3 * d * N + A_ffb(N, d)) + N * (b * H + A_ff(H, b))
              + d * N * (H + 3) + (N + 1) * A_ff(H, d))
        adds = (J * A_FA(N, d) + N * A_FA(H, b) + d * N
                + (N + 1) * A_FA(H, d) + 2 * N * (d + n))
        mults = J * N
        ker = d * N * (N + 1)
        mem = 2 * d * N * (N + 1) + ker
    elif m == "FastRankConv":
        J = cfg.J
        ff = J * (3 * d * P + A_ffb(P, d))
        adds = J * (A_FA(P, d) + d)
        mults = J * P
        ker = 2 * d * P * P
        mem = b * P * P + d * N * (N + P) + ker
    elif m == "SerSys":
        ff = 4 * P ** 3 + 34 * P * P - 10 * P - 12
        adds = d * P * (P + 1)
        mults = P * P
        ker = d * P * P
        mem = ker
    elif m == "ScaSys":
        PA = cfg.P_A
        ff = PA * (20 * P * P + A_ffb(PA * P, d)) + 8 * P * (PA * PA + PA - 1)
        adds = PA * (d * P * P + A_FA(PA * P, d))
        mults = PA * P * P
        ker = d * PA * P * P
        mem = ker
    elif m == "SliWin":
        ff = 20 * P * P + A_ffb(P * P, d)
        adds = A_FA(P * P, d)
        mults = P * P
        ker = 0
        mem = b * P * N + b * P * P + d * N * N
    elif m == "FFTr2":
        D = cfg.D
        preset = FFT_PRESETS[cfg.fft_preset]
        lg = ceil_log2(N)
        regs = 6 * N - 8 if D == 2 else 8 * N - 16
        fadders = 40 * D * (lg + 1)
        fmults = 2 * D * (lg + 1)
        ff = 32 * regs
        adds = fadders * preset["adds_per_float_adder"]
        mults = round(fmults * preset["mults_per_float_mult"], 6)
        ker = 32 * N * N
        mem = 64 * N * N + ker
        fixed = f"{d}-bit fixed point equivalents of {fmults} 32-bit float mults"
        notes.append(f"{regs} 32-bit registers, {fadders} float adders, {fmults} float mults "
                     f"(preset {cfg.fft_preset})")
    else:  # pragma: no cover
        raise InvalidConfigError(m)
    report = CostReport(cfg, cycles(cfg), ff, adds, mults, fixed, mem, ker, notes)
    report.notes.extend(_golden_notes(report))
    return report


# ------------------------------------------------------------- golden table

@dataclass(frozen=True)
class GoldenRow:
    group: str
    label: str
    params: dict
    cycles: int
    flipflops: int
    adds: int
    multipliers: float
    memory: int


# N = 127 comparison table (N = 128 for FFTr2), 64 x 64 blocks. The linear
# FastRankConv row is labelled J=128 in the source but only J=127 fits its
# numbers.
GOLDEN_N127 = (
    GoldenRow("linear", "FastConv", dict(method="FastConv", N=127),
              810, 1687442, 548101, 16256, 195072),
    GoldenRow("linear", "FastRankConv J=127 r=2", dict(method="FastRankConv", N=127, J=127, r=2),
              1023, 484632, 96012, 8128, 422156),
    GoldenRow("linear", "FastScaleConv J=128 H=127", dict(method="FastScaleConv", N=127, J=128, H=127),
              1195, 1689601, 552038, 16256, 585216),
    GoldenRow("linear", "ScaSys P_A=16", dict(method="ScaSys", N=127, P_A=16),
              1054, 1645888, 982848, 65536, 786432),
    GoldenRow("quadratic", "FastScaleConv J=H=4", dict(method="FastScaleConv", N=127, J=4, H=4),
              13093, 53888, 20309, 508, 585216),
    GoldenRow("quadratic", "FastRankConv J=4 r=2", dict(method="FastRankConv", N=127, J=4, r=2),
              12583, 15264, 3024, 256, 422156),
    GoldenRow("quadratic", "SerSys", dict(method="SerSys", N=127),
              16255, 1187188, 49908, 4096, 49152),
    GoldenRow("quadratic", "FFTr2 D=4", dict(method="FFTr2", N=128, D=4),
              20608, 33256, 40960, 282, 1572864),
    GoldenRow("quadratic", "SliWin", dict(method="SliWin", N=127),
              24270, 180212, 49140, 4096, 291340),
)

_COLUMNS = (("cycles", "cycles"), ("flipflops", "flipflops"), ("adds", "onebit_adds"),
            ("multipliers", "multipliers"), ("memory", "memory_bits"))


def golden_config(row: GoldenRow) -> ArchConfig:
    p = dict(row.params)
    return ArchConfig.make(p.pop("method"), **p)


def _matches(cfg: ArchConfig, row: GoldenRow) -> bool:
    try:
        ref = golden_config(row)
    except InvalidConfigError:  # pragma: no cover
        return False
    return replace(cfg, fft_preset=ref.fft_preset, data_bits=ref.data_bits) == ref and (
        cfg.data_bits == 12 and cfg.image_bits == 8 and cfg.fft_preset == "table-calibrated")


def _golden_notes(report: CostReport) -> list[str]:
    out = []
    for row in GOLDEN_N127:
        if _matches(report.config, row):
            for col, attr in _COLUMNS:
                table = getattr(row, col)
                formula = getattr(report, attr)
                out.append(f"{col}: table={table} formula={formula} |diff|={abs(formula - table):g}")
    return out


@dataclass
class Residual:
    label: str
    column: str
    table: float
    formula: float

    @property
    def abs_diff(self) -> float:
        return abs(self.formula - self.table)

    @property
    def rel_diff(self) -> float:
        return self.abs_diff / abs(self.table) if self.table else float(self.abs_diff != 0)


def golden_residuals() -> list[Residual]:
    """Formula-vs-table differences for every cell of the N = 127 table."""
    res = []
    for row in GOLDEN_N127:
        rep = resources(golden_config(row))
        for col, attr in _COLUMNS:
            res.append(Residual(row.label, col, getattr(row, col), getattr(rep, attr)))
    return res


# ------------------------------------------------------------------- pareto

def _divisors(v: int) -> list[int]:
    return [k for k in range(1, v + 1) if v % k == 0]


def candidate_configs(method: str, N: int, P: int | None = None, Q: int | None = None,
                      r: int = 2, **kw) -> tuple[list[ArchConfig], list[str]]:
    """Admissible configurations for a Pareto sweep, with notes on pruning."""
    method = canonical_method(method)
    notes: list[str] = []
    out: list[ArchConfig] = []
    if method == "FastScaleConv":
        if not is_prime(N):
            return [], [f"FastScaleConv needs prime N, {N} skipped"]
        # H follows J (the scalable DPRT starts at H = 2); J = N + 1 pairs with H = N.
        for J in _divisors(N + 1):
            H = N if J == N + 1 else min(max(J, 2), N)
            out.append(ArchConfig.make(method, N=N, J=J, H=H, **kw))
    elif method == "FastRankConv":
        P1 = P if P is not None else (N + 1) // 2
        Q2 = Q if Q is not None else P1
        cols = P1 + Q2 - 1
        Js = sorted(set(k for k in _divisors(P1) if cols % k == 0) | {cols})
        for J in Js:
            out.append(ArchConfig.make(method, N=cols, P=P1, J=J, r=r, **kw))
        if cols not in _divisors(P1):
            notes.append(f"J={cols} kept as the linear-time endpoint")
    elif method == "FastConv":
        if not is_prime(N):
            return [], [f"FastConv needs prime N, {N} skipped"]
        out.append(ArchConfig.make(method, N=N, **kw))
    elif method == "ScaSys":
        Pv = P if P is not None else (N + 1) // 2
        for PA in _divisors(Pv):
            if PA >= 2 and Pv // PA >= 4:
                out.append(ArchConfig.make(method, N=N, P=Pv, P_A=PA, **kw))
        if not out:
            notes.append(f"ScaSys needs P = P_A * P_B with P_A >= 2, P_B >= 4; P={Pv} skipped")
    elif method == "FFTr2":
        if N & (N - 1):
            return [], [f"FFTr2 needs N a power of two, {N} skipped"]
        out = [ArchConfig.make(method, N=N, D=D, **kw) for D in (2, 4)]
    else:
        out.append(ArchConfig.make(method, N=N, P=P, **kw))
    return out, notes


@dataclass
class ParetoPoint:
    config: ArchConfig
    cycles: int
    resource: float


def non_dominated(points: list[ParetoPoint]) -> list[ParetoPoint]:
    """Points no other point beats on both axes, slowest first.

    Along the result cycles strictly decrease and resource strictly increases.
    """
    best: list[ParetoPoint] = []
    for p in sorted(points, key=lambda p: (p.cycles, p.resource)):
        if not best or p.resource < best[-1].resource:
            best.append(p)
    return best[::-1]


def pareto_front(N: int, method: str, resource_axis: str = "multipliers", **kw) -> list[ParetoPoint]:
    if resource_axis not in RESOURCE_AXES:
        raise ValueError(f"resource axis must be one of {RESOURCE_AXES}")
    cfgs, _ = candidate_configs(method, N, **kw)
    pts = []
    for c in cfgs:
        rep = resources(c)
        pts.append(ParetoPoint(c, rep.cycles, rep.resource(resource_axis)))
    return non_dominated(pts)


# ------------------------------------------------------ runtime and FPS

def runtime_config(method: str, N: int, **overrides) -> ArchConfig:
    """Configurations of the normalised-runtime comparison.

    FastScaleConv uses J = H = 2, FastRankConv r = 2 with J = N, ScaSys
    P_B = 4 and FFTr2 D = 2 unless overridden.
    """
    method = canonical_method(method)
    kw = dict(overrides)
    if method == "FastScaleConv":
        kw.setdefault("J", 2)
        kw.setdefault("H", 2)
    elif method == "FastRankConv":
        kw.setdefault("J", N)
        kw.setdefault("r", 2)
    elif method == "ScaSys":
        kw.setdefault("P_B", 4)
    elif method == "FFTr2":
        kw.setdefault("D", 2)
    return ArchConfig.make(method, N=N, **kw)


@dataclass
class RuntimeRow:
    method: str
    N: int
    cycles: int
    normalized: float


def normalized_runtime_table(methods, Ns) -> tuple[list[RuntimeRow], list[str]]:
    """Cycles divided by N for each method and size; invalid sizes are skipped.

    ``methods`` holds names or ``(name, overrides)`` pairs.
    """
    rows, notes = [], []
    for entry in methods:
        name, over = (entry, {}) if isinstance(entry, str) else entry
        for N in Ns:
            try:
                cfg = runtime_config(name, N, **over)
            except InvalidConfigError as exc:
                notes.append(f"{name} N={N} skipped: {exc}")
                continue
            c = cycles(cfg)
            rows.append(RuntimeRow(cfg.method, N, c, c / N))
    return rows, notes


def fps_estimate(image_rows: int, image_cols: int, kernel_size: int,
                 cfg: ArchConfig, clock_hz: float) -> float:
    """Frames per second when a frame is tiled into P x P overlap-add blocks."""
    if clock_hz <= 0:
        raise InvalidConfigError("clock must be positive")
    if kernel_size > cfg.P:
        raise InvalidConfigError(f"kernel size {kernel_size} exceeds block size P={cfg.P}")
    blocks = math.ceil(image_rows / cfg.P) * math.ceil(image_cols / cfg.P)
    return clock_hz / (blocks * cycles(cfg))


# --------------------------------------------------------- serialisation

CSV_FIELDS = ("method", "N", "P", "J", "H", "r", "P_A", "P_B", "D", "data_bits", "cycles",
              "flipflops", "onebit_adds", "multipliers", "memory_bits", "kernel_memory_bits")


def reports_to_csv(reports: list[CostReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for rep in reports:
        w.writerow({k: ("" if v is None else v) for k, v in rep.to_dict().items()})
    return buf.getvalue()


def pareto_to_csv(points: list[ParetoPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["J", "H", "cycles", "resource"])
    for p in points:
        w.writerow(["" if p.config.J is None else p.config.J,
                    "" if p.config.H is None else p.config.H, p.cycles, p.resource])
    return buf.getvalue()


def config_dict(cfg: ArchConfig) -> dict:
    return asdict(cfg)
