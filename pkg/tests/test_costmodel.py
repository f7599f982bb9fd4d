import math

import pytest

from dprtconv import costmodel as cm
from dprtconv.core import InvalidConfigError, is_prime


def _golden(label):
    return next(r for r in cm.GOLDEN_N127 if r.label == label)


def _report(label):
    return cm.resources(cm.golden_config(_golden(label)))


@pytest.mark.parametrize("args,expected", [((2, 8, True), (8, 25)), ((1, 8, False), (0, 0))])
def test_tree_small(args, expected):
    assert cm.tree_resources(*args) == expected


def test_tree_64_12():
    assert cm.A_FA(64, 12) == 813


def test_tree_brute_force():
    # independent simulation: pair operands level by level
    def sim(N, D):
        widths = [D] * N
        fa = ff = 0
        while len(widths) > 1:
            nxt = []
            for k in range(0, len(widths) - 1, 2):
                fa += max(widths[k], widths[k + 1])
                nxt.append(max(widths[k], widths[k + 1]) + 1)
            if len(widths) % 2:
                nxt.append(widths[-1] + 1)
            ff += sum(nxt)
            widths = nxt
        return fa, ff
    for N in (2, 3, 5, 8, 13, 64, 127):
        assert cm.tree_resources(N, 9, False) == sim(N, 9)


@pytest.mark.parametrize("label,cycles", [
    ("SerSys", 16255), ("SliWin", 24270), ("FastRankConv J=4 r=2", 12583),
    ("FastRankConv J=127 r=2", 1023)])
def test_exact_cycles(label, cycles):
    assert _report(label).cycles == cycles


@pytest.mark.parametrize("label,col,attr", [
    ("FastConv", "multipliers", "multipliers"), ("ScaSys P_A=16", "multipliers", "multipliers"),
    ("FastConv", "memory", "memory_bits"), ("FFTr2 D=4", "memory", "memory_bits"),
    ("SliWin", "memory", "memory_bits")])
def test_exact_resources(label, col, attr):
    assert getattr(_report(label), attr) == getattr(_golden(label), col)


def test_fastconv_kernel_memory():
    assert _report("FastConv").kernel_memory_bits == 195072


def test_fft_presets_differ_only_in_adds():
    a = cm.resources(cm.ArchConfig.make("FFTr2", N=128, D=4))
    b = cm.resources(cm.ArchConfig.make("FFTr2", N=128, D=4, fft_preset="prose"))
    assert b.onebit_adds == 10 * a.onebit_adds
    assert a.multipliers == b.multipliers


def test_golden_notes_attached():
    assert any(n.startswith("cycles: table=810") for n in _report("FastConv").notes)
    assert not cm.resources(cm.ArchConfig.make("FastConv", N=131)).notes


def test_invalid_configs():
    with pytest.raises(InvalidConfigError):
        cm.ArchConfig.make("FastConv", N=128)
    with pytest.raises(InvalidConfigError):
        cm.ArchConfig.make("FFTr2", N=127, D=2)
    with pytest.raises(InvalidConfigError):
        cm.ArchConfig.make("Winograd", N=7)
    with pytest.raises(InvalidConfigError):
        cm.ArchConfig.make("FastScaleConv", N=127, J=0, H=4)


def test_scalable_cycles_monotone_on_lattice():
    N = 127
    prev = math.inf
    for J in [d for d in range(1, N + 2) if (N + 1) % d == 0]:
        H = N if J == N + 1 else min(max(J, 2), N)
        c = cm.cycles(cm.ArchConfig.make("FastScaleConv", N=N, J=J, H=H))
        assert c < prev
        prev = c


def test_fastrankconv_monotone_in_J():
    cs = [cm.cycles(cm.ArchConfig.make("FastRankConv", N=127, J=J, r=2)) for J in (1, 2, 4, 8, 16, 32, 64, 127)]
    assert cs == sorted(cs, reverse=True)


def test_pareto_shape():
    pts = cm.pareto_front(127, "FastScaleConv", "multipliers")
    assert len(pts) >= 2
    assert [p.config.J for p in pts][-1] == 128
    text = cm.pareto_to_csv(pts)
    assert text.splitlines()[0] == "J,H,cycles,resource"


def test_runtime_table_skips_invalid():
    rows, notes = cm.normalized_runtime_table(["FastConv", "FFTr2"], [7, 8, 9])
    assert {(r.method, r.N) for r in rows} == {("FastConv", 7), ("FFTr2", 8)}
    assert len(notes) == 4


def test_runtime_separation_from_13():
    Ns = [n for n in range(13, 200) if is_prime(n)]
    rows, _ = cm.normalized_runtime_table(["SerSys", "SliWin"], Ns)
    assert all(r.normalized > 10 for r in rows)


def test_fps_scales_with_clock():
    cfg = cm.ArchConfig.make("FastScaleConv", N=37, P=19, J=2, H=2)
    a = cm.fps_estimate(480, 640, 19, cfg, 110e6)
    assert math.isclose(cm.fps_estimate(480, 640, 19, cfg, 220e6), 2 * a)
    with pytest.raises(InvalidConfigError):
        cm.fps_estimate(480, 640, 21, cfg, 110e6)


def test_csv_roundtrip_fields():
    text = cm.reports_to_csv([_report("SerSys")])
    header, row = text.strip().splitlines()
    assert dict(zip(header.split(","), row.split(",")))["cycles"] == "16255"
