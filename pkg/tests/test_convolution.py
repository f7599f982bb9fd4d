import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from dprtconv.convolution import (
    ConvRequest,
    circconv1d,
    circconv2d_direct,
    circconv2d_dprt,
    convolve,
    dprt_pipeline,
    flip2d,
    linconv2d,
    linconv2d_direct,
    normalize_mode,
    overlap_add,
    transform_size,
)
from dprtconv.core import LengthMismatchError, UnsupportedSizeError


def test_circconv1d_example():
    assert circconv1d([1, 2, 3], [4, 5, 6]).tolist() == [31, 31, 28]
    with pytest.raises(LengthMismatchError):
        circconv1d([1, 2], [1, 2, 3])


def test_linconv_example():
    g = np.array([[1, 2], [3, 4]])
    h = np.array([[1, 0], [0, 1]])
    assert linconv2d(g, h).tolist() == [[1, 2, 0], [3, 5, 2], [0, 3, 4]]
    assert transform_size(2, 2, 2, 2) == 3


@pytest.mark.parametrize("N", [5, 7, 11])
def test_circular_matches_oracle(N, rng):
    g = rng.integers(0, 16, (N, N))
    h = rng.integers(-8, 8, (N, N))
    ref = oracles.circconv2d(g.tolist(), h.tolist(), N)
    assert circconv2d_dprt(g, h, N).tolist() == ref
    assert circconv2d_direct(g, h, N).tolist() == ref


def test_pipeline_trace_widths(rng):
    g = rng.integers(0, 256, (7, 7))
    h = rng.integers(0, 256, (7, 7))
    tr = dprt_pipeline(g, h, 7)
    b = tr.budget
    assert int(np.abs(tr.G).max()) < 1 << b.dprt_image_bits
    assert int(np.abs(tr.conv).max()) < 1 << b.conv_bits
    assert int(np.abs(tr.numerators).max()) < 1 << b.prenorm_bits
    assert np.array_equal(tr.result, circconv2d_direct(g, h, 7))


small = st.integers(1, 7)


@given(small, small, small, small, st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_linear_and_xcorr_match_oracles(P1, P2, Q1, Q2, seed):
    r = np.random.default_rng(seed)
    g = r.integers(0, 256, (P1, P2))
    h = r.integers(-128, 128, (Q1, Q2))
    assert linconv2d(g, h).tolist() == oracles.linconv2d(g.tolist(), h.tolist())
    assert linconv2d(g, h, "xcorr").tolist() == oracles.xcorr2d(g.tolist(), h.tolist())
    assert linconv2d_direct(g, h, "xcorr").tolist() == oracles.xcorr2d(g.tolist(), h.tolist())


def test_xcorr_is_conv_with_flipped_kernel(rng):
    g = rng.integers(0, 50, (6, 9))
    h = rng.integers(-5, 5, (4, 3))
    assert np.array_equal(linconv2d(g, h, "xcorr"), linconv2d(g, flip2d(h), "conv"))


def test_commutative_and_sum_conserving(rng):
    a = rng.integers(0, 30, (5, 6))
    b = rng.integers(0, 30, (3, 4))
    ab = linconv2d(a, b)
    assert np.array_equal(ab, linconv2d(b, a))
    assert int(ab.sum()) == int(a.sum()) * int(b.sum())


def test_wide_inputs_fall_back_to_python_ints():
    g = np.full((4, 4), 2**30, dtype=np.int64)
    h = np.full((3, 3), 2**30, dtype=np.int64)
    out = linconv2d(g, h)
    assert out.tolist() == oracles.linconv2d(g.tolist(), h.tolist())


def test_size_limit():
    with pytest.raises(UnsupportedSizeError):
        linconv2d(np.ones((10, 10), dtype=np.int64), np.ones((3, 3), dtype=np.int64), max_prime=7)


@pytest.mark.parametrize("block", [3, 5, 8, 20])
@pytest.mark.parametrize("mode", ["conv", "xcorr"])
def test_overlap_add_matches_direct(block, mode, rng):
    g = rng.integers(0, 256, (17, 13))
    h = rng.integers(-20, 20, (4, 5))
    assert np.array_equal(overlap_add(g, h, mode, block=block), linconv2d_direct(g, h, mode))


def test_overlap_add_rank_backend(rng):
    g = rng.integers(0, 256, (12, 12))
    h = rng.integers(-5, 5, (3, 3))
    out = overlap_add(g, h, backend="rank", block=5, rank=3)
    assert np.allclose(out, linconv2d_direct(g, h), atol=1e-6)


def test_request_dispatch(rng):
    g = rng.integers(0, 10, (4, 4))
    h = rng.integers(0, 10, (2, 3))
    ref = linconv2d_direct(g, h)
    for backend in ("dprt", "direct"):
        assert np.array_equal(convolve(ConvRequest(g, h, backend=backend)), ref)
    assert np.allclose(convolve(ConvRequest(g, h, backend="rank", rank=2)), ref)
    with pytest.raises(ValueError):
        ConvRequest(g, h, backend="rank")
    with pytest.raises(ValueError):
        normalize_mode("deconv")
