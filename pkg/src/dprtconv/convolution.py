"""Exact 2D convolution and cross-correlation through the DPRT.

Output index ``(k, l)`` of a cross-correlation corresponds to the lag
``(k - (Q1 - 1), l - (Q2 - 1))``; the zero lag sits at ``(Q1 - 1, Q2 - 1)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import (
    MAX_PRIME,
    ImageBlock,
    Kernel,
    LengthMismatchError,
    UnsupportedSizeError,
    as_int_array,
    bit_budget,
    ceil_log2,
    exact_dtype,
    magnitude_bits,
    next_prime,
    require_prime,
    unwrap,
)
from .dprt import DprtArray, dprt_forward, dprt_inverse, inverse_numerators, zero_pad

MODES = ("conv", "xcorr")
BACKENDS = ("dprt", "direct", "rank")

_MODE_ALIASES = {
    "conv": "conv",
    "convolution": "conv",
    "xcorr": "xcorr",
    "cross-correlation": "xcorr",
    "crosscorr": "xcorr",
}


def normalize_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode.lower()]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}") from None


def flip2d(h) -> np.ndarray:
    """Reverse rows and columns (vertical then horizontal flip)."""
    return np.ascontiguousarray(unwrap(h)[::-1, ::-1])


def circconv1d(G, H) -> np.ndarray:
    """F(d) = sum_k G(k) H(<d - k>_N), computed as a flipped, shifted dot product."""
    G = as_int_array(G)
    H = as_int_array(H)
    if G.ndim != 1 or G.shape != H.shape:
        raise LengthMismatchError(f"lengths differ: {G.shape} vs {H.shape}")
    if G.size == 0:
        raise LengthMismatchError("empty sequences")
    dt = object if object in (G.dtype, H.dtype) else np.int64
    return _kernels.circconv_rows(G.astype(dt)[None, :], H.astype(dt)[None, :])[0]


def _working_arrays(g: np.ndarray, h: np.ndarray, N: int):
    dt = exact_dtype(B=magnitude_bits(g), C=magnitude_bits(h) + 1, N=N)
    return g.astype(dt), h.astype(dt)


@functools.lru_cache(maxsize=128)
def _kernel_dprt_cached(raw: bytes, shape: tuple, N: int) -> np.ndarray:
    h = np.frombuffer(raw, dtype=np.int64).reshape(shape)
    F = dprt_forward(zero_pad(h, N), N).data
    F.setflags(write=False)
    return F


def kernel_dprt(h: np.ndarray, N: int) -> DprtArray:
    """DPRT of the zero-padded kernel, memoised per (kernel, N) for int64 data."""
    if h.dtype == np.int64:
        h = np.ascontiguousarray(h)
        F = _kernel_dprt_cached(h.tobytes(), h.shape, N)
    else:
        F = dprt_forward(zero_pad(h, N), N).data
    return DprtArray(N, F, magnitude_bits(h) + 1)


@dataclass
class PipelineTrace:
    """Every intermediate of one DPRT convolution run."""

    N: int
    G: np.ndarray
    H: np.ndarray
    conv: np.ndarray
    numerators: np.ndarray
    result: np.ndarray
    budget: object = field(default=None)


def dprt_pipeline(g, h, N: int) -> PipelineTrace:
    """Circular convolution of two N x N-fitting blocks, keeping intermediates."""
    require_prime(N)
    g = as_int_array(unwrap(g))
    h = as_int_array(unwrap(h))
    g, h = _working_arrays(g, h, N)
    G = dprt_forward(zero_pad(g, N), N)
    H = kernel_dprt(h, N)
    conv = _kernels.circconv_rows(G.data, H.data.astype(G.data.dtype))
    F = DprtArray(N, conv, G.bits + H.bits + ceil_log2(N))
    num = inverse_numerators(F)
    result = dprt_inverse(F)
    B = magnitude_bits(g)
    C = magnitude_bits(h)
    return PipelineTrace(N, G.data, H.data, conv, num, result, bit_budget(B, C, N))


def circconv2d_dprt(g, h, N: int | None = None) -> np.ndarray:
    """2D circular convolution of two N x N blocks via per-direction 1D convolutions."""
    g_arr, h_arr = unwrap(g), unwrap(h)
    N = N if N is not None else g_arr.shape[0]
    if g_arr.shape != (N, N) or h_arr.shape != (N, N):
        raise LengthMismatchError(f"both inputs must be {N}x{N}")
    return dprt_pipeline(g_arr, h_arr, N).result


def circconv2d_direct(g, h, N: int | None = None) -> np.ndarray:
    """Literal evaluation of f(k,l) = sum_ij g(i,j) h(<k-i>_N, <l-j>_N)."""
    g = as_int_array(unwrap(g), dtype=object)
    h = as_int_array(unwrap(h), dtype=object)
    N = N if N is not None else g.shape[0]
    if g.shape != (N, N) or h.shape != (N, N):
        raise LengthMismatchError(f"both inputs must be {N}x{N}")
    out = np.zeros((N, N), dtype=object)
    for i in range(N):
        for j in range(N):
            if g[i, j]:
                out += g[i, j] * np.roll(np.roll(h, i, axis=0), j, axis=1)
    return out.astype(np.int64) if _fits_int64(out) else out


def _fits_int64(a: np.ndarray) -> bool:
    return a.size == 0 or magnitude_bits(a) < 63


def transform_size(P1: int, P2: int, Q1: int, Q2: int) -> int:
    return next_prime(max(P1 + Q1 - 1, P2 + Q2 - 1, 2))


def linconv2d(g, h, mode: str = "conv", *, max_prime: int = MAX_PRIME,
              full: bool = False) -> np.ndarray:
    """Linear convolution or cross-correlation through a zero-padded prime DPRT.

    With ``full=True`` the raw N x N circular result is returned instead of
    the (P1+Q1-1) x (P2+Q2-1) valid region.
    """
    mode = normalize_mode(mode)
    g = as_int_array(unwrap(g))
    h = as_int_array(unwrap(h))
    if mode == "xcorr":
        h = flip2d(h)
    (P1, P2), (Q1, Q2) = g.shape, h.shape
    N = transform_size(P1, P2, Q1, Q2)
    if N > max_prime:
        raise UnsupportedSizeError(f"transform size {N} exceeds the configured maximum {max_prime}")
    f = dprt_pipeline(g, h, N).result
    if full:
        return f
    return f[: P1 + Q1 - 1, : P2 + Q2 - 1]


def linconv2d_direct(g, h, mode: str = "conv") -> np.ndarray:
    """Spatial-domain reference: literal linear convolution or cross-correlation."""
    mode = normalize_mode(mode)
    g = as_int_array(unwrap(g))
    h = as_int_array(unwrap(h))
    if g.dtype == object or h.dtype == object:
        g, h = g.astype(object), h.astype(object)
    else:
        need = magnitude_bits(g) + magnitude_bits(h) + (g.size - 1).bit_length() + 1
        if need > 62:
            g, h = g.astype(object), h.astype(object)
    if mode == "xcorr":
        return _kernels.xcorr2d_direct(g, h)
    return _kernels.linconv2d_direct(g, h)


@dataclass(frozen=True)
class ConvRequest:
    image: ImageBlock | np.ndarray
    kernel: Kernel | np.ndarray
    mode: str = "conv"
    backend: str = "dprt"
    rank: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", normalize_mode(self.mode))
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.backend == "rank" and self.rank is None:
            raise ValueError("rank backend needs a rank")


def run_block(g, h, mode: str, backend: str, rank: int | None = None):
    """Convolve a single block with the chosen backend."""
    if backend == "dprt":
        return linconv2d(g, h, mode)
    if backend == "direct":
        return linconv2d_direct(g, h, mode)
    if backend == "rank":
        from .lowrank import rankconv2d

        hh = np.asarray(unwrap(h), dtype=np.float64)
        if normalize_mode(mode) == "xcorr":
            hh = flip2d(hh)
        return rankconv2d(unwrap(g), hh, rank).output
    raise ValueError(f"unknown backend {backend!r}")


def convolve(req: ConvRequest):
    return run_block(req.image, req.kernel, req.mode, req.backend, req.rank)


def overlap_add(image, kernel, mode: str = "conv", backend: str = "dprt",
                block: int | None = None, rank: int | None = None) -> np.ndarray:
    """Block-wise linear convolution of a large image.

    The image is cut into non-overlapping ``block`` x ``block`` tiles (the
    last ones zero-padded); each tile result is added into the output at the
    tile's offset. The default block size is the larger kernel dimension.
    """
    mode = normalize_mode(mode)
    g = unwrap(image)
    h = unwrap(kernel)
    R, Cc = g.shape
    Q1, Q2 = h.shape
    bp = block if block is not None else max(Q1, Q2)
    if bp < 1:
        raise ValueError("block size must be >= 1")
    if mode == "xcorr":
        h = flip2d(h)
    exact = backend != "rank"
    out = np.zeros((R + Q1 - 1, Cc + Q2 - 1), dtype=np.int64 if exact else np.float64)
    for r0 in range(0, R, bp):
        for c0 in range(0, Cc, bp):
            tile = np.zeros((bp, bp), dtype=g.dtype)
            piece = g[r0:r0 + bp, c0:c0 + bp]
            tile[: piece.shape[0], : piece.shape[1]] = piece
            res = run_block(tile, h, "conv", backend, rank)
            if exact and res.dtype == object and out.dtype != object:
                out = out.astype(object)
            rr = min(res.shape[0], out.shape[0] - r0)
            cc = min(res.shape[1], out.shape[1] - c0)
            out[r0:r0 + rr, c0:c0 + cc] += res[:rr, :cc]
    return out
