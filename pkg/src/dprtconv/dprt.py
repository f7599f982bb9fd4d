"""Forward and inverse Discrete Periodic Radon Transform for prime N."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    ImageBlock,
    InconsistentDirectionSumsError,
    NotDivisibleError,
    SizeExceedsTargetError,
    as_int_array,
    ceil_log2,
    magnitude_bits,
    require_prime,
    unwrap,
)


@dataclass(frozen=True, eq=False)
class DprtArray:
    """DPRT of an N x N image: rows m = 0..N (direction), columns d (ray).

    Row ``m = N`` holds the row sums of the spatial image.
    """

    n: int
    data: np.ndarray
    bits: int

    def __post_init__(self):
        require_prime(self.n)
        if self.data.shape != (self.n + 1, self.n):
            raise ValueError(f"expected shape {(self.n + 1, self.n)}, got {self.data.shape}")

    @property
    def total(self) -> int:
        return dprt_sum(self)

    def direction_sums(self) -> np.ndarray:
        return self.data.sum(axis=1)


def zero_pad(g, N: int):
    """Place ``g`` in the top-left corner of an N x N zero array.

    Returns an ImageBlock when given one, otherwise a plain array.
    """
    arr = unwrap(g)
    if arr.shape[0] > N or arr.shape[1] > N:
        raise SizeExceedsTargetError(f"block {arr.shape} does not fit in {N}x{N}")
    out = np.zeros((N, N), dtype=arr.dtype)
    out[: arr.shape[0], : arr.shape[1]] = arr
    if isinstance(g, ImageBlock):
        return ImageBlock(out, g.bits)
    return out


def dprt_forward(f, N: int | None = None) -> DprtArray:
    """F(m, d) = sum_i f(i, <d + m i>_N) for m < N; F(N, d) = sum_j f(d, j)."""
    arr = as_int_array(unwrap(f))
    if N is None:
        N = arr.shape[0]
    require_prime(N)
    if arr.shape != (N, N):
        raise ValueError(f"dprt_forward needs an {N}x{N} input, got {arr.shape}")
    bits = f.bits if isinstance(f, ImageBlock) else magnitude_bits(arr)
    F = _kernels.dprt_forward(np.ascontiguousarray(arr))
    return DprtArray(N, F, bits + ceil_log2(N))


def dprt_sum(F: DprtArray) -> int:
    """Total pixel sum S, read off direction 0."""
    return int(F.data[0].sum())


def check_direction_sums(F: DprtArray) -> None:
    sums = F.direction_sums()
    if not np.all(sums == sums[0]):
        bad = [m for m in range(F.n + 1) if sums[m] != sums[0]]
        raise InconsistentDirectionSumsError(
            f"direction sums differ from S={sums[0]} at m={bad[:5]}"
        )


def inverse_numerators(F: DprtArray) -> np.ndarray:
    """The bracketed term of the inversion formula, i.e. N * f before division."""
    return _kernels.idprt_numerators(np.ascontiguousarray(F.data))


def dprt_inverse(F: DprtArray) -> np.ndarray:
    """Exact inverse DPRT.

    Raises NotDivisibleError if any numerator is not a multiple of N: exact
    integer recovery is the contract, so nothing is rounded.
    """
    check_direction_sums(F)
    num = inverse_numerators(F)
    N = F.n
    rem = num % N
    if np.any(rem != 0):
        i, j = np.argwhere(rem != 0)[0]
        raise NotDivisibleError(
            f"numerator at ({i}, {j}) = {num[i, j]} is not divisible by N={N}"
        )
    return num // N
