"""Shared types, modular indexing and bit-width bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Largest transform size accepted by the convolution pipelines.
MAX_PRIME = 1021

# Signed int64 leaves 63 magnitude bits; anything wider goes to Python ints.
INT64_MAGNITUDE_BITS = 63


class DprtConvError(ValueError):
    """Base class for all library errors."""


class NonPrimeSizeError(DprtConvError):
    pass


class SizeExceedsTargetError(DprtConvError):
    pass


class NotDivisibleError(DprtConvError):
    """An inverse-transform numerator was not a multiple of N."""


class InconsistentDirectionSumsError(DprtConvError):
    pass


class LengthMismatchError(DprtConvError):
    pass


class UnsupportedSizeError(DprtConvError):
    pass


class RankOutOfRangeError(DprtConvError):
    pass


class FactorizationError(DprtConvError):
    pass


class InvalidConfigError(DprtConvError):
    pass


def mod_pos(a: int, n: int) -> int:
    """Positive remainder of ``a`` by ``n`` (e.g. ``mod_pos(-1, 5) == 4``)."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    # Python's % already returns a value with the sign of the divisor.
    return a % n


def is_prime(v: int) -> bool:
    if v < 2:
        return False
    if v % 2 == 0:
        return v == 2
    k = 3
    while k * k <= v:
        if v % k == 0:
            return False
        k += 2
    return True


def next_prime(v: int) -> int:
    """Smallest prime >= v."""
    if v < 2:
        raise ValueError("next_prime expects v >= 2")
    while not is_prime(v):
        v += 1
    return v


def ceil_log2(x: int) -> int:
    """Exact ceil(log2(x)) for x >= 1, using integer arithmetic only."""
    if x < 1:
        raise ValueError("ceil_log2 expects x >= 1")
    return (x - 1).bit_length()


def require_prime(n: int) -> None:
    if not is_prime(int(n)):
        raise NonPrimeSizeError(f"transform size {n} is not prime")


@dataclass(frozen=True)
class BitBudget:
    """Per-stage exact widths for the DPRT convolution pipeline."""

    B: int
    C: int
    N: int
    x: int = 0

    @property
    def n(self) -> int:
        return ceil_log2(self.N)

    @property
    def dprt_image_bits(self) -> int:
        return self.B + self.n

    @property
    def dprt_kernel_bits(self) -> int:
        return self.C + self.n

    @property
    def conv_bits(self) -> int:
        return self.B + self.C + 3 * self.n

    @property
    def prenorm_bits(self) -> int:
        return self.B + self.C + 4 * self.n

    @property
    def result_bits(self) -> int:
        """Width of the final result, ``B + C + x``."""
        return self.B + self.C + self.x

    @property
    def stored_result_bits(self) -> int:
        # Reported width of full-precision hardware outputs (B + C + n).
        return self.B + self.C + self.n

    def as_dict(self) -> dict:
        return {
            "B": self.B,
            "C": self.C,
            "N": self.N,
            "n": self.n,
            "x": self.x,
            "dprt_image_bits": self.dprt_image_bits,
            "dprt_kernel_bits": self.dprt_kernel_bits,
            "conv_bits": self.conv_bits,
            "prenorm_bits": self.prenorm_bits,
            "result_bits": self.result_bits,
        }


def bit_budget(B: int, C: int, N: int, x: int = 0) -> BitBudget:
    if B < 1 or C < 1:
        raise ValueError("B and C must be >= 1")
    require_prime(N)
    return BitBudget(B, C, N, x)


def magnitude_bits(a: np.ndarray) -> int:
    """Bits needed for the largest magnitude in ``a`` (at least 1)."""
    if a.size == 0:
        return 1
    m = max(abs(int(a.max())), abs(int(a.min())))
    return max(1, m.bit_length())


def exact_dtype(*, B: int, C: int, N: int):
    """int64 when the pre-normalisation width fits, else Python-int objects.

    One extra bit is reserved for the sign of signed kernels.
    """
    if B + C + 4 * ceil_log2(N) + 1 <= INT64_MAGNITUDE_BITS:
        return np.int64
    return object


def as_int_array(a, dtype=None) -> np.ndarray:
    """Convert to a 2D-or-1D exact integer array, rejecting non-integers."""
    arr = np.asarray(a)
    if arr.dtype == object:
        if not all(isinstance(v, (int, np.integer)) for v in arr.flat):
            raise TypeError("exact path requires integer data")
        return arr if dtype in (None, object) else arr.astype(dtype)
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise TypeError("exact path requires integer data")
    elif arr.dtype.kind not in "iub":
        raise TypeError(f"unsupported dtype {arr.dtype}")
    return arr.astype(dtype or np.int64)


@dataclass(frozen=True, eq=False)
class ImageBlock:
    """Unsigned integer image (or image block) with a declared bit width."""

    data: np.ndarray
    bits: int

    def __post_init__(self):
        data = as_int_array(self.data)
        if data.ndim != 2:
            raise ValueError("image data must be 2D")
        if data.size and (data.min() < 0 or int(data.max()) >= 1 << self.bits):
            raise ValueError(f"image values must lie in [0, 2^{self.bits})")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, a, bits: int | None = None) -> "ImageBlock":
        arr = as_int_array(a)
        return cls(arr, bits if bits is not None else magnitude_bits(arr))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class Kernel:
    """Signed convolution kernel. ``bits`` counts the sign bit.

    Integer data is held exactly; real data is accepted only for the
    low-rank path (``exact`` is then False).
    """

    data: np.ndarray
    bits: int

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError("kernel data must be 2D")
        if data.dtype.kind in "iubO" or (
            data.dtype.kind == "f" and np.all(data == np.round(data))
        ):
            data = as_int_array(data)
            lo, hi = -(1 << (self.bits - 1)), 1 << (self.bits - 1)
            if data.size and (int(data.min()) < lo or int(data.max()) >= hi):
                raise ValueError(f"kernel values must lie in [-2^{self.bits - 1}, 2^{self.bits - 1})")
        else:
            data = data.astype(np.float64)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, a, bits: int | None = None) -> "Kernel":
        arr = np.asarray(a)
        if bits is None:
            if arr.dtype.kind == "f" and not np.all(arr == np.round(arr)):
                bits = 1 + max(1, int(np.ceil(np.log2(np.abs(arr).max() + 1))))
            else:
                bits = magnitude_bits(np.asarray(arr, dtype=np.int64)) + 1
        return cls(arr, bits)

    @property
    def exact(self) -> bool:
        return self.data.dtype.kind != "f"

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


def unwrap(a) -> np.ndarray:
    """Return the raw array behind an ImageBlock/Kernel or array-like."""
    if isinstance(a, (ImageBlock, Kernel)):
        return a.data
    return np.asarray(a)
