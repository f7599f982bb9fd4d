"""Separable low-rank kernel decomposition and row/column convolution.

A kernel is truncated to its r largest singular values and the truncated
matrix is split by LU elimination into r (column filter, row filter) pairs.
Everything here is floating point; exactness belongs to the DPRT path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .core import FactorizationError, LengthMismatchError, RankOutOfRangeError, unwrap

# Singular values at or below this fraction of the largest count as zero.
RANK_TOL = 1e-12
# Relative Frobenius residual tolerated after r elimination steps.
LU_RESIDUAL_TOL = 1e-9


@dataclass
class SeparableDecomposition:
    """Sum of outer products ``col_k x row_k``, k = 0..r-1.

    After :func:`quantize_filters` the filters hold integers and
    ``exponents[k] = (col_exp, row_exp)`` gives the power-of-two scales.
    """

    shape: tuple[int, int]
    terms: list[tuple[np.ndarray, np.ndarray]]
    dropped_sigma: np.ndarray = field(default_factory=lambda: np.zeros(0))
    frob_error: float = 0.0
    exponents: list[tuple[int, int]] | None = None
    quant_error: float | None = None

    @property
    def r(self) -> int:
        return len(self.terms)

    def filters(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Real-valued (dequantised) filters of term ``k``."""
        col, row = self.terms[k]
        if self.exponents is None:
            return col, row
        ce, re_ = self.exponents[k]
        return np.ldexp(col.astype(np.float64), ce), np.ldexp(row.astype(np.float64), re_)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for k in range(self.r):
            col, row = self.filters(k)
            out += np.outer(col, row)
        return out


def _check_rank(h: np.ndarray, r: int) -> None:
    if not 1 <= r <= min(h.shape):
        raise RankOutOfRangeError(f"rank {r} outside [1, {min(h.shape)}]")


def svd_truncate(h, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-r approximation; returns ``(H_r, dropped_sigma)``."""
    h = np.asarray(unwrap(h), dtype=np.float64)
    _check_rank(h, r)
    U, s, Vt = np.linalg.svd(h, full_matrices=False)
    Hr = (U[:, :r] * s[:r]) @ Vt[:r]
    return Hr, s[r:].copy()


def numerical_rank(h) -> int:
    s = np.linalg.svd(np.asarray(unwrap(h), dtype=np.float64), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_TOL * s[0]))


def lu_separate(Hr, r: int, method: str = "lu") -> SeparableDecomposition:
    """Split a rank-r matrix into r separable terms.

    ``method="lu"`` eliminates with complete pivoting: each step takes the
    largest remaining entry as pivot, emits the pivot column (scaled to a unit
    pivot, a column of L) and the pivot row (a row of U), and subtracts their
    outer product. Row and column permutations are implicit in the original
    indexing. ``method="svd"`` emits ``(u_k sqrt(s_k), sqrt(s_k) v_k)``.
    """
    A = np.array(unwrap(Hr), dtype=np.float64)
    _check_rank(A, r)
    norm = np.linalg.norm(A)
    if method == "svd":
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        if r < s.size and s[r] > RANK_TOL * max(s[0], 1e-300):
            raise FactorizationError(f"matrix has rank > {r}")
        root = np.sqrt(s[:r])
        terms = [(U[:, k] * root[k], Vt[k] * root[k]) for k in range(r)]
        return SeparableDecomposition(A.shape, terms)
    if method != "lu":
        raise ValueError(f"unknown method {method!r}")

    scale = np.abs(A).max() if A.size else 0.0
    terms = []
    for k in range(r):
        p, q = np.unravel_index(np.argmax(np.abs(A)), A.shape)
        piv = A[p, q]
        if abs(piv) <= RANK_TOL * scale:
            raise FactorizationError(f"pivot {k} vanished: matrix rank < {r}")
        col = A[:, q] / piv
        row = A[p, :].copy()
        A -= np.outer(col, row)
        A[p, :] = 0.0
        A[:, q] = 0.0
        terms.append((col, row))
    resid = np.linalg.norm(A)
    if resid > LU_RESIDUAL_TOL * norm:
        raise FactorizationError(
            f"residual {resid:.3e} after {r} steps: matrix rank exceeds {r}"
        )
    return SeparableDecomposition(A.shape, terms)


def decompose(h, r: int, method: str = "lu") -> SeparableDecomposition:
    """SVD truncation followed by separation.

    If the kernel's numerical rank is below ``r`` only that many terms are
    produced (a zero kernel produces none).
    """
    h = np.asarray(unwrap(h), dtype=np.float64)
    Hr, dropped = svd_truncate(h, r)
    r_eff = min(r, numerical_rank(Hr))
    if r_eff == 0:
        dec = SeparableDecomposition(h.shape, [])
    else:
        dec = lu_separate(Hr, r_eff, method)
    dec.dropped_sigma = dropped
    dec.frob_error = math.sqrt(float(np.sum(dropped ** 2)))
    return dec


def linconv1d(D, H) -> np.ndarray:
    """Full 1D linear convolution, length len(D) + len(H) - 1."""
    D = np.asarray(D, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if D.ndim != 1 or H.ndim != 1:
        raise LengthMismatchError("linconv1d expects 1D sequences")
    if D.size == 0 or H.size == 0:
        raise LengthMismatchError("linconv1d needs non-empty inputs")
    return _kernels.linconv_rows(D[None, :], H)[0]


def separable_term(g: np.ndarray, col: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Rows of g convolved with ``row``, then columns of that with ``col``."""
    tmp = _kernels.linconv_rows(g, row)
    return _kernels.linconv_rows(tmp.T, col).T


@dataclass
class RankConvResult:
    output: np.ndarray
    decomposition: SeparableDecomposition
    frob_error: float
    # Worst-case max-abs deviation from the exact result: ||H - H_r||_F ||g||_F.
    error_bound: float

    def summary(self) -> dict:
        return {
            "rank": self.decomposition.r,
            "frob_error": self.frob_error,
            "error_bound": self.error_bound,
            "dropped_sigma": [float(s) for s in self.decomposition.dropped_sigma],
        }


def rankconv2d(g, h, r: int, method: str = "lu",
               decomposition: SeparableDecomposition | None = None) -> RankConvResult:
    """2D linear convolution as a sum of r separable row/column passes.

    Terms accumulate in order, term 0 first.
    """
    g = np.asarray(unwrap(g), dtype=np.float64)
    h = np.asarray(unwrap(h), dtype=np.float64)
    dec = decomposition if decomposition is not None else decompose(h, r, method)
    (P1, P2), (Q1, Q2) = g.shape, h.shape
    out = np.zeros((P1 + Q1 - 1, P2 + Q2 - 1))
    for k in range(dec.r):
        col, row = dec.filters(k)
        out += separable_term(g, col, row)
    bound = dec.frob_error * float(np.linalg.norm(g))
    return RankConvResult(out, dec, dec.frob_error, bound)


def _pow2_scale(m: float, C: int) -> int:
    """Largest s with m * 2**s <= 2**(C-1) - 1."""
    lim = (1 << (C - 1)) - 1
    s = math.floor(math.log2(lim / m))
    while m * 2.0 ** s > lim:
        s -= 1
    while m * 2.0 ** (s + 1) <= lim:
        s += 1
    return s


def _quantize(v: np.ndarray, C: int) -> tuple[np.ndarray, int]:
    m = float(np.abs(v).max()) if v.size else 0.0
    if m == 0.0:
        return np.zeros(v.shape, dtype=np.int64), 0
    s = _pow2_scale(m, C)
    return np.rint(np.ldexp(v, s)).astype(np.int64), -s


def quantize_filters(dec: SeparableDecomposition, C: int) -> SeparableDecomposition:
    """Round every filter to C-bit signed integers under a power-of-two scale.

    Each coefficient's error is at most half a unit of its scale,
    i.e. ``2**(exponent - 1)``.
    """
    if C < 2:
        raise ValueError("C must be >= 2")
    if dec.exponents is not None:
        raise ValueError("decomposition is already quantized")
    terms, exps = [], []
    for col, row in dec.terms:
        qc, ec = _quantize(col, C)
        qr, er = _quantize(row, C)
        terms.append((qc, qr))
        exps.append((ec, er))
    out = replace(dec, terms=terms, exponents=exps)
    out.quant_error = float(np.linalg.norm(out.reconstruct() - dec.reconstruct()))
    return out
