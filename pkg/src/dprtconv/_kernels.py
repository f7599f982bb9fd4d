"""Inner loops, each with a numba and a pure-numpy implementation.

The numba versions run on int64 / float64 arrays only. Object arrays
(Python ints, used when widths exceed 63 bits) always take the numpy path.
Set ``DPRTCONV_NUMBA=0`` to force the numpy path everywhere.
"""
from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

try:
    import numba as nb
except ImportError:  # pragma: no cover - exercised only without numba
    nb = None

_FLAG = os.environ.get("DPRTCONV_NUMBA", "1").strip().lower()
USE_NUMBA = nb is not None and _FLAG not in ("0", "false", "no", "off")

if nb is not None:
    _threads = os.environ.get("DPRTCONV_THREADS")
    if _threads:
        nb.set_num_threads(max(1, min(int(_threads), nb.config.NUMBA_NUM_THREADS)))
    njit = nb.njit(cache=True, nogil=True)
else:  # pragma: no cover
    def njit(fn):
        return fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------- forward DPRT

def dprt_forward_np(f: np.ndarray) -> np.ndarray:
    N = f.shape[0]
    out = np.zeros((N + 1, N), dtype=f.dtype)
    i = np.arange(N)
    d = np.arange(N)
    for m in range(N):
        cols = (d[None, :] + (m * i)[:, None]) % N
        out[m] = f[i[:, None], cols].sum(axis=0)
    out[N] = f.sum(axis=1)
    return out


@njit
def dprt_forward_nb(f):
    N = f.shape[0]
    out = np.zeros((N + 1, N), dtype=np.int64)
    for m in range(N):
        for i in range(N):
            s = (m * i) % N
            for d in range(N):
                k = d + s
                if k >= N:
                    k -= N
                out[m, d] += f[i, k]
    for d in range(N):
        acc = 0
        for j in range(N):
            acc += f[d, j]
        out[N, d] = acc
    return out


# ------------------------------------------------------------- inverse DPRT

def idprt_numerators_np(F: np.ndarray) -> np.ndarray:
    """Un-normalised inverse: N * f(i, j) when F is a consistent transform."""
    N = F.shape[1]
    S = F[0].sum()
    i = np.arange(N)
    j = np.arange(N)
    num = np.zeros((N, N), dtype=F.dtype)
    for m in range(N):
        cols = (j[None, :] - (m * i)[:, None]) % N
        num += F[m][cols]
    num += F[N][:, None] - S
    return num


@njit
def idprt_numerators_nb(F):
    N = F.shape[1]
    S = 0
    for d in range(N):
        S += F[0, d]
    num = np.empty((N, N), dtype=np.int64)
    for i in range(N):
        for j in range(N):
            acc = F[N, i] - S
            for m in range(N):
                k = (j - m * i) % N
                acc += F[m, k]
            num[i, j] = acc
    return num


# ------------------------------------------------ per-direction circular conv

def circconv_rows_np(G: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Row-wise circular convolution: out[m, d] = sum_k G[m, k] H[m, <d-k>]."""
    N = G.shape[1]
    out = np.zeros(G.shape, dtype=np.result_type(G, H))
    for k in range(N):
        out += G[:, k:k + 1] * np.roll(H, k, axis=1)
    return out


@njit
def circconv_rows_nb(G, H):
    # Shift-register form: dot G with a flipped H, then step the offset.
    rows, N = G.shape
    out = np.empty((rows, N), dtype=np.int64)
    for m in range(rows):
        off = 0
        for d in range(N - 1, -1, -1):
            acc = 0
            for k in range(N):
                idx = N - 1 - k - off
                if idx < 0:
                    idx += N
                acc += G[m, k] * H[m, idx]
            out[m, d] = acc
            off += 1
    return out


# -------------------------------------------------- direct spatial oracles

def linconv2d_direct_np(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    P1, P2 = g.shape
    Q1, Q2 = h.shape
    out = np.zeros((P1 + Q1 - 1, P2 + Q2 - 1), dtype=np.result_type(g, h))
    for a in range(Q1):
        for b in range(Q2):
            out[a:a + P1, b:b + P2] += h[a, b] * g
    return out


@njit
def linconv2d_direct_nb(g, h):
    P1, P2 = g.shape
    Q1, Q2 = h.shape
    out = np.zeros((P1 + Q1 - 1, P2 + Q2 - 1), dtype=g.dtype)
    for i in range(P1):
        for j in range(P2):
            v = g[i, j]
            if v == 0:
                continue
            for a in range(Q1):
                for b in range(Q2):
                    out[i + a, j + b] += v * h[a, b]
    return out


def xcorr2d_direct_np(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """out[k, l] = sum_{a,b} g(k - Q1 + 1 + a, l - Q2 + 1 + b) h(a, b)."""
    P1, P2 = g.shape
    Q1, Q2 = h.shape
    out = np.zeros((P1 + Q1 - 1, P2 + Q2 - 1), dtype=np.result_type(g, h))
    for a in range(Q1):
        for b in range(Q2):
            r0 = Q1 - 1 - a
            c0 = Q2 - 1 - b
            out[r0:r0 + P1, c0:c0 + P2] += h[a, b] * g
    return out


@njit
def xcorr2d_direct_nb(g, h):
    P1, P2 = g.shape
    Q1, Q2 = h.shape
    out = np.zeros((P1 + Q1 - 1, P2 + Q2 - 1), dtype=g.dtype)
    for k in range(P1 + Q1 - 1):
        for l in range(P2 + Q2 - 1):
            acc = 0
            for a in range(Q1):
                i = k - Q1 + 1 + a
                if i < 0 or i >= P1:
                    continue
                for b in range(Q2):
                    j = l - Q2 + 1 + b
                    if 0 <= j < P2:
                        acc += g[i, j] * h[a, b]
            out[k, l] = acc
    return out


# ------------------------------------------------------ 1D linear conv rows

def linconv_rows_np(X: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Linear convolution of every row of ``X`` with ``h``."""
    SH = h.shape[0]
    pad = np.zeros((X.shape[0], X.shape[1] + 2 * (SH - 1)), dtype=np.float64)
    pad[:, SH - 1:SH - 1 + X.shape[1]] = X
    win = sliding_window_view(pad, SH, axis=1)
    return win @ h[::-1]


@njit
def linconv_rows_nb(X, h):
    # Zero-filled window slides left over the row; one tap-dot per output.
    rows, SG = X.shape
    SH = h.shape[0]
    out = np.zeros((rows, SG + SH - 1), dtype=np.float64)
    for r in range(rows):
        for s in range(SG + SH - 1):
            acc = 0.0
            for k in range(SH):
                t = s - k
                if 0 <= t < SG:
                    acc += X[r, t] * h[k]
            out[r, s] = acc
    return out


# -------------------------------------------------------------- dispatchers

def _jit_int(*arrays) -> bool:
    return USE_NUMBA and all(a.dtype == np.int64 for a in arrays)


def dprt_forward(f):
    return dprt_forward_nb(f) if _jit_int(f) else dprt_forward_np(f)


def idprt_numerators(F):
    return idprt_numerators_nb(F) if _jit_int(F) else idprt_numerators_np(F)


def circconv_rows(G, H):
    return circconv_rows_nb(G, H) if _jit_int(G, H) else circconv_rows_np(G, H)


def linconv2d_direct(g, h):
    return linconv2d_direct_nb(g, h) if _jit_int(g, h) else linconv2d_direct_np(g, h)


def xcorr2d_direct(g, h):
    return xcorr2d_direct_nb(g, h) if _jit_int(g, h) else xcorr2d_direct_np(g, h)


def linconv_rows(X, h):
    X = np.ascontiguousarray(X, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    return linconv_rows_nb(X, h) if USE_NUMBA else linconv_rows_np(X, h)
