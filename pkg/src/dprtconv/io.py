"""Image, kernel and result files: PGM (P2/P5), CSV and JSON."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class FormatError(ValueError):
    pass


def _pgm_tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` whitespace-separated header tokens, skipping comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(raw):
            raise FormatError("truncated PGM header")
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _pgm_tokens(raw, 4)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError("non-numeric PGM header") from None
    if not 0 < maxval <= 65535:
        raise FormatError(f"PGM maxval {maxval} outside 1..65535")
    if magic == b"P2":
        vals = _strip_comments(raw[pos:]).split()
        if len(vals) < w * h:
            raise FormatError("truncated P2 pixel data")
        data = np.array([int(v) for v in vals[: w * h]], dtype=np.int64)
    elif magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dt = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dt.itemsize
        if len(raw) - pos < need:
            raise FormatError("truncated P5 pixel data")
        data = np.frombuffer(raw, dtype=dt, count=w * h, offset=pos).astype(np.int64)
    else:
        raise FormatError(f"unsupported PGM magic {magic!r}")
    if data.size and data.max() > maxval:
        raise FormatError("pixel exceeds maxval")
    return data.reshape(h, w)


def _strip_comments(body: bytes) -> bytes:
    return b"\n".join(line.split(b"#", 1)[0] for line in body.splitlines())


def _parse_number(tok: str):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def read_csv_matrix(path) -> np.ndarray:
    """Comma-separated numbers, one row per line. Integer-only files stay exact."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([_parse_number(t) for t in line.split(",")])
        except ValueError:
            raise FormatError(f"bad CSV value in line {line!r}") from None
    if not rows:
        raise FormatError("empty CSV")
    if len({len(r) for r in rows}) != 1:
        raise FormatError("ragged CSV rows")
    if all(isinstance(v, int) for r in rows for v in r):
        big = max(abs(v) for r in rows for v in r)
        return np.array(rows, dtype=np.int64 if big < 2 ** 62 else object)
    return np.array(rows, dtype=np.float64)


def read_image(path) -> np.ndarray:
    p = Path(path)
    with p.open("rb") as fh:
        head = fh.read(2)
    if head in (b"P2", b"P5"):
        return read_pgm(p)
    arr = read_csv_matrix(p)
    if arr.dtype.kind == "f":
        raise FormatError("image CSV must hold integers")
    return arr


def read_kernel(path) -> np.ndarray:
    return read_csv_matrix(path)


def format_csv(a: np.ndarray) -> str:
    if np.asarray(a).dtype.kind == "f":
        return "".join(",".join(f"{v:.12g}" for v in row) + "\n" for row in a)
    return "".join(",".join(str(int(v)) for v in row) + "\n" for row in a)


def format_json(a: np.ndarray) -> str:
    arr = np.asarray(a)
    if arr.dtype.kind == "f":
        data = [[float(f"{v:.12g}") for v in row] for row in arr]
    else:
        data = [[int(v) for v in row] for row in arr]
    return json.dumps({"rows": arr.shape[0], "cols": arr.shape[1], "data": data}) + "\n"


def format_pgm(a: np.ndarray) -> str:
    """ASCII P2. Values must be non-negative integers no larger than 65535."""
    arr = np.asarray(a)
    if arr.dtype.kind == "f":
        raise FormatError("PGM output needs integer data")
    lo, hi = int(arr.min()), int(arr.max())
    if lo < 0 or hi > 65535:
        raise FormatError(f"values in [{lo}, {hi}] do not fit a PGM (0..65535)")
    lines = ["P2", f"{arr.shape[1]} {arr.shape[0]}", str(max(hi, 1))]
    lines += [" ".join(str(int(v)) for v in row) for row in arr]
    return "\n".join(lines) + "\n"


FORMATTERS = {"csv": format_csv, "json": format_json, "pgm": format_pgm}


def write_matrix(a: np.ndarray, path, fmt: str = "csv") -> str:
    """Serialise ``a``; writes to ``path`` unless it is None or '-'. Returns the text."""
    text = FORMATTERS[fmt](a)
    if path not in (None, "-"):
        Path(path).write_text(text)
    return text
