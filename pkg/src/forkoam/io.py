"""File formats: PFM float maps, PGM quick-looks, PBM masks, CSV tables, JSON reports.

Every writer goes through :func:`atomic_write`, so a failed run never leaves
a truncated artifact behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import DomainError, OutputError
from .field import ComplexField, GridSpec
from .masks import BinaryMask

FIELD_FORMATS = ("complex", "intensity", "phase", "pgm")


def atomic_write(path, data: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def _header_tokens(data: bytes, count: int):
    """Split the first `count` whitespace-separated header tokens off a netpbm file."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos + 1


def encode_pfm(arr: np.ndarray) -> bytes:
    """Little-endian PFM. 2-D arrays become ``Pf``, ``(h, w, 3)`` arrays ``PF``.

    Row 0 of `arr` is written first, which PFM places at the bottom of the
    image; with y-up arrays this keeps the picture upright.
    """
    arr = np.asarray(arr)
    if arr.ndim == 2:
        kind = b"Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        kind = b"PF"
    else:
        raise DomainError(f"PFM needs a 2-D or (h, w, 3) array, got shape {arr.shape}")
    h, w = arr.shape[:2]
    header = kind + b"\n%d %d\n-1.0\n" % (w, h)
    return header + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def decode_pfm(data: bytes) -> np.ndarray:
    (kind, w, h, scale), pos = _header_tokens(data, 4)
    channels = {"Pf": 1, "PF": 3}.get(kind)
    if channels is None:
        raise DomainError(f"not a PFM file (magic {kind!r})")
    w, h, scale = int(w), int(h), float(scale)
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(data, dtype=dtype, count=w * h * channels, offset=pos).astype(np.float32)
    return arr.reshape((h, w)) if channels == 1 else arr.reshape((h, w, 3))


def write_pfm(path, arr) -> Path:
    return atomic_write(path, encode_pfm(arr))


def read_pfm(path) -> np.ndarray:
    return decode_pfm(_read(path))


def encode_pgm(arr: np.ndarray) -> bytes:
    arr = np.asarray(arr, dtype=np.uint8)
    h, w = arr.shape
    # PGM rows run top to bottom
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(arr[::-1]).tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    (kind, w, h, maxval), pos = _header_tokens(data, 4)
    if kind != "P5" or int(maxval) != 255:
        raise DomainError("only 8-bit binary PGM (P5) is supported")
    w, h = int(w), int(h)
    return np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos).reshape((h, w))[::-1].copy()


def quicklook(intensity: np.ndarray, decades: float = 4.0) -> np.ndarray:
    """Log-scaled 8-bit rendering spanning `decades` below the maximum."""
    peak = float(np.max(intensity))
    if peak <= 0:
        return np.zeros(intensity.shape, dtype=np.uint8)
    logi = np.log10(np.maximum(intensity / peak, 10.0 ** -decades))
    return np.round((logi + decades) / decades * 255).astype(np.uint8)


def write_field(field: ComplexField, path, format: str = "complex") -> Path:
    """Write a field as a float map or quick-look image.

    ``complex`` stores (real, imag, 0) as a 3-channel PFM and round-trips
    exactly at float32 precision; ``intensity`` and ``phase`` are 1-channel
    PFM; ``pgm`` is a log-scaled 8-bit intensity image.
    """
    if format == "complex":
        v = field.values
        data = encode_pfm(np.stack([v.real, v.imag, np.zeros(v.shape)], axis=-1))
    elif format == "intensity":
        data = encode_pfm(field.intensity)
    elif format == "phase":
        data = encode_pfm(field.phase)
    elif format == "pgm":
        data = encode_pgm(quicklook(field.intensity))
    else:
        raise DomainError(f"unknown field format {format!r}; expected one of {FIELD_FORMATS}")
    return atomic_write(path, data)


def read_field(path, grid: GridSpec) -> ComplexField:
    arr = read_pfm(path)
    if arr.ndim != 3:
        raise DomainError(f"{path} is a single-channel map, not a complex field")
    return ComplexField(grid, arr[..., 0].astype(np.float64) + 1j * arr[..., 1].astype(np.float64))


def encode_pbm(open_pixels: np.ndarray) -> bytes:
    """Binary PBM (P4); opaque pixels are black (1), open pixels white (0)."""
    opaque = ~np.asarray(open_pixels, dtype=bool)[::-1]
    h, w = opaque.shape
    return b"P4\n%d %d\n" % (w, h) + np.packbits(opaque, axis=1).tobytes()


def decode_pbm(data: bytes) -> np.ndarray:
    (kind, w, h), pos = _header_tokens(data, 3)
    if kind != "P4":
        raise DomainError("only binary PBM (P4) is supported")
    w, h = int(w), int(h)
    row_bytes = (w + 7) // 8
    packed = np.frombuffer(data, dtype=np.uint8, count=row_bytes * h, offset=pos).reshape((h, row_bytes))
    opaque = np.unpackbits(packed, axis=1)[:, :w].astype(bool)
    return ~opaque[::-1]


def write_mask(mask: BinaryMask, path) -> Path:
    return atomic_write(path, encode_pbm(mask.open))


def read_mask(path) -> np.ndarray:
    """Open-pixel array of a PBM mask, y-up like every other array here."""
    return decode_pbm(_read(path))


def encode_report(report: dict) -> bytes:
    try:
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False)
    except ValueError as exc:
        raise OutputError(f"report contains non-finite numbers: {exc}") from exc
    return (text + "\n").encode("utf-8")


def write_report(report: dict, path) -> Path:
    return atomic_write(path, encode_report(report))


def read_report(path) -> dict:
    return json.loads(_read(path).decode("utf-8"))


def encode_csv(header, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, encode_csv(header, rows))
