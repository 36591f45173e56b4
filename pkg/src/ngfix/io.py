"""Readers and writers for the fvecs / ivecs / bvecs benchmark formats.

Each record is a little-endian int32 dimension followed by that many
components (float32, int32 or uint8 respectively).
"""

from __future__ import annotations

import os

import numpy as np

_PAYLOAD = {
    "fvecs": np.dtype("<f4"),
    "ivecs": np.dtype("<i4"),
    "bvecs": np.dtype("u1"),
}


class VecsFormatError(ValueError):
    pass


def _format_of(path, fmt):
    if fmt is None:
        fmt = os.path.splitext(str(path))[1].lstrip(".").lower()
    if fmt not in _PAYLOAD:
        raise ValueError(f"unknown vecs format {fmt!r}")
    return fmt


def read_vecs(path, fmt: str | None = None) -> np.ndarray:
    """Read every record of a vecs file into a 2-D array (file order)."""
    fmt = _format_of(path, fmt)
    payload = _PAYLOAD[fmt]
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        return np.empty((0, 0), dtype=payload)
    if raw.size < 4:
        raise VecsFormatError(f"{path}: truncated header at byte offset 0")
    dim = int(raw[:4].view("<i4")[0])
    if dim <= 0:
        raise VecsFormatError(f"{path}: non-positive dimension {dim} at byte offset 0")
    rec = 4 + dim * payload.itemsize
    if raw.size % rec:
        # locate the first bad record for the message
        _scan_for_error(path, raw, payload, dim)
        n = raw.size // rec
        raise VecsFormatError(f"{path}: truncated record at byte offset {n * rec}")
    recs = raw.reshape(-1, rec)
    dims = np.ascontiguousarray(recs[:, :4]).view("<i4").ravel()
    if np.any(dims != dim):
        _scan_for_error(path, raw, payload, dim)
    out = np.ascontiguousarray(recs[:, 4:]).view(payload).reshape(-1, dim)
    if fmt == "fvecs" and not np.all(np.isfinite(out)):
        row = int(np.flatnonzero(~np.all(np.isfinite(out), axis=1))[0])
        raise VecsFormatError(f"{path}: non-finite float in record at byte offset {row * rec}")
    return out.astype(payload.newbyteorder("="), copy=False)


def _scan_for_error(path, raw, payload, dim0):
    off = 0
    while off < raw.size:
        if off + 4 > raw.size:
            raise VecsFormatError(f"{path}: truncated header at byte offset {off}")
        dim = int(raw[off : off + 4].view("<i4")[0])
        if dim != dim0:
            raise VecsFormatError(
                f"{path}: record at byte offset {off} declares dim {dim}, expected {dim0}")
        end = off + 4 + dim * payload.itemsize
        if end > raw.size:
            raise VecsFormatError(f"{path}: truncated record at byte offset {off}")
        off = end


def read_id_lists(path) -> list[np.ndarray]:
    """Read an ivecs file whose records may have different lengths."""
    raw = np.fromfile(path, dtype=np.uint8)
    out = []
    off = 0
    while off < raw.size:
        if off + 4 > raw.size:
            raise VecsFormatError(f"{path}: truncated header at byte offset {off}")
        dim = int(raw[off : off + 4].view("<i4")[0])
        end = off + 4 + 4 * dim
        if dim < 0 or end > raw.size:
            raise VecsFormatError(f"{path}: truncated record at byte offset {off}")
        out.append(raw[off + 4 : end].view("<i4").astype(np.int64))
        off = end
    return out


def write_vecs(path, arr, fmt: str | None = None) -> None:
    fmt = _format_of(path, fmt)
    payload = _PAYLOAD[fmt]
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    n, dim = arr.shape
    rec = np.empty((n, 4 + dim * payload.itemsize), dtype=np.uint8)
    rec[:, :4] = np.full((n, 1), dim, dtype="<i4").view(np.uint8)
    rec[:, 4:] = np.ascontiguousarray(arr.astype(payload)).view(np.uint8).reshape(n, -1)
    rec.tofile(path)


def write_id_lists(path, lists) -> None:
    with open(path, "wb") as fh:
        for ids in lists:
            ids = np.asarray(ids, dtype="<i4")
            fh.write(np.int32(len(ids)).astype("<i4").tobytes())
            fh.write(ids.tobytes())


def load_vectors(path, fmt: str | None = None, metric="l2"):
    """Load a vecs file: float/byte formats give a ``VectorStore``, ivecs gives id lists."""
    from .core import VectorStore

    fmt = _format_of(path, fmt)
    if fmt == "ivecs":
        return read_id_lists(path)
    return VectorStore(read_vecs(path, fmt).astype(np.float32), metric)
