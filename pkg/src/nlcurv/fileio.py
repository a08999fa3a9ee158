"""File formats: PGM/PBM images, raw volumes, CSV tables and heatmaps.

Images map to the plane with the image's top row at the largest ``x_n``;
column index is ``x_1``.  Raw volumes are little-endian ``uint8`` arrays in
C order with a JSON sidecar ``{dims, h, origin}``.
"""
from __future__ import annotations

import contextlib
import csv
import json
import math
from pathlib import Path

import numpy as np

from .setrep import VoxelSet

__all__ = [
    "read_pnm", "write_pbm", "write_pgm", "image_to_voxels", "voxels_to_image",
    "load_image_set", "save_image_set", "read_volume", "write_volume",
    "write_curvature_csv", "read_curvature_csv", "write_heatmap", "write_classification_csv",
]


def _tokens(buf: bytes, count: int, pos: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated header integers, skipping comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and buf[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ValueError("malformed PNM header")
        out.append(int(buf[start:pos]))
    return out, pos + 1  # exactly one whitespace byte ends the header


def read_pnm(path) -> tuple[np.ndarray, int]:
    """Binary PBM (P4) or PGM (P5); returns ``(pixels, maxval)`` with rows top-down.

    PBM pixels are returned as 255 for ink (bit 1) and 0 otherwise.
    """
    buf = Path(path).read_bytes()
    magic = buf[:2]
    if magic == b"P4":
        (w, hgt), pos = _tokens(buf, 2, 2)
        stride = (w + 7) // 8
        raw = np.frombuffer(buf, dtype=np.uint8, count=stride * hgt, offset=pos).reshape(hgt, stride)
        bits = np.unpackbits(raw, axis=1)[:, :w]
        return (bits * 255).astype(np.uint16), 255
    if magic == b"P5":
        (w, hgt, maxval), pos = _tokens(buf, 3, 2)
        if not 0 < maxval < 65536:
            raise ValueError("PGM maxval out of range")
        dt = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        pix = np.frombuffer(buf, dtype=dt, count=w * hgt, offset=pos).reshape(hgt, w)
        return pix.astype(np.uint16), maxval
    raise ValueError(f"{path}: not a binary PBM/PGM file (magic {magic!r})")


def write_pgm(path, pixels: np.ndarray, maxval: int = 255) -> None:
    pixels = np.asarray(pixels)
    hgt, w = pixels.shape
    dt = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    Path(path).write_bytes(f"P5\n{w} {hgt}\n{maxval}\n".encode() + pixels.astype(dt).tobytes())


def write_pbm(path, ink: np.ndarray) -> None:
    ink = np.asarray(ink, dtype=bool)
    hgt, w = ink.shape
    Path(path).write_bytes(f"P4\n{w} {hgt}\n".encode() + np.packbits(ink, axis=1).tobytes())


def image_to_voxels(pixels: np.ndarray, h: float, threshold: int = 128, origin=(0.0, 0.0)) -> VoxelSet:
    """Occupied where ``pixel >= threshold``; image row 0 becomes the top row in ``x_n``."""
    occ = np.asarray(pixels) >= threshold
    return VoxelSet(occ[::-1, :].T, h, origin)


def voxels_to_image(A: VoxelSet) -> np.ndarray:
    if A.dim != 2:
        raise ValueError("images hold 2D sets only")
    return A.occ.T[::-1, :]


def load_image_set(path, h: float, threshold: int = 128, origin=(0.0, 0.0)) -> VoxelSet:
    pix, _ = read_pnm(path)
    return image_to_voxels(pix, h, threshold, origin)


def save_image_set(path, A: VoxelSet) -> None:
    """PBM with ink on occupied cells."""
    write_pbm(path, voxels_to_image(A))


def _sidecar(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_volume(path, A: VoxelSet) -> None:
    """Raw ``uint8`` occupancy plus ``<path>.json`` with dims, h and origin."""
    Path(path).write_bytes(A.occ.astype("<u1").tobytes(order="C"))
    meta = {"dims": list(A.shape), "h": A.h, "origin": [float(v) for v in A.origin]}
    _sidecar(path).write_text(json.dumps(meta, indent=2) + "\n")


def read_volume(path, threshold: int = 1) -> VoxelSet:
    meta = json.loads(_sidecar(path).read_text())
    dims = tuple(int(d) for d in meta["dims"])
    data = np.frombuffer(Path(path).read_bytes(), dtype="<u1")
    if data.size != math.prod(dims):
        raise ValueError(f"{path}: expected {math.prod(dims)} bytes for dims {dims}, found {data.size}")
    origin = meta.get("origin")
    return VoxelSet(data.reshape(dims) >= threshold, float(meta["h"]), origin)


@contextlib.contextmanager
def _text_out(target):
    """Open a path for writing, or pass an already open text stream through."""
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def _coord_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_curvature_csv(path, points: np.ndarray, values: np.ndarray) -> None:
    points = np.asarray(points, dtype=float).reshape(len(values), -1)
    with _text_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_coord_names(points.shape[1]) + ["H"])
        for p, v in zip(points, values):
            w.writerow([_fmt(c) for c in p] + [_fmt(v)])


def read_curvature_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, :-1], data[:, -1]


def write_heatmap(path, grid: VoxelSet, values: np.ndarray, mask: np.ndarray | None = None) -> dict:
    """Curvature on ``grid``'s cells as an 8-bit PGM; returns and writes the mapping sidecar.

    Pixel ``p`` decodes as ``lo + p * (hi - lo) / 255``; cells outside
    ``mask`` are written as 0 and the sidecar says so.
    """
    if grid.dim != 2:
        raise ValueError("heatmaps are 2D only")
    vals = np.asarray(values, dtype=float)
    if mask is None:
        mask = np.ones(vals.shape, dtype=bool)
    sel = vals[mask]
    lo, hi = (float(sel.min()), float(sel.max())) if sel.size else (0.0, 0.0)
    span = hi - lo
    pix = np.zeros(vals.shape, dtype=np.uint8)
    if span > 0:
        pix[mask] = np.rint((vals[mask] - lo) / span * 255).astype(np.uint8)
    write_pgm(path, pix.T[::-1, :])
    meta = {"encoding": "value = lo + pixel * (hi - lo) / 255", "lo": lo, "hi": hi,
            "masked_pixels_value": 0, "h": grid.h, "origin": [float(v) for v in grid.origin],
            "dims": list(grid.shape), "rows": "top row is the largest x_n"}
    _sidecar(path).write_text(json.dumps(meta, indent=2) + "\n")
    return meta


def write_classification_csv(path, records, values=None, dim: int | None = None) -> None:
    """One row per boundary record: coordinates, class, partner coordinates (blank if none), H."""
    if dim is None:
        dim = len(records[0].position) if records else 2
    names = _coord_names(dim)
    with _text_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["class"] + [f"partner_{c}" for c in names] + ["H"])
        for i, rec in enumerate(records):
            partner = [_fmt(c) for c in rec.partner] if rec.partner is not None else [""] * dim
            hv = _fmt(values[i]) if values is not None else ""
            w.writerow([_fmt(c) for c in rec.position] + [rec.kind.value] + partner + [hv])
