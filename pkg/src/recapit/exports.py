"""Derived-file writers: series CSV, heatmap PGM, and a minimal PNG encoder.

All writers are deterministic: identical inputs produce identical bytes
(the PNG encoder uses a fixed zlib level and writes no ancillary chunks).
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .attention import HeatGrid, MultivariateSeries
from .ingest import write_pgm


def format_float(v: float) -> str:
    return f"{v:.9g}"


def write_series_csv(series: MultivariateSeries, path) -> None:
    """Write a binned series as ``t,<aoi1>,...,<aoiM>`` rows (t = bin start)."""
    lines = ["t," + ",".join(series.aoi_ids)]
    for i in range(series.num_bins):
        t = series.start + i * series.bin_width
        row = ",".join(format_float(v) for v in series.values[i])
        lines.append(f"{format_float(t)},{row}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_series_csv(path) -> MultivariateSeries:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = text[0].split(",")
    aoi_ids = tuple(header[1:])
    ts = []
    rows = []
    for line in text[1:]:
        cols = line.split(",")
        ts.append(float(cols[0]))
        rows.append([float(c) for c in cols[1:]])
    values = np.asarray(rows) if rows else np.zeros((0, len(aoi_ids)))
    bin_width = ts[1] - ts[0] if len(ts) > 1 else 1.0
    return MultivariateSeries(bin_width=bin_width, start=ts[0] if ts else 0.0,
                              values=values, aoi_ids=aoi_ids)


def write_heatmap_pgm(grid: HeatGrid, path) -> None:
    """8-bit PGM of a heat grid: value * 255, rounded."""
    write_pgm(path, np.rint(np.clip(grid.values, 0.0, 1.0) * 255.0).astype(np.uint8))


# ---------------------------------------------------------------------------
# PNG (stdlib-only, deterministic)
# ---------------------------------------------------------------------------

def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (struct.pack(">I", len(payload)) + tag + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF))


def encode_png(image: np.ndarray) -> bytes:
    """Encode a (h, w) grayscale or (h, w, 3) RGB uint8 array as PNG bytes."""
    image = np.asarray(image)
    if image.dtype != np.uint8:
        image = np.rint(np.clip(image, 0, 255)).astype(np.uint8)
    if image.ndim == 2:
        color_type = 0
        h, w = image.shape
        raw = b"".join(b"\x00" + image[r].tobytes() for r in range(h))
    elif image.ndim == 3 and image.shape[2] == 3:
        color_type = 2
        h, w = image.shape[:2]
        raw = b"".join(b"\x00" + image[r].tobytes() for r in range(h))
    else:
        raise ValueError(f"unsupported image shape {image.shape}")
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n"
            + _chunk(b"IHDR", ihdr)
            + _chunk(b"IDAT", zlib.compress(raw, 6))
            + _chunk(b"IEND", b""))
