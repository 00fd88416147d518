"""Binary wave-field snapshots with a bit-exact roundtrip.

Layout: 16-byte magic "CONTACTLAB-FLD1\\0", then little-endian u32 m and
f64 side, then m^3 complex128 values as interleaved f64 pairs with the x
index varying fastest.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .fields import WaveField
from .grids import BoxGrid3D

MAGIC = b"CONTACTLAB-FLD1\x00"
_HEADER = struct.Struct("<Id")


def write_field(field: WaveField, path) -> None:
    grid = field.grid
    values = np.ascontiguousarray(field.values.astype("<c16", copy=False))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(grid.m, grid.side))
        fh.write(values.ravel(order="F").tobytes())


def read_field(path) -> WaveField:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise FormatError(f"bad magic in {path}: not a field snapshot")
    offset = len(MAGIC)
    if len(blob) < offset + _HEADER.size:
        raise FormatError(f"truncated header in {path}")
    m, side = _HEADER.unpack_from(blob, offset)
    if m < 1 or m & (m - 1):
        raise FormatError(f"grid size m={m} is not a power of two")
    expected = offset + _HEADER.size + 16 * m**3
    if len(blob) != expected:
        raise FormatError(
            f"truncated field file {path}: expected {expected} bytes, got {len(blob)}"
        )
    flat = np.frombuffer(blob, dtype="<c16", offset=offset + _HEADER.size)
    values = flat.reshape((m, m, m), order="F")
    grid = BoxGrid3D(m=m, side=side)
    return WaveField(grid=grid, values=values.astype(np.complex128))
