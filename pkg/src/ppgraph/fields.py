"""Grid-valued fields (heatmaps, feature maps) and their binary file format.

PPGF layout: magic ``PPGF`` | u32 channels | u32 height | u32 width |
f32 stride | C*H*W little-endian f32 values in (channel, row, column) order.
A stride of 0 is the non-spatial sentinel used for serialized score matrices.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

MAGIC = b"PPGF"
_HEADER = struct.Struct("<4sIIIf")


class FieldFormatError(ValueError):
    """Malformed PPGF data or an invalid field construction."""


class PlanarField:
    """C-channel float grid with a stride relating cells to image pixels.

    Grid cell (row i, col j) samples the image at (j*stride, i*stride).
    Heatmaps are the C == 1 case and must stay within [0, 1].
    """

    def __init__(self, values: np.ndarray, stride: float = 4.0):
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 2:
            arr = arr[None, :, :]
        if arr.ndim != 3:
            raise FieldFormatError(f"expected CxHxW values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise FieldFormatError("non-finite field values")
        if stride <= 0:
            raise FieldFormatError(f"stride must be positive, got {stride}")
        self.values = arr
        self.values.setflags(write=False)
        self.stride = float(stride)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def grid_height(self) -> int:
        return self.values.shape[1]

    @property
    def grid_width(self) -> int:
        return self.values.shape[2]

    @property
    def image_width(self) -> int:
        return int(round(self.grid_width * self.stride))

    @property
    def image_height(self) -> int:
        return int(round(self.grid_height * self.stride))

    def is_heatmap(self) -> bool:
        """Single channel with values confined to [0, 1]."""
        if self.channels != 1:
            return False
        return self.values.size == 0 or (self.values.min() >= 0.0 and self.values.max() <= 1.0)

    def same_frame(self, other: "PlanarField") -> bool:
        return (
            self.stride == other.stride
            and self.grid_height == other.grid_height
            and self.grid_width == other.grid_width
        )

    def __repr__(self) -> str:
        return (
            f"PlanarField(C={self.channels}, grid={self.grid_height}x{self.grid_width}, "
            f"stride={self.stride})"
        )


def _write_raw(f: BinaryIO, values: np.ndarray, stride: float) -> None:
    c, h, w = values.shape
    f.write(_HEADER.pack(MAGIC, c, h, w, stride))
    f.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def _read_raw(f: BinaryIO) -> tuple[np.ndarray, float]:
    head = f.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise FieldFormatError("truncated PPGF header")
    magic, c, h, w, stride = _HEADER.unpack(head)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    count = c * h * w
    body = f.read(4 * count)
    if len(body) != 4 * count:
        raise FieldFormatError("truncated PPGF payload")
    values = np.frombuffer(body, dtype="<f4").reshape(c, h, w).astype(float)
    return values, float(stride)


def save_field(field: PlanarField, path) -> None:
    with open(path, "wb") as f:
        _write_raw(f, field.values, field.stride)


def load_field(path) -> PlanarField:
    with open(path, "rb") as f:
        values, stride = _read_raw(f)
    if stride <= 0:
        raise FieldFormatError("field file has non-spatial stride; use load_matrix")
    return PlanarField(values, stride)


def save_matrix(matrix: np.ndarray, path) -> None:
    """Square matrix in PPGF with the stride-0 sentinel."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise FieldFormatError(f"expected KxK matrix, got {m.shape}")
    with open(path, "wb") as f:
        _write_raw(f, m[None, :, :], 0.0)


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as f:
        values, stride = _read_raw(f)
    if stride != 0.0:
        raise FieldFormatError("matrix file must carry the stride-0 sentinel")
    if values.shape[0] != 1 or values.shape[1] != values.shape[2]:
        raise FieldFormatError(f"expected 1xKxK payload, got {values.shape}")
    return values[0]
