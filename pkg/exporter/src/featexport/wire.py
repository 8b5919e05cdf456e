"""Writers for the FMX/LBL wire formats consumed by the mcrmix toolkit.

Layout (integers are unsigned 32-bit little-endian):

* FMX: magic ``FMX1`` | n_rows | n_cols | row-major float64 LE payload
* LBL: magic ``LBL1`` | n | n_classes | n u32 labels

Files are written atomically (temp file in the target directory, then
rename), so readers never observe a partial file.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sII")
MAX_CELLS = 2**31


def _atomic_write(path, payload: bytes) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_fmx(path, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    if matrix.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {matrix.shape}")
    n, d = matrix.shape
    if n * d > MAX_CELLS:
        raise ValueError(f"{n}x{d} exceeds the format limit of {MAX_CELLS} cells")
    _atomic_write(path, _HEADER.pack(b"FMX1", n, d) + matrix.tobytes())


def write_lbl(path, labels: np.ndarray, n_classes: int) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be a vector")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    payload = _HEADER.pack(b"LBL1", labels.size, n_classes) + labels.astype("<u4").tobytes()
    _atomic_write(path, payload)
