"""Bit-exact file formats: FMX feature matrices, LBL label vectors, and the
versioned JSON model document.

Wire layout (all integers unsigned 32-bit little-endian):

* FMX: magic ``FMX1`` | n_rows | n_cols | row-major IEEE-754 binary64
  little-endian payload. n_rows * n_cols is capped at 2^31.
* LBL: magic ``LBL1`` | n | n_classes | n unsigned 32-bit labels.

Readers are strict: wrong magic raises BadMagic, and any payload size
other than exactly what the header claims raises TruncatedFile. The model
document is JSON with every float written at 17 significant digits, which
round-trips IEEE-754 doubles exactly; ``format_version`` is checked on
load.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .classifier import ClassEmbeddings, FittedEnsembleModel
from .errors import (
    BadMagic,
    LabelOutOfRange,
    MalformedDocument,
    McrmixError,
    NonNumericCell,
    OversizeMatrix,
    RaggedRows,
    SchemaVersionMismatch,
    TruncatedFile,
)
from .features import FeatureMatrix, LabelVector, WhitenTransform
from .optimizer import EnsembleWeights

FMX_MAGIC = b"FMX1"
LBL_MAGIC = b"LBL1"
MAX_CELLS = 2**31
MODEL_FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sII")


def write_fmx(path, matrix: FeatureMatrix) -> None:
    """Write a feature matrix in the FMX wire format."""
    n, d = matrix.n_samples, matrix.dim
    if n * d > MAX_CELLS:
        raise OversizeMatrix(f"{n}x{d} exceeds the format limit of {MAX_CELLS} cells")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FMX_MAGIC, n, d))
        fh.write(np.ascontiguousarray(matrix.data, dtype="<f8").tobytes())


def read_fmx(path) -> FeatureMatrix:
    """Read an FMX file back; bit-identical to what was written."""
    blob = Path(path).read_bytes()
    if blob[:4] != FMX_MAGIC:
        raise BadMagic(f"{path} does not start with {FMX_MAGIC!r}")
    if len(blob) < _HEADER.size:
        raise TruncatedFile(f"{path} ends inside the header")
    _, n, d = _HEADER.unpack_from(blob)
    if n * d > MAX_CELLS:
        raise OversizeMatrix(f"{path} declares {n}x{d}, over the {MAX_CELLS}-cell limit")
    expected = _HEADER.size + 8 * n * d
    if len(blob) < expected:
        raise TruncatedFile(
            f"{path} declares {n}x{d} but holds only {len(blob) - _HEADER.size} payload bytes"
        )
    if len(blob) > expected:
        raise TruncatedFile(f"{path} has {len(blob) - expected} unexpected trailing bytes")
    data = np.frombuffer(blob, dtype="<f8", count=n * d, offset=_HEADER.size)
    return FeatureMatrix(data.reshape(n, d))


def write_lbl(path, labels: LabelVector) -> None:
    """Write a label vector in the LBL wire format."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(LBL_MAGIC, len(labels), labels.n_classes))
        fh.write(labels.labels.astype("<u4").tobytes())


def read_lbl(path) -> LabelVector:
    """Read an LBL file back; labels are range-checked against the header."""
    blob = Path(path).read_bytes()
    if blob[:4] != LBL_MAGIC:
        raise BadMagic(f"{path} does not start with {LBL_MAGIC!r}")
    if len(blob) < _HEADER.size:
        raise TruncatedFile(f"{path} ends inside the header")
    _, n, n_classes = _HEADER.unpack_from(blob)
    expected = _HEADER.size + 4 * n
    if len(blob) < expected:
        raise TruncatedFile(
            f"{path} declares {n} labels but holds only {len(blob) - _HEADER.size} payload bytes"
        )
    if len(blob) > expected:
        raise TruncatedFile(f"{path} has {len(blob) - expected} unexpected trailing bytes")
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=_HEADER.size).astype(np.int64)
    if labels.size and labels.max() >= n_classes:
        raise LabelOutOfRange(
            f"{path} contains label {labels.max()} with n_classes={n_classes}"
        )
    return LabelVector(labels=labels, n_classes=n_classes)


def _fmt(x: float) -> str:
    # 17 significant digits round-trip any finite binary64 exactly
    return format(float(x), ".17g")


def _emit(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        inner = ",\n".join(
            f"{pad}  {json.dumps(key)}: {_emit(value, indent + 1)}"
            for key, value in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_emit(value, indent) for value in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _matrix(a: np.ndarray) -> list:
    return [[float(x) for x in row] for row in np.asarray(a, dtype=np.float64)]


def _vector(a: np.ndarray) -> list:
    return [float(x) for x in np.asarray(a, dtype=np.float64)]


def save_model(path, model: FittedEnsembleModel) -> None:
    """Persist a fitted model as a human-readable versioned JSON document."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "n_sources": model.n_sources,
        "feature_dim": model.feature_dim,
        "n_classes": model.n_classes,
        "objective_used": model.objective_used,
        "h_score_final": float(model.h_score_final),
        "alpha": _vector(model.alpha.alpha),
        "whiteners": [
            {
                "mean": _vector(w.mean),
                "transform": _matrix(w.transform),
                "ridge": float(w.ridge),
            }
            for w in model.whiteners
        ],
        "embeddings": {
            "g": _matrix(model.embeddings.g),
            "priors": _vector(model.embeddings.priors),
        },
    }
    Path(path).write_text(_emit(doc) + "\n", encoding="utf-8")


def load_model(path) -> FittedEnsembleModel:
    """Load a model document; predictions after a round-trip are bit-identical."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise MalformedDocument(f"{path} has no format_version field")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise SchemaVersionMismatch(
            f"{path} has format_version {doc['format_version']}, "
            f"this reader supports {MODEL_FORMAT_VERSION}"
        )
    try:
        whiteners = tuple(
            WhitenTransform(
                mean=np.array(w["mean"], dtype=np.float64),
                transform=np.array(w["transform"], dtype=np.float64),
                ridge=float(w["ridge"]),
            )
            for w in doc["whiteners"]
        )
        return FittedEnsembleModel(
            alpha=EnsembleWeights(np.array(doc["alpha"], dtype=np.float64)),
            whiteners=whiteners,
            embeddings=ClassEmbeddings(
                g=np.array(doc["embeddings"]["g"], dtype=np.float64),
                priors=np.array(doc["embeddings"]["priors"], dtype=np.float64),
            ),
            n_sources=int(doc["n_sources"]),
            feature_dim=int(doc["feature_dim"]),
            n_classes=int(doc["n_classes"]),
            objective_used=str(doc["objective_used"]),
            h_score_final=float(doc["h_score_final"]),
        )
    except (KeyError, TypeError, ValueError, McrmixError) as exc:
        raise MalformedDocument(f"{path} failed validation: {exc}") from exc


def read_csv_features(path) -> FeatureMatrix:
    """Comma-separated numeric rows, no header. Blank lines are ignored."""
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise RaggedRows(
                    f"{path}:{lineno} has {len(cells)} cells, expected {width}"
                )
            parsed = []
            for col, cell in enumerate(cells):
                try:
                    parsed.append(float(cell))
                except ValueError as exc:
                    raise NonNumericCell(
                        f"{path}:{lineno} column {col + 1}: {cell!r} is not numeric"
                    ) from exc
            rows.append(parsed)
    if not rows:
        raise MalformedDocument(f"{path} contains no data rows")
    return FeatureMatrix(np.array(rows, dtype=np.float64))
