"""Export per-image backbone features from a labeled image folder.

The folder layout is one subfolder per class. Classes are indexed by
sorted subfolder name and rows are ordered lexicographically by
(class, filename), so repeated exports of the same folder agree row for
row. Undecodable images are skipped with a warning and recorded in the
sidecar manifest; the manifest's row list reconciles exactly with the
emitted FMX/LBL files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import transforms

from .backbones import load_backbone
from .errors import NoImages
from .wire import _atomic_write, write_fmx, write_lbl

_BATCH = 32

_PREPROCESS = transforms.Compose(
    [
        transforms.Resize(256),
        transforms.CenterCrop(224),
        transforms.ToTensor(),
        transforms.Normalize(
            mean=[0.485, 0.456, 0.406], std=[0.229, 0.224, 0.225]
        ),
    ]
)


def _scan_folder(image_dir: Path):
    """Sorted (class_name, class_index, path) triples for every file."""
    class_dirs = sorted(p for p in image_dir.iterdir() if p.is_dir())
    entries = []
    for index, class_dir in enumerate(class_dirs):
        for path in sorted(p for p in class_dir.iterdir() if p.is_file()):
            entries.append((class_dir.name, index, path))
    return [d.name for d in class_dirs], entries


def export_features(image_dir, backbone_name: str, output_dir) -> dict:
    """Extract penultimate features for every decodable image.

    Writes ``features.fmx``, ``labels.lbl`` and ``manifest.json`` into
    ``output_dir`` and returns the manifest dictionary.
    """
    image_dir = Path(image_dir)
    output_dir = Path(output_dir)
    if not image_dir.is_dir():
        raise NoImages(f"{image_dir} is not a directory")
    class_names, entries = _scan_folder(image_dir)

    model, feature_dim, provenance = load_backbone(backbone_name)

    rows: list[dict] = []
    skipped: list[dict] = []
    tensors: list[torch.Tensor] = []
    labels: list[int] = []
    for class_name, class_index, path in entries:
        try:
            with Image.open(path) as img:
                tensor = _PREPROCESS(img.convert("RGB"))
        except Exception as exc:
            print(f"warning: skipping undecodable image {path}: {exc}", file=sys.stderr)
            skipped.append({"file": str(path), "reason": str(exc)})
            continue
        rows.append({"index": len(rows), "file": str(path), "class": class_name})
        tensors.append(tensor)
        labels.append(class_index)

    if not rows:
        raise NoImages(f"{image_dir} contains no decodable images in class subfolders")

    features = np.empty((len(tensors), feature_dim), dtype=np.float64)
    with torch.no_grad():
        for start in range(0, len(tensors), _BATCH):
            batch = torch.stack(tensors[start : start + _BATCH])
            out = model(batch)
            features[start : start + batch.shape[0]] = out.double().numpy()

    output_dir.mkdir(parents=True, exist_ok=True)
    write_fmx(output_dir / "features.fmx", features)
    write_lbl(output_dir / "labels.lbl", np.array(labels), n_classes=len(class_names))
    manifest = {
        "backbone": backbone_name,
        "weights": provenance,
        "feature_dim": feature_dim,
        "classes": class_names,
        "n_rows": len(rows),
        "rows": rows,
        "skipped": skipped,
    }
    _atomic_write(
        output_dir / "manifest.json",
        (json.dumps(manifest, indent=2) + "\n").encode("utf-8"),
    )
    return manifest
