"""Walkthrough: the binary wire formats and model persistence.

FMX holds a feature matrix (magic, two u32 dims, float64 little-endian
payload); LBL holds labels (magic, count, class count, u32 payload). Both
round-trip bit-exactly. Fitted models persist as versioned JSON with every
float at 17 significant digits, so reloaded models predict identically.

Run:  python3 demos/05_file_formats.py
"""

import tempfile
from pathlib import Path

import numpy as np

from mcrmix import (
    FeatureMatrix,
    LabelVector,
    fit_ensemble,
    load_model,
    predict,
    read_fmx,
    read_lbl,
    save_model,
    write_fmx,
    write_lbl,
)

workdir = Path(tempfile.mkdtemp(prefix="mcrmix-demo-"))
rng = np.random.default_rng(3)

matrix = FeatureMatrix(rng.standard_normal((4, 3)) * 1e100)
write_fmx(workdir / "demo.fmx", matrix)
blob = (workdir / "demo.fmx").read_bytes()
print(f"FMX file: {len(blob)} bytes, header = {blob[:12].hex()}")
print("round-trip bit-identical:", np.array_equal(read_fmx(workdir / "demo.fmx").data, matrix.data))

labels = LabelVector(np.array([0, 1, 2, 0]), 3)
write_lbl(workdir / "demo.lbl", labels)
print("LBL round-trip:", np.array_equal(read_lbl(workdir / "demo.lbl").labels, labels.labels))

# model persistence: fit a small 2-source ensemble and replay predictions
train_labels = LabelVector(np.repeat([0, 1], 10), 2)
signal = np.where(train_labels.labels == 0, 1.0, -1.0)[:, None]
f1 = FeatureMatrix(signal + 0.3 * rng.standard_normal((20, 1)))
f2 = FeatureMatrix(rng.standard_normal((20, 1)))
model, _ = fit_ensemble([f1, f2], train_labels)
save_model(workdir / "model.json", model)
print()
print("model document head:")
print("\n".join((workdir / "model.json").read_text().splitlines()[:8]))

reloaded = load_model(workdir / "model.json")
probe = [FeatureMatrix(rng.standard_normal((50, 1))) for _ in range(2)]
same = np.array_equal(predict(model, probe).labels, predict(reloaded, probe).labels)
print("reloaded model predicts identically:", same)
print(f"(files under {workdir})")
