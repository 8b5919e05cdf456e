import numpy as np
import pytest
from PIL import Image


def make_toy_folder(root, per_class=10, size=64, seed=0):
    """Two visually distinct classes: red-dominated vs blue-dominated tiles."""
    rng = np.random.default_rng(seed)
    palettes = {"apples": (200, 30, 30), "sky": (30, 60, 200)}
    for class_name, base in palettes.items():
        class_dir = root / class_name
        class_dir.mkdir(parents=True)
        for i in range(per_class):
            pixels = np.clip(
                np.array(base) + rng.integers(-40, 40, (size, size, 3)), 0, 255
            ).astype(np.uint8)
            Image.fromarray(pixels).save(class_dir / f"img_{i:03d}.png")
    return root


@pytest.fixture
def toy_images(tmp_path):
    return make_toy_folder(tmp_path / "images")
