import numpy as np
import pytest
from PIL import Image


def write_images(root, spec):
    """spec: {class_name: n_images}; writes small deterministic PNGs."""
    rng = np.random.default_rng(42)
    for name, count in spec.items():
        folder = root / name
        folder.mkdir(parents=True)
        for i in range(count):
            pixels = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
            Image.fromarray(pixels).save(folder / f"img{i:03d}.png")


@pytest.fixture(scope="session")
def image_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("images")
    write_images(root, {"boat": 3, "chair": 4})
    return root
