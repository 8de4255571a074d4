import numpy as np
import pytest


def synth_image(rng: np.random.Generator, size: int = 64, n_blobs: int = 4) -> np.ndarray:
    """Dark noisy field with a few bright Gaussian blobs, float32 in [0, 255]."""
    img = rng.normal(20, 5, (size, size))
    ys, xs = np.mgrid[0:size, 0:size]
    for _ in range(n_blobs):
        cy, cx = rng.uniform(size * 0.15, size * 0.85, 2)
        r = rng.uniform(size * 0.04, size * 0.1)
        amp = rng.uniform(120, 200)
        img += amp * np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * r * r))
    return np.clip(img, 0, 255).astype(np.float32)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
