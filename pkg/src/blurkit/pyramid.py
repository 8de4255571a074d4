"""Desk-scale three-level feature pyramid with fuzzy enhancement.

The backbone is a fixed Gaussian + 2x decimation stack: deterministic,
training-free, and sufficient to exercise every gate/fusion property. The
upper and middle levels get fuzzy enhancement through the transparency gate;
the lowest (highest-resolution) level passes through untouched so small-
target detail is never disturbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blur import GaussianSpec, gaussian_filter
from .fusion import (DrsGate, alpha_clamp, blur_level_estimate, fuse,
                     synthesize_fuzzy_feature, transparency_map)
from .tensor import Tensor4D

LEVEL_TAGS = ("lower", "middle", "upper")
LEVEL_STRIDES = (8, 16, 32)
_DECIMATION_SIGMA = 1.0


@dataclass(frozen=True)
class PyramidLevels:
    """Ordered levels at strides 8/16/32 of the source image, tagged
    lower/middle/upper by semantic depth (lower = highest resolution)."""

    levels: tuple[Tensor4D, ...]
    tags: tuple[str, ...] = LEVEL_TAGS
    strides: tuple[int, ...] = LEVEL_STRIDES

    def __post_init__(self):
        if len(self.levels) < 3:
            raise ValueError("pyramid needs at least 3 levels")
        if len(self.tags) != len(self.levels) or len(self.strides) != len(self.levels):
            raise ValueError("tags/strides must match level count")
        for prev, cur in zip(self.levels, self.levels[1:]):
            ph, pw = prev.dims[2:]
            ch, cw = cur.dims[2:]
            if ch != -(-ph // 2) or cw != -(-pw // 2):
                raise ValueError(
                    f"level dims {ch}x{cw} are not the ceil-half of {ph}x{pw}")


def _decimate(plane: np.ndarray, workers: int = 1) -> np.ndarray:
    """Gaussian pre-filter then keep every second row/column (ceil sizes)."""
    smoothed = gaussian_filter(plane, GaussianSpec(sigma=_DECIMATION_SIGMA), workers)
    return smoothed[::2, ::2]


def channel_gains(channels: int) -> np.ndarray:
    """Fixed per-channel gains used to replicate a plane into C channels."""
    return np.linspace(0.5, 1.5, channels, dtype=np.float64)


def build_pyramid(image: np.ndarray, channels: int = 4,
                  workers: int = 1) -> PyramidLevels:
    """Three levels at strides 8/16/32 from a single plane >= 32x32."""
    plane = np.asarray(image, dtype=np.float32)
    if plane.ndim != 2:
        raise ValueError(f"expected a single plane, got shape {plane.shape}")
    if min(plane.shape) < 32:
        raise ValueError(f"input must be at least 32x32, got {plane.shape}")
    if channels < 1:
        raise ValueError(f"channels must be >= 1, got {channels}")

    current = plane
    for _ in range(3):  # stride 1 -> 8
        current = _decimate(current, workers)

    gains = channel_gains(channels)
    levels = []
    for _ in range(3):
        stack = np.stack([(gains[c] * current.astype(np.float64)).astype(np.float32)
                          for c in range(channels)])
        levels.append(Tensor4D(stack[None]))
        current = _decimate(current, workers)
    return PyramidLevels(tuple(levels))


def dfrc_enhance(pyramid: PyramidLevels, gate: DrsGate, angles: list[float],
                 mode: str = "bilinear", workers: int = 1) -> PyramidLevels:
    """Fuzzy-enhance the middle and upper levels; pass the lowest level
    through bit-identically."""
    enhanced = []
    for level, tag in zip(pyramid.levels, pyramid.tags):
        if tag == "lower":
            enhanced.append(level)
            continue
        p = transparency_map(level, gate)
        score = float(blur_level_estimate(level)[0]) if level.dims[0] == 1 else \
            float(blur_level_estimate(level).mean())
        p = alpha_clamp(p, score, gate)
        fuzzy = synthesize_fuzzy_feature(level, angles, mode=mode, workers=workers)
        enhanced.append(fuse(p, fuzzy, level))
    return PyramidLevels(tuple(enhanced), pyramid.tags, pyramid.strides)


def attention_spread(feature: Tensor4D, quantile: float,
                     reference: Tensor4D | None = None) -> float:
    """Fraction of pixels whose channel-mean magnitude strictly exceeds the
    given quantile of the reference map (the feature's own map by default).

    Computed per batch item and averaged; for B=1 this is the plain fraction.
    """
    if not 0.0 < quantile < 1.0:
        raise ValueError(f"quantile must be in (0, 1), got {quantile}")
    heat = np.abs(feature.data.astype(np.float64)).mean(axis=1)
    ref = heat if reference is None else \
        np.abs(reference.data.astype(np.float64)).mean(axis=1)
    if ref.shape[0] != heat.shape[0]:
        raise ValueError("reference batch size must match feature batch size")
    fracs = []
    for b in range(heat.shape[0]):
        threshold = np.quantile(ref[b], quantile)
        fracs.append(float((heat[b] > threshold).mean()))
    return float(np.mean(fracs))
