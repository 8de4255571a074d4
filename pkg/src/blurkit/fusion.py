"""Transparency-gated fuzzy-feature fusion.

A gate projects a feature tensor to a per-pixel transparency weight P in
[0, 1], a blur-level statistic picks one of two fixed alpha intervals to
clamp P into, fuzzy features are synthesized by averaging interpolated
rotations, and the output is the convex blend O = P * T + (1 - P) * I.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blur import _filter_plane_float
from .rotate import RotationSpec, rotate
from .tensor import Tensor4D, global_avg_pool

SQUASH_MODES = ("sigmoid", "clamp")


@dataclass(frozen=True)
class TransparencyMap:
    """Per-pixel fusion weight, B x 1 x H x W, every element in [0, 1]."""

    grid: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.grid, dtype=np.float32)
        if arr.ndim != 4 or arr.shape[1] != 1:
            raise ValueError(f"transparency grid must be Bx1xHxW, got {arr.shape}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("transparency values must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", arr)


@dataclass(frozen=True)
class DrsGate:
    """Gate parameters: pooled-descriptor weights, 1x1 projection, squash onto
    [0, 1], the two alpha clamp intervals and the blur-score threshold.

    Parameters are configuration, not learned; defaults make P depend on the
    plain channel mean (uniform projection, zero pooled modulation).
    """

    proj_weights: np.ndarray
    proj_bias: float = 0.0
    pool_weights: np.ndarray | None = None
    squash: str = "sigmoid"
    alpha_high: tuple[float, float] = (0.6, 0.8)
    alpha_low: tuple[float, float] = (0.2, 0.4)
    blur_threshold: float = 0.5

    def __post_init__(self):
        proj = np.ascontiguousarray(self.proj_weights, dtype=np.float64).reshape(-1)
        pool = (np.zeros_like(proj) if self.pool_weights is None
                else np.ascontiguousarray(self.pool_weights, dtype=np.float64).reshape(-1))
        if pool.shape != proj.shape:
            raise ValueError("pool_weights and proj_weights must have equal length")
        if self.squash not in SQUASH_MODES:
            raise ValueError(f"squash must be one of {SQUASH_MODES}, got {self.squash!r}")
        for name, (lo, hi) in (("alpha_high", self.alpha_high), ("alpha_low", self.alpha_low)):
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"{name} must be an interval inside [0, 1], got ({lo}, {hi})")
        proj.setflags(write=False)
        pool.setflags(write=False)
        object.__setattr__(self, "proj_weights", proj)
        object.__setattr__(self, "pool_weights", pool)

    @property
    def channels(self) -> int:
        return self.proj_weights.shape[0]

    @classmethod
    def default(cls, channels: int) -> "DrsGate":
        return cls(proj_weights=np.full(channels, 1.0 / channels))

    @classmethod
    def from_json(cls, path: str | Path) -> "DrsGate":
        raw = json.loads(Path(path).read_text())
        if "proj_weights" not in raw:
            raise ValueError("gate config must define proj_weights")
        return cls(
            proj_weights=np.asarray(raw["proj_weights"], dtype=np.float64),
            proj_bias=float(raw.get("bias", 0.0)),
            pool_weights=(np.asarray(raw["pool_weights"], dtype=np.float64)
                          if raw.get("pool_weights") is not None else None),
            squash=raw.get("squash", "sigmoid"),
            alpha_high=tuple(raw.get("alpha_high", (0.6, 0.8))),
            alpha_low=tuple(raw.get("alpha_low", (0.2, 0.4))),
            blur_threshold=float(raw.get("blur_threshold", 0.5)),
        )

    def to_json(self) -> str:
        return json.dumps({
            "proj_weights": self.proj_weights.tolist(),
            "bias": self.proj_bias,
            "pool_weights": self.pool_weights.tolist(),
            "squash": self.squash,
            "alpha_high": list(self.alpha_high),
            "alpha_low": list(self.alpha_low),
            "blur_threshold": self.blur_threshold,
        }, indent=2)


def _squash(values: np.ndarray, mode: str) -> np.ndarray:
    if mode == "sigmoid":
        return 1.0 / (1.0 + np.exp(-values))
    return np.clip(values, 0.0, 1.0)


def transparency_map(feature: Tensor4D, gate: DrsGate) -> TransparencyMap:
    """P[b,0,h,w] = squash(sum_c proj[c] * feature[b,c,h,w] + effective bias),
    where the pooled descriptor shifts the bias additively per batch item."""
    B, C, H, W = feature.dims
    if C != gate.channels:
        raise ValueError(f"gate expects {gate.channels} channels, feature has {C}")
    pooled = global_avg_pool(feature)  # (B, C) float64
    bias_eff = gate.proj_bias + pooled @ gate.pool_weights  # (B,)
    lin = np.einsum("bchw,c->bhw", feature.data.astype(np.float64), gate.proj_weights)
    lin += bias_eff[:, None, None]
    return TransparencyMap(_squash(lin, gate.squash)[:, None].astype(np.float32))


def fuse(p: TransparencyMap, t: Tensor4D, i: Tensor4D) -> Tensor4D:
    """Convex blend O = P * T + (1 - P) * I, P broadcast across channels."""
    if t.dims != i.dims:
        raise ValueError(f"T dims {t.dims} != I dims {i.dims}")
    B, C, H, W = t.dims
    if p.grid.shape != (B, 1, H, W):
        raise ValueError(f"P shape {p.grid.shape} incompatible with tensors {t.dims}")
    pg = p.grid.astype(np.float64)
    out = pg * t.data.astype(np.float64) + (1.0 - pg) * i.data.astype(np.float64)
    return Tensor4D(out.astype(np.float32))


def local_mean_plane(plane: np.ndarray, radius: int) -> np.ndarray:
    """Boundary-renormalized box mean of a single plane."""
    taps = [(dy, dx, 1.0) for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1)]
    return _filter_plane_float(plane, taps, workers=1)


def blur_level_estimate(feature: Tensor4D, window: int = 1) -> np.ndarray:
    """Per-batch blur score in [0, 1] from the local means of the channel-mean
    plane: the smoother the plane, the less variance survives outside the
    local means, and the higher the score.

    score = clip(1 - var(plane - local_means) / var(plane), 0, 1); a constant
    plane scores 1 and white noise lands near 0.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    B = feature.dims[0]
    scores = np.empty(B, dtype=np.float64)
    planes = feature.data.astype(np.float64).mean(axis=1)
    for b in range(B):
        plane = planes[b]
        total_var = plane.var()
        if total_var == 0.0:
            scores[b] = 1.0
            continue
        residual = plane - local_mean_plane(plane, window).astype(np.float64)
        scores[b] = float(np.clip(1.0 - residual.var() / total_var, 0.0, 1.0))
    return scores


def alpha_clamp(p: TransparencyMap, blur_score: float, gate: DrsGate) -> TransparencyMap:
    """Clamp P into the high-alpha interval when the blur score reaches the
    gate threshold, else into the low-alpha interval. min/max clamping is
    monotone, so within-interval ordering of P is preserved."""
    if not 0.0 <= blur_score <= 1.0:
        raise ValueError(f"blur_score must be in [0, 1], got {blur_score}")
    lo, hi = gate.alpha_high if blur_score >= gate.blur_threshold else gate.alpha_low
    return TransparencyMap(np.clip(p.grid, np.float32(lo), np.float32(hi)))


def synthesize_fuzzy_feature(feature: Tensor4D, angles: list[float],
                             mode: str = "bilinear", workers: int = 1) -> Tensor4D:
    """Per channel plane, the mean of its rotations over the given angles
    (renormalized-boundary rotation, same shape)."""
    if not angles:
        raise ValueError("angles must be non-empty")
    B, C, H, W = feature.dims
    out = np.zeros((B, C, H, W), dtype=np.float64)
    for angle in angles:
        spec = RotationSpec(angle=angle, mode=mode)
        for b in range(B):
            for c in range(C):
                out[b, c] += rotate(feature.data[b, c], spec, workers=workers)
    out /= len(angles)
    return Tensor4D(out.astype(np.float32))
