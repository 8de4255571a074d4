"""Inverse-mapping image rotation with three-region boundary handling.

Every output pixel back-rotates to a source coordinate and samples it; no
forward splatting, so each output element is written exactly once and the
parallel path is deterministic under any worker count.

Boundary taxonomy per output sample, decided by the in-bounds support of
the back-rotated point:

- interior (full interpolation neighborhood in-bounds): the requested mode
  at full quality (bicubic uses Catmull-Rom weights);
- edge (partial support): bilinear over the in-bounds cell taps with the
  weights renormalized, which degenerates to 1D interpolation along a
  straight edge;
- no support at all: the fill value.

The serial oracle (`rotate_oracle`) walks pixels one at a time through a
bounds-checked accessor and must agree with the vectorized path bit for bit;
both compute in float64 and round once to float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import BoundsError, parallel_rows, resolve_workers

MODES = ("nearest", "bilinear", "bicubic")

# interpolation support radius per mode, also the classify_region band
MODE_BAND = {"nearest": 1, "bilinear": 1, "bicubic": 2}


@dataclass(frozen=True)
class RotationSpec:
    angle: float
    mode: str = "bilinear"
    fill: float = 0.0
    center: tuple[float, float] | None = None  # (row, col); default image center

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class RegionClass:
    """Boundary class of a grid position: corner, edge (with clipped sides),
    or interior."""

    kind: str  # "corner" | "edge" | "interior"
    sides: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("corner", "edge", "interior"):
            raise ValueError(f"bad region kind {self.kind!r}")


def classify_region(h: int, w: int, dims: tuple[int, int], band: int = 1) -> RegionClass:
    """Classify (h, w) by whether its band-neighborhood fits in-bounds.

    Clipping on two perpendicular sides makes a corner; clipping on any side
    makes an edge; otherwise interior.
    """
    H, W = dims
    if band < 1:
        raise ValueError(f"band must be >= 1, got {band}")
    if not (0 <= h < H and 0 <= w < W):
        raise BoundsError(f"index ({h}, {w}) out of range for dims ({H}, {W})")
    sides = []
    if h - band < 0:
        sides.append("top")
    if h + band > H - 1:
        sides.append("bottom")
    if w - band < 0:
        sides.append("left")
    if w + band > W - 1:
        sides.append("right")
    if not sides:
        return RegionClass("interior")
    vertical = any(s in ("top", "bottom") for s in sides)
    horizontal = any(s in ("left", "right") for s in sides)
    kind = "corner" if (vertical and horizontal) else "edge"
    return RegionClass(kind, tuple(sides))


def _rotation_params(shape: tuple[int, int], spec: RotationSpec):
    H, W = shape
    theta = math.radians(spec.angle)
    cy, cx = spec.center if spec.center is not None else ((H - 1) / 2.0, (W - 1) / 2.0)
    return math.cos(theta), math.sin(theta), cy, cx


def _catrom_weights(t):
    """Catmull-Rom weights for taps at offsets -1, 0, 1, 2."""
    w0 = ((-0.5 * t + 1.0) * t - 0.5) * t
    w1 = (1.5 * t - 2.5) * t * t + 1.0
    w2 = ((-1.5 * t + 2.0) * t + 0.5) * t
    w3 = (0.5 * t - 0.5) * t * t
    return w0, w1, w2, w3


def rotate(plane: np.ndarray, spec: RotationSpec, workers: int = 1) -> np.ndarray:
    """Rotate a single plane about its center (same-size canvas), vectorized
    and row-partitioned across workers."""
    src = np.asarray(plane, dtype=np.float64)
    H, W = src.shape
    cos_a, sin_a, cy, cx = _rotation_params((H, W), spec)
    fill = float(spec.fill)
    out = np.empty((H, W), dtype=np.float32)
    xs = np.arange(W, dtype=np.float64)

    def chunk(h0: int, h1: int) -> None:
        dy = (np.arange(h0, h1, dtype=np.float64) - cy)[:, None]
        dx = (xs - cx)[None, :]
        sy = cy + cos_a * dy + sin_a * dx
        sx = cx - sin_a * dy + cos_a * dx
        y0 = np.floor(sy)
        x0 = np.floor(sx)
        fy = sy - y0
        fx = sx - x0
        y0 = y0.astype(np.int64)
        x0 = x0.astype(np.int64)

        tap_w = ((1.0 - fy) * (1.0 - fx), (1.0 - fy) * fx,
                 fy * (1.0 - fx), fy * fx)
        tap_iy = (y0, y0, y0 + 1, y0 + 1)
        tap_ix = (x0, x0 + 1, x0, x0 + 1)

        def gather(iy, ix):
            # masked lanes use clipped indices: no out-of-bounds access can occur
            return src[np.clip(iy, 0, H - 1), np.clip(ix, 0, W - 1)]

        num = np.zeros_like(sy)
        wsum = np.zeros_like(sy)
        best_w = np.full_like(sy, -1.0)
        best_v = np.zeros_like(sy)
        for wt, iy, ix in zip(tap_w, tap_iy, tap_ix):
            valid = (iy >= 0) & (iy < H) & (ix >= 0) & (ix < W)
            val = gather(iy, ix)
            num = num + np.where(valid, wt * val, 0.0)
            wsum = wsum + np.where(valid, wt, 0.0)
            better = valid & (wt > best_w)
            best_w = np.where(better, wt, best_w)
            best_v = np.where(better, val, best_v)

        supported = wsum > 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            bilinear = np.where(supported, num / np.where(supported, wsum, 1.0), fill)

        if spec.mode == "nearest":
            res = np.where(best_w >= 0.0, best_v, fill)
        elif spec.mode == "bilinear":
            res = bilinear
        else:
            full = ((y0 - 1 >= 0) & (y0 + 2 <= H - 1) &
                    (x0 - 1 >= 0) & (x0 + 2 <= W - 1))
            wy = _catrom_weights(fy)
            wx = _catrom_weights(fx)
            acc = np.zeros_like(sy)
            for i in range(4):
                row = np.zeros_like(sy)
                iy = np.clip(y0 - 1 + i, 0, H - 1)
                for j in range(4):
                    ix = np.clip(x0 - 1 + j, 0, W - 1)
                    row = row + wx[j] * src[iy, ix]
                acc = acc + wy[i] * row
            res = np.where(full, acc, bilinear)

        out[h0:h1] = res.astype(np.float32)

    parallel_rows(H, resolve_workers(workers), chunk)
    return out


def rotate_oracle(plane: np.ndarray, spec: RotationSpec, reader=None) -> np.ndarray:
    """Single-worker nested-loop reference, identical contract to `rotate`.

    Every source access goes through `reader(y, x)`; the default raises on
    any out-of-bounds coordinate. Tests may pass a recording reader.
    """
    src = np.asarray(plane, dtype=np.float64)
    H, W = src.shape
    if reader is None:
        def reader(y: int, x: int) -> float:
            if not (0 <= y < H and 0 <= x < W):
                raise BoundsError(f"out-of-bounds read at ({y}, {x})")
            return src[y, x]

    cos_a, sin_a, cy, cx = _rotation_params((H, W), spec)
    fill = float(spec.fill)
    out = np.empty((H, W), dtype=np.float32)

    for h in range(H):
        dy = h - cy
        for w in range(W):
            dx = w - cx
            sy = cy + cos_a * dy + sin_a * dx
            sx = cx - sin_a * dy + cos_a * dx
            y0f = math.floor(sy)
            x0f = math.floor(sx)
            fy = sy - y0f
            fx = sx - x0f
            y0 = int(y0f)
            x0 = int(x0f)

            taps = (((1.0 - fy) * (1.0 - fx), y0, x0),
                    ((1.0 - fy) * fx, y0, x0 + 1),
                    (fy * (1.0 - fx), y0 + 1, x0),
                    (fy * fx, y0 + 1, x0 + 1))
            num = 0.0
            wsum = 0.0
            best_w = -1.0
            best_v = 0.0
            for wt, iy, ix in taps:
                if 0 <= iy < H and 0 <= ix < W:
                    val = reader(iy, ix)
                    num = num + wt * val
                    wsum = wsum + wt
                    if wt > best_w:
                        best_w = wt
                        best_v = val
                else:
                    num = num + 0.0
                    wsum = wsum + 0.0

            if spec.mode == "nearest":
                res = best_v if best_w >= 0.0 else fill
            elif spec.mode == "bilinear" or wsum <= 0.0:
                res = num / wsum if wsum > 0.0 else fill
            else:
                full = (y0 - 1 >= 0 and y0 + 2 <= H - 1 and
                        x0 - 1 >= 0 and x0 + 2 <= W - 1)
                if full:
                    wy = _catrom_weights(fy)
                    wx = _catrom_weights(fx)
                    acc = 0.0
                    for i in range(4):
                        row = 0.0
                        for j in range(4):
                            row = row + wx[j] * reader(y0 - 1 + i, x0 - 1 + j)
                        acc = acc + wy[i] * row
                    res = acc
                else:
                    res = num / wsum if wsum > 0.0 else fill
            out[h, w] = np.float32(res)

    return out
