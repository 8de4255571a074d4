"""Blur synthesis: Gaussian scale-space filtering, boundary-safe box blur,
and directional motion-blur kernels.

All kernels share one boundary policy: the neighborhood sum is renormalized
over the taps that land in-bounds, so edge and corner pixels average fewer
samples instead of reading outside the image. The 8-bit box path keeps pure
integer arithmetic (floor division by the in-bounds count); float paths
accumulate in float64 and return float32.

Per output element the taps are always accumulated in the same fixed order,
so chunking rows across worker threads cannot change a single bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import ImageU8, parallel_rows, resolve_workers

Tap = tuple[int, int, float]


@dataclass(frozen=True)
class GaussianSpec:
    """Isotropic Gaussian blur: scale sigma, kernel half-width radius.

    radius defaults to ceil(3 * sigma), which keeps the truncated mass
    below 0.3%.
    """

    sigma: float
    radius: int | None = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        radius = self.radius if self.radius is not None else math.ceil(3 * self.sigma)
        if radius < 1:
            raise ValueError(f"radius must be >= 1, got {radius}")
        object.__setattr__(self, "radius", int(radius))


@dataclass(frozen=True)
class BoxBlurSpec:
    """Square mean filter of side 2 * radius + 1."""

    radius: int = 1

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")


@dataclass(frozen=True)
class MotionBlurSpec:
    """Linear motion blur: displacement length in pixels along angle (degrees)."""

    length: int
    angle: float = 0.0

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")
        object.__setattr__(self, "angle", float(self.angle) % 360.0)


def gaussian_weight(x: float, y: float, sigma: float) -> float:
    """Unnormalized 2D Gaussian (1 / 2 pi sigma^2) exp(-(x^2+y^2) / 2 sigma^2)."""
    return math.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


def gaussian_kernel(spec: GaussianSpec, normalized: bool = True) -> np.ndarray:
    """(2r+1) x (2r+1) weight grid; normalized grids sum to 1."""
    r = spec.radius
    ys, xs = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    grid = np.exp(-(xs * xs + ys * ys) / (2.0 * spec.sigma ** 2))
    grid /= 2.0 * math.pi * spec.sigma ** 2
    if normalized:
        grid /= grid.sum()
    return grid


def _accumulate_taps(src: np.ndarray, taps: list[Tap], h0: int, h1: int,
                     num: np.ndarray, den: np.ndarray) -> None:
    """Add weight * src[r+dy, c+dx] over in-bounds taps into num/den rows [h0, h1)."""
    H, W = src.shape
    for dy, dx, wt in taps:
        r0 = max(h0, -dy)
        r1 = min(h1, H - dy)
        if r1 <= r0:
            continue
        c0 = max(0, -dx)
        c1 = min(W, W - dx)
        if c1 <= c0:
            continue
        num[r0 - h0:r1 - h0, c0:c1] += wt * src[r0 + dy:r1 + dy, c0 + dx:c1 + dx]
        den[r0 - h0:r1 - h0, c0:c1] += wt


def _filter_plane_float(plane: np.ndarray, taps: list[Tap], workers: int) -> np.ndarray:
    src = np.asarray(plane, dtype=np.float64)
    H, W = src.shape
    out = np.empty((H, W), dtype=np.float32)

    def chunk(h0: int, h1: int) -> None:
        num = np.zeros((h1 - h0, W), dtype=np.float64)
        den = np.zeros((h1 - h0, W), dtype=np.float64)
        _accumulate_taps(src, taps, h0, h1, num, den)
        out[h0:h1] = (num / den).astype(np.float32)

    parallel_rows(H, resolve_workers(workers), chunk)
    return out


def _filter_plane_u8(plane: np.ndarray, taps: list[Tap], workers: int,
                     integer: bool) -> np.ndarray:
    """8-bit path: floor division for unit-weight taps, round-half-even otherwise."""
    H, W = plane.shape
    out = np.empty((H, W), dtype=np.uint8)
    if integer:
        src = plane.astype(np.int64)

        def chunk(h0: int, h1: int) -> None:
            num = np.zeros((h1 - h0, W), dtype=np.int64)
            den = np.zeros((h1 - h0, W), dtype=np.int64)
            _accumulate_taps(src, [(dy, dx, 1) for dy, dx, _ in taps], h0, h1, num, den)
            out[h0:h1] = (num // den).astype(np.uint8)
    else:
        src = plane.astype(np.float64)

        def chunk(h0: int, h1: int) -> None:
            num = np.zeros((h1 - h0, W), dtype=np.float64)
            den = np.zeros((h1 - h0, W), dtype=np.float64)
            _accumulate_taps(src, taps, h0, h1, num, den)
            out[h0:h1] = np.rint(num / den).astype(np.uint8)

    parallel_rows(H, resolve_workers(workers), chunk)
    return out


def _taps_from_kernel(kernel: np.ndarray) -> list[Tap]:
    r_h = kernel.shape[0] // 2
    r_w = kernel.shape[1] // 2
    return [(dy - r_h, dx - r_w, float(kernel[dy, dx]))
            for dy in range(kernel.shape[0]) for dx in range(kernel.shape[1])]


def gaussian_filter(plane: np.ndarray, spec: GaussianSpec, workers: int = 1) -> np.ndarray:
    """Convolve a single float plane with the normalized Gaussian kernel."""
    return _filter_plane_float(plane, _taps_from_kernel(gaussian_kernel(spec)), workers)


def box_blur_boundary_safe(image: ImageU8, spec: BoxBlurSpec, workers: int = 1) -> ImageU8:
    """Boundary-safe neighborhood mean on 8-bit pixels.

    out[r, c] = floor(sum of in-bounds window samples / in-bounds count);
    a radius-1 corner therefore averages exactly 4 pixels.
    """
    r = spec.radius
    taps: list[Tap] = [(dy, dx, 1.0) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]
    planes = [_filter_plane_u8(p, taps, workers, integer=True) for p in image.planes()]
    return ImageU8(np.stack(planes, axis=2))


def box_blur_reference(plane: np.ndarray, radius: int = 1) -> np.ndarray:
    """Serial nested-loop reference for the boundary-safe box blur.

    Deliberately kept as plain Python over one pixel at a time; the fast
    path is validated bit-for-bit against this.
    """
    h = len(plane)
    w = len(plane[0]) if h else 0
    out = [[0] * w for _ in range(h)]
    for row in range(h):
        for col in range(w):
            pix_val = 0
            pixels = 0
            for blur_row in range(-radius, radius + 1):
                for blur_col in range(-radius, radius + 1):
                    cur_row = row + blur_row
                    cur_col = col + blur_col
                    if 0 <= cur_row < h and 0 <= cur_col < w:
                        pix_val += int(plane[cur_row][cur_col])
                        pixels += 1
            out[row][col] = pix_val // pixels
    return np.asarray(out, dtype=np.uint8)


def motion_kernel_taps(spec: MotionBlurSpec) -> list[Tap]:
    """Uniform-weight taps: `length` points on the centered line segment
    along `angle`, rounded to the pixel grid (coincident points merge their
    weight). Rounding is half-to-even, so the tap set is symmetric and
    angle 0 / angle 90 are exact transposes of each other.
    """
    theta = math.radians(spec.angle)
    counts: dict[tuple[int, int], int] = {}
    for i in range(spec.length):
        t = i - (spec.length - 1) / 2.0
        dx = int(np.rint(t * math.cos(theta)))
        dy = int(np.rint(-t * math.sin(theta)))
        counts[(dy, dx)] = counts.get((dy, dx), 0) + 1
    total = spec.length
    return [(dy, dx, n / total) for (dy, dx), n in sorted(counts.items())]


def motion_blur(image, spec: MotionBlurSpec, workers: int = 1):
    """Directional mean blur; accepts a float plane or an ImageU8."""
    taps = motion_kernel_taps(spec)
    if isinstance(image, ImageU8):
        if len(taps) == 1 and taps[0][:2] == (0, 0):
            return image  # single-tap kernel is the identity
        planes = [_filter_plane_u8(p, taps, workers, integer=False)
                  for p in image.planes()]
        return ImageU8(np.stack(planes, axis=2))
    return _filter_plane_float(image, taps, workers)
