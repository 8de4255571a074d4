"""Dense 4D tensors, index arithmetic and the deterministic parallel map.

Everything downstream (blur kernels, rotation, fusion) is built on two
guarantees made here:

- layout is fixed row-major B, C, H, W (w fastest), no views or strides;
- parallel execution partitions *output rows* across workers, each output
  element is computed independently, so results are bit-identical for any
  worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

WORKERS_ENV_VAR = "BLURKIT_WORKERS"

_AXES = ("b", "c", "h", "w")


class BoundsError(IndexError):
    """Raised when a tensor index falls outside its dimension."""


@dataclass(frozen=True)
class Tensor4D:
    """Dense B x C x H x W grid of 32-bit floats, row-major, immutable."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 4:
            raise ValueError(f"Tensor4D needs 4 dims, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"all dims must be >= 1, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def flat(self) -> np.ndarray:
        """Row-major flat view; flat[linear_index(b,c,h,w)] == data[b,c,h,w]."""
        return self.data.reshape(-1)


@dataclass(frozen=True)
class ImageU8:
    """8-bit interleaved image, 1 (gray) or 3 (RGB) channels."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data)
        if arr.dtype != np.uint8:
            raise ValueError(f"ImageU8 needs uint8 samples, got {arr.dtype}")
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"ImageU8 needs HxWx{{1,3}} data, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def planes(self) -> list[np.ndarray]:
        return [self.data[:, :, k] for k in range(self.channels)]


def linear_index(b: int, c: int, h: int, w: int,
                 dims: Sequence[int]) -> int:
    """Flat row-major offset of (b, c, h, w); bijective over the index cube."""
    B, C, H, W = dims
    for name, idx, bound in zip(_AXES, (b, c, h, w), (B, C, H, W)):
        if not 0 <= idx < bound:
            raise BoundsError(f"axis {name}: index {idx} out of range [0, {bound})")
    return ((b * C + c) * H + h) * W + w


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit arg, else BLURKIT_WORKERS, else CPU count."""
    if workers is not None:
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        return workers
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def row_chunks(n_rows: int, workers: int) -> list[tuple[int, int]]:
    """Split [0, n_rows) into <= workers contiguous, non-empty chunks."""
    workers = min(max(workers, 1), max(n_rows, 1))
    bounds = np.linspace(0, n_rows, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def parallel_rows(n_rows: int, workers: int,
                  chunk_fn: Callable[[int, int], None]) -> None:
    """Run chunk_fn(h0, h1) over disjoint row ranges, possibly on threads.

    chunk_fn must write only rows [h0, h1) of its output; under that contract
    the result cannot depend on the worker count.
    """
    chunks = row_chunks(n_rows, workers)
    if len(chunks) <= 1:
        for h0, h1 in chunks:
            chunk_fn(h0, h1)
        return
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(chunk_fn, h0, h1) for h0, h1 in chunks]
        for fut in futures:
            fut.result()


def par_map_pixels(inp: Tensor4D,
                   f: Callable[[int, int, int, int, np.ndarray], float],
                   workers: int = 1) -> Tensor4D:
    """Data-parallel per-element map: out[b,c,h,w] = f(b, c, h, w, input).

    f must be pure (read the input array only). Output rows are partitioned
    across workers; each element is written exactly once, so the result is
    bit-identical for every worker count.
    """
    B, C, H, W = inp.dims
    src = inp.data
    out = np.empty((B, C, H, W), dtype=np.float32)

    def chunk(h0: int, h1: int) -> None:
        for b in range(B):
            for c in range(C):
                for h in range(h0, h1):
                    row = out[b, c, h]
                    for w in range(W):
                        row[w] = f(b, c, h, w, src)

    parallel_rows(H, resolve_workers(workers), chunk)
    return Tensor4D(out)


def global_avg_pool(inp: Tensor4D) -> np.ndarray:
    """Per-(b, c) arithmetic mean over the H x W slice, accumulated in float64."""
    return inp.data.astype(np.float64).mean(axis=(2, 3))
