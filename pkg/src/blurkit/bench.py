"""Timing and equivalence harness for the parallel kernels.

Each case runs a kernel at a given size and worker count: one warm-up, then
R timed repeats (median reported). Every run's output checksum must equal
the single-worker reference checksum of the same case; a mismatch aborts the
report, because correctness is a precondition of any timing claim.

The published unit timings of the original GPU implementation are recorded
in the report metadata for context only; nothing here asserts them.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .blur import (BoxBlurSpec, GaussianSpec, box_blur_boundary_safe,
                   gaussian_filter)
from .fusion import TransparencyMap, fuse
from .rotate import RotationSpec, rotate
from .tensor import ImageU8, Tensor4D

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

REFERENCE_CONTEXT = {
    "reference_cpu_unit_ms": 688.45,
    "reference_gpu_unit_ms": 17.94,
    "reference_speedup_claim": ">400x",
}


class ChecksumMismatchError(RuntimeError):
    """Parallel output disagreed with the serial reference for a case."""


def fnv1a64(data: bytes) -> int:
    acc = FNV_OFFSET
    for byte in data:
        acc ^= byte
        acc = (acc * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return acc


def checksum_array(arr: np.ndarray) -> int:
    return fnv1a64(np.ascontiguousarray(arr).tobytes())


def _box_case(size: int, rng: np.random.Generator):
    img = ImageU8(rng.integers(0, 256, size=(size, size, 1), dtype=np.uint8))
    spec = BoxBlurSpec(radius=1)
    return lambda workers: box_blur_boundary_safe(img, spec, workers).data


def _gauss_case(size: int, rng: np.random.Generator):
    plane = rng.random((size, size), dtype=np.float32)
    spec = GaussianSpec(sigma=2.0)
    return lambda workers: gaussian_filter(plane, spec, workers)


def _rotate_case(size: int, rng: np.random.Generator):
    plane = rng.random((size, size), dtype=np.float32)
    spec = RotationSpec(angle=7.3, mode="bilinear")
    return lambda workers: rotate(plane, spec, workers)


def _fuse_case(size: int, rng: np.random.Generator):
    dims = (1, 4, size, size)
    t = Tensor4D(rng.random(dims, dtype=np.float32))
    i = Tensor4D(rng.random(dims, dtype=np.float32))
    p = TransparencyMap(rng.random((1, 1, size, size), dtype=np.float32))
    return lambda workers: fuse(p, t, i).data  # elementwise; workers unused


KERNELS = {
    "box": _box_case,
    "gauss": _gauss_case,
    "rotate": _rotate_case,
    "fuse": _fuse_case,
}


@dataclass(frozen=True)
class BenchCase:
    kernel: str
    size: int
    workers: int

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; choose from {sorted(KERNELS)}")
        if self.size < 1 or self.workers < 1:
            raise ValueError("size and workers must be >= 1")

    @property
    def name(self) -> str:
        return f"{self.kernel}@{self.size}x{self.size}/w{self.workers}"


@dataclass(frozen=True)
class BenchReport:
    records: tuple[dict, ...]
    environment: dict

    def to_json(self) -> str:
        return json.dumps({"environment": self.environment,
                           "records": list(self.records)}, indent=2)

    def format_table(self) -> str:
        header = f"{'kernel':<8} {'size':>6} {'workers':>7} {'median_ms':>10} {'checksum':>18}"
        lines = [header, "-" * len(header)]
        for rec in self.records:
            lines.append(f"{rec['kernel']:<8} {rec['size']:>6} {rec['workers']:>7} "
                         f"{rec['median_ns'] / 1e6:>10.3f} {rec['checksum']:#018x}")
        return "\n".join(lines)


def run_bench(cases: list[BenchCase], repeats: int = 5, seed: int = 7) -> BenchReport:
    """Median-of-repeats timings with one excluded warm-up per case and a
    serial-reference checksum check on every run."""
    if repeats < 5:
        raise ValueError(f"repeats must be >= 5, got {repeats}")
    records = []
    references: dict[tuple[str, int], int] = {}
    for case in cases:
        runner = KERNELS[case.kernel](case.size, np.random.default_rng(seed))
        ref_key = (case.kernel, case.size)
        if ref_key not in references:
            references[ref_key] = checksum_array(runner(1))
        expected = references[ref_key]

        runner(case.workers)  # warm-up, excluded from timing
        timings = []
        for _ in range(repeats):
            start = time.perf_counter_ns()
            out = runner(case.workers)
            timings.append(time.perf_counter_ns() - start)
            actual = checksum_array(out)
            if actual != expected:
                raise ChecksumMismatchError(
                    f"case {case.name}: checksum {actual:#x} != serial reference {expected:#x}")
        records.append({
            "kernel": case.kernel,
            "size": case.size,
            "workers": case.workers,
            "repeats": repeats,
            "median_ns": int(np.median(timings)),
            "checksum": expected,
        })
    environment = {
        "cpu_count": os.cpu_count(),
        "run_date": _dt.date.today().isoformat(),
        "context": dict(REFERENCE_CONTEXT),
    }
    return BenchReport(tuple(records), environment)
