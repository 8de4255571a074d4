#!/usr/bin/env python3
"""Generate a small synthetic YOLO-layout corpus for augmentation demos.

Each image is a dark noisy field with a few bright blobs; every blob gets a
bounding-box annotation. Output layout:

    <out>/images/img000.png ...
    <out>/labels/img000.txt ...  ("class cx cy w h", normalized)
"""

import argparse
from pathlib import Path

import numpy as np

from blurkit.imageio import write_image
from blurkit.tensor import ImageU8


def make_sample(rng: np.random.Generator, size: int, n_blobs: int):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    field = rng.normal(30.0, 6.0, (size, size))
    boxes = []
    for _ in range(n_blobs):
        cy, cx = rng.uniform(0.15, 0.85, 2) * size
        radius = rng.uniform(0.04, 0.10) * size
        field += 180.0 * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * radius**2))
        half = 2.5 * radius / size
        boxes.append((0, cx / size, cy / size,
                      min(2 * half, 0.9), min(2 * half, 0.9)))
    gray = np.clip(field, 0, 255).astype(np.uint8)
    return ImageU8(np.repeat(gray[:, :, None], 3, axis=2)), boxes


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True)
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--blobs", type=int, default=4)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for i in range(args.count):
        image, boxes = make_sample(rng, args.size, args.blobs)
        write_image(out / "images" / f"img{i:03d}.png", image)
        lines = [f"{c} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}" for c, cx, cy, w, h in boxes]
        (out / "labels" / f"img{i:03d}.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {args.count} images ({args.size}x{args.size}) under {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
