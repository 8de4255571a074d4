"""Two-regime blur dataset augmenter over YOLO-format annotations.

Regime "uniform" blurs the whole image with a sampled motion kernel
(camera shake); regime "bbox" confines a rotational blur to each annotated
box and blends it in with a fixed transparency, leaving every pixel outside
the dilated boxes bit-identical (wind-driven target motion against a static
background). Neither regime moves a box, so label files are copied verbatim.

The whole pipeline is a pure function of (inputs, seed): per-image RNG
streams are derived from (seed, image index, variant index), so thread
scheduling cannot change a byte of the output tree.
"""

from __future__ import annotations

import json
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blur import MotionBlurSpec, motion_blur
from .imageio import read_image, write_image
from .rotate import RotationSpec, rotate
from .tensor import ImageU8

IMAGE_SUFFIXES = (".png", ".ppm")
REGIMES = ("both", "uniform", "bbox")
DEFAULT_SEED = 1234


class LabelParseError(ValueError):
    """Malformed YOLO label line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class YoloAnnotation:
    """One normalized box: class id plus center/size in [0, 1]."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float
    line_no: int = 0

    def __post_init__(self):
        if self.class_id < 0:
            raise LabelParseError(self.line_no, f"negative class id {self.class_id}")
        if not (self.w > 0 and self.h > 0):
            raise LabelParseError(self.line_no, f"box size must be positive, got {self.w}x{self.h}")

    def pixel_bounds(self, height: int, width: int,
                     dilation: int = 0) -> tuple[int, int, int, int]:
        """Half-open (r0, r1, c0, c1) window, dilated and clipped to the image."""
        c0 = int(np.floor((self.cx - self.w / 2) * width)) - dilation
        c1 = int(np.ceil((self.cx + self.w / 2) * width)) + dilation
        r0 = int(np.floor((self.cy - self.h / 2) * height)) - dilation
        r1 = int(np.ceil((self.cy + self.h / 2) * height)) + dilation
        return (max(r0, 0), min(r1, height), max(c0, 0), min(c1, width))


@dataclass(frozen=True)
class AugmentConfig:
    fold: int = 3
    lengths: tuple[int, ...] = (5, 10, 15, 25)
    angles: float = 10.0  # rotational-blur range, degrees, sampled in [-a, a]
    rotations_per_box: int = 4
    bbox_alpha: float = 0.7
    dilation: int = 2
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.fold < 1:
            raise ValueError(f"fold must be >= 1, got {self.fold}")
        if not self.lengths:
            raise ValueError("lengths must be non-empty")
        if any(l < 1 for l in self.lengths):
            raise ValueError(f"all lengths must be >= 1, got {self.lengths}")
        if not 0.0 <= self.bbox_alpha <= 1.0:
            raise ValueError(f"bbox_alpha must be in [0, 1], got {self.bbox_alpha}")
        if self.rotations_per_box < 1:
            raise ValueError("rotations_per_box must be >= 1")
        object.__setattr__(self, "lengths", tuple(int(l) for l in self.lengths))


def parse_yolo_labels(text: str, dims: tuple[int, int]
                      ) -> tuple[list[YoloAnnotation], list[str]]:
    """Parse "class cx cy w h" lines; out-of-range boxes are clamped into
    [0, 1]^2 with a warning record, malformed lines raise LabelParseError."""
    height, width = dims
    del height, width  # boxes stay normalized; pixel mapping happens later
    annotations: list[YoloAnnotation] = []
    warnings: list[str] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise LabelParseError(line_no, f"expected 5 fields, got {len(fields)}")
        try:
            class_id = int(fields[0])
            cx, cy, w, h = (float(v) for v in fields[1:])
        except ValueError as exc:
            raise LabelParseError(line_no, str(exc)) from None
        clamped_w = min(w, 1.0)
        clamped_h = min(h, 1.0)
        clamped_cx = min(max(cx, clamped_w / 2), 1.0 - clamped_w / 2)
        clamped_cy = min(max(cy, clamped_h / 2), 1.0 - clamped_h / 2)
        if (clamped_cx, clamped_cy, clamped_w, clamped_h) != (cx, cy, w, h):
            warnings.append(f"line {line_no}: box clamped into the unit square")
        annotations.append(YoloAnnotation(class_id, clamped_cx, clamped_cy,
                                          clamped_w, clamped_h, line_no))
    return annotations, warnings


def augment_uniform(image: ImageU8, cfg: AugmentConfig,
                    rng: np.random.Generator) -> tuple[ImageU8, dict]:
    """Whole-image motion blur with a sampled length/angle; boxes unchanged."""
    length = int(rng.choice(np.asarray(sorted(cfg.lengths))))
    angle = float(rng.uniform(0.0, 360.0))
    spec = MotionBlurSpec(length=length, angle=angle)
    return motion_blur(image, spec), {"length": length, "angle": angle}


def _rotational_blur_crop(crop: np.ndarray, angles: list[float]) -> np.ndarray:
    """Average of small-angle rotations of a crop (float64, HxWxC).

    Pixels whose back-rotated point has no support under any angle keep
    their original value instead of a fill constant.
    """
    h, w, ch = crop.shape
    num = np.zeros((h, w, ch), dtype=np.float64)
    support = np.zeros((h, w), dtype=np.float64)
    ones = np.ones((h, w), dtype=np.float32)
    for angle in angles:
        spec = RotationSpec(angle=angle, mode="bilinear", fill=0.0)
        mask = rotate(ones, spec).astype(np.float64)
        support += mask
        for c in range(ch):
            num[:, :, c] += rotate(crop[:, :, c].astype(np.float32), spec).astype(np.float64)
    covered = support > 0.0
    out = crop.astype(np.float64).copy()
    out[covered] = num[covered] / support[covered, None]
    return out


def augment_bbox(image: ImageU8, boxes: list[YoloAnnotation], cfg: AugmentConfig,
                 rng: np.random.Generator) -> tuple[ImageU8, dict]:
    """Blend a rotational blur into each (dilated) box region:
    region' = alpha * blurred(region) + (1 - alpha) * region.

    Boxes are processed in annotation order; a later overlapping box reads
    the already-modified pixels. Everything outside all dilated boxes stays
    bit-identical to the input.
    """
    out = image.data.copy()
    height, width = image.height, image.width
    params: list[dict] = []
    for box in boxes:
        r0, r1, c0, c1 = box.pixel_bounds(height, width, cfg.dilation)
        angles = [float(a) for a in
                  rng.uniform(-cfg.angles, cfg.angles, size=cfg.rotations_per_box)]
        params.append({"class_id": box.class_id, "window": [r0, r1, c0, c1],
                       "angles": angles})
        if r1 - r0 < 1 or c1 - c0 < 1:
            continue
        crop = out[r0:r1, c0:c1].astype(np.float64)
        blurred = _rotational_blur_crop(crop, angles)
        blended = cfg.bbox_alpha * blurred + (1.0 - cfg.bbox_alpha) * crop
        out[r0:r1, c0:c1] = np.rint(blended).astype(np.uint8)
    return ImageU8(out), {"bbox_alpha": cfg.bbox_alpha, "dilation": cfg.dilation,
                          "boxes": params}


def _variant_regime(variant: int, regime: str) -> str:
    if regime == "both":
        return "uniform" if variant % 2 == 1 else "bbox"
    return regime


def expand_dataset(image_dir: str | Path, label_dir: str | Path,
                   out_dir: str | Path, cfg: AugmentConfig,
                   regime: str = "both", workers: int = 1) -> list[dict]:
    """Expand a YOLO-layout dataset fold-times; returns the manifest records.

    Per source image: the original plus (fold - 1) augmented variants,
    alternating regimes. Writes out/images, out/labels and out/manifest.jsonl;
    each augmented record carries a "pair" pointing at its clear source copy.
    """
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}, got {regime!r}")
    image_dir, label_dir, out_dir = Path(image_dir), Path(label_dir), Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)

    sources = sorted(p for p in image_dir.iterdir()
                     if p.suffix.lower() in IMAGE_SUFFIXES)

    def process(item: tuple[int, Path]) -> list[dict]:
        index, img_path = item
        label_path = label_dir / (img_path.stem + ".txt")
        if not label_path.exists():
            return [{"src": img_path.name, "warning": "no matching label file, skipped"}]
        try:
            image = read_image(img_path)
        except Exception as exc:  # unreadable image: record and continue
            return [{"src": img_path.name, "warning": f"unreadable image: {exc}"}]
        label_text = label_path.read_text()
        try:
            boxes, label_warnings = parse_yolo_labels(
                label_text, (image.height, image.width))
        except LabelParseError as exc:
            return [{"src": img_path.name, "warning": f"bad label file: {exc}"}]

        records: list[dict] = []
        clear_name = f"{img_path.stem}_v0{img_path.suffix}"
        for warning in label_warnings:
            records.append({"src": img_path.name, "warning": warning})
        for variant in range(cfg.fold):
            out_name = f"{img_path.stem}_v{variant}{img_path.suffix}"
            out_img = out_dir / "images" / out_name
            out_lbl = out_dir / "labels" / f"{img_path.stem}_v{variant}.txt"
            record: dict = {"src": img_path.name, "out": f"images/{out_name}"}
            if variant == 0:
                shutil.copyfile(img_path, out_img)
                record.update(regime="original", params={}, pair=None)
            else:
                rng = np.random.default_rng([cfg.seed, index, variant])
                kind = _variant_regime(variant, regime)
                if kind == "uniform":
                    augmented, params = augment_uniform(image, cfg, rng)
                else:
                    augmented, params = augment_bbox(image, boxes, cfg, rng)
                write_image(out_img, augmented)
                record.update(regime=kind, params=params, pair=f"images/{clear_name}")
            out_lbl.write_bytes(label_path.read_bytes())
            records.append(record)
        return records

    items = list(enumerate(sources))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grouped = list(pool.map(process, items))
    else:
        grouped = [process(item) for item in items]

    manifest = [record for group in grouped for record in group]
    manifest.sort(key=lambda r: (r.get("out") or "", r.get("src") or "",
                                 r.get("warning") or ""))
    with (out_dir / "manifest.jsonl").open("w") as fh:
        for record in manifest:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return manifest
