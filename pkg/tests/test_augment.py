import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blurkit.augment import (AugmentConfig, LabelParseError, YoloAnnotation,
                             augment_bbox, augment_uniform, expand_dataset,
                             parse_yolo_labels)
from blurkit.blur import MotionBlurSpec, motion_blur
from blurkit.imageio import write_image
from blurkit.tensor import ImageU8


def make_image(rng, h=48, w=64, channels=3):
    return ImageU8(rng.integers(0, 256, (h, w, channels), dtype=np.uint8))


def tree_digest(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(path.relative_to(root).as_posix().encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


class TestParseLabels:
    def test_box_pixel_bounds(self):
        boxes, warnings = parse_yolo_labels("0 0.5 0.5 0.2 0.2\n", (100, 100))
        assert warnings == []
        assert boxes[0].pixel_bounds(100, 100) == (40, 60, 40, 60)

    def test_empty_file(self):
        assert parse_yolo_labels("", (10, 10)) == ([], [])

    def test_wrong_arity_names_line(self):
        with pytest.raises(LabelParseError, match="line 1"):
            parse_yolo_labels("1 0.5 0.5 0.2\n", (10, 10))

    def test_bad_float_names_line(self):
        with pytest.raises(LabelParseError, match="line 2"):
            parse_yolo_labels("0 0.5 0.5 0.2 0.2\n0 x 0.5 0.2 0.2\n", (10, 10))

    def test_out_of_range_clamped_with_warning(self):
        boxes, warnings = parse_yolo_labels("0 0.05 0.5 0.3 0.2\n", (100, 100))
        assert len(warnings) == 1
        box = boxes[0]
        assert box.cx - box.w / 2 >= 0.0

    @given(class_id=st.integers(0, 20),
           cx=st.floats(0.3, 0.7), cy=st.floats(0.3, 0.7),
           w=st.floats(0.05, 0.5), h=st.floats(0.05, 0.5))
    @settings(max_examples=50, deadline=None)
    def test_well_formed_roundtrip(self, class_id, cx, cy, w, h):
        line = f"{class_id} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}\n"
        boxes, warnings = parse_yolo_labels(line, (64, 64))
        assert warnings == []
        assert boxes[0].class_id == class_id
        assert boxes[0].w == pytest.approx(float(f"{w:.6f}"))


class TestAugmentUniform:
    def test_length_one_identity(self, rng):
        img = make_image(rng)
        cfg = AugmentConfig(lengths=(1,))
        out, params = augment_uniform(img, cfg, np.random.default_rng(0))
        assert np.array_equal(out.data, img.data)
        assert params["length"] == 1

    def test_fixed_seed_deterministic(self, rng):
        img = make_image(rng)
        cfg = AugmentConfig()
        a, pa = augment_uniform(img, cfg, np.random.default_rng(5))
        b, pb = augment_uniform(img, cfg, np.random.default_rng(5))
        assert np.array_equal(a.data, b.data)
        assert pa == pb

    def test_forced_angle_matches_direct_call(self, rng):
        img = make_image(rng)

        class ForcedRng:
            def choice(self, arr):
                return arr[0]

            def uniform(self, lo, hi):
                return 0.0

        out, params = augment_uniform(img, AugmentConfig(lengths=(5,)), ForcedRng())
        direct = motion_blur(img, MotionBlurSpec(5, 0.0))
        assert params == {"length": 5, "angle": 0.0}
        assert np.array_equal(out.data, direct.data)


class TestAugmentBbox:
    def test_zero_boxes_identity(self, rng):
        img = make_image(rng)
        out, _ = augment_bbox(img, [], AugmentConfig(), np.random.default_rng(1))
        assert np.array_equal(out.data, img.data)

    def test_zero_alpha_identity(self, rng):
        img = make_image(rng)
        boxes = [YoloAnnotation(0, 0.5, 0.5, 0.4, 0.4)]
        cfg = AugmentConfig(bbox_alpha=0.0)
        out, _ = augment_bbox(img, boxes, cfg, np.random.default_rng(1))
        assert np.array_equal(out.data, img.data)

    def test_background_preserved_inside_differs(self, rng):
        img = make_image(rng, h=64, w=64)
        box = YoloAnnotation(0, 0.5, 0.5, 0.3, 0.3)
        cfg = AugmentConfig(bbox_alpha=0.9, dilation=2)
        out, _ = augment_bbox(img, [box], cfg, np.random.default_rng(2))
        r0, r1, c0, c1 = box.pixel_bounds(64, 64, cfg.dilation)
        mask = np.zeros((64, 64), dtype=bool)
        mask[r0:r1, c0:c1] = True
        diff = (out.data != img.data).any(axis=2)
        assert not diff[~mask].any()
        assert diff[mask].any()


class TestExpandDataset:
    def _make_corpus(self, root: Path, rng, count=4, suffix=".png"):
        images = root / "images"
        labels = root / "labels"
        images.mkdir(parents=True)
        labels.mkdir(parents=True)
        for i in range(count):
            write_image(images / f"img{i:02d}{suffix}", make_image(rng))
            (labels / f"img{i:02d}.txt").write_text("0 0.5 0.5 0.3 0.3\n")
        return images, labels

    def test_threefold_counts_and_pairs(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=4)
        out = tmp_path / "out"
        manifest = expand_dataset(images, labels, out, AugmentConfig(fold=3))
        emitted = [r for r in manifest if "out" in r]
        pairs = [r for r in emitted if r.get("pair")]
        assert len(emitted) == 12
        assert len(pairs) == 8
        assert len(list((out / "images").iterdir())) == 12
        assert len(list((out / "labels").iterdir())) == 12

    def test_fold_one_is_pure_copy(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=2)
        out = tmp_path / "out"
        manifest = expand_dataset(images, labels, out, AugmentConfig(fold=1))
        emitted = [r for r in manifest if "out" in r]
        assert all(r["pair"] is None for r in emitted)
        for src in images.iterdir():
            copied = out / "images" / f"{src.stem}_v0{src.suffix}"
            assert copied.read_bytes() == src.read_bytes()

    def test_same_seed_rerun_byte_identical(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=3)
        cfg = AugmentConfig(fold=3, seed=99)
        expand_dataset(images, labels, tmp_path / "a", cfg, workers=1)
        expand_dataset(images, labels, tmp_path / "b", cfg, workers=4)
        assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")

    def test_labels_copied_verbatim(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=2)
        out = tmp_path / "out"
        expand_dataset(images, labels, out, AugmentConfig(fold=3))
        original = (labels / "img00.txt").read_bytes()
        for variant in range(3):
            assert (out / "labels" / f"img00_v{variant}.txt").read_bytes() == original

    def test_unmatched_basename_warns_and_skips(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=2)
        (labels / "img01.txt").unlink()
        manifest = expand_dataset(images, labels, tmp_path / "out", AugmentConfig(fold=2))
        warnings = [r for r in manifest if "warning" in r]
        emitted = [r for r in manifest if "out" in r]
        assert len(warnings) == 1 and warnings[0]["src"] == "img01.png"
        assert len(emitted) == 2

    def test_unreadable_image_recorded(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=1)
        (images / "broken.png").write_bytes(b"not a png")
        (labels / "broken.txt").write_text("0 0.5 0.5 0.2 0.2\n")
        manifest = expand_dataset(images, labels, tmp_path / "out", AugmentConfig(fold=2))
        warnings = [r for r in manifest if "warning" in r]
        assert any(r["src"] == "broken.png" for r in warnings)

    def test_manifest_is_valid_jsonl(self, tmp_path, rng):
        images, labels = self._make_corpus(tmp_path / "src", rng, count=2, suffix=".ppm")
        out = tmp_path / "out"
        expand_dataset(images, labels, out, AugmentConfig(fold=3))
        lines = (out / "manifest.jsonl").read_text().splitlines()
        records = [json.loads(line) for line in lines]
        assert all(("out" in r) or ("warning" in r) for r in records)


def test_config_validation():
    with pytest.raises(ValueError):
        AugmentConfig(fold=0)
    with pytest.raises(ValueError):
        AugmentConfig(lengths=())
    with pytest.raises(ValueError):
        AugmentConfig(bbox_alpha=1.5)
    with pytest.raises(ValueError):
        AugmentConfig(lengths=(0, 5))


def test_annotation_validation():
    with pytest.raises(LabelParseError):
        YoloAnnotation(-1, 0.5, 0.5, 0.2, 0.2)
    with pytest.raises(LabelParseError):
        YoloAnnotation(0, 0.5, 0.5, 0.0, 0.2)
