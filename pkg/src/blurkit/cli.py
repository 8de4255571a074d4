"""Command-line entry point: blur, rotate, fuse-demo, pyramid-demo, augment
and bench subcommands.

Exit codes: 0 ok, 2 usage, 3 I/O, 4 validation, 5 internal check failure.
Logs go to stderr; data only to files. All file outputs are written through
a temp-file + rename so a failed run leaves no partial output behind.
Precedence for settings is CLI flags > config file (gate JSON) > defaults.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .augment import DEFAULT_SEED, AugmentConfig, expand_dataset
from .bench import BenchCase, ChecksumMismatchError, run_bench
from .blur import (BoxBlurSpec, GaussianSpec, MotionBlurSpec,
                   box_blur_boundary_safe, gaussian_filter, motion_blur)
from .fusion import (DrsGate, TransparencyMap, alpha_clamp, blur_level_estimate,
                     fuse, synthesize_fuzzy_feature, transparency_map)
from .imageio import (image_from_plane, plane_from_image, read_image,
                      read_tensor, write_image)
from .pyramid import build_pyramid, dfrc_enhance
from .rotate import MODES, RotationSpec, rotate, rotate_oracle
from .tensor import ImageU8, Tensor4D, resolve_workers

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_INTERNAL = 5

log = logging.getLogger("blurkit")


class ValidationError(ValueError):
    pass


def _parse_float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blurkit",
        description="Blur synthesis, interpolated rotation, transparency "
                    "fusion and dataset augmentation toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p_blur = sub.add_parser("blur", help="blur an image")
    p_blur.add_argument("--mode", choices=("gauss", "box", "motion"), required=True)
    p_blur.add_argument("--sigma", type=float, default=1.0)
    p_blur.add_argument("--radius", type=int, default=None)
    p_blur.add_argument("--length", type=int, default=5)
    p_blur.add_argument("--angle", type=float, default=0.0)
    p_blur.add_argument("--in", dest="input", required=True)
    p_blur.add_argument("--out", required=True)
    p_blur.add_argument("--workers", type=int, default=None)

    p_rot = sub.add_parser("rotate", help="rotate an image in place on its canvas")
    p_rot.add_argument("--angle", type=float, required=True)
    p_rot.add_argument("--mode", choices=MODES, default="bilinear")
    p_rot.add_argument("--fill", type=float, default=0.0)
    p_rot.add_argument("--in", dest="input", required=True)
    p_rot.add_argument("--out", required=True)
    p_rot.add_argument("--workers", type=int, default=None)
    p_rot.add_argument("--trace-oob", action="store_true",
                       help="run the checked serial path; abort on any "
                            "out-of-bounds source access")

    p_fuse = sub.add_parser("fuse-demo", help="transparency-gated fusion demo")
    p_fuse.add_argument("--feature", required=True, help="tensor dump file")
    p_fuse.add_argument("--angles", type=_parse_float_list, default=[-10.0, 10.0])
    p_fuse.add_argument("--gate", default=None, help="gate config JSON")
    p_fuse.add_argument("--out", required=True, help="output prefix")
    p_fuse.add_argument("--workers", type=int, default=None)

    p_pyr = sub.add_parser("pyramid-demo", help="per-level heat images, clear vs blurred")
    p_pyr.add_argument("--in", dest="input", required=True)
    p_pyr.add_argument("--gate", default=None)
    p_pyr.add_argument("--angles", type=_parse_float_list, default=[-10.0, 10.0])
    p_pyr.add_argument("--channels", type=int, default=4)
    p_pyr.add_argument("--blur-sigma", type=float, default=2.0)
    p_pyr.add_argument("--out-dir", required=True)
    p_pyr.add_argument("--workers", type=int, default=None)

    p_aug = sub.add_parser("augment", help="two-regime dataset expansion")
    p_aug.add_argument("--images", required=True)
    p_aug.add_argument("--labels", required=True)
    p_aug.add_argument("--out", required=True)
    p_aug.add_argument("--fold", type=int, default=3)
    p_aug.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_aug.add_argument("--regime", choices=("both", "uniform", "bbox"), default="both")
    p_aug.add_argument("--lengths", type=_parse_int_list, default=[5, 10, 15, 25])
    p_aug.add_argument("--angles", type=float, default=10.0)
    p_aug.add_argument("--bbox-alpha", type=float, default=0.7)
    p_aug.add_argument("--dilation", type=int, default=2)
    p_aug.add_argument("--workers", type=int, default=None)

    p_bench = sub.add_parser("bench", help="timing + checksum harness")
    p_bench.add_argument("--kernel", choices=sorted(bench_mod.KERNELS), required=True)
    p_bench.add_argument("--sizes", type=_parse_int_list, default=[512])
    p_bench.add_argument("--workers", type=_parse_int_list, default=[1])
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.add_argument("--json", dest="json_out", default=None)

    return parser


def atomic_write_bytes(path: Path, blob: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_image(path: Path, image: ImageU8) -> None:
    import io

    from PIL import Image as PILImage

    from .imageio import encode_ppm
    if path.suffix.lower() == ".ppm":
        atomic_write_bytes(path, encode_ppm(image))
        return
    arr = image.data[:, :, 0] if image.channels == 1 else image.data
    buf = io.BytesIO()
    PILImage.fromarray(arr).save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def _load_gate(path: str | None, channels: int) -> DrsGate:
    if path is None:
        return DrsGate.default(channels)
    gate = DrsGate.from_json(path)
    if gate.channels != channels:
        raise ValidationError(
            f"gate config has {gate.channels} channels, feature has {channels}")
    return gate


def _cmd_blur(args) -> int:
    image = read_image(args.input)
    workers = resolve_workers(args.workers)
    if args.mode == "box":
        radius = args.radius if args.radius is not None else 1
        out = box_blur_boundary_safe(image, BoxBlurSpec(radius=radius), workers)
    elif args.mode == "motion":
        out = motion_blur(image, MotionBlurSpec(args.length, args.angle), workers)
    else:
        spec = GaussianSpec(sigma=args.sigma, radius=args.radius)
        planes = [np.rint(gaussian_filter(p.astype(np.float32), spec, workers))
                  .astype(np.uint8) for p in image.planes()]
        out = ImageU8(np.stack(planes, axis=2))
    _atomic_image(Path(args.out), out)
    return EXIT_OK


def _cmd_rotate(args) -> int:
    image = read_image(args.input)
    spec = RotationSpec(angle=args.angle, mode=args.mode, fill=args.fill)
    workers = resolve_workers(args.workers)
    planes = []
    for plane in image.planes():
        plane_f = plane.astype(np.float32)
        rotated = (rotate_oracle(plane_f, spec) if args.trace_oob
                   else rotate(plane_f, spec, workers))
        planes.append(np.clip(np.rint(rotated), 0, 255).astype(np.uint8))
    _atomic_image(Path(args.out), ImageU8(np.stack(planes, axis=2)))
    return EXIT_OK


def _cmd_fuse_demo(args) -> int:
    feature = read_tensor(args.feature)
    gate = _load_gate(args.gate, feature.dims[1])
    workers = resolve_workers(args.workers)
    p = transparency_map(feature, gate)
    score = float(blur_level_estimate(feature).mean())
    p = alpha_clamp(p, score, gate)
    fuzzy = synthesize_fuzzy_feature(feature, args.angles, workers=workers)
    fused = fuse(p, fuzzy, feature)
    prefix = Path(args.out)
    _atomic_image(prefix.with_name(prefix.name + "_p.png"),
                  image_from_plane(p.grid[0, 0]))
    _atomic_image(prefix.with_name(prefix.name + "_fuzzy.png"),
                  image_from_plane(fuzzy.data[0].mean(axis=0)))
    _atomic_image(prefix.with_name(prefix.name + "_fused.png"),
                  image_from_plane(fused.data[0].mean(axis=0)))
    log.info("blur score %.4f, P range [%.3f, %.3f]", score,
             float(p.grid.min()), float(p.grid.max()))
    return EXIT_OK


def _cmd_pyramid_demo(args) -> int:
    image = read_image(args.input)
    plane = plane_from_image(image)
    gate = _load_gate(args.gate, args.channels)
    workers = resolve_workers(args.workers)
    blurred = gaussian_filter(plane, GaussianSpec(sigma=args.blur_sigma), workers)
    out_dir = Path(args.out_dir)
    for label, source in (("clear", plane), ("blurred", blurred)):
        pyramid = build_pyramid(source, channels=args.channels, workers=workers)
        enhanced = dfrc_enhance(pyramid, gate, args.angles, workers=workers)
        for level, tag in zip(enhanced.levels, enhanced.tags):
            heat = np.abs(level.data[0]).mean(axis=0)
            _atomic_image(out_dir / f"{label}_{tag}.png", image_from_plane(heat))
    return EXIT_OK


def _cmd_augment(args) -> int:
    cfg = AugmentConfig(fold=args.fold, lengths=tuple(args.lengths),
                        angles=args.angles, bbox_alpha=args.bbox_alpha,
                        dilation=args.dilation, seed=args.seed)
    workers = resolve_workers(args.workers)
    manifest = expand_dataset(args.images, args.labels, args.out, cfg,
                              regime=args.regime, workers=workers)
    emitted = sum(1 for rec in manifest if "out" in rec)
    warned = sum(1 for rec in manifest if "warning" in rec)
    log.info("emitted %d files, %d warnings", emitted, warned)
    return EXIT_OK


def _cmd_bench(args) -> int:
    cases = [BenchCase(args.kernel, size, workers)
             for size in args.sizes for workers in args.workers]
    report = run_bench(cases, repeats=args.repeats)
    if args.json_out:
        atomic_write_bytes(Path(args.json_out), report.to_json().encode())
    print(report.format_table())
    return EXIT_OK


_COMMANDS = {
    "blur": _cmd_blur,
    "rotate": _cmd_rotate,
    "fuse-demo": _cmd_fuse_demo,
    "pyramid-demo": _cmd_pyramid_demo,
    "augment": _cmd_augment,
    "bench": _cmd_bench,
}


def dispatch(args: argparse.Namespace) -> int:
    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ChecksumMismatchError as exc:
        log.error("internal check failed: %s", exc)
        return EXIT_INTERNAL
    except (ValidationError, ValueError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
