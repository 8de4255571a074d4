"""Image and tensor file codecs.

PNG goes through Pillow, binary PPM (P6) is written by hand so output bytes
are fully under our control. Tensor debug dumps are four little-endian int32
dims followed by raw little-endian float32 data, row-major B, C, H, W.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .tensor import ImageU8, Tensor4D

TENSOR_DIMS_DTYPE = np.dtype("<i4")
TENSOR_DATA_DTYPE = np.dtype("<f4")


class ImageFormatError(ValueError):
    """Unsupported or malformed image file."""


def read_image(path: str | Path) -> ImageU8:
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        return _read_ppm(path.read_bytes())
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if im.mode not in ("1", "I;16", "I") else "L")
        arr = np.asarray(im, dtype=np.uint8)
    return ImageU8(arr)


def write_image(path: str | Path, image: ImageU8) -> None:
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        path.write_bytes(encode_ppm(image))
        return
    if path.suffix.lower() != ".png":
        raise ImageFormatError(f"unsupported image format: {path.suffix!r}")
    arr = image.data[:, :, 0] if image.channels == 1 else image.data
    Image.fromarray(arr).save(path, format="PNG")


def encode_ppm(image: ImageU8) -> bytes:
    """Binary P6; single-channel input is replicated to gray RGB."""
    arr = image.data
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + arr.tobytes()


def _read_ppm(blob: bytes) -> ImageU8:
    stream = io.BytesIO(blob)

    def token() -> bytes:
        tok = b""
        while True:
            ch = stream.read(1)
            if not ch:
                raise ImageFormatError("truncated PPM header")
            if ch == b"#":  # comment to end of line
                while ch not in (b"\n", b""):
                    ch = stream.read(1)
                continue
            if ch.isspace():
                if tok:
                    return tok
                continue
            tok += ch

    if token() != b"P6":
        raise ImageFormatError("not a binary PPM (P6) file")
    width, height, maxval = (int(token()) for _ in range(3))
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 PPM supported, got {maxval}")
    data = stream.read(width * height * 3)
    if len(data) != width * height * 3:
        raise ImageFormatError("truncated PPM pixel data")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
    return ImageU8(arr.copy())


def write_tensor(path: str | Path, tensor: Tensor4D) -> None:
    dims = np.asarray(tensor.dims, dtype=TENSOR_DIMS_DTYPE)
    payload = tensor.data.astype(TENSOR_DATA_DTYPE, copy=False)
    Path(path).write_bytes(dims.tobytes() + payload.tobytes())


def read_tensor(path: str | Path) -> Tensor4D:
    blob = Path(path).read_bytes()
    if len(blob) < 16:
        raise ImageFormatError("tensor file too short for dims header")
    dims = np.frombuffer(blob[:16], dtype=TENSOR_DIMS_DTYPE)
    expected = 16 + int(np.prod(dims)) * 4
    if len(blob) != expected:
        raise ImageFormatError(
            f"tensor payload size mismatch: expected {expected} bytes, got {len(blob)}")
    data = np.frombuffer(blob[16:], dtype=TENSOR_DATA_DTYPE)
    return Tensor4D(data.reshape(tuple(int(d) for d in dims)).copy())


def plane_from_image(image: ImageU8) -> np.ndarray:
    """Channel-mean float32 plane in [0, 255]."""
    return image.data.astype(np.float32).mean(axis=2).astype(np.float32)


def image_from_plane(plane: np.ndarray) -> ImageU8:
    """Min-max normalize a float plane to u8 for visual inspection."""
    plane = np.asarray(plane, dtype=np.float64)
    lo, hi = float(plane.min()), float(plane.max())
    if hi > lo:
        scaled = (plane - lo) / (hi - lo) * 255.0
    else:
        scaled = np.zeros_like(plane)
    return ImageU8(np.round(scaled).astype(np.uint8)[:, :, None])
