"""Image containers for the recovery experiments: the big-endian IDX
format conventionally used for 28x28 digit sets, binary PGM dumps for
recovered images and support masks, and a deterministic synthetic
generator of naturally sparse digit-like images."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
SIDE = 28


class BadMagic(ValueError):
    pass


class TruncatedFile(ValueError):
    pass


class DimMismatch(ValueError):
    pass


@dataclass
class ImageSet:
    """Flattened images with pixel values scaled to [0, 1]."""

    images: np.ndarray  # (n, SIDE*SIDE) float64
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return self.images.shape[0]


def read_idx(path) -> np.ndarray:
    """Parse a single IDX file.

    Image files (magic 0x00000803, dims [n, 28, 28]) come back as an
    (n, 784) float array scaled to [0, 1]; label files (magic 0x00000801)
    as an (n,) uint8 array.
    """
    data = Path(path).read_bytes()
    if len(data) < 4:
        raise TruncatedFile(f"{path}: {len(data)} bytes, no room for a magic number")
    (magic,) = struct.unpack(">I", data[:4])
    if magic == IDX_IMAGES_MAGIC:
        if len(data) < 16:
            raise TruncatedFile(f"{path}: header needs 16 bytes, found {len(data)}")
        n, rows, cols = struct.unpack(">III", data[4:16])
        if (rows, cols) != (SIDE, SIDE):
            raise DimMismatch(f"{path}: expected {SIDE}x{SIDE} images, got {rows}x{cols}")
        expected = 16 + n * rows * cols
        if len(data) != expected:
            raise TruncatedFile(f"{path}: header promises {expected} bytes, found {len(data)}")
        pixels = np.frombuffer(data, dtype=np.uint8, offset=16)
        return pixels.reshape(n, rows * cols).astype(np.float64) / 255.0
    if magic == IDX_LABELS_MAGIC:
        if len(data) < 8:
            raise TruncatedFile(f"{path}: header needs 8 bytes, found {len(data)}")
        (n,) = struct.unpack(">I", data[4:8])
        if len(data) != 8 + n:
            raise TruncatedFile(f"{path}: header promises {8 + n} bytes, found {len(data)}")
        return np.frombuffer(data, dtype=np.uint8, offset=8).copy()
    raise BadMagic(f"{path}: magic 0x{magic:08X}")


def load_image_set(images_path, labels_path=None, limit: int | None = None) -> ImageSet:
    images = read_idx(images_path)
    if images.ndim != 2:
        raise DimMismatch(f"{images_path} is not an image file")
    labels = None
    if labels_path is not None:
        labels = read_idx(labels_path)
        if labels.ndim != 1:
            raise DimMismatch(f"{labels_path} is not a label file")
        if labels.shape[0] != images.shape[0]:
            raise DimMismatch(
                f"{labels.shape[0]} labels vs {images.shape[0]} images"
            )
    if limit is not None:
        images = images[:limit]
        labels = labels[:limit] if labels is not None else None
    return ImageSet(images=images, labels=labels)


def write_idx_images(path, images: np.ndarray) -> None:
    """Serialize uint8 (or [0,1] float) images of shape (n, 784) or
    (n, 28, 28) into the IDX image container, bit-exact."""
    arr = np.asarray(images)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    arr = arr.reshape(arr.shape[0], SIDE, SIDE)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, arr.shape[0], SIDE, SIDE))
        fh.write(arr.tobytes())


def write_idx_labels(path, labels) -> None:
    arr = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, arr.shape[0]))
        fh.write(arr.tobytes())


def write_pgm(path, image: np.ndarray) -> None:
    """Dump one image as binary PGM (P5, maxval 255, row-major)."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    arr = arr.reshape(SIDE, SIDE)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise BadMagic(f"{path}: not a binary PGM")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise DimMismatch(f"{path}: unsupported maxval {maxval}")
    if len(data) - pos != width * height:
        raise TruncatedFile(f"{path}: payload {len(data) - pos} vs {width * height}")
    return np.frombuffer(data, dtype=np.uint8, offset=pos).reshape(height, width)


def synthetic_sparse_images(n: int, seed: int = 0) -> np.ndarray:
    """Digit-like sparse test images: a few random strokes on a 28x28
    canvas, most pixels exactly zero.  Deterministic per (seed, index)."""
    out = np.zeros((n, SIDE * SIDE))
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        canvas = np.zeros((SIDE, SIDE))
        for _ in range(rng.integers(2, 4)):
            r, c = rng.integers(4, SIDE - 4, size=2)
            dr, dc = rng.choice([-1, 0, 1], size=2)
            for _ in range(int(rng.integers(16, 34))):
                canvas[r, c] = rng.uniform(0.5, 1.0)
                if rng.random() < 0.3:
                    rr, cc = min(r + 1, SIDE - 1), min(c + 1, SIDE - 1)
                    canvas[rr, c] = max(canvas[rr, c], rng.uniform(0.3, 0.8))
                    canvas[r, cc] = max(canvas[r, cc], rng.uniform(0.3, 0.8))
                if rng.random() < 0.25:
                    dr, dc = rng.choice([-1, 0, 1], size=2)
                r = int(np.clip(r + dr, 1, SIDE - 2))
                c = int(np.clip(c + dc, 1, SIDE - 2))
        out[i] = canvas.ravel()
    return out
