"""IDX binary format (MNIST/EMNIST distribution files): read and write.

Big-endian, magic 0x00000803 for uint8 image tensors and 0x00000801 for
uint8 label vectors. Errors report the byte offset of the problem.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from actalarm.data.dataset import Dataset

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    def __init__(self, path, offset: int, message: str):
        super().__init__(f"{path}: {message} (at byte {offset})")
        self.offset = offset


def _read_u32(data: bytes, offset: int, path) -> int:
    if offset + 4 > len(data):
        raise IdxFormatError(path, offset, "truncated header")
    return struct.unpack_from(">I", data, offset)[0]


def read_idx_images(path: str | Path) -> np.ndarray:
    """(n, rows, cols) uint8 array from an IDX image file."""
    raw = Path(path).read_bytes()
    magic = _read_u32(raw, 0, path)
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(path, 0, f"bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
    count = _read_u32(raw, 4, path)
    rows = _read_u32(raw, 8, path)
    cols = _read_u32(raw, 12, path)
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise IdxFormatError(path, len(raw), f"expected {expected} bytes, file has {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols,
                         offset=16).reshape(count, rows, cols)


def read_idx_labels(path: str | Path) -> np.ndarray:
    """(n,) uint8 label vector from an IDX label file."""
    raw = Path(path).read_bytes()
    magic = _read_u32(raw, 0, path)
    if magic != LABEL_MAGIC:
        raise IdxFormatError(path, 0, f"bad label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
    count = _read_u32(raw, 4, path)
    expected = 8 + count
    if len(raw) < expected:
        raise IdxFormatError(path, len(raw), f"expected {expected} bytes, file has {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=8)


def load_idx(images_path: str | Path, labels_path: str | Path,
             class_names: list[str] | None = None) -> Dataset:
    """Flattened [0, 1] pixel rows plus labels.

    Pixels scale by /255; a 28x28 image becomes a 784-dim row. ``class_names``
    maps raw label values to names (default: decimal digits by value).
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(labels_path, 4,
                             f"{labels.shape[0]} labels for {images.shape[0]} images")
    n, rows, cols = images.shape
    x = images.reshape(n, rows * cols).astype(np.float64) / 255.0
    if class_names is None:
        class_names = [str(v) for v in range(int(labels.max()) + 1)]
    return Dataset(x=x, y=labels.astype(np.int64), classes=class_names,
                   meta={"kind": "image", "rows": rows, "cols": cols, "pixel_scale": 255})


def write_idx_images(images: np.ndarray, path: str | Path) -> None:
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(labels: np.ndarray, path: str | Path) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())
