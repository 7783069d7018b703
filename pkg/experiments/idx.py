"""
IDX files, the format the MNIST digits are distributed in.

Header: a big-endian magic number (0x00000803 for unsigned-byte images,
0x00000801 for unsigned-byte labels), then one big-endian uint32 per
dimension, then the data.
"""

from pathlib import Path

import numpy as np

from .exceptions import BadMagic, TruncatedFile

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
DIMENSIONS = {IMAGE_MAGIC: 3, LABEL_MAGIC: 1}


def parse_idx(data, source='<bytes>'):
    if len(data) < 4:
        raise TruncatedFile(f"{source}: no IDX header", path=source, size=len(data))
    magic = int(np.frombuffer(data, dtype='>u4', count=1)[0])
    if magic not in DIMENSIONS:
        raise BadMagic(f"{source}: magic 0x{magic:08x} is not an IDX image or label file", path=source)
    ndim = DIMENSIONS[magic]
    header = 4 * (1 + ndim)
    if len(data) < header:
        raise TruncatedFile(f"{source}: header cut short", path=source, size=len(data))
    shape = tuple(int(n) for n in np.frombuffer(data, dtype='>u4', count=ndim, offset=4))
    expected = header + int(np.prod(shape))
    if len(data) < expected:
        raise TruncatedFile(
            f"{source}: {len(data)} bytes, {expected} expected for shape {shape}",
            path=source, size=len(data), expected=expected,
        )
    return np.frombuffer(data, dtype=np.uint8, count=int(np.prod(shape)), offset=header).reshape(shape).copy()


def ingest_idx(path):
    """Images as an (n, rows, cols) uint8 array, or labels as an (n,) array"""
    return parse_idx(Path(path).read_bytes(), source=str(path))


def write_idx(path, array):
    array = np.asarray(array, dtype=np.uint8)
    magic = {3: IMAGE_MAGIC, 1: LABEL_MAGIC}.get(array.ndim)
    if magic is None:
        raise ValueError(f"cannot store a {array.ndim}-dimensional array as IDX")
    header = np.array([magic, *array.shape], dtype='>u4').tobytes()
    Path(path).write_bytes(header + array.tobytes())
