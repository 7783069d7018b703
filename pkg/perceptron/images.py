import numpy as np
from PIL import Image


def binarize_resize(image, size=16):
    """Nearest-neighbour resize of a grayscale image, then 1 where the pixel is at least half the maximum"""
    pixels = np.asarray(image)
    if pixels.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {pixels.shape}")
    resized = Image.fromarray(pixels.astype(np.uint8)).resize((size, size), Image.Resampling.NEAREST)
    values = np.asarray(resized, dtype=float)
    peak = values.max()
    if peak <= 0:
        return tuple(0 for _ in range(size * size))
    return tuple(int(v) for v in (values >= 0.5 * peak).ravel())
