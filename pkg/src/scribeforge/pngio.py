"""8-bit grayscale PNG I/O.

Line images are plain 2-D uint8 numpy arrays (rows × cols) with the
convention 0 = ink, 255 = paper.
"""

import numpy as np
from PIL import Image


def read_gray(path):
    """Load a PNG as a 2-D uint8 array, converting to grayscale if needed."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{path}: not a non-empty grayscale image")
    return arr


def write_gray(path, img):
    """Write a 2-D uint8 array as an 8-bit grayscale PNG."""
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("expected a 2-D uint8 array")
    Image.fromarray(img, mode="L").save(path, format="PNG")


def encode_gray(img):
    """Encode a 2-D uint8 array to PNG bytes (used by parallel workers)."""
    import io

    buf = io.BytesIO()
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("expected a 2-D uint8 array")
    Image.fromarray(img, mode="L").save(buf, format="PNG")
    return buf.getvalue()
