"""Grayscale image files.

Portable graymap (binary P5 and plain P2) is always available; any other
lossless format Pillow understands (PNG, TIFF) works for reading and writing
by file extension.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageFormatError(ValueError):
    pass


def read_image(path) -> np.ndarray:
    """Load a single-channel image as a float array of intensities."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "I", "I;16", "F"):
                im = im.convert("L")
            return np.asarray(im, dtype=float)
    except (UnidentifiedImageError, SyntaxError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise ImageFormatError(f"{path}: not a readable grayscale image ({exc})") from exc


def _quantize(pixels, maxval):
    return np.clip(np.rint(np.asarray(pixels, dtype=float)), 0, maxval)


def write_image(path, pixels, ascii: bool = False, bits: int = 8) -> None:
    """Write intensities, rounded and clipped to the ``bits`` range.

    ``.pgm`` paths get a portable graymap (plain text when ``ascii``);
    other extensions are handed to Pillow.
    """
    path = Path(path)
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    maxval = (1 << bits) - 1
    q = _quantize(pixels, maxval)
    if q.ndim != 2:
        raise ValueError("expected a 2D grayscale array")
    if ascii:
        if path.suffix.lower() != ".pgm":
            raise ValueError("plain-text output is only defined for .pgm")
        rows, cols = q.shape
        lines = [f"P2\n{cols} {rows}\n{maxval}\n"]
        lines += [" ".join(str(int(x)) for x in row) + "\n" for row in q]
        path.write_text("".join(lines))
        return
    dtype = np.uint8 if bits == 8 else np.uint16
    Image.fromarray(q.astype(dtype)).save(path)
