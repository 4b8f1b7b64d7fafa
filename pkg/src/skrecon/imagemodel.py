"""
Grayscale images as step functions.

An ``n x m`` image ``a`` (``n`` rows, ``m`` columns) is identified with the
function ``I(x, y) = a[i, j]`` for ``(x, y)`` in the cell ``(i, i+1] x (j, j+1]``
(0-based indices), and ``I = 0`` outside ``[0, n] x [0, m]``. The first
coordinate runs along rows. Every module maps geometry through this
convention.

Images are plain 2-D ``float64`` arrays with values in ``[0, 255]``; no
function here modifies its input.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, floor

import numpy as np

PIXEL_MAX = 255.0


class ImageError(ValueError):
    """Raised for malformed images, masks or regions of interest."""


def as_image(a, *, copy: bool = False) -> np.ndarray:
    """Validate `a` as a grayscale image and return it as ``float64``."""
    arr = np.array(a, dtype=float, copy=copy) if copy else np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ImageError("image contains non-finite values")
    if arr.min() < 0 or arr.max() > PIXEL_MAX:
        raise ImageError(
            f"intensities must lie in [0, 255], got [{arr.min():g}, {arr.max():g}]; "
            "use clamp() explicitly")
    return arr


def clamp(a) -> np.ndarray:
    return np.clip(np.asarray(a, dtype=float), 0.0, PIXEL_MAX)


def quantize(a) -> np.ndarray:
    """Round half away from zero, clamp, and cast to ``uint8`` (file export only)."""
    a = np.asarray(a, dtype=float)
    r = np.sign(a) * np.floor(np.abs(a) + 0.5)
    return np.clip(r, 0, 255).astype(np.uint8)


def as_mask(mask, shape=None) -> np.ndarray:
    """Boolean gap mask, ``True`` where the pixel is missing."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ImageError(f"mask must be 2-D, got shape {m.shape}")
    if shape is not None and m.shape != tuple(shape):
        raise ImageError(f"mask shape {m.shape} does not match image shape {tuple(shape)}")
    return m.astype(bool)


@dataclass(frozen=True)
class Roi:
    """
    Rectangular region of interest ``[x0, y0, w, h]``.

    `x0` is the first column and `y0` the first row (0-based), matching the
    ``[x, y, width, height]`` rectangles used for the test images.
    """

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.x0 < 0 or self.y0 < 0:
            raise ImageError(f"ROI origin must be nonnegative: {self}")
        if self.w < 1 or self.h < 1:
            raise ImageError(f"ROI size must be positive: {self}")

    @classmethod
    def parse(cls, text: str) -> "Roi":
        parts = [p for p in text.replace("[", "").replace("]", "").split(",") if p.strip()]
        if len(parts) != 4:
            raise ImageError(f"ROI must be 'x,y,w,h', got {text!r}")
        return cls(*(int(p) for p in parts))

    def check(self, shape) -> None:
        rows, cols = shape
        if self.y0 + self.h > rows or self.x0 + self.w > cols:
            raise ImageError(f"ROI {self} exceeds image of shape {tuple(shape)}")

    def slices(self) -> tuple[slice, slice]:
        return slice(self.y0, self.y0 + self.h), slice(self.x0, self.x0 + self.w)

    def extract(self, image) -> np.ndarray:
        image = np.asarray(image)
        self.check(image.shape)
        return image[self.slices()]

    def __str__(self) -> str:
        return f"[{self.x0},{self.y0},{self.w},{self.h}]"


def eval_step_function(image, x: float, y: float) -> float:
    """Value of the step-function model at ``(x, y)``; zero outside the raster."""
    a = np.asarray(image)
    n, m = a.shape
    i, j = ceil(x) - 1, ceil(y) - 1
    if 0 <= i < n and 0 <= j < m:
        return float(a[i, j])
    return 0.0


def overlap_matrix(n_pixels: int, w: float, k) -> np.ndarray:
    """
    Fraction of the cell ``[k/w, (k+1)/w]`` covered by each pixel.

    Returns an array of shape ``(len(k), n_pixels)`` with entry
    ``w * |[k/w, (k+1)/w] ∩ [p, p+1]|``; rows sum to the covered fraction of
    the cell (1 when the cell lies inside ``[0, n_pixels]``).
    """
    k = np.asarray(k, dtype=float)
    p = np.arange(n_pixels, dtype=float)
    lo = np.maximum(k[:, None] / w, p[None, :])
    hi = np.minimum((k[:, None] + 1) / w, p[None, :] + 1)
    return w * np.clip(hi - lo, 0.0, None)


def cells_covering(n_pixels: int, w: float) -> np.ndarray:
    """Indices ``k`` of all cells of width ``1/w`` meeting ``[0, n_pixels]``."""
    return np.arange(0, ceil(w * n_pixels))


def pixels_of_cell(k: int, w: float, n_pixels: int | None = None) -> range:
    """Pixel indices whose cells intersect ``[k/w, (k+1)/w]`` in positive length."""
    first = floor(k / w)
    last = ceil((k + 1) / w) - 1
    if n_pixels is not None:
        first, last = max(first, 0), min(last, n_pixels - 1)
    return range(first, last + 1)


def cell_mean(image, k, w: float) -> float:
    """
    Exact mean of the step function over ``[k1/w, (k1+1)/w] x [k2/w, (k2+1)/w]``.

    Computed from rectangle-overlap areas, so it is exact for the
    piecewise-constant model; parts of the cell outside the raster count as
    zero.
    """
    if w <= 0:
        raise ValueError("w must be positive")
    a = np.asarray(image, dtype=float)
    k1, k2 = k
    rows = overlap_matrix(a.shape[0], w, [k1])[0]
    cols = overlap_matrix(a.shape[1], w, [k2])[0]
    return float(rows @ a @ cols)
