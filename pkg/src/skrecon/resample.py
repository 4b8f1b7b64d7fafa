"""
Image rescaling: the sampling Kantorovich (SK) operator and two classical
interpolators (bilinear, Keys bicubic) used as baselines in the Down-Up
pipeline.

All three are separable, so each is applied as ``R @ image @ C.T`` with a
row operator ``R`` of shape ``(out_rows, in_rows)`` and a column operator
``C`` of shape ``(out_cols, in_cols)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagemodel import ImageError, as_image, cells_covering, clamp, overlap_matrix
from .kernels import ProductKernel, UnivariateKernel, jackson

# Jackson terms are kept while the kernel envelope exceeds this value
JACKSON_ENVELOPE_TOL = 1e-12

# output rows processed per block when building SK operators
_BLOCK = 256


class InvalidParamsError(ValueError):
    """Raised for nonpositive scale factors or empty output sizes."""


@dataclass(frozen=True)
class RescaleParams:
    """Sampling rate `w`, scale factor `r` and kernel of an SK rescale."""

    w: float
    r: float
    kernel: ProductKernel

    def __post_init__(self):
        if not self.w > 0:
            raise InvalidParamsError(f"w must be positive, got {self.w}")
        if not self.r > 0:
            raise InvalidParamsError(f"r must be positive, got {self.r}")

    def output_shape(self, shape) -> tuple[int, int]:
        out = tuple(_round_half_up(n * self.r) for n in shape)
        if min(out) < 1:
            raise InvalidParamsError(f"scale factor {self.r} gives empty output for {tuple(shape)}")
        return out


def _round_half_up(v: float) -> int:
    return int(np.floor(v + 0.5))


def grid_nodes(n_src: int, n_out: int) -> np.ndarray:
    """Centres of `n_out` target pixels mapped into ``[0, n_src]``."""
    return (np.arange(n_out) + 0.5) * (n_src / n_out)


def sk_operator(n_src: int, n_out: int, w: float, kernel: UnivariateKernel) -> np.ndarray:
    """
    One-dimensional SK operator as a dense ``(n_out, n_src)`` matrix.

    Entry ``[p, i]`` is ``sum_k chi(w x_p - k) * w |[k/w, (k+1)/w] ∩ (i, i+1]|``
    where ``x_p`` are the grid nodes; cells outside the raster carry zero
    (the image is extended by zero), so only ``k`` in ``[0, ceil(w n_src))``
    matters.
    """
    if w <= 0:
        raise InvalidParamsError("w must be positive")
    nodes = grid_nodes(n_src, n_out)
    k = cells_covering(n_src, w)
    radius = kernel.envelope_radius(JACKSON_ENVELOPE_TOL)
    out = np.zeros((n_out, n_src))
    for start in range(0, n_out, _BLOCK):
        u = w * nodes[start:start + _BLOCK, None] - k[None, :]
        lo, hi = np.searchsorted(k, w * nodes[start] - radius), \
            np.searchsorted(k, w * nodes[min(start + _BLOCK, n_out) - 1] + radius, side="right")
        lo, hi = max(lo - 1, 0), min(hi + 1, k.size)
        u = u[:, lo:hi]
        weights = kernel(u)
        if not kernel.compact:
            weights = np.where(np.abs(u) <= radius, weights, 0.0)
        out[start:start + _BLOCK] = weights @ overlap_matrix(n_src, w, k[lo:hi])
    return out


def sk_resize(image, out_shape, w: float, kernel: ProductKernel, *, clip: bool = True) -> np.ndarray:
    """
    SK reconstruction of `image` sampled on an ``out_shape`` grid of nodes.

    Parameters
    ----------
    image : array_like
        Grayscale image in ``[0, 255]``.
    out_shape : (int, int)
        Output rows and columns.
    w : float
        Sampling rate of the operator.
    kernel : ProductKernel
        Two-factor product kernel.
    clip : bool
        Clamp the result to ``[0, 255]`` (default). Disable to inspect the
        raw operator output.
    """
    a = as_image(image)
    rows, cols = (int(v) for v in out_shape)
    if rows < 1 or cols < 1:
        raise InvalidParamsError(f"output shape must be positive, got {out_shape}")
    kr, kc = kernel.factors
    R = sk_operator(a.shape[0], rows, w, kr)
    C = sk_operator(a.shape[1], cols, w, kc)
    out = R @ a @ C.T
    return clamp(out) if clip else out


def sk_rescale(image, params: RescaleParams, *, clip: bool = True) -> np.ndarray:
    """SK rescale by factor ``params.r``; output size is ``round(n r) x round(m r)``."""
    a = as_image(image)
    return sk_resize(a, params.output_shape(a.shape), params.w, params.kernel, clip=clip)


def jackson_rescale_params(r: float, w: float = 15.0, order: int = 12) -> RescaleParams:
    return RescaleParams(w=w, r=r, kernel=ProductKernel.isotropic(jackson(order)))


def _interp_matrix(n_in: int, n_out: int, taps, weight_fn) -> np.ndarray:
    """Separable interpolation operator with half-pixel centres and edge clamping."""
    u = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    base = np.floor(u).astype(int)
    frac = u - base
    M = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    for t in taps:
        idx = np.clip(base + t, 0, n_in - 1)
        np.add.at(M, (rows, idx), weight_fn(frac - t))
    return M


def _check_size(out_w, out_h):
    if int(out_w) < 1 or int(out_h) < 1:
        raise InvalidParamsError(f"output size must be positive, got {out_w}x{out_h}")


def _linear_weight(d):
    return np.clip(1.0 - np.abs(d), 0.0, None)


def keys_cubic(d, a: float = -0.5):
    """Keys cubic convolution kernel with parameter `a`."""
    d = np.abs(d)
    return np.where(
        d <= 1, (a + 2) * d ** 3 - (a + 3) * d ** 2 + 1,
        np.where(d < 2, a * d ** 3 - 5 * a * d ** 2 + 8 * a * d - 4 * a, 0.0))


def bilinear_resize(image, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize to `out_h` rows by `out_w` columns."""
    a = as_image(image)
    _check_size(out_w, out_h)
    R = _interp_matrix(a.shape[0], int(out_h), (0, 1), _linear_weight)
    C = _interp_matrix(a.shape[1], int(out_w), (0, 1), _linear_weight)
    return clamp(R @ a @ C.T)


def bicubic_resize(image, out_w: int, out_h: int) -> np.ndarray:
    """Bicubic (Keys, ``a = -0.5``) resize to `out_h` rows by `out_w` columns."""
    a = as_image(image)
    _check_size(out_w, out_h)
    R = _interp_matrix(a.shape[0], int(out_h), (-1, 0, 1, 2), keys_cubic)
    C = _interp_matrix(a.shape[1], int(out_w), (-1, 0, 1, 2), keys_cubic)
    return clamp(R @ a @ C.T)


RESAMPLERS = ("sk", "bilinear", "bicubic")


def resize(image, out_shape, method: str, *, w: float = 15.0, order: int = 12) -> np.ndarray:
    """Dispatch to one of :data:`RESAMPLERS`; SK uses a Jackson kernel of `order`."""
    rows, cols = out_shape
    if method == "sk":
        return sk_resize(image, (rows, cols), w, ProductKernel.isotropic(jackson(order)))
    if method == "bilinear":
        return bilinear_resize(image, cols, rows)
    if method == "bicubic":
        return bicubic_resize(image, cols, rows)
    raise ImageError(f"unknown resampler {method!r}; expected one of {RESAMPLERS}")
