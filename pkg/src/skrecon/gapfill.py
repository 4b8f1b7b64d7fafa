"""
Gap filling by linear prediction with sampling Kantorovich operators (LP-SK).

A missing pixel ``(nu, mu)`` (0-based row, column) is predicted by evaluating
the SK operator with the product of two shifted B-splines at the node
``x = (nu, mu)``, the lower corner of the pixel's cell ``(nu, nu+1] x (mu, mu+1]``.
Because the shifted kernel vanishes below 1, every contributing cell
``[k/w, (k+1)/w]`` satisfies ``k < w x - 1`` on both axes and lies in the
already scanned region ``{i < nu, j < mu}``. Pixels are processed in raster
order, so earlier reconstructions feed later predictions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, floor

import numpy as np

from .imagemodel import PIXEL_MAX, as_image, as_mask, overlap_matrix
from .kernels import eval_shifted_bspline


class PredictionImpossibleError(ValueError):
    """No valid past samples are available for the requested pixel."""


@dataclass(frozen=True)
class GapFillParams:
    """
    Parameters of the LP-SK predictor.

    `mask_rows` and `mask_cols` size the window of past pixels; they default
    to ``s + 1``, the widest footprint of the shifted kernel at unit spacing.
    """

    w: float = 40.0
    s: int = 9
    mask_rows: int | None = None
    mask_cols: int | None = None

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError(f"w must be positive, got {self.w}")
        if int(self.s) != self.s or self.s < 1:
            raise ValueError(f"s must be a positive integer, got {self.s}")
        for name in ("mask_rows", "mask_cols"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")

    @property
    def window(self) -> tuple[int, int]:
        return (self.mask_rows or self.s + 1, self.mask_cols or self.s + 1)


def _axis_terms(x: float, w: float, s: int, n_pixels: int, first_pixel: int):
    """
    Nonzero kernel weights along one axis and the overlap of their cells
    with window pixels ``first_pixel .. floor(x) - 1``.
    """
    # shifted kernel is positive on the open interval (1, s + 1)
    k = np.arange(floor(w * x - s - 1), ceil(w * x - 1) + 1)
    weights = eval_shifted_bspline(s, w * x - k)
    keep = weights > 0
    k, weights = k[keep], weights[keep]
    last_pixel = int(ceil(x)) - 1
    pixels = np.arange(first_pixel, last_pixel + 1)
    if pixels.size == 0 or k.size == 0:
        return k, weights, pixels, np.zeros((k.size, pixels.size)), np.zeros(k.size, bool)
    overlap = overlap_matrix(last_pixel + 1, w, k)
    # a cell is usable only if it lies entirely over window pixels inside the raster
    inside = np.isclose(overlap[:, first_pixel:].sum(axis=1), 1.0, rtol=0, atol=1e-12)
    inside &= (k >= 0) & ((k + 1) / w <= n_pixels)
    return k, weights, pixels, overlap[:, first_pixel:], inside


def lp_sk_predict(image, nu: int, mu: int, params: GapFillParams = GapFillParams(),
                  valid=None, *, trace=None) -> float:
    """
    Predict pixel ``(nu, mu)`` from strictly earlier pixels.

    Parameters
    ----------
    image : array_like
        Image in ``[0, 255]``; the value at ``(nu, mu)`` is never read.
    nu, mu : int
        0-based row and column of the pixel to predict.
    params : GapFillParams
    valid : array_like of bool, optional
        ``True`` where a pixel may be read (original or already
        reconstructed). Defaults to all pixels.
    trace : callable, optional
        Called as ``trace(k_rows, k_cols, rows, cols)`` with the cell indices
        that received weight and the pixel indices read.

    Returns
    -------
    float
        Prediction clamped to ``[0, 255]``. Weights of the cells used are
        renormalised to sum to one.

    Raises
    ------
    PredictionImpossibleError
        If no usable cell lies in the past window.
    """
    a = np.asarray(image, dtype=float)
    n, m = a.shape
    n1, m1 = params.window
    w, s = params.w, int(params.s)
    x, y = float(nu), float(mu)

    kr, wr, rows, Or, in_r = _axis_terms(x, w, s, n, max(nu - n1, 0))
    kc, wc, cols, Oc, in_c = _axis_terms(y, w, s, m, max(mu - m1, 0))
    if rows.size == 0 or cols.size == 0 or not in_r.any() or not in_c.any():
        raise PredictionImpossibleError(f"no past samples available for pixel ({nu}, {mu})")

    win = a[np.ix_(rows, cols)]
    usable = np.outer(in_r, in_c)
    if valid is not None:
        bad = ~np.asarray(valid, dtype=bool)[np.ix_(rows, cols)]
        touches_bad = ((Or > 0).astype(float) @ bad.astype(float) @ (Oc > 0).T.astype(float)) > 0
        usable &= ~touches_bad
        win = np.where(bad, 0.0, win)
    weights = np.outer(wr, wc) * usable
    total = weights.sum()
    if total <= 0:
        raise PredictionImpossibleError(f"no valid past samples for pixel ({nu}, {mu})")
    means = Or @ win @ Oc.T
    if trace is not None:
        used_r, used_c = np.nonzero(weights)
        trace(kr[np.unique(used_r)], kc[np.unique(used_c)],
              rows[(Or[np.unique(used_r)] > 0).any(axis=0)],
              cols[(Oc[np.unique(used_c)] > 0).any(axis=0)])
    value = float((weights * means).sum() / total)
    return min(max(value, 0.0), PIXEL_MAX)


@dataclass
class GapFillResult:
    image: np.ndarray
    n_missing: int
    n_predicted: int
    n_fallback: int
    fallback_pixels: list = field(default_factory=list)


def fill_gaps(image, mask, params: GapFillParams = GapFillParams(), *, trace=None) -> GapFillResult:
    """
    Fill every masked pixel in raster order and report how it was filled.

    Pixels with no usable past (gaps in the first row or column, or behind a
    fully missing window) take the value of the nearest defined pixel in
    raster order: the previous one if any, otherwise the next original one.

    `trace`, if given, is called as ``trace(nu, mu, k_rows, k_cols, rows, cols)``
    for every prediction.
    """
    a = as_image(image, copy=True)
    gaps = as_mask(mask, a.shape)
    valid = ~gaps
    result = GapFillResult(a, int(gaps.sum()), 0, 0)
    if not gaps.any():
        return result
    n, m = a.shape
    flat_valid = valid.ravel()
    for nu, mu in zip(*np.nonzero(gaps)):
        inner = None
        if trace is not None:
            def inner(kr, kc, rows, cols, _nu=nu, _mu=mu):
                trace(_nu, _mu, kr, kc, rows, cols)
        try:
            a[nu, mu] = lp_sk_predict(a, nu, mu, params, valid, trace=inner)
            result.n_predicted += 1
        except PredictionImpossibleError:
            a[nu, mu] = _raster_neighbour(a, flat_valid, nu * m + mu)
            result.n_fallback += 1
            result.fallback_pixels.append((int(nu), int(mu)))
        valid[nu, mu] = True
    return result


def _raster_neighbour(a: np.ndarray, flat_valid: np.ndarray, pos: int) -> float:
    flat = a.ravel()
    before = np.flatnonzero(flat_valid[:pos])
    if before.size:
        return float(flat[before[-1]])
    after = np.flatnonzero(flat_valid[pos + 1:])
    if after.size:
        return float(flat[pos + 1 + after[0]])
    return 0.0


def lp_sk_fill(image, mask, params: GapFillParams = GapFillParams()) -> np.ndarray:
    """LP-SK gap filling; non-missing pixels are returned unchanged."""
    return fill_gaps(image, mask, params).image


def generate_random_gaps(width: int, height: int, fraction: float, seed: int) -> np.ndarray:
    """
    Uniform random gap mask with ``round(fraction * width * height)`` missing pixels.

    Returns a ``(height, width)`` boolean array, ``True`` where missing.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be positive")
    total = width * height
    count = int(np.floor(fraction * total + 0.5))
    rng = np.random.default_rng(seed)
    mask = np.zeros(total, dtype=bool)
    mask[rng.choice(total, size=count, replace=False)] = True
    return mask.reshape(height, width)
