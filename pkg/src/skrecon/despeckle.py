"""
Multiplicative speckle simulation, five despeckling filters and the
Down-Up / Up-Down resampling pipelines.

All windowed filters replicate edge pixels at the border. Frost, Lee and NLM
rely on global noise statistics, estimated from the image they are given
unless supplied explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter as _nd_median
from scipy.ndimage import uniform_filter

from .imagemodel import as_image, clamp
from .resample import RESAMPLERS, resize

FILTERS = ("mean", "median", "frost", "lee", "nlm")
DEFAULT_WINDOW = {"mean": 3, "median": 3, "lee": 3, "frost": 5, "nlm": 3}

# window used to gather local statistics for the global noise estimate
NOISE_WINDOW = 7


@dataclass(frozen=True)
class SpeckleParams:
    """Variance `variance` of the zero-mean uniform factor and the RNG seed."""

    variance: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"speckle variance must be positive, got {self.variance}")


def add_speckle(image, params: SpeckleParams) -> np.ndarray:
    """
    Multiply by ``1 + u`` with ``u`` i.i.d. uniform on ``[-sqrt(3v), sqrt(3v)]``.

    Noise is drawn in row-major order from ``numpy.random.default_rng(seed)``
    and the result is clamped to ``[0, 255]``.
    """
    a = as_image(image)
    half = np.sqrt(3.0 * params.variance)
    u = np.random.default_rng(params.seed).uniform(-half, half, size=a.shape)
    return clamp(a * (1.0 + u))


def _check_window(window: int, minimum: int = 1) -> int:
    if int(window) != window or window < minimum or window % 2 == 0:
        raise ValueError(f"window must be an odd integer >= {minimum}, got {window}")
    return int(window)


def _local_moments(a: np.ndarray, window: int):
    mean = uniform_filter(a, window, mode="nearest")
    var = uniform_filter(a * a, window, mode="nearest") - mean ** 2
    return mean, np.maximum(var, 0.0)


def mean_filter(image, window: int = 3) -> np.ndarray:
    """Box average over a ``window x window`` neighbourhood."""
    a = as_image(image)
    return uniform_filter(a, _check_window(window), mode="nearest")


def median_filter(image, window: int = 3) -> np.ndarray:
    a = as_image(image)
    return _nd_median(a, size=_check_window(window), mode="nearest")


def estimate_noise_cv2(image, window: int = NOISE_WINDOW) -> float:
    """
    Relative noise variance of multiplicative speckle.

    Computes the squared coefficient of variation ``(std / mean)**2`` in every
    `window` x `window` neighbourhood and returns the median over the most
    homogeneous tenth (smallest values). Windows with zero mean are skipped;
    an image with no usable windows gives 0.
    """
    a = as_image(image)
    mean, var = _local_moments(a, _check_window(window))
    ok = mean > 0
    if not ok.any():
        return 0.0
    cv2 = np.sort(var[ok] / mean[ok] ** 2)
    low = cv2[:max(1, cv2.size // 10)]
    return float(np.median(low))


def coefficient_of_variation(image) -> float:
    a = np.asarray(image, dtype=float)
    m = a.mean()
    return float(a.std() / m) if m > 0 else 0.0


def frost_filter(image, window: int = 5, *, cv=None) -> np.ndarray:
    """
    Frost filter: window average with weights ``exp(-alpha |t|)``.

    ``|t|`` is the Manhattan distance to the centre and
    ``alpha = 4 / (n cv**2) * var_loc / mean_loc**2`` with `n` the window side
    and `cv` the global coefficient of variation of the input (estimated if
    not given). Weights are normalised to sum to one; where the local mean is
    zero or the window is flat, all weights are equal.
    """
    a = as_image(image)
    n = _check_window(window, 3)
    cv = coefficient_of_variation(a) if cv is None else float(cv)
    mean, var = _local_moments(a, n)
    # a flat image has cv = 0 and no local variance: plain averaging
    scale = 4.0 / (n * cv ** 2) if cv > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = scale * var / mean ** 2
    alpha = np.where(np.isfinite(alpha), alpha, 0.0)
    r = n // 2
    p = np.pad(a, r, mode="edge")
    h, w = a.shape
    num = np.zeros_like(a)
    den = np.zeros_like(a)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            wt = np.exp(-alpha * (abs(dy) + abs(dx)))
            num += wt * p[r + dy:r + dy + h, r + dx:r + dx + w]
            den += wt
    return num / den


def lee_filter(image, window: int = 3, *, noise_cv2=None) -> np.ndarray:
    """
    Lee MMSE filter ``mean + K (I - mean)``.

    With relative noise variance ``s2`` (estimated by
    :func:`estimate_noise_cv2` unless `noise_cv2` is given),
    ``var_x = (var + mean**2) / (s2 + 1) - mean**2`` clamped at 0 and
    ``K = var_x / (mean**2 s2 + var_x)`` clamped to ``[0, 1]``; ``0/0`` is
    read as ``K = 0``.
    """
    a = as_image(image)
    n = _check_window(window, 3)
    s2 = estimate_noise_cv2(a) if noise_cv2 is None else float(noise_cv2)
    if s2 < 0:
        raise ValueError("noise variance must be nonnegative")
    mean, var = _local_moments(a, n)
    var_x = np.maximum((var + mean ** 2) / (s2 + 1.0) - mean ** 2, 0.0)
    den = mean ** 2 * s2 + var_x
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(den > 0, var_x / den, 0.0)
    k = np.clip(k, 0.0, 1.0)
    return mean + k * (a - mean)


def nlm_filter(image, patch: int = 5, search: int = 21, h=None, *, sigma=None) -> np.ndarray:
    """
    Pixelwise non-local means.

    Every pixel becomes a weighted average of the pixels in its
    ``search x search`` neighbourhood, with weights
    ``exp(-max(d2 - 2 sigma**2, 0) / h**2)`` where ``d2`` is the mean squared
    difference of the two ``patch x patch`` neighbourhoods.

    Parameters
    ----------
    image : array_like
    patch, search : int
        Odd window sides, ``patch <= search``.
    h : float, optional
        Smoothing strength; defaults to `sigma`.
    sigma : float, optional
        Noise standard deviation in gray levels. Defaults to
        ``sqrt(estimate_noise_cv2(image)) * image.mean()``, the typical
        speckle amplitude.
    """
    a = as_image(image)
    patch, search = _check_window(patch), _check_window(search)
    if patch > search:
        raise ValueError(f"patch ({patch}) must not exceed search window ({search})")
    if sigma is None:
        sigma = np.sqrt(estimate_noise_cv2(a)) * a.mean()
    h = sigma if h is None else float(h)
    if not h > 0:
        # nothing to smooth: weights vanish except for identical patches
        h = np.finfo(float).tiny ** 0.25
    sr, pr = search // 2, patch // 2
    rad = sr + pr
    p = np.pad(a, rad, mode="edge")
    rows, cols = a.shape
    ext = (rows + 2 * pr, cols + 2 * pr)
    base = p[sr:sr + ext[0], sr:sr + ext[1]]
    num = np.zeros_like(a)
    den = np.zeros_like(a)
    thresh = 2.0 * sigma ** 2
    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            moved = p[sr + dy:sr + dy + ext[0], sr + dx:sr + dx + ext[1]]
            d2 = uniform_filter((base - moved) ** 2, patch, mode="nearest")[pr:pr + rows, pr:pr + cols]
            wt = np.exp(-np.maximum(d2 - thresh, 0.0) / h ** 2)
            num += wt * moved[pr:pr + rows, pr:pr + cols]
            den += wt
    return num / den


@dataclass(frozen=True)
class FilterSpec:
    """
    A despeckling filter and its parameters.

    `window` defaults to 3 for mean, median and Lee and to 5 for Frost.
    `nlm_h` ``None`` means automatic (the estimated noise level).
    `noise_variance` is the relative speckle variance used by Lee; when the
    speckle law is known (simulated data) pass it here, otherwise it is
    estimated from the image being filtered.
    """

    kind: str
    window: int | None = None
    nlm_patch: int = 5
    nlm_search: int = 21
    nlm_h: float | None = None
    noise_variance: float | None = None

    def __post_init__(self):
        if self.kind not in FILTERS:
            raise ValueError(f"unknown filter {self.kind!r}; expected one of {FILTERS}")
        if self.window is not None:
            _check_window(self.window, 1 if self.kind in ("mean", "median") else 3)
        _check_window(self.nlm_patch)
        _check_window(self.nlm_search)
        if self.nlm_patch > self.nlm_search:
            raise ValueError("nlm_patch must not exceed nlm_search")
        if self.nlm_h is not None and not self.nlm_h > 0:
            raise ValueError("nlm_h must be positive")
        if self.noise_variance is not None and self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")

    @property
    def effective_window(self) -> int:
        return self.window if self.window is not None else DEFAULT_WINDOW[self.kind]

    @property
    def label(self) -> str:
        return "NLM" if self.kind == "nlm" else self.kind.capitalize()


def apply_filter(image, spec: FilterSpec) -> np.ndarray:
    """Run the filter described by `spec`; global statistics come from `image`."""
    kind, n = spec.kind, spec.effective_window
    if kind == "mean":
        return mean_filter(image, n)
    if kind == "median":
        return median_filter(image, n)
    if kind == "frost":
        return frost_filter(image, n)
    if kind == "lee":
        return lee_filter(image, n, noise_cv2=spec.noise_variance)
    return nlm_filter(image, spec.nlm_patch, spec.nlm_search, spec.nlm_h)


DOWN_UP = "downup"
UP_DOWN = "updown"


@dataclass(frozen=True)
class PipelineSpec:
    """
    Rescale-filter-rescale pipeline.

    ``downup`` halves the image with `down`, filters, and restores the
    original size with `up`; ``updown`` doubles with `up`, filters, and
    halves with `down`. SK steps use a Jackson kernel of order
    `sk_kernel_order` at sampling rate `sk_w`.
    """

    down: str
    filter: FilterSpec
    up: str
    direction: str = DOWN_UP
    sk_w: float = 15.0
    sk_kernel_order: int = 12

    def __post_init__(self):
        for m in (self.down, self.up):
            if m not in RESAMPLERS:
                raise ValueError(f"unknown resampler {m!r}; expected one of {RESAMPLERS}")
        if self.direction not in (DOWN_UP, UP_DOWN):
            raise ValueError(f"direction must be {DOWN_UP!r} or {UP_DOWN!r}")
        if not self.sk_w > 0:
            raise ValueError("sk_w must be positive")

    def label(self) -> str:
        short = {"sk": "SK", "bilinear": "bil", "bicubic": "bic"}
        f = self.filter.label
        if self.direction == DOWN_UP:
            return f"{short[self.down]}+{f}+{short[self.up]}"
        return f"{short[self.up]}-up+{f}+{short[self.down]}-down"


def _resize(image, shape, method, spec: PipelineSpec):
    return resize(image, shape, method, w=spec.sk_w, order=spec.sk_kernel_order)


def run_pipeline(image, spec: PipelineSpec) -> np.ndarray:
    """
    Apply `spec` to a noisy image; the output has the input's shape.

    The filter sees only the resampled image, so estimated noise
    statistics refer to that image. Odd sizes are halved by floor division
    and resized back exactly.
    """
    a = as_image(image)
    n, m = a.shape
    if spec.direction == DOWN_UP:
        small = (max(n // 2, 1), max(m // 2, 1))
        b = _resize(a, small, spec.down, spec)
        b = clamp(apply_filter(b, spec.filter))
        return _resize(b, (n, m), spec.up, spec)
    b = _resize(a, (2 * n, 2 * m), spec.up, spec)
    b = clamp(apply_filter(b, spec.filter))
    return _resize(b, (n, m), spec.down, spec)
