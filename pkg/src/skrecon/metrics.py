"""
With-reference (MSE, PSNR, SSIM) and without-reference (SI, SSI, SMPI, ENL)
image quality indexes.

All statistics use population (divide-by-N) moments and an 8-bit peak of 255.
For the speckle indexes, "sigma" under a square root is read as the ROI
variance, so ``sqrt(sigma)`` is the ROI standard deviation, while ENL uses the
standard deviation directly: ``ENL = (mean / std)**2``.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .imagemodel import PIXEL_MAX, ImageError, Roi

C1 = (0.01 * PIXEL_MAX) ** 2
C2 = (0.03 * PIXEL_MAX) ** 2

SSIM_SIGMA = 1.5
SSIM_WINDOW = 11


class MetricError(ValueError):
    """A metric is undefined for the given inputs."""


class MetricWarning(UserWarning):
    """Some indexes of a report could not be computed."""


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ImageError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ImageError(f"expected 2-D images, got {a.ndim}-D")
    return a, b


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB with peak 255; ``inf`` for identical images."""
    e = mse(a, b)
    if e == 0:
        return math.inf
    return float(20 * np.log10(PIXEL_MAX / np.sqrt(e)))


def _ssim_formula(mu_a, mu_b, var_a, var_b, cov):
    return ((2 * mu_a * mu_b + C1) * (2 * cov + C2)
            / ((mu_a ** 2 + mu_b ** 2 + C1) * (var_a + var_b + C2)))


def ssim_global(a, b) -> float:
    """SSIM evaluated once from whole-image statistics."""
    a, b = _pair(a, b)
    mu_a, mu_b = a.mean(), b.mean()
    cov = np.mean((a - mu_a) * (b - mu_b))
    return float(_ssim_formula(mu_a, mu_b, a.var(), b.var(), cov))


def ssim_map(a, b) -> np.ndarray:
    """
    Local SSIM with an 11 x 11 Gaussian window (sigma 1.5).

    Borders are handled by edge replication, so the map has the shape of
    the inputs.
    """
    a, b = _pair(a, b)
    if min(a.shape) < SSIM_WINDOW:
        raise ImageError(f"windowed SSIM needs both dimensions >= {SSIM_WINDOW}, got {a.shape}")
    # radius 5 gives the 11-tap window
    truncate = (SSIM_WINDOW // 2) / SSIM_SIGMA

    def blur(x):
        return gaussian_filter(x, SSIM_SIGMA, mode="nearest", truncate=truncate)

    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a ** 2
    var_b = blur(b * b) - mu_b ** 2
    cov = blur(a * b) - mu_a * mu_b
    return _ssim_formula(mu_a, mu_b, var_a, var_b, cov)


def ssim_windowed(a, b) -> float:
    """Mean of :func:`ssim_map`; the SSIM value reported by default."""
    return float(ssim_map(a, b).mean())


def roi_stats(image, roi: Roi) -> tuple[float, float]:
    """Mean and population standard deviation over `roi`."""
    r = roi.extract(np.asarray(image, dtype=float))
    return float(r.mean()), float(r.std())


@dataclass(frozen=True)
class SpeckleIndexes:
    """SI, SSI, SMPI and ENL; `ssi` and `smpi` are ``None`` when undefined."""

    si: float
    ssi: float | None
    smpi: float | None
    enl: float


def speckle_indexes_from_stats(mean_n: float, std_n: float,
                               mean_d: float, std_d: float) -> SpeckleIndexes:
    """
    Speckle indexes from ROI statistics of the noisy and despeckled images.

    Raises
    ------
    MetricError
        If the noisy ROI has zero variance or either ROI has zero mean.
    """
    if std_n == 0:
        raise MetricError("noisy ROI has zero variance: SSI and SMPI are undefined")
    if mean_d == 0 or mean_n == 0:
        raise MetricError("ROI has zero mean: speckle index is undefined")
    si_d = std_d / mean_d
    si_n = std_n / mean_n
    smpi = (1 + abs(mean_n - mean_d)) * (std_d / std_n)
    enl = math.inf if std_d == 0 else (mean_d / std_d) ** 2
    return SpeckleIndexes(si=si_d, ssi=si_d / si_n, smpi=smpi, enl=enl)


def speckle_indexes(noisy, despeckled, roi: Roi) -> SpeckleIndexes:
    """SI, SSI, SMPI and ENL of `despeckled` relative to `noisy` on `roi`."""
    noisy, despeckled = _pair(noisy, despeckled)
    mean_n, std_n = roi_stats(noisy, roi)
    mean_d, std_d = roi_stats(despeckled, roi)
    return speckle_indexes_from_stats(mean_n, std_n, mean_d, std_d)


def _report_indexes(noisy, despeckled, roi: Roi) -> SpeckleIndexes:
    # a flat noisy ROI leaves SSI and SMPI undefined, but SI and ENL of the
    # result are still meaningful for a report
    noisy, despeckled = _pair(noisy, despeckled)
    mean_n, std_n = roi_stats(noisy, roi)
    mean_d, std_d = roi_stats(despeckled, roi)
    if std_n > 0:
        return speckle_indexes_from_stats(mean_n, std_n, mean_d, std_d)
    if mean_d == 0:
        raise MetricError(f"ROI {roi} has zero mean: speckle index is undefined")
    warnings.warn(f"noisy ROI {roi} has zero variance: SSI and SMPI omitted", MetricWarning)
    enl = math.inf if std_d == 0 else (mean_d / std_d) ** 2
    return SpeckleIndexes(si=std_d / mean_d, ssi=None, smpi=None, enl=enl)


@dataclass
class MetricsReport:
    """
    Metrics of one result image.

    With-reference fields are ``None`` when no ground truth was available.
    `rois` maps each ROI to its speckle indexes; `extra` holds further
    named global values (for example pixel counts).
    """

    mse: float | None = None
    psnr: float | None = None
    ssim_windowed: float | None = None
    ssim_global: float | None = None
    rois: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @classmethod
    def compute(cls, result, reference=None, noisy=None, rois=()) -> "MetricsReport":
        rep = cls()
        if reference is not None:
            rep.mse = mse(reference, result)
            rep.psnr = psnr(reference, result)
            rep.ssim_windowed = ssim_windowed(reference, result)
            rep.ssim_global = ssim_global(reference, result)
        if rois:
            if noisy is None:
                raise MetricError("speckle indexes need the noisy image")
            for roi in rois:
                rep.rois[roi] = _report_indexes(noisy, result, roi)
        return rep

    def rows(self):
        """``(metric, roi, value)`` triples; `roi` is ``None`` for global metrics."""
        for name in ("mse", "psnr", "ssim_windowed", "ssim_global"):
            v = getattr(self, name)
            if v is not None:
                yield name, None, v
        for name, v in self.extra.items():
            yield name, None, v
        for roi, idx in self.rois.items():
            for name in ("si", "ssi", "smpi", "enl"):
                v = getattr(idx, name)
                if v is not None:
                    yield name, roi, v


CSV_HEADER = ("experiment", "image", "method", "metric", "roi", "value")


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def write_csv(records, fh) -> None:
    """
    Write ``(experiment, image, method, MetricsReport)`` records as long-form CSV.

    `fh` is an open text file; one row is written per metric and ROI.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for experiment, image, method, report in records:
        for metric, roi, value in report.rows():
            w.writerow((experiment, image, method, metric, "" if roi is None else str(roi), _fmt(value)))


def read_csv(fh) -> list[dict]:
    rows = list(csv.DictReader(fh))
    for r in rows:
        r["value"] = float(r["value"])
    return rows


def markdown_table(records, digits: int = 4) -> str:
    """
    Markdown table with one row per method and one column per metric,
    ROI-dependent metrics suffixed with their ROI number.
    """
    records = list(records)
    columns: list[str] = []
    table = []
    for _, image, method, report in records:
        roi_ids = {roi: i + 1 for i, roi in enumerate(report.rois)}
        row = {}
        for metric, roi, value in report.rows():
            key = metric if roi is None else f"{metric} ROI{roi_ids[roi]}"
            row[key] = value
            if key not in columns:
                columns.append(key)
        table.append((image, method, row))
    out = io.StringIO()
    out.write("| image | method | " + " | ".join(columns) + " |\n")
    out.write("|" + "---|" * (len(columns) + 2) + "\n")
    for image, method, row in table:
        cells = [_md(row.get(c), digits) for c in columns]
        out.write(f"| {image} | {method} | " + " | ".join(cells) + " |\n")
    return out.getvalue()


def _md(v, digits):
    if v is None:
        return ""
    if math.isinf(v):
        return "inf"
    return f"{v:.{digits}f}"
