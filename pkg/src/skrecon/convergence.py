"""
Empirical approximation orders of SK operators on synthetic functions.

``K_w f(x) = sum_k X(w x - k) w^2 int_{R_k} f`` is evaluated on a grid of
points in a box, with cell means computed exactly where a closed form is
available and by 8-point Gauss-Legendre quadrature (split at known kinks)
otherwise. Errors over a geometric range of ``w`` are fitted by a line in
log-log coordinates; the slope is the observed order.

Every synthetic function is a constant `baseline` plus a part that either has
compact support or is handled with a compactly supported kernel. The baseline
is reproduced exactly by the partition of unity, so non-compact kernels only
ever sum over finitely many cells.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernels import ProductKernel, UnivariateKernel, central_bspline, jackson

GAUSS_ORDER = 8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)

# largest number of cells per axis the direct summation will accept
MAX_CELLS = 1 << 16

DEFAULT_BOX = ((0.0, 1.0), (0.0, 1.0))
LIPSCHITZ_W = (8, 16, 32, 64, 128)
LOGW_W = (16, 32, 64, 128, 256)
# resolvable range for the default lacunary series on a 512-interval grid
WEIERSTRASS_W = (4, 8, 16, 32)
WEIERSTRASS_GRID = 512


class DegenerateRateError(ValueError):
    """Errors are at round-off level, so no rate can be fitted."""


# ---------------------------------------------------------------------------
# synthetic functions


@dataclass(frozen=True)
class Part1D:
    """
    Univariate building block.

    `antiderivative`, when given, yields exact cell means; otherwise cells
    are integrated by Gauss-Legendre quadrature split at `breaks`.
    `support` is the closed interval outside which `value` vanishes, or
    ``None``.
    """

    value: Callable
    support: tuple[float, float] | None = None
    breaks: tuple[float, ...] = ()
    antiderivative: Callable | None = None

    def cell_means(self, k, w: float) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        a, b = k / w, (k + 1) / w
        if self.antiderivative is not None:
            return w * (self.antiderivative(b) - self.antiderivative(a))
        out = _gauss_mean(self.value, a, b)
        for t in self.breaks:
            hit = np.flatnonzero((a < t) & (t < b))
            for i in hit:
                pts = [a[i]] + sorted(x for x in self.breaks if a[i] < x < b[i]) + [b[i]]
                total = sum((q - p) * _gauss_mean(self.value, np.array([p]), np.array([q]))[0]
                            for p, q in zip(pts[:-1], pts[1:]))
                out[i] = total / (b[i] - a[i])
        return out


def _gauss_mean(f, a, b):
    half = (b - a)[:, None] / 2
    x = (a + b)[:, None] / 2 + half * _GL_NODES[None, :]
    return (f(x) * _GL_WEIGHTS[None, :]).sum(axis=1) / 2


@dataclass(frozen=True)
class SyntheticFunction:
    """
    Closed-form test function on the plane.

    Three structures are supported:

    ``"product"``
        ``f = baseline + p1(x) p2(y)``
    ``"sum"``
        ``f = baseline + p1(x) + p2(y)``
    ``"general"``
        ``f = baseline + g(x, y)`` with `g` vanishing outside `support`;
        cell means by tensor Gauss-Legendre quadrature.

    Attributes
    ----------
    name : str
    alpha : float
        Hölder exponent of the function (0 for discontinuous ones).
    """

    name: str
    alpha: float
    baseline: float = 0.0
    structure: str = "product"
    parts: tuple[Part1D, ...] = ()
    general: Callable | None = None
    support: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __call__(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        if self.structure == "general":
            return self.baseline + self.general(x, y)
        if not self.parts:
            return np.full(shape, float(self.baseline))
        p1, p2 = self.parts
        # separable parts are evaluated before broadcasting
        if self.structure == "product":
            out = self.baseline + p1.value(x) * p2.value(y)
        else:
            out = self.baseline + p1.value(x) + p2.value(y)
        return np.broadcast_to(out, shape)

    @property
    def is_constant(self) -> bool:
        return self.structure != "general" and not self.parts

    def part_support(self, axis: int):
        """Interval outside which the non-constant part does not depend on this axis."""
        if self.structure == "general":
            return None if self.support is None else self.support[axis]
        return self.parts[axis].support


def constant(c: float = 1.0) -> SyntheticFunction:
    return SyntheticFunction(f"constant({c:g})", alpha=1.0, baseline=float(c))


def lipschitz_cone(alpha: float = 1.0, center=(0.5, 0.5), radius: float = 0.25) -> SyntheticFunction:
    """
    ``min(|x - center|, radius)**alpha``: Hölder-`alpha` with constant 1.

    The singular point sits at `center`; it is aligned with cell corners
    whenever ``w * center`` is an integer.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    cx, cy = center
    top = radius ** alpha

    def g(x, y):
        r = np.hypot(x - cx, y - cy)
        return np.minimum(r, radius) ** alpha - top

    box = ((cx - radius, cx + radius), (cy - radius, cy + radius))
    return SyntheticFunction(f"cone(alpha={alpha:g})", alpha, top, "general", general=g, support=box)


def _tent(center, half_width):
    def value(x):
        return np.clip(1.0 - np.abs(x - center) / half_width, 0.0, None)
    return Part1D(value, (center - half_width, center + half_width),
                  (center - half_width, center, center + half_width))


def tent(center=(0.5, 0.5), half_width: float = 0.3) -> SyntheticFunction:
    """Product of two hat functions: Lipschitz with kinks along lines."""
    return SyntheticFunction("tent", 1.0, 0.0, "product",
                             (_tent(center[0], half_width), _tent(center[1], half_width)))


def _gauss(center, sigma):
    def value(x):
        return np.exp(-0.5 * ((x - center) / sigma) ** 2)
    # beyond 8 sigma the factor is below 1.3e-14
    return Part1D(value, (center - 8 * sigma, center + 8 * sigma))


def smooth_gaussian(center=(0.5, 0.5), sigma: float = 0.1) -> SyntheticFunction:
    return SyntheticFunction("gaussian", 1.0, 0.0, "product",
                             (_gauss(center[0], sigma), _gauss(center[1], sigma)))


def _indicator(lo, hi):
    def value(x):
        return ((x >= lo) & (x <= hi)).astype(float)

    def antiderivative(x):
        return np.clip(x, lo, hi) - lo
    return Part1D(value, (lo, hi), (lo, hi), antiderivative)


def step_edge(lo: float = 0.25, hi: float = 0.75) -> SyntheticFunction:
    """Indicator of the square ``[lo, hi]^2``."""
    return SyntheticFunction("step", 0.0, 0.0, "product", (_indicator(lo, hi), _indicator(lo, hi)))


def _lacunary(alpha, n_terms):
    freqs = 2.0 ** np.arange(n_terms)
    amps = freqs ** -alpha

    def value(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for a, f in zip(amps, freqs):
            out += a * np.cos(2 * np.pi * f * x)
        return out

    def antiderivative(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for a, f in zip(amps, freqs):
            out += a * np.sin(2 * np.pi * f * x) / (2 * np.pi * f)
        return out
    return Part1D(value, None, (), antiderivative), float(amps.sum())


def weierstrass(alpha: float = 0.5, n_terms: int = 8) -> SyntheticFunction:
    """
    ``W(x) + W(y) + 2 sum(2**(-j alpha))`` with the lacunary series
    ``W(x) = sum_j 2**(-j alpha) cos(2 pi 2**j x)``.

    Hölder-`alpha` with the same order of error everywhere, so the rate is
    sharp in every norm; nonnegative by the offset. The series is periodic,
    so it is only usable with compactly supported kernels. Its top
    frequency ``2**(n_terms - 1)`` should stay well below the evaluation
    grid resolution, and `w` well below that frequency.
    """
    part, amp = _lacunary(alpha, n_terms)
    return SyntheticFunction(f"weierstrass(alpha={alpha:g})", alpha, 2 * amp, "sum", (part, part))


FUNCTIONS = {
    "constant": constant,
    "cone": lipschitz_cone,
    "tent": tent,
    "gaussian": smooth_gaussian,
    "step": step_edge,
    "weierstrass": weierstrass,
}


# ---------------------------------------------------------------------------
# operator evaluation


def eval_grid_points(box, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n + 1`` equispaced points per axis including the box corners."""
    if n < 1:
        raise ValueError("evaluation grid needs at least one interval per axis")
    return tuple(np.linspace(lo, hi, n + 1) for lo, hi in box)


def _cell_range(points, w, kernel: UnivariateKernel, part_support):
    """Cells that can contribute at any of `points`."""
    lo_k, hi_k = -np.inf, np.inf
    if kernel.compact:
        s_lo, s_hi = kernel.support
        lo_k = math.floor(w * points.min() - s_hi)
        hi_k = math.ceil(w * points.max() - s_lo)
    if part_support is not None:
        lo_k = max(lo_k, math.floor(w * part_support[0]) - 1)
        hi_k = min(hi_k, math.ceil(w * part_support[1]))
    if not (np.isfinite(lo_k) and np.isfinite(hi_k)):
        raise ValueError("a non-compact kernel needs a function with compact support")
    if hi_k < lo_k:
        return np.arange(0)
    if hi_k - lo_k + 1 > MAX_CELLS:
        raise ValueError(f"direct summation over {hi_k - lo_k + 1} cells per axis is too large")
    return np.arange(lo_k, hi_k + 1)


def _weights(points, k, w, kernel):
    return kernel(w * points[:, None] - k[None, :])


def sk_apply(f: SyntheticFunction, w: float, kernel: ProductKernel, xs, ys) -> np.ndarray:
    """
    ``K_w f`` on the tensor grid ``xs x ys`` (array of shape ``(len(xs), len(ys))``).
    """
    if not w > 0:
        raise ValueError("w must be positive")
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    out = np.full((xs.size, ys.size), float(f.baseline))
    if f.is_constant:
        return out
    kx, ky = kernel.factors
    cells = [_cell_range(pts, w, ker, f.part_support(ax))
             for ax, (pts, ker) in enumerate(((xs, kx), (ys, ky)))]
    Wx, Wy = _weights(xs, cells[0], w, kx), _weights(ys, cells[1], w, ky)
    if f.structure == "product":
        mx = f.parts[0].cell_means(cells[0], w)
        my = f.parts[1].cell_means(cells[1], w)
        return out + np.outer(Wx @ mx, Wy @ my)
    if f.structure == "sum":
        # the other factor sums to one by the partition of unity
        mx = f.parts[0].cell_means(cells[0], w)
        my = f.parts[1].cell_means(cells[1], w)
        return out + (Wx @ mx)[:, None] + (Wy @ my)[None, :]
    C = _cell_means_2d(f.general, cells[0], cells[1], w)
    return out + Wx @ C @ Wy.T


def _cell_means_2d(g, kx, ky, w):
    """Tensor Gauss-Legendre means of `g` over ``[kx/w, (kx+1)/w] x [ky/w, (ky+1)/w]``."""
    h = 1.0 / w
    qx = ((kx[:, None] + 0.5) * h + 0.5 * h * _GL_NODES[None, :]).ravel()
    qy = ((ky[:, None] + 0.5) * h + 0.5 * h * _GL_NODES[None, :]).ravel()
    G = g(qx[:, None], qy[None, :]).reshape(kx.size, GAUSS_ORDER, ky.size, GAUSS_ORDER)
    return np.einsum("iajb,a,b->ij", G, _GL_WEIGHTS, _GL_WEIGHTS) / 4


def error_field(f, w, kernel, eval_grid: int = 64, box=DEFAULT_BOX):
    xs, ys = eval_grid_points(box, eval_grid)
    approx = sk_apply(f, w, kernel, xs, ys)
    return xs, ys, approx - f(xs[:, None], ys[None, :])


def sup_error(f: SyntheticFunction, w: float, kernel: ProductKernel, eval_grid: int = 64,
              box=DEFAULT_BOX, where=None) -> float:
    """
    ``max |K_w f - f|`` over an ``(eval_grid + 1)``-point-per-axis grid of `box`.

    `where`, if given, is a callable ``where(X, Y) -> bool array`` restricting
    the maximum to part of the grid.
    """
    xs, ys, e = error_field(f, w, kernel, eval_grid, box)
    e = np.abs(e)
    if where is not None:
        sel = np.asarray(where(xs[:, None], ys[None, :]), dtype=bool)
        sel = np.broadcast_to(sel, e.shape)
        if not sel.any():
            raise ValueError("region selects no grid points")
        e = e[sel]
    return float(e.max())


def _trapezoid_weights(pts):
    h = np.diff(pts)
    wts = np.zeros(pts.size)
    wts[:-1] += h / 2
    wts[1:] += h / 2
    return wts


def l2_error(f, w, kernel, eval_grid: int = 256, box=DEFAULT_BOX) -> float:
    """``||K_w f - f||_2`` over `box` by the trapezoidal rule on the evaluation grid."""
    xs, ys, e = error_field(f, w, kernel, eval_grid, box)
    wx, wy = _trapezoid_weights(xs), _trapezoid_weights(ys)
    return float(np.sqrt(wx @ (e ** 2) @ wy))


def cssim(f_vals, g_vals, weights=None, c1=None, c2=None) -> float:
    """
    Continuous SSIM of two sampled functions under a probability measure.

    `weights` are quadrature weights of the measure (normalised internally;
    uniform by default). The stabilisers default to ``1e-4 * scale**2`` with
    `scale` the largest absolute value of `f_vals`.
    """
    f = np.asarray(f_vals, dtype=float)
    g = np.asarray(g_vals, dtype=float)
    if f.shape != g.shape:
        raise ValueError("cssim needs samples on the same grid")
    p = np.ones(f.shape) if weights is None else np.broadcast_to(np.asarray(weights, float), f.shape)
    p = p / p.sum()
    scale = np.abs(f).max() or 1.0
    c1 = 1e-4 * scale ** 2 if c1 is None else c1
    c2 = 1e-4 * scale ** 2 if c2 is None else c2
    mf, mg = (p * f).sum(), (p * g).sum()
    vf = (p * (f - mf) ** 2).sum()
    vg = (p * (g - mg) ** 2).sum()
    cov = (p * (f - mf) * (g - mg)).sum()
    return float((2 * mf * mg + c1) * (2 * cov + c2) / ((mf ** 2 + mg ** 2 + c1) * (vf + vg + c2)))


def cssim_dissimilarity(f, w, kernel, eval_grid: int = 256, box=DEFAULT_BOX, stabilizer_scale=1.0):
    """``1 - cSSIM(f, K_w f)`` under normalised Lebesgue measure on `box`."""
    xs, ys = eval_grid_points(box, eval_grid)
    fv = f(xs[:, None], ys[None, :])
    gv = sk_apply(f, w, kernel, xs, ys)
    wts = np.outer(_trapezoid_weights(xs), _trapezoid_weights(ys))
    c = 1e-4 * stabilizer_scale * (np.abs(fv).max() or 1.0) ** 2
    return 1.0 - cssim(fv, gv, wts, c, c)


# ---------------------------------------------------------------------------
# rate fitting


@dataclass
class RateFit:
    """
    Least-squares line through ``(log w, log error)``.

    `constants` holds optional normalised errors (for example
    ``error * w / log w``) used by bounded-ratio checks.
    """

    w_values: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    label: str = ""
    constants: np.ndarray | None = field(default=None, repr=False)

    def within(self, expected: float, tol: float) -> bool:
        return abs(self.slope - expected) <= tol

    @property
    def constant_spread(self) -> float:
        """``max / min`` of :attr:`constants`."""
        if self.constants is None:
            raise ValueError("no normalised constants recorded for this fit")
        return float(self.constants.max() / self.constants.min())


def fit_rate(w_values, errors, label: str = "") -> RateFit:
    """
    Fit ``log error = slope * log w + intercept``.

    Raises
    ------
    ValueError
        Fewer than 4 points, mismatched lengths, or nonpositive values.
    """
    w = np.asarray(w_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if w.shape != e.shape or w.ndim != 1:
        raise ValueError("w_values and errors must be 1-D of equal length")
    if w.size < 4:
        raise ValueError(f"need at least 4 points to fit a rate, got {w.size}")
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ValueError("w_values must be positive and increasing")
    if np.any(~(e > 0)):
        raise ValueError("errors must be positive to take logarithms")
    lw, le = np.log(w), np.log(e)
    slope, intercept = np.polyfit(lw, le, 1)
    resid = le - (slope * lw + intercept)
    ss_tot = np.sum((le - le.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(w, e, float(slope), float(intercept), float(r2), label)


def _collect(fn, w_values, tiny=1e-12):
    errs = np.array([fn(w) for w in w_values])
    if errs.max() < tiny:
        raise DegenerateRateError(f"errors at round-off level (max {errs.max():.2e}): degenerate, skipped")
    return errs


def verify_lipschitz_rate(f: SyntheticFunction, kernel: ProductKernel | None = None,
                          w_values=LIPSCHITZ_W, eval_grid: int = 256) -> RateFit:
    """Sup-norm rate; the expected slope for a Hölder-alpha `f` is ``-alpha``."""
    kernel = kernel or ProductKernel.isotropic(central_bspline(3))
    if not all(k.compact for k in kernel.factors):
        raise ValueError("the Lipschitz rate check needs a kernel with finite first moment")
    errs = _collect(lambda w: sup_error(f, w, kernel, eval_grid), w_values)
    return fit_rate(w_values, errs, f"sup {f.name}")


def verify_logw_rate(f: SyntheticFunction | None = None, kernel: ProductKernel | None = None,
                     w_values=LOGW_W, eval_grid: int = 256) -> RateFit:
    """
    Sup-norm rate for a kernel with infinite first moment.

    The fit records ``error * w / log w`` in ``constants``; a bounded
    :attr:`RateFit.constant_spread` is consistent with an
    ``O(log w / w)`` bound.
    """
    f = f or tent()
    kernel = kernel or ProductKernel.isotropic(jackson(1))
    errs = _collect(lambda w: sup_error(f, w, kernel, eval_grid), w_values)
    fit = fit_rate(w_values, errs, f"sup-logw {f.name}")
    fit.constants = errs * fit.w_values / np.log(fit.w_values)
    return fit


def verify_cssim_decay(f: SyntheticFunction, kernel: ProductKernel | None = None,
                       w_values=LIPSCHITZ_W, eval_grid: int = 256,
                       stabilizer_scale: float = 1.0) -> RateFit:
    """Decay of ``1 - cSSIM(f, K_w f)``; expected slope ``-2 alpha``."""
    kernel = kernel or ProductKernel.isotropic(central_bspline(3))
    errs = _collect(lambda w: cssim_dissimilarity(f, w, kernel, eval_grid,
                                                  stabilizer_scale=stabilizer_scale), w_values)
    return fit_rate(w_values, errs, f"cssim {f.name}")


def verify_lp_rate(f: SyntheticFunction, kernel: ProductKernel | None = None,
                   w_values=LIPSCHITZ_W, eval_grid: int = 256) -> RateFit:
    """L2 rate; expected slope ``-alpha`` for ``f`` in ``Lip(alpha, 2)``."""
    kernel = kernel or ProductKernel.isotropic(central_bspline(3))
    errs = _collect(lambda w: l2_error(f, w, kernel, eval_grid), w_values)
    return fit_rate(w_values, errs, f"L2 {f.name}")


# ---------------------------------------------------------------------------
# suites


@dataclass(frozen=True)
class SuiteCase:
    """
    A named rate check.

    The fit passes if its slope lies within `tolerance` of `expected`, or,
    when `max_spread` is set, if :attr:`RateFit.constant_spread` does not
    exceed it.
    """

    name: str
    run: Callable[[], RateFit]
    expected: float | None = None
    tolerance: float = 0.15
    max_spread: float | None = None

    def passed(self, fit: RateFit) -> bool:
        if self.max_spread is not None:
            return fit.constant_spread <= self.max_spread
        return fit.within(self.expected, self.tolerance)

    def criterion(self) -> str:
        if self.max_spread is not None:
            return f"error*w/log(w) spread <= {self.max_spread:g}"
        return f"slope {self.expected:g} +/- {self.tolerance:g}"


def suite_cases(name: str = "all") -> list[SuiteCase]:
    """Named groups of rate checks used by the command line and the demos."""
    b3 = ProductKernel.isotropic(central_bspline(3))

    def weier_cssim():
        return verify_cssim_decay(weierstrass(0.5), b3, WEIERSTRASS_W, WEIERSTRASS_GRID)

    cases = {
        "lipschitz": [
            SuiteCase("sup cone alpha=1, B-spline s=3",
                      lambda: verify_lipschitz_rate(lipschitz_cone(1.0), b3), -1.0, 0.15),
            SuiteCase("sup cone alpha=0.5, B-spline s=3",
                      lambda: verify_lipschitz_rate(lipschitz_cone(0.5), b3), -0.5, 0.15),
        ],
        "logw": [
            SuiteCase("sup tent, Jackson s=1",
                      lambda: verify_logw_rate(tent(), ProductKernel.isotropic(jackson(1))),
                      max_spread=2.0),
        ],
        "cssim": [
            SuiteCase("1-cSSIM gaussian, B-spline s=3",
                      lambda: verify_cssim_decay(smooth_gaussian(), b3), -2.0, 0.3),
            SuiteCase("1-cSSIM weierstrass alpha=0.5, B-spline s=3", weier_cssim, -1.0, 0.3),
        ],
        "lp": [
            SuiteCase("L2 cone alpha=1, B-spline s=3",
                      lambda: verify_lp_rate(lipschitz_cone(1.0), b3), -1.0, 0.15),
        ],
    }
    if name == "all":
        return [c for group in cases.values() for c in group]
    if name not in cases:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(cases) + ['all']}")
    return cases[name]


SUITES = ("lipschitz", "logw", "cssim", "lp", "all")


def run_suite(name: str, fh=None) -> list[tuple[SuiteCase, RateFit, bool]]:
    """
    Run a suite; if `fh` is an open text file, write one CSV row per
    ``(case, w)`` followed by a summary row with the slope and verdict.
    """
    results = []
    for case in suite_cases(name):
        fit = case.run()
        results.append((case, fit, case.passed(fit)))
    if fh is not None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("case", "w", "error", "slope", "criterion", "passed"))
        for case, fit, ok in results:
            for wv, err in zip(fit.w_values, fit.errors):
                w.writerow((case.name, f"{wv:g}", repr(float(err)), "", "", ""))
            w.writerow((case.name, "fit", "", f"{fit.slope:.6f}", case.criterion(), ok))
    return results
