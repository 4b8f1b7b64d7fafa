"""
Independent reference implementations used to cross-check the library.

Nothing here imports the numerical code under test: B-splines come from
exact rational arithmetic or from scipy's B-spline basis, integrals from
closed forms or scipy.integrate, and operator sums from plain loops.
"""
from fractions import Fraction
from math import comb, factorial, floor, pi

import numpy as np
from scipy.integrate import dblquad
from scipy.interpolate import BSpline


def bspline_exact(s: int, x) -> Fraction:
    """Central B-spline by the truncated-power formula in rational arithmetic."""
    x = Fraction(x)
    total = Fraction(0)
    for j in range(s + 1):
        t = x + Fraction(s, 2) - j
        if s == 1:
            # half-open indicator of (-1/2, 1/2]
            term = Fraction(1) if t > 0 else Fraction(0)
        else:
            term = t ** (s - 1) if t > 0 else Fraction(0)
        total += (-1) ** j * comb(s, j) * term
    return total / factorial(s - 1)


def sinc_power_integral(n: int) -> float:
    """Exact value of the integral of ``(sin t / t)**n`` over the real line."""
    acc = sum((-1) ** k * comb(n, k) * (n - 2 * k) ** (n - 1) for k in range(n // 2 + 1))
    return pi * acc / (2 ** (n - 1) * factorial(n - 1))


def jackson_normalization_exact(s: int) -> float:
    # substitute t = u / (2s): the kernel integral becomes 2s times the sinc power integral
    return 1.0 / (2 * s * sinc_power_integral(2 * s))


def scipy_bspline(s: int, shift: float = 0.0):
    """Order-`s` (degree s-1) cardinal B-spline centred at `shift`, via scipy."""
    knots = np.arange(s + 1) - s / 2 + shift
    b = BSpline.basis_element(knots, extrapolate=False)

    def f(x):
        v = b(x)
        return 0.0 if np.isnan(v) else float(v)

    return f


def cell_mean_pixels(image, k1: int, k2: int, w: float) -> float:
    """Cell mean of the step-function image by looping over pixels."""
    n, m = image.shape
    x0, x1 = k1 / w, (k1 + 1) / w
    y0, y1 = k2 / w, (k2 + 1) / w
    total = 0.0
    for i in range(max(0, floor(x0)), min(n, floor(x1) + 1)):
        ox = min(x1, i + 1) - max(x0, i)
        if ox <= 0:
            continue
        for j in range(max(0, floor(y0)), min(m, floor(y1) + 1)):
            oy = min(y1, j + 1) - max(y0, j)
            if oy > 0:
                total += image[i, j] * ox * oy
    return total * w * w


def lp_sk_brute(image, nu: int, mu: int, w: float, s: int, window=None) -> float:
    """
    Direct summation of the shifted-kernel SK operator at the point (nu, mu).

    Only cells lying entirely over the past window of pixels
    ``max(nu - n1, 0) .. nu - 1`` (likewise for columns) are used, and their
    weights are renormalised to sum to one.
    """
    chi = scipy_bspline(s, shift=(s + 2) / 2)
    n1, m1 = window or (s + 1, s + 1)
    lo1, lo2 = max(nu - n1, 0), max(mu - m1, 0)

    def usable(k, lo, hi):
        return k / w >= lo - 1e-12 and (k + 1) / w <= hi + 1e-12

    total = weight = 0.0
    for k1 in range(floor(w * nu) - s - 3, floor(w * nu) + 1):
        a = chi(w * nu - k1)
        if a == 0.0 or not usable(k1, lo1, nu):
            continue
        for k2 in range(floor(w * mu) - s - 3, floor(w * mu) + 1):
            b = chi(w * mu - k2)
            if b == 0.0 or not usable(k2, lo2, mu):
                continue
            total += a * b * cell_mean_pixels(image, k1, k2, w)
            weight += a * b
    return min(max(total / weight, 0.0), 255.0)


def sk_sup_error_brute(f, w: float, s: int, points) -> float:
    """
    Sup error of the SK operator with a central B-spline product kernel,
    cell means by adaptive 2-D quadrature and the operator by double loops.
    """
    chi = scipy_bspline(s)
    cache = {}

    def mean(k1, k2):
        if (k1, k2) not in cache:
            val, _ = dblquad(lambda y, x: f(x, y), k1 / w, (k1 + 1) / w,
                             k2 / w, (k2 + 1) / w, epsabs=1e-15, epsrel=1e-13)
            cache[k1, k2] = val * w * w
        return cache[k1, k2]

    worst = 0.0
    for x in points:
        for y in points:
            acc = 0.0
            for k1 in range(floor(w * x - s / 2) - 1, floor(w * x + s / 2) + 2):
                a = chi(w * x - k1)
                if a == 0.0:
                    continue
                for k2 in range(floor(w * y - s / 2) - 1, floor(w * y + s / 2) + 2):
                    b = chi(w * y - k2)
                    if b != 0.0:
                        acc += a * b * mean(k1, k2)
            worst = max(worst, abs(acc - f(x, y)))
    return worst
