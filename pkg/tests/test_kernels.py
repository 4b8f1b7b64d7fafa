from fractions import Fraction
from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import bspline_exact, jackson_normalization_exact, sinc_power_integral
from skrecon.kernels import (
    InvalidOrderError,
    ProductKernel,
    central_bspline,
    compute_jackson_normalization,
    discrete_moment_estimate,
    eval_bspline,
    eval_jackson,
    eval_shifted_bspline,
    jackson,
    make_kernel,
    partition_of_unity_residual,
    shifted_bspline,
)


class TestBSpline:
    def test_low_orders_at_zero(self):
        assert eval_bspline(1, 0.0) == 1.0
        assert eval_bspline(2, 0.0) == 1.0
        assert eval_bspline(3, 0.0) == pytest.approx(float(bspline_exact(3, 0)), abs=1e-15)
        assert bspline_exact(3, 0) == Fraction(3, 4)

    @pytest.mark.parametrize("s", range(1, 13))
    def test_matches_rational_closed_form(self, s):
        # for s = 1 the endpoints follow a different convention, tested below
        lo = 1 if s == 1 else 0
        xs = [Fraction(p, 7) - Fraction(s, 2) for p in range(lo, 7 * s + 1 - lo)]
        got = eval_bspline(s, np.array([float(x) for x in xs]))
        want = np.array([float(bspline_exact(s, x)) for x in xs])
        # the closed form at exact rationals is the ground truth
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-13)

    def test_order_one_is_closed_indicator(self):
        assert eval_bspline(1, 0.5) == 1.0
        assert eval_bspline(1, -0.5) == 1.0
        assert eval_bspline(1, 0.5000001) == 0.0

    @pytest.mark.parametrize("s", [2, 3, 5, 7, 9, 12])
    def test_zero_outside_support(self, s):
        x = np.array([s / 2, s / 2 + 1e-9, s / 2 + 3, -s / 2 - 0.1, 1e6])
        assert np.all(eval_bspline(s, x) == 0.0)

    @pytest.mark.parametrize("s", [1, 2, 3, 5, 7, 9])
    def test_unit_integral(self, s):
        # integrate piece by piece between knots
        knots = np.arange(s + 1) - s / 2
        total = sum(quad(lambda x: eval_bspline(s, x), a, b, epsabs=1e-14)[0]
                    for a, b in zip(knots[:-1], knots[1:]))
        assert total == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 9), st.lists(st.floats(-8, 8, allow_nan=False), min_size=1, max_size=200))
    def test_symmetric_and_nonnegative(self, s, xs):
        x = np.array(xs)
        v = eval_bspline(s, x)
        assert np.all(v >= 0)
        assert np.array_equal(v, eval_bspline(s, -x))

    def test_symmetry_on_random_sample(self, rng):
        x = rng.uniform(-6, 6, 10_000)
        for s in range(1, 10):
            v = eval_bspline(s, x)
            assert np.all(v >= 0)
            assert np.array_equal(v, eval_bspline(s, -x))

    @pytest.mark.parametrize("bad", [0, -1, 2.5])
    def test_invalid_order(self, bad):
        with pytest.raises(InvalidOrderError):
            eval_bspline(bad, 0.0)
        with pytest.raises(InvalidOrderError):
            central_bspline(bad)


class TestShiftedBSpline:
    def test_examples(self):
        assert eval_shifted_bspline(9, 0.0) == 0.0
        assert eval_shifted_bspline(9, 11 / 2) == eval_bspline(9, 0.0)
        assert eval_shifted_bspline(2, 3.0) == eval_bspline(2, 1.0) == 0.0

    def test_support_starts_at_one(self):
        k = shifted_bspline(9)
        assert k.support == (1.0, 10.0)
        x = np.linspace(-5, 1, 200)
        assert np.all(k(x) == 0.0)
        assert k(1.01) > 0

    def test_partition_of_unity(self):
        grid = np.linspace(-5, 5, 1000)
        assert partition_of_unity_residual(shifted_bspline(9), grid, 20) <= 1e-12


class TestJackson:
    def test_normalization_order_one(self):
        assert compute_jackson_normalization(1) == pytest.approx(1 / (2 * pi), abs=1e-6)

    @pytest.mark.parametrize("s", range(1, 13))
    def test_normalization_matches_exact_integral(self, s):
        c = compute_jackson_normalization(s)
        assert c > 0
        assert c == pytest.approx(jackson_normalization_exact(s), rel=1e-10)

    def test_exact_integral_oracle_sanity(self):
        assert sinc_power_integral(1) == pytest.approx(pi)
        assert sinc_power_integral(2) == pytest.approx(pi)
        assert sinc_power_integral(4) == pytest.approx(2 * pi / 3)

    @pytest.mark.parametrize("s", [2, 6, 12])
    def test_unit_integral_by_quadrature(self, s):
        # independent adaptive quadrature over the lobes plus the envelope tail
        period = 2 * s * pi
        n = 400
        body = sum(quad(lambda u: eval_jackson(s, u), period * i, period * (i + 1),
                        epsabs=1e-15, limit=200)[0] for i in range(n))
        c = compute_jackson_normalization(s)
        tail_bound = c * (2 * s) ** (2 * s) * (period * n) ** (1 - 2 * s) / (2 * s - 1)
        assert abs(2 * body - 1) <= 1e-8 + 2 * tail_bound

    def test_examples(self):
        assert eval_jackson(12, 0.0) == compute_jackson_normalization(12)
        assert abs(eval_jackson(1, 2 * pi)) <= 1e-15
        assert eval_jackson(1, 2 * pi) >= 0

    def test_order_one_decay(self):
        x = np.geomspace(10, 1e4, 2000)
        scaled = eval_jackson(1, x) * x ** 2
        assert scaled.max() <= 2 * compute_jackson_normalization(1) * 4

    def test_partition_of_unity(self):
        grid = np.linspace(-5, 5, 1000)
        assert partition_of_unity_residual(jackson(12), grid, 5000) <= 1e-6

    def test_envelope_radius(self):
        k = jackson(12)
        r = k.envelope_radius(1e-12)
        x = np.linspace(r, 4 * r, 5000)
        assert np.all(k(x) <= 1e-12)
        assert central_bspline(3).envelope_radius() == 1.5


class TestPartitionOfUnity:
    @pytest.mark.parametrize("s", [2, 3, 5, 7, 9])
    def test_bspline(self, s):
        grid = np.linspace(-5, 5, 1000)
        assert partition_of_unity_residual(central_bspline(s), grid, 10 + s) <= 1e-12


class TestDiscreteMoment:
    def test_bspline_order_zero(self):
        m = discrete_moment_estimate(central_bspline(3), 0.0, 10)
        assert np.isfinite(m) and m >= 1 - 1e-12

    def test_jackson_first_moment_diverges_logarithmically(self):
        j = jackson(1)
        c = compute_jackson_normalization(1)
        values = [discrete_moment_estimate(j, 1.0, 2 ** p, n_points=11) for p in range(10, 15)]
        steps = np.diff(values)
        # tail of c (2/x)^2 sin^2 |x| summed over both sides: 4 c log 2 per doubling
        np.testing.assert_allclose(steps, 4 * c * np.log(2), rtol=0.02)

    def test_jackson_half_moment_converges(self):
        j = jackson(1)
        a, b, c = (discrete_moment_estimate(j, 0.5, 2 ** p, n_points=2) for p in (23, 24, 25))
        assert abs(c - b) < 1e-4
        # summable tail: increments shrink by about 1/sqrt(2) per doubling
        assert (c - b) / (b - a) == pytest.approx(2 ** -0.5, rel=0.05)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            discrete_moment_estimate(central_bspline(3), -1.0, 10)
        with pytest.raises(ValueError):
            discrete_moment_estimate(central_bspline(3), 1.0, 0)


class TestProductKernel:
    def test_product_of_factors(self, rng):
        k = ProductKernel((central_bspline(3), jackson(4)))
        x, y = rng.uniform(-4, 4, (2, 10_000))
        assert np.array_equal(k(x, y), central_bspline(3)(x) * jackson(4)(y))

    def test_support_and_transpose(self):
        k = ProductKernel((central_bspline(3), shifted_bspline(9)))
        assert k.support == ((-1.5, 1.5), (1.0, 10.0))
        assert k.transposed().factors == (shifted_bspline(9), central_bspline(3))
        assert ProductKernel.isotropic(central_bspline(2)).dim == 2

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            ProductKernel.isotropic(central_bspline(2))(0.0)

    def test_make_kernel(self):
        assert make_kernel("bspline", 3) == central_bspline(3)
        assert make_kernel("jackson", 12).normalization == compute_jackson_normalization(12)
        with pytest.raises(ValueError):
            make_kernel("gaussian", 3)
