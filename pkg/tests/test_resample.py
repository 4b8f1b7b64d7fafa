import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skrecon import resample
from skrecon.kernels import ProductKernel, central_bspline, jackson
from skrecon.metrics import psnr
from skrecon.resample import (
    InvalidParamsError,
    RescaleParams,
    bicubic_resize,
    bilinear_resize,
    grid_nodes,
    jackson_rescale_params,
    resize,
    sk_operator,
    sk_rescale,
    sk_resize,
)

B3 = ProductKernel.isotropic(central_bspline(3))


def smooth_image(n=64, seed=0):
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[:n, :n] / n
    out = 128 + 30 * np.sin(2 * np.pi * (x + rng.random())) * np.cos(2 * np.pi * (y + rng.random()))
    return out + 20 * x


class TestSK:
    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 255), st.integers(4, 40), st.integers(4, 40),
           st.sampled_from([2, 3, 5]), st.floats(0, 10))
    def test_constant_reproduced_where_footprint_is_inside(self, c, n, n_out, order, extra):
        # zero extension darkens a border band; away from it constants are exact
        kernel = ProductKernel.isotropic(central_bspline(order))
        ratio = n_out / n
        w = (order + 2) * max(ratio, 1.0) + extra
        out = sk_resize(np.full((n, n), c), (n_out, n_out), w, kernel, clip=False)
        np.testing.assert_allclose(out, c, atol=1e-9, rtol=0)

    def test_border_band_is_darkened(self):
        out = sk_rescale(np.full((64, 64), 200.0), jackson_rescale_params(1.0))
        assert out[0, 0] < 200 - 1
        assert out[32, 32] == pytest.approx(200.0, abs=1e-6)
        # a B-spline footprint reaching past the raster edge loses mass too
        out = sk_rescale(np.full((8, 8), 200.0), RescaleParams(w=1.0, r=4.0, kernel=B3))
        assert out[0, 0] < 200 - 1

    def test_self_reconstruction_cameraman(self, cameraman):
        out = sk_rescale(cameraman, jackson_rescale_params(1.0, w=40))
        assert out.shape == cameraman.shape
        assert psnr(cameraman, out) >= 30

    def test_round_trip_on_gradient(self):
        # a mid-gray ramp keeps the zero-extension border band out of the measurement range
        y, x = np.mgrid[:256, :256]
        ramp = 60.0 + 100.0 * (x + y) / 510
        up = sk_rescale(ramp, jackson_rescale_params(2.0))
        assert up.shape == (512, 512)
        back = sk_rescale(up, jackson_rescale_params(0.5))
        assert back.shape == (256, 256)
        assert psnr(ramp, back) >= 35

    @pytest.mark.parametrize("seed", [0, 1])
    def test_psnr_nondecreasing_in_w(self, cameraman, seed):
        images = [cameraman, smooth_image(64, seed), np.kron(np.random.default_rng(seed).uniform(0, 255, (8, 8)),
                                                            np.ones((8, 8)))]
        for img in images:
            scores = [psnr(img, sk_rescale(img, RescaleParams(w=w, r=1.0, kernel=B3)))
                      for w in (5, 10, 20, 40)]
            # anything above 100 dB is exact reproduction up to rounding
            scores = [min(s, 100.0) for s in scores]
            assert all(b >= a - 1e-9 for a, b in zip(scores, scores[1:])), scores

    def test_exact_at_unit_scale_for_large_w(self, cameraman):
        out = sk_rescale(cameraman, RescaleParams(w=8, r=1.0, kernel=B3), clip=False)
        np.testing.assert_allclose(out[2:-2, 2:-2], cameraman[2:-2, 2:-2], atol=1e-9)

    @pytest.mark.parametrize("kernel", [B3, ProductKernel((central_bspline(2), jackson(6)))])
    def test_transposition(self, rng, kernel):
        a = rng.uniform(0, 255, (20, 31))
        params = RescaleParams(w=7.0, r=1.7, kernel=kernel)
        tparams = RescaleParams(w=7.0, r=1.7, kernel=kernel.transposed())
        np.testing.assert_allclose(sk_rescale(a.T, tparams), sk_rescale(a, params).T, atol=1e-10)

    def test_jackson_truncation_is_negligible(self, monkeypatch):
        k = jackson(12)
        base = sk_operator(40, 57, 15.0, k)
        monkeypatch.setattr(resample, "JACKSON_ENVELOPE_TOL", 1e-40)
        full = sk_operator(40, 57, 15.0, k)
        assert np.abs(full - base).sum(axis=1).max() < 1e-8

    def test_operator_rows_of_compact_kernel(self):
        op = sk_operator(10, 10, 4.0, central_bspline(3))
        np.testing.assert_allclose(op[3:-3].sum(axis=1), 1.0, atol=1e-12)
        assert np.all(op >= 0)

    def test_output_shape_rounds_half_up(self):
        assert RescaleParams(w=1, r=0.5, kernel=B3).output_shape((3, 5)) == (2, 3)
        assert RescaleParams(w=1, r=1 / 3, kernel=B3).output_shape((4, 4)) == (1, 1)
        with pytest.raises(InvalidParamsError):
            RescaleParams(w=1, r=0.1, kernel=B3).output_shape((2, 2))

    @pytest.mark.parametrize("w, r", [(0, 1), (-1, 1), (1, 0), (1, -2)])
    def test_invalid_params(self, w, r):
        with pytest.raises(InvalidParamsError):
            RescaleParams(w=w, r=r, kernel=B3)

    def test_grid_nodes_are_centres(self):
        np.testing.assert_allclose(grid_nodes(4, 2), [1.0, 3.0])
        np.testing.assert_allclose(grid_nodes(2, 4), [0.25, 0.75, 1.25, 1.75])


class TestClassical:
    @pytest.mark.parametrize("fn", [bilinear_resize, bicubic_resize])
    def test_identity_size(self, rng, fn):
        a = rng.uniform(0, 255, (13, 17))
        np.testing.assert_array_equal(fn(a, 17, 13), a)

    def test_checkerboard_to_one_pixel(self):
        assert bilinear_resize(np.array([[0.0, 255.0], [255.0, 0.0]]), 1, 1)[0, 0] == 127.5

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 255), st.integers(1, 30), st.integers(1, 30), st.integers(1, 60), st.integers(1, 60),
           st.sampled_from([bilinear_resize, bicubic_resize]))
    def test_constants(self, c, n, m, rows, cols, fn):
        np.testing.assert_allclose(fn(np.full((n, m), c), cols, rows), c, atol=1e-9)

    def test_bicubic_reproduces_ramp(self):
        y, x = np.mgrid[:32, :32].astype(float)
        ramp = 40 + 2.0 * x + 3.0 * y
        up = bicubic_resize(ramp, 64, 64)
        v, u = np.mgrid[:64, :64]
        want = 40 + 2.0 * (u / 2 - 0.25) + 3.0 * (v / 2 - 0.25)
        np.testing.assert_allclose(up[4:-4, 4:-4], want[4:-4, 4:-4], atol=1e-6)

    def test_dispatch(self, rng):
        a = rng.uniform(0, 255, (10, 12))
        assert resize(a, (5, 6), "sk").shape == (5, 6)
        np.testing.assert_array_equal(resize(a, (20, 24), "bilinear"), bilinear_resize(a, 24, 20))
        with pytest.raises(ValueError):
            resize(a, (5, 6), "lanczos")

    def test_invalid_size(self):
        with pytest.raises(InvalidParamsError):
            bilinear_resize(np.zeros((3, 3)), 0, 3)
