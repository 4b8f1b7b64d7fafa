"""
Sampling Kantorovich operators for grayscale image reconstruction.

Modules
-------
kernels      B-spline, shifted B-spline and Jackson kernels
imagemodel   images as step functions, cell means, regions of interest
resample     SK rescaling and bilinear/bicubic baselines
gapfill      LP-SK gap filling
despeckle    speckle simulation, five filters, Down-Up/Up-Down pipelines
metrics      PSNR, SSIM and speckle indexes
convergence  empirical approximation rates on synthetic functions
io           8-bit PGM/PNG input and output
"""
from .despeckle import FilterSpec, PipelineSpec, SpeckleParams, add_speckle, apply_filter, run_pipeline
from .gapfill import GapFillParams, generate_random_gaps, lp_sk_fill, lp_sk_predict
from .imagemodel import Roi
from .io import read_image, write_image
from .kernels import ProductKernel, central_bspline, jackson, shifted_bspline
from .metrics import psnr, speckle_indexes, ssim_global, ssim_windowed
from .resample import RescaleParams, sk_rescale, sk_resize

__version__ = "0.1.0"

__all__ = [
    "FilterSpec", "GapFillParams", "PipelineSpec", "ProductKernel", "RescaleParams", "Roi",
    "SpeckleParams", "add_speckle", "apply_filter", "central_bspline", "generate_random_gaps",
    "jackson", "lp_sk_fill", "lp_sk_predict", "psnr", "read_image", "run_pipeline",
    "shifted_bspline", "sk_rescale", "sk_resize", "speckle_indexes", "ssim_global",
    "ssim_windowed", "write_image",
]
