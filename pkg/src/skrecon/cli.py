"""
Command-line interface: ``skrecon {rescale,gapfill,despeckle,convergence}``.

Images are read and written as 8-bit PGM or PNG; the name ``builtin:cameraman``
loads the bundled test image. Reports are CSV files with the header
``experiment,image,method,metric,roi,value``. Diagnostics go to stderr; the
exit status is 0 on success, 1 on a failed computation or check and 2 on
invalid usage.

Set ``SKRECON_NUM_THREADS`` to cap the threads used by the linear algebra
backend.
"""
from __future__ import annotations

import argparse
import os
import sys
import warnings
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import convergence, despeckle, gapfill, metrics
from .data import CAMERAMAN_ROIS, cameraman
from .imagemodel import ImageError, Roi
from .io import ImageFormatError, read_image, read_mask, write_image, write_mask
from .kernels import ProductKernel, make_kernel
from .resample import InvalidParamsError, RescaleParams, sk_rescale

BUILTIN = "builtin:cameraman"

PUBLISHED_DEFAULTS = {
    "rescale": {"w": 15.0, "kernel": "jackson", "order": 12},
    "gapfill": {"w": 40.0, "s": 9},
    "despeckle": {"variance": 0.05, "window": 3, "nlm_patch": 5, "nlm_search": 21},
}
FALLBACK_DEFAULTS = {
    "rescale": {"w": 15.0, "kernel": "jackson", "order": 12},
    "gapfill": {"w": 40.0, "s": 9},
    "despeckle": {"variance": None, "window": None, "nlm_patch": 5, "nlm_search": 21},
}

RESAMPLER_ALIASES = {"sk": "sk", "bil": "bilinear", "bilinear": "bilinear",
                     "bic": "bicubic", "bicubic": "bicubic"}


class UsageError(Exception):
    """Invalid combination of command-line options."""


def _load(path: str) -> np.ndarray:
    if path == BUILTIN:
        return cameraman()
    return read_image(path)


def _image_name(path: str) -> str:
    return "cameraman" if path == BUILTIN else Path(path).stem


def _resolve(args, command: str) -> None:
    """Fill options left unset: explicit flags, then published defaults, then fallbacks."""
    table = PUBLISHED_DEFAULTS if args.paper_defaults else FALLBACK_DEFAULTS
    for key, value in table[command].items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _write_report(path, records, markdown=None) -> None:
    with open(path, "w", newline="") as fh:
        metrics.write_csv(records, fh)
    if markdown:
        Path(markdown).write_text(metrics.markdown_table(records))


def cmd_rescale(args) -> int:
    _resolve(args, "rescale")
    kernel = ProductKernel.isotropic(make_kernel(args.kernel, args.order))
    params = RescaleParams(w=args.w, r=args.r, kernel=kernel)
    image = _load(args.input)
    out = sk_rescale(image, params)
    write_image(out, args.output)
    _info(f"rescaled {image.shape[0]}x{image.shape[1]} -> {out.shape[0]}x{out.shape[1]}")
    return 0


def cmd_gapfill(args) -> int:
    _resolve(args, "gapfill")
    params = gapfill.GapFillParams(w=args.w, s=args.s)
    image = _load(args.input)
    if args.mask is not None:
        mask = read_mask(args.mask, image.shape)
    else:
        rows, cols = image.shape
        mask = gapfill.generate_random_gaps(cols, rows, args.fraction, args.seed)
        mask_out = args.mask_out or str(Path(args.output).with_name(Path(args.output).stem + "_mask.pgm"))
        write_mask(mask, mask_out)
        _info(f"wrote mask with {int(mask.sum())} missing pixels to {mask_out}")
    damaged = np.where(mask, 0.0, image)
    result = gapfill.fill_gaps(damaged, mask, params)
    write_image(result.image, args.output)
    _info(f"filled {result.n_missing} pixels ({result.n_fallback} by fallback)")
    if args.report:
        reference = _load(args.reference) if args.reference else image
        rep = metrics.MetricsReport.compute(result.image, reference=reference)
        rep.extra.update(missing_pixels=result.n_missing, fallback_pixels=result.n_fallback)
        _write_report(args.report, [("gapfill", _image_name(args.input), "LP-SK", rep)], args.markdown)
    return 0


def _parse_pipeline(text: str):
    if text == "direct":
        return None
    parts = [p.strip().lower() for p in text.split(",")]
    if len(parts) != 2 or any(p not in RESAMPLER_ALIASES for p in parts):
        raise UsageError(f"--pipeline must be 'direct' or 'down,up' with each of "
                         f"{sorted(set(RESAMPLER_ALIASES))}; got {text!r}")
    return tuple(RESAMPLER_ALIASES[p] for p in parts)


def _parse_rois(texts, input_path, shape):
    if texts:
        rois = [Roi.parse(t) for t in texts]
    elif input_path == BUILTIN:
        rois = [Roi(*r) for r in CAMERAMAN_ROIS]
    else:
        rois = []
    for r in rois:
        r.check(shape)
    for i, a in enumerate(rois):
        for b in rois[i + 1:]:
            if (a.x0 < b.x0 + b.w and b.x0 < a.x0 + a.w
                    and a.y0 < b.y0 + b.h and b.y0 < a.y0 + a.h):
                raise ImageError(f"ROIs {a} and {b} overlap")
    return rois


def cmd_despeckle(args) -> int:
    _resolve(args, "despeckle")
    pipeline = _parse_pipeline(args.pipeline)
    image = _load(args.input)
    rois = _parse_rois(args.roi, args.input, image.shape)
    reference = None
    noise_variance = args.noise_variance
    if args.reference:
        reference = _load(args.reference)
        if reference.shape != image.shape:
            raise ImageError(f"reference shape {reference.shape} differs from input {image.shape}")
        noisy = image
    elif args.variance is not None:
        reference = image
        noisy = despeckle.add_speckle(image, despeckle.SpeckleParams(args.variance, args.seed))
        if noise_variance is None:
            # the speckle law is known exactly when we synthesised it
            noise_variance = args.variance
        if args.noisy_out:
            write_image(noisy, args.noisy_out)
    else:
        noisy = image
    fspec = despeckle.FilterSpec(args.filter, window=args.window, nlm_patch=args.nlm_patch,
                                 nlm_search=args.nlm_search, nlm_h=args.nlm_h,
                                 noise_variance=noise_variance)
    if pipeline is None:
        out = despeckle.apply_filter(noisy, fspec)
        label = fspec.label
    else:
        down, up = pipeline
        pspec = despeckle.PipelineSpec(down, fspec, up,
                                       despeckle.UP_DOWN if args.updown else despeckle.DOWN_UP)
        out = despeckle.run_pipeline(noisy, pspec)
        label = pspec.label()
    write_image(out, args.output)
    if args.report:
        rep = metrics.MetricsReport.compute(out, reference=reference, noisy=noisy, rois=rois)
        _write_report(args.report, [("despeckle", _image_name(args.input), label, rep)], args.markdown)
    return 0


def cmd_convergence(args) -> int:
    if args.out:
        ctx = open(args.out, "w", newline="")
    else:
        ctx = nullcontext(None)
    with ctx as fh:
        results = convergence.run_suite(args.suite, fh)
    failed = [(case, fit) for case, fit, ok in results if not ok]
    for case, fit, ok in results:
        _info(f"{'ok  ' if ok else 'FAIL'} {case.name}: slope {fit.slope:.4f} ({case.criterion()})")
    if failed:
        _info("failed fits: " + "; ".join(case.name for case, _ in failed))
        return 1
    return 0


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skrecon", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--paper-defaults", action="store_true",
                        help="fill unset parameters with the reference experiment values")

    r = sub.add_parser("rescale", help="SK rescaling")
    r.add_argument("input")
    r.add_argument("output")
    r.add_argument("--r", type=float, required=True, help="scale factor")
    r.add_argument("--w", type=float, help="sampling rate (default 15)")
    r.add_argument("--kernel", choices=("bspline", "jackson"), help="kernel family (default jackson)")
    r.add_argument("--order", type=int, help="kernel order s (default 12)")
    common(r)
    r.set_defaults(func=cmd_rescale)

    g = sub.add_parser("gapfill", help="LP-SK gap filling")
    g.add_argument("input")
    g.add_argument("output")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--mask", help="mask image, 0 = missing")
    src.add_argument("--fraction", type=float, help="fraction of random missing pixels")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mask-out", help="where to write a generated mask")
    g.add_argument("--w", type=float, help="sampling rate (default 40)")
    g.add_argument("--s", type=int, help="B-spline order (default 9)")
    g.add_argument("--reference", help="ground truth for the report (default: the input)")
    g.add_argument("--report", help="CSV report path")
    g.add_argument("--markdown", help="markdown table path")
    common(g)
    g.set_defaults(func=cmd_gapfill)

    d = sub.add_parser("despeckle", help="speckle filtering, direct or in a resampling pipeline")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--filter", required=True, choices=despeckle.FILTERS)
    d.add_argument("--pipeline", default="direct", help="'direct' or 'down,up' (sk, bil, bic)")
    d.add_argument("--updown", action="store_true", help="upscale first, then downscale")
    d.add_argument("--window", type=int, help="filter window (default 3, Frost 5)")
    d.add_argument("--nlm-patch", type=int)
    d.add_argument("--nlm-search", type=int)
    d.add_argument("--nlm-h", type=float)
    d.add_argument("--noise-variance", type=float, help="relative speckle variance for Lee")
    d.add_argument("--variance", type=float, help="add speckle of this variance to a clean input")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--noisy-out", help="write the synthesised noisy image here")
    d.add_argument("--roi", action="append", metavar="x,y,w,h",
                   help="region for SI/SSI/SMPI/ENL (repeatable)")
    d.add_argument("--reference", help="clean image; the input is then taken as noisy")
    d.add_argument("--report", help="CSV report path")
    d.add_argument("--markdown", help="markdown table path")
    common(d)
    d.set_defaults(func=cmd_despeckle)

    c = sub.add_parser("convergence", help="empirical approximation-rate suites")
    c.add_argument("--suite", required=True, choices=convergence.SUITES)
    c.add_argument("--out", help="CSV output path")
    c.set_defaults(func=cmd_convergence)
    return p


def _thread_limit():
    n = os.environ.get("SKRECON_NUM_THREADS")
    if not n:
        return nullcontext()
    try:
        limit = int(n)
    except ValueError:
        raise UsageError(f"SKRECON_NUM_THREADS must be a positive integer, got {n!r}") from None
    if limit < 1:
        raise UsageError(f"SKRECON_NUM_THREADS must be a positive integer, got {n!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=limit)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit(), warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", metrics.MetricWarning)
            try:
                return args.func(args)
            finally:
                for w in caught:
                    _info(f"skrecon {args.command}: warning: {w.message}")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _info(f"skrecon: error: {exc}")
        return 2
    except (OSError, ImageError, ImageFormatError, InvalidParamsError, ValueError,
            metrics.MetricError) as exc:
        _info(f"skrecon {args.command}: error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
