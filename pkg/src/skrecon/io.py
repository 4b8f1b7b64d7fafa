"""Reading and writing 8-bit grayscale PGM (P5) and PNG files."""
from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .imagemodel import as_image, as_mask, quantize


class ImageFormatError(ValueError):
    """Unsupported or corrupt image file."""


class UnsupportedDepthError(ImageFormatError):
    """Image is not 8 bits per sample."""


_PGM_HEADER = re.compile(rb"\AP5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)"
                         rb"(?:\s|#[^\n]*\n)+(\d+)\s")


def _read_pgm(data: bytes) -> np.ndarray:
    m = _PGM_HEADER.match(data)
    if m is None:
        raise ImageFormatError("not a binary (P5) PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval > 255:
        raise UnsupportedDepthError(f"PGM maxval {maxval}: only 8-bit files are supported")
    if width < 1 or height < 1 or maxval < 1:
        raise ImageFormatError("PGM header has zero dimension or maxval")
    body = data[m.end():]
    if len(body) < width * height:
        raise ImageFormatError(f"PGM truncated: expected {width * height} bytes, got {len(body)}")
    pixels = np.frombuffer(body[:width * height], dtype=np.uint8).reshape(height, width)
    out = pixels.astype(float)
    if maxval != 255:
        out = out * (255.0 / maxval)
    return out


def _luminance(rgb: np.ndarray) -> np.ndarray:
    y = rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114
    return quantize(y).astype(float)


def _read_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise UnsupportedDepthError(f"PNG mode {mode}: only 8-bit files are supported")
            if mode == "1":
                im = im.convert("L")
            elif mode == "LA":
                im = im.getchannel("L")
            elif mode not in ("L", "RGB", "RGBA"):
                im = im.convert("RGB")
            arr = np.asarray(im)
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if arr.ndim == 3:
        return _luminance(arr.astype(float))
    return arr.astype(float)


def read_image(path: str | os.PathLike) -> np.ndarray:
    """
    Read an 8-bit grayscale image as a ``float64`` array in ``[0, 255]``.

    Binary PGM and PNG are supported; colour PNGs are converted with
    ``Y = 0.299 R + 0.587 G + 0.114 B``.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P5":
        return _read_pgm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise ImageFormatError(f"{path}: unrecognised format (expected binary PGM or PNG)")


def write_image(image, path: str | os.PathLike) -> None:
    """Write `image` as 8-bit PGM or PNG, chosen by the file suffix."""
    path = Path(path)
    q = quantize(as_image(image))
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        h, w = q.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(q.tobytes())
    elif suffix == ".png":
        Image.fromarray(q, mode="L").save(path)
    else:
        raise ImageFormatError(f"unsupported output format {suffix!r}; use .pgm or .png")


def read_mask(path: str | os.PathLike, shape=None) -> np.ndarray:
    """Gap mask file: 0 = missing, anything else = present. Returns ``True`` where missing."""
    return as_mask(read_image(path) == 0, shape)


def write_mask(mask, path: str | os.PathLike) -> None:
    m = as_mask(mask)
    write_image(np.where(m, 0.0, 255.0), path)
