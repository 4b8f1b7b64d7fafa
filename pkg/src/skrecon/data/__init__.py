"""Bundled test image."""
from importlib import resources

import numpy as np

#: Regions of interest ``[x, y, w, h]`` used for the without-reference metrics.
CAMERAMAN_ROIS = ((220, 200, 30, 40), (180, 50, 50, 50))


def cameraman() -> np.ndarray:
    """
    256 x 256 grayscale "cameraman" photograph as ``float64`` in ``[0, 255]``.

    This is the public-domain (CC0) photograph shipped with scikit-image,
    reduced from 512 x 512 by 2 x 2 block averaging. It is not the classic
    MIT cameraman, so metric values differ from published tables.
    """
    from ..io import read_image

    with resources.as_file(resources.files(__package__) / "cameraman256.pgm") as path:
        return read_image(path)
