"""Hot image-space kernels with a compiled core and a pure-numpy fallback.

The Cython extension (`repose.kernels._core`) is selected when it imported
cleanly; otherwise, or when REPOSE_PURE_PYTHON=1, the numpy fallback is
used. Both expose identical functions and results; `benchmarks/bench_kernels.py`
compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

from . import fallback

if os.environ.get("REPOSE_PURE_PYTHON") == "1":
    _impl = fallback
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = fallback

dilate = _impl.dilate
erode = _impl.erode
warp_mask_nn = _impl.warp_mask_nn
warp_image_bilinear = _impl.warp_image_bilinear
blend = _impl.blend


def backend_name() -> str:
    return _impl.BACKEND


def feather_ramp(mask: np.ndarray, width: int = 2) -> np.ndarray:
    """Linear alpha ramp inside a binary mask: 0 outside, 1 at ≥ width px deep.

    Built from an erosion stack so both kernel backends agree exactly.
    """
    m = (np.asarray(mask) > 0).astype(np.uint8)
    if width <= 0:
        return m.astype(np.float32)
    acc = m.astype(np.float32)
    cur = m
    for _ in range(width):
        cur = erode(cur, 1)
        acc += cur
    return acc / np.float32(width + 1)


def outer_feather_ramp(mask: np.ndarray, width: int = 2) -> np.ndarray:
    """Ramp that reaches `width` px OUTSIDE the mask: 1 inside, fading to 0."""
    m = (np.asarray(mask) > 0).astype(np.uint8)
    if width <= 0:
        return m.astype(np.float32)
    acc = m.astype(np.float32)
    cur = m
    for _ in range(width):
        cur = dilate(cur, 1)
        acc += cur
    return acc / np.float32(width + 1)
