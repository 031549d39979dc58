"""Pure-numpy implementations of the image-space kernels.

Mirrors `_core.pyx` exactly (same formulas, same rounding) so either path
can serve the rest of the package. Masks are uint8 {0,1}; images are
float32 H×W×3.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _disk_offsets(radius: int) -> list[tuple[int, int]]:
    r = int(radius)
    return [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1) if dx * dx + dy * dy <= r * r]


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a Euclidean disk of the given radius."""
    m = mask.astype(bool)
    if radius <= 0 or not m.any():
        return m.astype(np.uint8)
    h, w = m.shape
    out = np.zeros_like(m)
    for dy, dx in _disk_offsets(radius):
        ys0, ys1 = max(0, dy), min(h, h + dy)
        xs0, xs1 = max(0, dx), min(w, w + dx)
        out[ys0:ys1, xs0:xs1] |= m[ys0 - dy : ys1 - dy, xs0 - dx : xs1 - dx]
    return out.astype(np.uint8)


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary erosion with a Euclidean disk (complement of dilation).
    Outside-frame pixels count as mask interior, so frame-touching masks
    keep their border row/column."""
    m = mask.astype(bool)
    if radius <= 0:
        return m.astype(np.uint8)
    return 1 - dilate((~m).astype(np.uint8), radius)


def warp_mask_nn(mask: np.ndarray, dx: float, dy: float, scale: float, cx: float, cy: float) -> np.ndarray:
    """Translate a binary mask by (dx,dy) then scale about (cx,cy), nearest-neighbor.

    Forward map: q = c + s·((p + d) − c); sampling is done by the inverse map
    p = (q − c)/s + c − d with floor(v + 0.5) rounding. Out-of-frame → 0.
    """
    m = mask.astype(np.uint8)
    h, w = m.shape
    qy, qx = np.mgrid[0:h, 0:w].astype(np.float64)
    px = (qx - cx) / scale + cx - dx
    py = (qy - cy) / scale + cy - dy
    ix = np.floor(px + 0.5).astype(np.int64)
    iy = np.floor(py + 0.5).astype(np.int64)
    valid = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros((h, w), dtype=np.uint8)
    out[valid] = m[iy[valid], ix[valid]]
    return out


def warp_image_bilinear(
    img: np.ndarray, dx: float, dy: float, scale: float, cx: float, cy: float, fill: float = 0.0
) -> np.ndarray:
    """Same transform as warp_mask_nn but bilinear, for subject pixels."""
    src = img.astype(np.float32)
    h, w = src.shape[:2]
    qy, qx = np.mgrid[0:h, 0:w].astype(np.float64)
    px = (qx - cx) / scale + cx - dx
    py = (qy - cy) / scale + cy - dy
    x0 = np.floor(px).astype(np.int64)
    y0 = np.floor(py).astype(np.int64)
    fx = (px - x0).astype(np.float32)
    fy = (py - y0).astype(np.float32)
    out = np.full_like(src, np.float32(fill))
    valid = (x0 >= 0) & (x0 + 1 < w) & (y0 >= 0) & (y0 + 1 < h)
    vx0, vy0 = x0[valid], y0[valid]
    vfx, vfy = fx[valid][:, None], fy[valid][:, None]
    tl = src[vy0, vx0]
    tr = src[vy0, vx0 + 1]
    bl = src[vy0 + 1, vx0]
    br = src[vy0 + 1, vx0 + 1]
    top = tl + (tr - tl) * vfx
    bot = bl + (br - bl) * vfx
    out[valid] = top + (bot - top) * vfy
    return out


def blend(dst: np.ndarray, src: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """out = dst + alpha·(src − dst) with an H×W alpha over H×W×3 images."""
    a = alpha.astype(np.float32)[..., None]
    return (dst.astype(np.float32) + a * (src.astype(np.float32) - dst.astype(np.float32))).astype(np.float32)
