"""Placing the subject at its destination: warping, optional matting, and
the alpha blend confined to the visible footprint."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..backends.base import MatteEstimator
from ..errors import ContractViolation
from ..types import Image, Mask
from .geometry import GeometryPlan

TRIMAP_ERODE = 2
TRIMAP_DILATE = 4


def build_trimap(mask: Mask, erode: int = TRIMAP_ERODE, dilate: int = TRIMAP_DILATE) -> Mask:
    """Known-foreground after erosion, known-background outside the
    dilation, the ring in between unknown (0.5)."""
    sel = mask.bool().astype(np.uint8)
    fg = kernels.erode(sel, erode)
    band = kernels.dilate(sel, dilate)
    tri = np.full(sel.shape, 0.5, dtype=np.float32)
    tri[band == 0] = 0.0
    tri[fg == 1] = 1.0
    return Mask(tri, kind="alpha")


def estimate_subject_alpha(
    image: Image, mask: Mask, matte: MatteEstimator, erode: int = TRIMAP_ERODE, dilate: int = TRIMAP_DILATE
) -> Mask:
    return matte.estimate_matte(image, build_trimap(mask, erode=erode, dilate=dilate))


def composite_subject(image_after_removal: Image, subject_pixels: Image, plan: GeometryPlan) -> Image:
    """Warp the subject pixels (bilinear) with the plan's transform and blend
    them into the background inside the visible footprint. Pixels outside
    the footprint are untouched."""
    visible = plan.visible_destination_mask
    if visible.is_empty():
        raise ContractViolation("composite requires a non-empty visible footprint")
    dx, dy = plan.displacement
    cx, cy = plan.centroid
    warped = kernels.warp_image_bilinear(
        subject_pixels.pixels, float(dx), float(dy), float(plan.scale), cx, cy, 0.0
    )
    if plan.alpha is not None:
        alpha_src = plan.alpha.values.astype(np.float32)[..., None]
        warped_alpha = kernels.warp_image_bilinear(
            np.repeat(alpha_src, 3, axis=2), float(dx), float(dy), float(plan.scale), cx, cy, 0.0
        )[..., 0]
    else:
        warped_alpha = visible.values
    out = image_after_removal.pixels.copy()
    sel = visible.bool()
    a = warped_alpha[sel][:, None]
    out[sel] = a * warped[sel] + (1.0 - a) * image_after_removal.pixels[sel]
    return image_after_removal.with_pixels(out)
