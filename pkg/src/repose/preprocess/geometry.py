"""Depth-aware geometry: perspective scale, occlusion resolution, and the
full geometry plan for a reposition request."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import DegenerateDepthError, InputError
from ..types import DepthMap, Image, Mask, binary_mask
from .selection import SubjectSelection

SCALE_CLAMP = (0.25, 4.0)
MIN_IN_FRAME_FRACTION = 0.25
SHADOW_MODES = ("none", "complete", "synthesize")


@dataclass(frozen=True)
class RepositionSpec:
    """User intent for one reposition: where to move and which refinements
    to apply."""

    displacement: tuple[int, int] = (0, 0)
    preserve_occlusion: bool = False
    preserve_perspective: bool = False
    use_matting: bool = False
    completion_mask: Mask | None = None
    apply_harmonization: bool = False
    shadow_mode: str = "none"
    shadow_region: Mask | None = None
    seed: int = 0

    def __post_init__(self):
        dx, dy = self.displacement
        object.__setattr__(self, "displacement", (int(dx), int(dy)))
        if self.shadow_mode not in SHADOW_MODES:
            raise InputError(f"shadow_mode must be one of {SHADOW_MODES}", field="shadow_mode")
        if self.shadow_mode == "synthesize" and (self.shadow_region is None or self.shadow_region.is_empty()):
            raise InputError("shadow_mode 'synthesize' requires shadow_region", field="shadow_region")


@dataclass(frozen=True)
class GeometryPlan:
    """Resolved geometry: where the subject lands and what gets regenerated."""

    scale: float
    destination_mask: Mask
    visible_destination_mask: Mask
    occluded_destination_mask: Mask
    removal_mask: Mask
    alpha: Mask | None = None
    subject_disparity: float = 0.0
    centroid: tuple[float, float] = (0.0, 0.0)
    displacement: tuple[int, int] = (0, 0)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vis = self.visible_destination_mask.bool()
        occ = self.occluded_destination_mask.bool()
        dst = self.destination_mask.bool()
        if np.logical_and(vis, occ).any():
            raise InputError("visible and occluded destination masks overlap")
        if not np.array_equal(np.logical_or(vis, occ), dst):
            raise InputError("visible ∪ occluded must equal the destination mask")


def perspective_scale(depth: DepthMap, src_mask: Mask, dst_mask: Mask, clamp=SCALE_CLAMP) -> float:
    """Scale = median disparity over the destination footprint divided by the
    median over the source footprint, clamped. Convention, not a derived
    fact: the reference method resizes 'accordingly' without a formula."""
    if src_mask.is_empty() or dst_mask.is_empty():
        raise InputError("perspective scale needs non-empty masks")
    src_median = depth.median_over(src_mask)
    dst_median = depth.median_over(dst_mask)
    if src_median <= 0.0:
        raise DegenerateDepthError("median source disparity is zero")
    return float(np.clip(dst_median / src_median, clamp[0], clamp[1]))


def resolve_occlusion(
    image: Image,
    depth: DepthMap,
    subject_disparity: float,
    destination_mask: Mask,
    scene_masks: list[Mask],
) -> tuple[Mask, Mask]:
    """Split the destination footprint into visible/occluded pixels.

    Decided per overlapping scene segment (median disparity greater than
    the subject's → that overlap occludes), not per raw pixel, to avoid
    disparity-noise speckle. Pixels in no scene mask stay visible."""
    if subject_disparity <= 0.0:
        raise DegenerateDepthError("subject disparity must be positive")
    dst = destination_mask.bool()
    occluded = np.zeros_like(dst)
    for scene in scene_masks:
        overlap = np.logical_and(dst, scene.bool())
        if not overlap.any():
            continue
        if depth.median_over(scene) > subject_disparity:
            occluded |= overlap
    visible = np.logical_and(dst, ~occluded)
    return binary_mask(visible), binary_mask(occluded)


def warp_about_centroid(mask: Mask, displacement: tuple[int, int], scale: float) -> tuple[Mask, tuple[float, float]]:
    """Translate then scale about the translated footprint's centroid,
    nearest-neighbor; returns the warped mask and the scaling centroid."""
    dx, dy = displacement
    src = mask.bool().astype(np.uint8)
    if scale == 1.0:
        from ..inversion.datagen import translate_mask

        return binary_mask(translate_mask(src, dx, dy)), _translated_centroid(mask, dx, dy)
    cx, cy = _translated_centroid(mask, dx, dy)
    warped = kernels.warp_mask_nn(src, float(dx), float(dy), float(scale), cx, cy)
    return binary_mask(warped), (cx, cy)


def _translated_centroid(mask: Mask, dx: int, dy: int) -> tuple[float, float]:
    cx, cy = mask.centroid()
    return cx + dx, cy + dy


def plan_geometry(
    image: Image,
    selection: SubjectSelection,
    spec: RepositionSpec,
    depth: DepthMap,
    scene_masks: list[Mask] | None = None,
    scale_clamp=SCALE_CLAMP,
) -> GeometryPlan:
    """Compose translation, perspective scaling, and occlusion resolution
    into the masks the generation stages will consume."""
    removal_mask = selection.mask
    subject_disparity = depth.median_over(removal_mask)

    translated, _ = warp_about_centroid(removal_mask, spec.displacement, 1.0)
    if translated.is_empty():
        raise InputError(
            "displacement pushes the subject fully out of frame",
            field="displacement",
            hint="reduce the displacement so the subject stays visible",
        )

    scale = 1.0
    if spec.preserve_perspective:
        scale = perspective_scale(depth, removal_mask, translated, clamp=scale_clamp)

    destination, centroid = warp_about_centroid(removal_mask, spec.displacement, scale)
    min_pixels = MIN_IN_FRAME_FRACTION * removal_mask.area * scale * scale
    if destination.area < min_pixels:
        raise InputError(
            "less than 25% of the scaled subject stays in frame",
            field="displacement",
            hint="reduce the displacement or disable perspective scaling",
        )

    if spec.preserve_occlusion and scene_masks:
        visible, occluded = resolve_occlusion(image, depth, subject_disparity, destination, scene_masks)
    else:
        visible, occluded = destination, binary_mask(np.zeros(image.shape, dtype=bool))

    return GeometryPlan(
        scale=scale,
        destination_mask=destination,
        visible_destination_mask=visible,
        occluded_destination_mask=occluded,
        removal_mask=removal_mask,
        subject_disparity=subject_disparity,
        centroid=centroid,
        displacement=spec.displacement,
    )
