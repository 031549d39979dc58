"""End-to-end orchestration: plan → remove → place → complete → blend.

Stage order is fixed: geometry planning, removal inpainting over the old
footprint, compositing at the visible destination, user-mask completion
(clipped against occlusion), optional harmonization over the visible
footprint, then shadow handling. Everything outside the touched masks
(plus the 2 px feather) is returned bitwise-equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..backends.registry import BackendBundle
from ..errors import StageError
from ..generate.executors import (
    PromptSet,
    complete_subject,
    generate_shadow,
    harmonize,
    remove_subject,
)
from ..generate.sampler import GenerationTrace, SamplerConfig
from ..preprocess.compositing import composite_subject, estimate_subject_alpha
from ..preprocess.geometry import GeometryPlan, RepositionSpec, plan_geometry
from ..preprocess.selection import SubjectSelection
from ..types import Image, Mask, binary_mask


@dataclass
class RepositionResult:
    output: Image
    plan: GeometryPlan
    traces: list[GenerationTrace] = field(default_factory=list)
    stage_images: dict[str, Image] | None = None

    def summary(self) -> dict:
        return {
            "scale": self.plan.scale,
            "displacement": list(self.plan.displacement),
            "removal_px": self.plan.removal_mask.area,
            "destination_px": self.plan.destination_mask.area,
            "occluded_px": self.plan.occluded_destination_mask.area,
            "traces": [t.to_dict() for t in self.traces],
        }


def _clip_completion_mask(user_mask: Mask, plan: GeometryPlan) -> Mask:
    """Occlusion wins over completion where both apply."""
    clipped = np.logical_and(user_mask.bool(), ~plan.occluded_destination_mask.bool())
    return binary_mask(clipped)


def reposition(
    image: Image,
    selection: SubjectSelection,
    spec: RepositionSpec,
    prompts: PromptSet,
    backends: BackendBundle,
    cfg: SamplerConfig,
    debug_stages: bool = False,
) -> RepositionResult:
    traces: list[GenerationTrace] = []
    stages: dict[str, Image] = {}
    stage = "plan"
    try:
        depth = backends.depth.estimate_depth(image)
        plan = plan_geometry(image, selection, spec, depth, scene_masks=None)

        stage = "remove"
        removal_cfg = cfg.replace(seed=cfg.seed)
        current, trace = remove_subject(image, plan.removal_mask, prompts, backends.denoiser, removal_cfg)
        traces.append(trace)
        if debug_stages:
            stages["post_removal"] = current

        stage = "occlusion"
        if spec.preserve_occlusion:
            scene = [m for m, _conf in backends.segmenter.segment_all(current)]
            plan = plan_geometry(image, selection, spec, depth, scene_masks=scene)

        stage = "matting"
        if spec.use_matting:
            alpha = estimate_subject_alpha(image, plan.removal_mask, backends.matte)
            plan = GeometryPlan(
                scale=plan.scale,
                destination_mask=plan.destination_mask,
                visible_destination_mask=plan.visible_destination_mask,
                occluded_destination_mask=plan.occluded_destination_mask,
                removal_mask=plan.removal_mask,
                alpha=alpha,
                subject_disparity=plan.subject_disparity,
                centroid=plan.centroid,
                displacement=plan.displacement,
            )

        stage = "composite"
        current = composite_subject(current, image, plan)
        if debug_stages:
            stages["post_placement"] = current

        stage = "complete"
        if spec.completion_mask is not None and not spec.completion_mask.is_empty():
            completion = _clip_completion_mask(spec.completion_mask, plan)
            if not completion.is_empty():
                current, trace = complete_subject(
                    current, completion, prompts, backends.denoiser, cfg.replace(seed=cfg.seed + 1)
                )
                traces.append(trace)
                if debug_stages:
                    stages["post_completion"] = current

        stage = "harmonize"
        if spec.apply_harmonization:
            current, trace = harmonize(
                current,
                plan.visible_destination_mask,
                prompts.require("harmonize"),
                prompts.adapter,
                backends.denoiser,
                cfg.replace(seed=cfg.seed + 2),
            )
            traces.append(trace)

        stage = "shadow"
        if spec.shadow_mode != "none":
            current, trace = generate_shadow(
                current,
                plan.visible_destination_mask,
                spec.shadow_mode,
                spec.shadow_region,
                prompts,
                backends.denoiser,
                cfg.replace(seed=cfg.seed + 3),
                displacement=spec.displacement,
            )
            traces.append(trace)

        if debug_stages:
            stages["final"] = current
        return RepositionResult(
            output=current, plan=plan, traces=traces, stage_images=stages if debug_stages else None
        )
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc, partial=stages or None) from exc
