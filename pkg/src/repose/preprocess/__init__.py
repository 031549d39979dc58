from .compositing import build_trimap, composite_subject, estimate_subject_alpha
from .geometry import (
    SCALE_CLAMP,
    GeometryPlan,
    RepositionSpec,
    perspective_scale,
    plan_geometry,
    resolve_occlusion,
    warp_about_centroid,
)
from .selection import SubjectSelection, identify_subject

__all__ = [
    "GeometryPlan",
    "RepositionSpec",
    "SCALE_CLAMP",
    "SubjectSelection",
    "build_trimap",
    "composite_subject",
    "estimate_subject_alpha",
    "identify_subject",
    "perspective_scale",
    "plan_geometry",
    "resolve_occlusion",
    "warp_about_centroid",
]
