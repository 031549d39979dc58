from .base import (
    Denoiser,
    DepthEstimator,
    MatteEstimator,
    PerceptualMetric,
    Segmenter,
    TextScorer,
    dedup_candidates,
)
from .builtin import ColorNameTextScorer, ColorRegionSegmenter, GroundPlaneDepth
from .mock import (
    MeanAbsDistance,
    MockDepthEstimator,
    MockMatteEstimator,
    MockSegmenter,
    MockTextScorer,
    SceneObject,
)
from .perceptual import RandomFeatureDistance
from .registry import BackendBundle, build_backends
from .toy import ToyDenoiser, ToyDenoiserNet

__all__ = [
    "BackendBundle",
    "ColorNameTextScorer",
    "ColorRegionSegmenter",
    "Denoiser",
    "DepthEstimator",
    "GroundPlaneDepth",
    "MatteEstimator",
    "MeanAbsDistance",
    "MockDepthEstimator",
    "MockMatteEstimator",
    "MockSegmenter",
    "MockTextScorer",
    "PerceptualMetric",
    "RandomFeatureDistance",
    "SceneObject",
    "Segmenter",
    "TextScorer",
    "ToyDenoiser",
    "ToyDenoiserNet",
    "build_backends",
    "dedup_candidates",
]
