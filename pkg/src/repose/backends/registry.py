"""String-keyed backend registry and the bundle the pipeline consumes.

Unknown backend names are a startup error, never a silent fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from .base import DepthEstimator, Denoiser, MatteEstimator, PerceptualMetric, Segmenter, TextScorer
from .builtin import ColorNameTextScorer, ColorRegionSegmenter, GroundPlaneDepth
from .mock import (
    MeanAbsDistance,
    MockDepthEstimator,
    MockMatteEstimator,
    MockSegmenter,
    MockTextScorer,
)
from .perceptual import RandomFeatureDistance
from .toy import ToyDenoiser

SEGMENTERS = {"mock": MockSegmenter, "color-region": ColorRegionSegmenter}
TEXT_SCORERS = {"mock": MockTextScorer, "color-name": ColorNameTextScorer}
DEPTH_ESTIMATORS = {"mock": MockDepthEstimator, "ground-plane": GroundPlaneDepth}
MATTE_ESTIMATORS = {"mock": MockMatteEstimator, "trimap-interp": MockMatteEstimator}
PERCEPTUAL_METRICS = {"mean-abs": MeanAbsDistance, "randconv": RandomFeatureDistance}


@dataclass
class BackendBundle:
    """All perception/generation backends resolved from config."""

    segmenter: Segmenter
    text: TextScorer
    depth: DepthEstimator
    matte: MatteEstimator
    denoiser: Denoiser
    perceptual: PerceptualMetric

    def fingerprints(self) -> dict[str, str]:
        return {
            "segmenter": self.segmenter.fingerprint(),
            "text": self.text.fingerprint(),
            "depth": self.depth.fingerprint(),
            "matte": self.matte.fingerprint(),
            "denoiser": self.denoiser.fingerprint(),
            "perceptual": self.perceptual.fingerprint(),
        }


def _build(table: dict, block: dict, role: str):
    name = block.get("name")
    if name not in table:
        raise ConfigError(f"unknown {role} backend {name!r} (known: {sorted(table)})")
    kwargs = {k: v for k, v in block.items() if k not in ("name", "weights", "device")}
    return table[name](**kwargs)


def _build_denoiser(block: dict) -> Denoiser:
    name = block.get("name")
    if name != "toy":
        raise ConfigError(f"unknown denoiser backend {name!r} (known: ['toy'])")
    weights = block.get("weights")
    if weights and weights != "mock":
        path = Path(weights)
        if not path.exists():
            raise ConfigError(f"denoiser weights path does not exist: {path}")
        return ToyDenoiser.load(path)
    kwargs = {}
    if "D" in block:
        kwargs["cond_width"] = int(block["D"])
    if "L_max" in block:
        kwargs["max_condition_length"] = int(block["L_max"])
    if "seed" in block:
        kwargs["seed"] = int(block["seed"])
    if "channels" in block:
        kwargs["channels"] = int(block["channels"])
    return ToyDenoiser(**kwargs)


def build_backends(cfg: dict) -> BackendBundle:
    """Resolve a config backend block into live backend instances."""
    try:
        return BackendBundle(
            segmenter=_build(SEGMENTERS, cfg.get("segmenter", {"name": "color-region"}), "segmenter"),
            text=_build(TEXT_SCORERS, cfg.get("text", {"name": "color-name"}), "text"),
            depth=_build(DEPTH_ESTIMATORS, cfg.get("depth", {"name": "ground-plane"}), "depth"),
            matte=_build(MATTE_ESTIMATORS, cfg.get("matte", {"name": "trimap-interp"}), "matte"),
            denoiser=_build_denoiser(cfg.get("denoiser", {"name": "toy"})),
            perceptual=_build(PERCEPTUAL_METRICS, cfg.get("perceptual", {"name": "randconv"}), "perceptual"),
        )
    except TypeError as exc:
        raise ConfigError(f"invalid backend options: {exc}") from exc
