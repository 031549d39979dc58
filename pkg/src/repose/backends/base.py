"""Backend interfaces and the candidate-dedup rule shared by segmenters.

Every backend is immutable after construction: concurrent read-only calls
are safe, and all operations are referentially transparent given a frozen
backend state and fixed seed.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..errors import InputError
from ..types import DepthMap, Image, Mask, NoiseLevel, ConditionSequence

TRIMAP_LEVELS = (0.0, 0.5, 1.0)


def validate_query(image: Image, query) -> tuple:
    """Normalize a point (x,y) or box (x0,y0,x1,y1) query, bounds-checked."""
    q = tuple(float(v) for v in query)
    h, w = image.shape
    if len(q) == 2:
        x, y = q
        if not (0 <= x < w and 0 <= y < h):
            raise InputError(f"point ({x},{y}) outside image bounds {w}×{h}", field="query")
        return q
    if len(q) == 4:
        x0, y0, x1, y1 = q
        if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
            raise InputError(f"box {q} outside image bounds {w}×{h}", field="query")
        return q
    raise InputError(f"query must have 2 (point) or 4 (box) coordinates, got {len(q)}", field="query")


def dedup_candidates(
    candidates: list[tuple[Mask, float]], max_overlap: float = 0.2
) -> list[tuple[Mask, float]]:
    """Drop lower-confidence masks overlapping a kept mask by more than
    `max_overlap` of the smaller mask's area."""
    ordered = sorted(candidates, key=lambda c: -c[1])
    kept: list[tuple[Mask, float]] = []
    for mask, conf in ordered:
        m = mask.bool()
        area = m.sum()
        if area == 0:
            continue
        ok = True
        for other, _ in kept:
            o = other.bool()
            inter = np.logical_and(m, o).sum()
            if inter > max_overlap * min(area, o.sum()):
                ok = False
                break
        if ok:
            kept.append((mask, conf))
    return kept


class Segmenter(ABC):
    """Promptable segmentation: point/box queries and whole-image proposals."""

    @abstractmethod
    def segment(self, image: Image, query) -> list[tuple[Mask, float]]:
        """Ranked (binary mask, confidence) candidates for a point or box."""

    @abstractmethod
    def segment_all(self, image: Image) -> list[tuple[Mask, float]]:
        """All distinct subjects; pairwise overlap ≤ 20% of the smaller mask."""

    def fingerprint(self) -> str:
        return type(self).__name__


class TextScorer(ABC):
    """Similarity between a masked image region and a text query."""

    @abstractmethod
    def text_score(self, image: Image, mask: Mask, text: str) -> float:
        """Finite scalar; higher = more similar. Raises on empty mask/text."""

    def _check(self, mask: Mask, text: str) -> None:
        if not text:
            raise InputError("text query must be non-empty", field="text")
        if mask.is_empty():
            raise InputError("mask must be non-empty", field="mask")

    def fingerprint(self) -> str:
        return type(self).__name__


class DepthEstimator(ABC):
    @abstractmethod
    def estimate_depth(self, image: Image) -> DepthMap:
        """Relative disparity map (larger = closer), same H×W."""

    def fingerprint(self) -> str:
        return type(self).__name__


class MatteEstimator(ABC):
    @abstractmethod
    def estimate_matte(self, image: Image, trimap: Mask) -> Mask:
        """Alpha matte honoring the trimap's known regions exactly."""

    def _check_trimap(self, image: Image, trimap: Mask) -> None:
        if image.shape != trimap.shape:
            raise InputError("trimap shape must match image")
        if not np.isin(trimap.values, TRIMAP_LEVELS).all():
            raise InputError("trimap may contain only levels {0, 0.5, 1}", field="trimap")

    def fingerprint(self) -> str:
        return type(self).__name__


class Denoiser(ABC):
    """Mask-conditioned noise predictor plus its noise schedule.

    `denoise` consumes model-space latents (the caller owns the [0,1] ↔
    [-1,1] convention via `to_model_space`/`from_model_space`); the mask
    and condition image are passed in image space.
    """

    condition_width: int
    max_condition_length: int

    @abstractmethod
    def denoise(
        self,
        latent: np.ndarray,
        t: NoiseLevel,
        cond: ConditionSequence,
        mask: Mask,
        masked_image: Image,
    ) -> np.ndarray:
        """Noise estimate, same shape as latent; deterministic, grad-free."""

    @abstractmethod
    def alpha_bar(self, t: float) -> float:
        """Signal retention at noise level t: 1 at t=0, 0 at t=1."""

    @abstractmethod
    def fingerprint(self) -> str:
        """Stable digest of the backend weights + architecture."""

    def with_adapter(self, adapter, scale: float) -> "Denoiser":
        """Immutable view with a low-rank adapter attached at `scale`."""
        raise NotImplementedError(f"{type(self).__name__} does not support adapters")

    def predict_noise_t(self, x_t, t, cond, mask, cond_image, adapter=None, adapter_scale=0.0):
        """Differentiable torch-space forward for training; optional."""
        raise NotImplementedError(f"{type(self).__name__} has no differentiable training path")

    @staticmethod
    def to_model_space(pixels: np.ndarray) -> np.ndarray:
        return pixels.astype(np.float32) * 2.0 - 1.0

    @staticmethod
    def from_model_space(latent: np.ndarray) -> np.ndarray:
        return np.clip((latent + 1.0) / 2.0, 0.0, 1.0).astype(np.float32)

    def check_denoise_inputs(self, latent, cond: ConditionSequence, mask: Mask, masked_image: Image) -> None:
        if latent.shape != masked_image.pixels.shape or mask.shape != masked_image.shape:
            raise InputError(
                f"spatial shapes disagree: latent {latent.shape}, mask {mask.shape}, image {masked_image.pixels.shape}"
            )
        if not np.isfinite(latent).all():
            raise InputError("latent contains non-finite values")
        if cond.width != self.condition_width:
            raise InputError(
                f"condition width {cond.width} does not match backend width {self.condition_width}"
            )


class PerceptualMetric(ABC):
    """Perceptual distance between equal-shaped images; 0 iff identical."""

    variant: str = "unspecified"

    @abstractmethod
    def distance(self, a: Image, b: Image) -> float: ...

    def fingerprint(self) -> str:
        return f"{type(self).__name__}:{self.variant}"
