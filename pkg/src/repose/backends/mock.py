"""In-memory mock backends with fully programmed responses.

Mocks are keyed on `Image.source_id` so a test can register exactly the
scene it constructs; no model weights, no network, byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..types import DepthMap, Image, Mask, binary_mask
from .base import (
    DepthEstimator,
    MatteEstimator,
    PerceptualMetric,
    Segmenter,
    TextScorer,
    dedup_candidates,
    validate_query,
)


@dataclass(frozen=True)
class SceneObject:
    """One programmed fixture object: its mask, a text label, a confidence."""

    mask: Mask
    label: str
    confidence: float = 1.0


def _box_mask(shape: tuple[int, int], box: tuple[float, float, float, float]) -> np.ndarray:
    m = np.zeros(shape, dtype=bool)
    x0, y0, x1, y1 = (int(round(v)) for v in box)
    m[y0:y1, x0:x1] = True
    return m


def _iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = np.logical_and(a, b).sum()
    union = np.logical_or(a, b).sum()
    return float(inter) / float(union) if union else 0.0


@dataclass
class MockSegmenter(Segmenter):
    """Returns the registered objects for a scene.

    Point queries: objects containing the point (highest confidence first);
    a point on the background yields the background complement region.
    Box queries: objects ranked by IoU with the box rectangle.
    """

    scenes: dict[str, list[SceneObject]] = field(default_factory=dict)

    def register(self, source_id: str, objects: list[SceneObject]) -> None:
        self.scenes[source_id] = list(objects)

    def _objects(self, image: Image) -> list[SceneObject]:
        return self.scenes.get(image.source_id, [])

    def segment(self, image: Image, query) -> list[tuple[Mask, float]]:
        q = validate_query(image, query)
        objects = self._objects(image)
        if len(q) == 2:
            x, y = int(round(q[0])), int(round(q[1]))
            hits = [o for o in objects if o.mask.values[y, x] > 0.5]
            if hits:
                return [(o.mask, o.confidence) for o in sorted(hits, key=lambda o: -o.confidence)]
            background = np.ones(image.shape, dtype=bool)
            for o in objects:
                background &= ~o.mask.bool()
            return [(binary_mask(background), 0.5)]
        box = _box_mask(image.shape, q)
        ranked = sorted(objects, key=lambda o: -_iou(o.mask.bool(), box))
        if ranked and _iou(ranked[0].mask.bool(), box) > 0.0:
            return [(o.mask, _iou(o.mask.bool(), box) * o.confidence) for o in ranked if _iou(o.mask.bool(), box) > 0.0]
        return [(binary_mask(box), 0.25)]

    def segment_all(self, image: Image) -> list[tuple[Mask, float]]:
        cands = [(o.mask, o.confidence) for o in self._objects(image)]
        return dedup_candidates(cands)


@dataclass
class MockTextScorer(TextScorer):
    """Scores a query against the label of the best-matching fixture mask.

    Score = word-set Jaccard similarity between query and label, so
    "red square" scores 1.0 on the red square and 0.0 on the blue circle.
    """

    scenes: dict[str, list[SceneObject]] = field(default_factory=dict)

    def register(self, source_id: str, objects: list[SceneObject]) -> None:
        self.scenes[source_id] = list(objects)

    def text_score(self, image: Image, mask: Mask, text: str) -> float:
        self._check(mask, text)
        objects = self.scenes.get(image.source_id, [])
        best_label, best_iou = "", 0.0
        for o in objects:
            iou = _iou(o.mask.bool(), mask.bool())
            if iou > best_iou:
                best_label, best_iou = o.label, iou
        query_words = set(text.lower().split())
        label_words = set(best_label.lower().split())
        union = query_words | label_words
        if not union:
            return 0.0
        return len(query_words & label_words) / len(union)


@dataclass
class MockDepthEstimator(DepthEstimator):
    """Returns a disparity map programmed per source_id (default flat 1.0)."""

    maps: dict[str, np.ndarray] = field(default_factory=dict)
    default_disparity: float = 1.0

    def register(self, source_id: str, disparity: np.ndarray) -> None:
        self.maps[source_id] = np.asarray(disparity, dtype=np.float32)

    def estimate_depth(self, image: Image) -> DepthMap:
        if image.source_id in self.maps:
            d = self.maps[image.source_id]
            if d.shape != image.shape:
                raise InputError(f"programmed disparity shape {d.shape} != image {image.shape}")
            return DepthMap(d)
        return DepthMap(np.full(image.shape, self.default_disparity, dtype=np.float32))


class MockMatteEstimator(MatteEstimator):
    """Resolves the unknown trimap band by distance-weighted interpolation
    between the known foreground and background regions."""

    def estimate_matte(self, image: Image, trimap: Mask) -> Mask:
        self._check_trimap(image, trimap)
        from scipy.ndimage import distance_transform_edt

        tv = trimap.values
        alpha = tv.astype(np.float32).copy()
        unknown = tv == 0.5
        if not unknown.any():
            return Mask(alpha, kind="alpha")
        fg, bg = tv == 1.0, tv == 0.0
        if not fg.any() or not bg.any():
            alpha[unknown] = 1.0 if fg.any() else 0.0 if bg.any() else 0.5
            return Mask(alpha, kind="alpha")
        d_fg = distance_transform_edt(~fg)
        d_bg = distance_transform_edt(~bg)
        denom = d_fg + d_bg
        alpha[unknown] = (d_bg[unknown] / np.maximum(denom[unknown], 1e-9)).astype(np.float32)
        return Mask(np.clip(alpha, 0.0, 1.0), kind="alpha")


class MeanAbsDistance(PerceptualMetric):
    """Degenerate perceptual metric for tests: plain mean absolute error."""

    variant = "mean-abs"

    def distance(self, a: Image, b: Image) -> float:
        if a.shape != b.shape:
            raise InputError(f"image shapes disagree: {a.shape} vs {b.shape}")
        return float(np.abs(a.pixels - b.pixels).mean())
