"""Self-contained heuristic backends that work on arbitrary images.

These are the weight-free tier used by the service demo and CI: a
color-region segmenter, a ground-plane disparity prior, and a color-name
text scorer. They are deterministic and need no downloads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import label as cc_label

from ..types import DepthMap, Image, Mask, binary_mask
from .base import DepthEstimator, Segmenter, TextScorer, dedup_candidates, validate_query

_COLOR_ANCHORS = {
    "red": (1.0, 0.0, 0.0),
    "green": (0.0, 0.8, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "yellow": (1.0, 1.0, 0.0),
    "cyan": (0.0, 1.0, 1.0),
    "magenta": (1.0, 0.0, 1.0),
    "orange": (1.0, 0.5, 0.0),
    "purple": (0.6, 0.0, 0.8),
    "white": (1.0, 1.0, 1.0),
    "black": (0.0, 0.0, 0.0),
    "gray": (0.5, 0.5, 0.5),
    "grey": (0.5, 0.5, 0.5),
}


def _quantize(image: Image, levels: int) -> np.ndarray:
    q = np.clip((image.pixels * (levels - 1)).round(), 0, levels - 1).astype(np.int32)
    return q[..., 0] * levels * levels + q[..., 1] * levels + q[..., 2]


@dataclass
class ColorRegionSegmenter(Segmenter):
    """Segments connected regions of (quantized) uniform color.

    The largest region is treated as background and excluded from
    segment_all proposals; tiny specks below `min_area` are dropped.
    """

    levels: int = 8
    min_area: int = 16

    def _components(self, image: Image) -> list[np.ndarray]:
        codes = _quantize(image, self.levels)
        comps: list[np.ndarray] = []
        for code in np.unique(codes):
            lab, n = cc_label(codes == code)
            for i in range(1, n + 1):
                comp = lab == i
                if comp.sum() >= self.min_area:
                    comps.append(comp)
        comps.sort(key=lambda c: -c.sum())
        return comps

    def segment(self, image: Image, query) -> list[tuple[Mask, float]]:
        q = validate_query(image, query)
        comps = self._components(image)
        if len(q) == 2:
            x, y = int(round(q[0])), int(round(q[1]))
            hits = [c for c in comps if c[y, x]]
            if not hits:
                return [(binary_mask(np.ones(image.shape, dtype=bool)), 0.1)]
            # Smallest containing region first: pointing favors the object over the backdrop.
            hits.sort(key=lambda c: c.sum())
            return [(binary_mask(c), 0.9 - 0.1 * i) for i, c in enumerate(hits[:3])]
        x0, y0, x1, y1 = (int(round(v)) for v in q)
        box = np.zeros(image.shape, dtype=bool)
        box[y0:y1, x0:x1] = True
        scored = []
        for c in comps:
            inter = np.logical_and(c, box).sum()
            union = np.logical_or(c, box).sum()
            if inter:
                scored.append((binary_mask(c), inter / union))
        if not scored:
            return [(binary_mask(box), 0.25)]
        scored.sort(key=lambda s: -s[1])
        return scored[:3]

    def segment_all(self, image: Image) -> list[tuple[Mask, float]]:
        comps = self._components(image)
        if not comps:
            return []
        proposals = [(binary_mask(c), 0.8) for c in comps[1:]]  # drop background
        return dedup_candidates(proposals)


@dataclass
class GroundPlaneDepth(DepthEstimator):
    """Disparity ramp: lower image rows are assumed closer to the camera."""

    near: float = 2.0
    far: float = 0.5

    def estimate_depth(self, image: Image) -> DepthMap:
        h, w = image.shape
        ramp = np.linspace(self.far, self.near, h, dtype=np.float32)
        return DepthMap(np.repeat(ramp[:, None], w, axis=1))


class ColorNameTextScorer(TextScorer):
    """Scores text against the masked region's mean color.

    Similarity = 1 − (distance from the region mean to the closest named
    color mentioned in the query) / max distance; 0 when the query names
    no known color.
    """

    def text_score(self, image: Image, mask: Mask, text: str) -> float:
        self._check(mask, text)
        sel = mask.bool()
        mean = image.pixels[sel].mean(axis=0)
        best = 0.0
        for word in text.lower().split():
            anchor = _COLOR_ANCHORS.get(word.strip(".,"))
            if anchor is None:
                continue
            dist = float(np.linalg.norm(mean - np.asarray(anchor, dtype=np.float32)))
            best = max(best, 1.0 - dist / np.sqrt(3.0))
        return best
