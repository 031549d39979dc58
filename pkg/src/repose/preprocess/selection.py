"""Turning a user query (point, box, or text) into a subject selection."""

from __future__ import annotations

from dataclasses import dataclass

from ..backends.base import Segmenter, TextScorer
from ..errors import InputError, NoSubjectFoundError
from ..types import Image, Mask


@dataclass(frozen=True)
class SubjectSelection:
    """The identified subject: its visible-region mask and provenance."""

    mask: Mask
    bbox: tuple[int, int, int, int]
    query: object
    confidence: float

    def __post_init__(self):
        if self.mask.is_empty():
            raise InputError("subject selection mask is empty")
        if self.bbox != self.mask.bbox():
            raise InputError("bbox must be the tight bounding box of the mask")


def _select(mask: Mask, query, confidence: float) -> SubjectSelection:
    return SubjectSelection(mask=mask, bbox=mask.bbox(), query=query, confidence=confidence)


def identify_subject(
    image: Image, query, segmenter: Segmenter, text_scorer: TextScorer | None = None
) -> SubjectSelection:
    """Point/box queries take the segmenter's top candidate; text queries
    take the best text-scored whole-image proposal. Ties break toward the
    larger mask, then the lower centroid, then the smaller proposal index."""
    if isinstance(query, str):
        if not query.strip():
            raise InputError("text query must be non-empty", field="query")
        if text_scorer is None:
            raise InputError("text queries require a text-scoring backend", field="query")
        candidates = segmenter.segment_all(image)
        if not candidates:
            raise NoSubjectFoundError(f"no subject found for text query {query!r}")
        scored = []
        for idx, (mask, _conf) in enumerate(candidates):
            score = text_scorer.text_score(image, mask, query)
            # Tie order: larger area, then lower (larger-y) centroid, then
            # smaller proposal id.
            scored.append(((-score, -mask.area, -mask.centroid()[1], idx), mask, score))
        scored.sort(key=lambda s: s[0])
        _, mask, score = scored[0]
        return _select(mask, query, float(score))
    ranked = segmenter.segment(image, query)
    if not ranked:
        raise NoSubjectFoundError(f"no subject found at {query}")
    mask, confidence = ranked[0]
    return _select(mask, tuple(query), float(confidence))
