"""Paired repositioning dataset ("res" format) loading and validation.

On-disk layout: one directory per pair holding a.png, b.png, a_mask.png,
b_mask.png, optional a_amodal.png / b_amodal.png, and meta.json with the
integer direction (centroid of b's mask minus centroid of a's mask) and
category tags. A manifest file listing pair directories is also accepted
as an import adapter for differently-arranged releases. Each pair yields
two evaluation cases (a→b and b→a).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ..types import Image, Mask, binary_mask

DIRECTION_TOLERANCE_PX = 1.0


@dataclass(frozen=True)
class ResPair:
    pair_id: str
    image_a: Image
    image_b: Image
    visible_mask_a: Mask
    visible_mask_b: Mask
    direction_ab: tuple[int, int]
    amodal_mask_a: Mask | None = None
    amodal_mask_b: Mask | None = None
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class RepositionCase:
    """One evaluation direction of a pair."""

    case_id: str
    source: Image
    source_mask: Mask
    target: Image
    target_mask: Mask
    direction: tuple[int, int]
    amodal_source: Mask | None = None


@dataclass
class DatasetReport:
    pairs: list[ResPair] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def cases(self) -> list[RepositionCase]:
        out = []
        for p in self.pairs:
            dx, dy = p.direction_ab
            out.append(
                RepositionCase(
                    case_id=f"{p.pair_id}:a->b",
                    source=p.image_a,
                    source_mask=p.visible_mask_a,
                    target=p.image_b,
                    target_mask=p.visible_mask_b,
                    direction=(dx, dy),
                    amodal_source=p.amodal_mask_a,
                )
            )
            out.append(
                RepositionCase(
                    case_id=f"{p.pair_id}:b->a",
                    source=p.image_b,
                    source_mask=p.visible_mask_b,
                    target=p.image_a,
                    target_mask=p.visible_mask_a,
                    direction=(-dx, -dy),
                    amodal_source=p.amodal_mask_b,
                )
            )
        return out


def load_image_file(path: Path) -> Image:
    with PILImage.open(path) as pil:
        arr = np.asarray(pil.convert("RGB"), dtype=np.float32) / 255.0
    return Image(arr, source_id=str(path))


def load_mask_file(path: Path) -> Mask:
    with PILImage.open(path) as pil:
        arr = np.asarray(pil.convert("L"), dtype=np.float32) / 255.0
    return binary_mask(arr > 0.5)


def _load_pair(pair_dir: Path) -> ResPair:
    meta = json.loads((pair_dir / "meta.json").read_text())
    image_a = load_image_file(pair_dir / "a.png")
    image_b = load_image_file(pair_dir / "b.png")
    mask_a = load_mask_file(pair_dir / "a_mask.png")
    mask_b = load_mask_file(pair_dir / "b_mask.png")
    direction = tuple(int(v) for v in meta["direction"])
    if len(direction) != 2:
        raise ValueError(f"direction must be [dx, dy], got {meta['direction']}")
    for name, img, mask in (("a", image_a, mask_a), ("b", image_b, mask_b)):
        if img.shape != mask.shape:
            raise ValueError(f"{name}_mask shape {mask.shape} != image {img.shape}")
        if mask.is_empty():
            raise ValueError(f"{name}_mask is empty")
    ca, cb = mask_a.centroid(), mask_b.centroid()
    recomputed = (cb[0] - ca[0], cb[1] - ca[1])
    if max(abs(recomputed[0] - direction[0]), abs(recomputed[1] - direction[1])) > DIRECTION_TOLERANCE_PX:
        raise ValueError(
            f"stored direction {direction} deviates from mask centroids {tuple(round(v, 2) for v in recomputed)}"
        )
    amodal_a = load_mask_file(pair_dir / "a_amodal.png") if (pair_dir / "a_amodal.png").exists() else None
    amodal_b = load_mask_file(pair_dir / "b_amodal.png") if (pair_dir / "b_amodal.png").exists() else None
    return ResPair(
        pair_id=pair_dir.name,
        image_a=image_a,
        image_b=image_b,
        visible_mask_a=mask_a,
        visible_mask_b=mask_b,
        direction_ab=direction,
        amodal_mask_a=amodal_a,
        amodal_mask_b=amodal_b,
        tags=tuple(meta.get("tags", ())),
    )


def load_res(path) -> DatasetReport:
    """Load every pair directory under `path` (or listed in a manifest
    file); per-entry validation failures are collected, not raised."""
    root = Path(path)
    report = DatasetReport()
    if root.is_file():
        pair_dirs = [Path(line.strip()) for line in root.read_text().splitlines() if line.strip()]
        pair_dirs = [p if p.is_absolute() else root.parent / p for p in pair_dirs]
    else:
        pair_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    for pair_dir in pair_dirs:
        try:
            report.pairs.append(_load_pair(pair_dir))
        except Exception as exc:
            report.errors.append({"pair": pair_dir.name, "error": str(exc)})
    return report
