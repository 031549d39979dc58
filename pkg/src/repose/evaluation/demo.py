"""Tiny bundled paired-dataset fixture (3 pairs) used by the CLI examples
and tests; also a generator so users can rebuild it anywhere."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ..inversion.datagen import make_shapes_image, translate_mask
from ..types import binary_mask

DEMO_SIZE = 24
DEMO_PAIRS = 3


def _save_png(path: Path, arr: np.ndarray) -> None:
    if arr.ndim == 2:
        data = (arr * 255).round().astype(np.uint8)
    else:
        data = (np.clip(arr, 0, 1) * 255).round().astype(np.uint8)
    PILImage.fromarray(data).save(path)


def make_demo_dataset(dest, pairs: int = DEMO_PAIRS, size: int = DEMO_SIZE, seed: int = 2024) -> Path:
    """Synthesize paired scenes: the same subject at two positions over the
    same background, with masks and the centroid-difference direction."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for i in range(pairs):
        image_a, mask_a = make_shapes_image(rng, size=size, source_id=f"demo-{i}-a")
        bg = np.median(image_a.pixels[~mask_a.bool()], axis=0)
        subject_color = image_a.pixels[mask_a.bool()].mean(axis=0)
        src = mask_a.bool().astype(np.uint8)
        for _ in range(50):
            dx = int(rng.integers(-size // 3, size // 3 + 1))
            dy = int(rng.integers(-size // 3, size // 3 + 1))
            moved = translate_mask(src, dx, dy)
            if (dx or dy) and moved.sum() == src.sum():
                break
        mask_b = binary_mask(moved)
        pixels_b = np.broadcast_to(bg, image_a.pixels.shape).copy()
        pixels_b[mask_b.bool()] = subject_color
        pixels_a = np.broadcast_to(bg, image_a.pixels.shape).copy()
        pixels_a[mask_a.bool()] = subject_color
        ca, cb = mask_a.centroid(), mask_b.centroid()
        direction = [round(cb[0] - ca[0]), round(cb[1] - ca[1])]
        pair_dir = dest / f"pair_{i:03d}"
        pair_dir.mkdir(exist_ok=True)
        _save_png(pair_dir / "a.png", pixels_a)
        _save_png(pair_dir / "b.png", pixels_b)
        _save_png(pair_dir / "a_mask.png", mask_a.values)
        _save_png(pair_dir / "b_mask.png", mask_b.values)
        (pair_dir / "meta.json").write_text(
            json.dumps({"direction": direction, "tags": ["synthetic", "demo"]}, indent=2)
        )
    return dest


def demo_dataset_path() -> Path:
    """Path of the fixture bundled with the package."""
    return Path(resources.files("repose.evaluation") / "demo_data")
