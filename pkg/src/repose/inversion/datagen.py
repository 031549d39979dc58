"""Task-specific training-data generators and the synthetic toy corpora.

Removal samples move a subject's mask elsewhere so the masked content is
unrelated background; completion samples mask a continuous portion of the
subject with random dilation; harmonization samples pair an inharmonious
composite with its clean target. All generators are reproducible from
(image id, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import label as cc_label

from .. import kernels
from ..errors import ContractViolation, SkipSample
from ..types import Image, Mask, binary_mask

REMOVAL_MIN_IN_FRAME = 0.70
REMOVAL_OFFSET_RANGE = (0.25, 1.0)
COMPLETION_AREA_BAND = (0.10, 0.60)
COMPLETION_DILATION_FRAC = 0.05
COMPLETION_MIN_PIXELS = 32
MAX_ATTEMPTS = 20
HARMONY_TOLERANCE_DILATION = 2


@dataclass(frozen=True)
class TrainingSample:
    """One (image, mask, target, condition) tuple for prompt training."""

    image: Image
    mask: Mask
    target: Image
    unmasked_condition: Image

    def __post_init__(self):
        shapes = {self.image.shape, self.mask.shape, self.target.shape, self.unmasked_condition.shape}
        if len(shapes) != 1:
            raise ContractViolation(f"training sample shapes disagree: {shapes}")


def _masked_out(image: Image, mask: Mask) -> Image:
    keep = 1.0 - mask.values
    return Image(image.pixels * keep[..., None], source_id=image.source_id)


def translate_mask(mask: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Integer translation with frame clipping."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    ys0, ys1 = max(0, dy), min(h, h + dy)
    xs0, xs1 = max(0, dx), min(w, w + dx)
    if ys0 < ys1 and xs0 < xs1:
        out[ys0:ys1, xs0:xs1] = mask[ys0 - dy : ys1 - dy, xs0 - dx : xs1 - dx]
    return out


def gen_removal_sample(image: Image, subject_masks: list[Mask], rng: np.random.Generator) -> TrainingSample:
    """Mask = a subject's mask translated by a random offset of magnitude
    U(0.25, 1.0)×bbox diagonal; the target is the image itself (the masked
    content is background unrelated to the mask's shape)."""
    if not subject_masks:
        raise ContractViolation("gen_removal_sample needs at least one subject mask")
    subject = subject_masks[int(rng.integers(len(subject_masks)))]
    src = subject.bool().astype(np.uint8)
    area = int(src.sum())
    if area == 0:
        raise SkipSample("empty subject mask")
    x0, y0, x1, y1 = subject.bbox()
    diag = math.hypot(x1 - x0, y1 - y0)
    for _ in range(MAX_ATTEMPTS):
        mag = rng.uniform(*REMOVAL_OFFSET_RANGE) * diag
        ang = rng.uniform(0.0, 2.0 * math.pi)
        dx, dy = int(round(mag * math.cos(ang))), int(round(mag * math.sin(ang)))
        if dx == 0 and dy == 0:
            continue
        moved = translate_mask(src, dx, dy)
        if moved.sum() >= REMOVAL_MIN_IN_FRAME * area:
            mask = binary_mask(moved)
            return TrainingSample(
                image=image, mask=mask, target=image, unmasked_condition=_masked_out(image, mask)
            )
    raise SkipSample(f"no in-frame offset found in {MAX_ATTEMPTS} attempts")


def half_plane_portion(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Continuous portion of a mask: intersect with a random half-plane
    through a uniformly chosen interior point, keep the largest component."""
    ys, xs = np.nonzero(mask)
    idx = int(rng.integers(ys.size))
    cy, cx = float(ys[idx]), float(xs[idx])
    ang = rng.uniform(0.0, 2.0 * math.pi)
    ny, nx = math.sin(ang), math.cos(ang)
    gy, gx = np.mgrid[0 : mask.shape[0], 0 : mask.shape[1]]
    half = ((gx - cx) * nx + (gy - cy) * ny) >= 0.0
    portion = np.logical_and(mask > 0, half)
    if not portion.any():
        return portion.astype(np.uint8)
    labels, n = cc_label(portion)
    if n > 1:
        largest = 1 + np.argmax([(labels == i).sum() for i in range(1, n + 1)])
        portion = labels == largest
    return portion.astype(np.uint8)


def gen_completion_sample(image: Image, subject_mask: Mask, rng: np.random.Generator) -> TrainingSample:
    """Mask = a connected 10–60% portion of the subject, randomly dilated to
    mimic imprecise user masks; the target is the image itself."""
    src = subject_mask.bool().astype(np.uint8)
    area = int(src.sum())
    if area < COMPLETION_MIN_PIXELS:
        raise SkipSample(f"subject mask below {COMPLETION_MIN_PIXELS} px")
    lo, hi = COMPLETION_AREA_BAND
    portion = None
    for _ in range(MAX_ATTEMPTS):
        cand = half_plane_portion(src, rng)
        frac = cand.sum() / area
        if lo <= frac <= hi:
            portion = cand
            break
    if portion is None:
        raise SkipSample(f"no in-band portion found in {MAX_ATTEMPTS} attempts")
    h, w = src.shape
    radius = int(rng.uniform(0.0, COMPLETION_DILATION_FRAC * min(h, w)))
    dilated = kernels.dilate(portion, radius) if radius > 0 else portion
    mask = binary_mask(dilated)
    return TrainingSample(image=image, mask=mask, target=image, unmasked_condition=_masked_out(image, mask))


def make_harmonization_sample(
    clean: Image,
    mask: Mask,
    rng: np.random.Generator,
    max_shift: float = 0.35,
    min_shift: float = 0.15,
    clean_fraction: float = 0.0,
) -> TrainingSample:
    """Pair a brightness-shifted composite (input) with its clean target;
    the condition carries the full inharmonious image, not the masked one.
    A `clean_fraction` of draws applies no shift at all so the correction
    learns to leave already-harmonious content untouched."""
    if rng.random() < clean_fraction:
        shift = 0.0
    else:
        shift = rng.uniform(min_shift, max_shift) * (1 if rng.random() < 0.5 else -1)
    pixels = clean.pixels.copy()
    sel = mask.bool()
    # Floor at 1/255: exact zero is reserved for the masked-out condition
    # convention, so a darkening shift must not clip content to pure black.
    pixels[sel] = np.clip(pixels[sel] + shift, 1.0 / 255.0, 1.0)
    inharmonious = Image(pixels, source_id=clean.source_id)
    band = kernels.dilate(sel.astype(np.uint8), HARMONY_TOLERANCE_DILATION)
    outside = ~band.astype(bool)
    if not np.array_equal(inharmonious.pixels[outside], clean.pixels[outside]):
        raise ContractViolation("harmonization pair differs outside the mask tolerance band")
    return TrainingSample(image=inharmonious, mask=mask, target=clean, unmasked_condition=inharmonious)


def random_blob_mask(shape: tuple[int, int], rng: np.random.Generator) -> Mask:
    """A random solid square or disk anywhere in frame."""
    h, w = shape
    gy, gx = np.mgrid[0:h, 0:w]
    cy, cx = rng.integers(2, h - 2), rng.integers(2, w - 2)
    r = rng.integers(max(2, min(h, w) // 8), max(3, min(h, w) // 3))
    if rng.random() < 0.5:
        m = (np.abs(gx - cx) <= r) & (np.abs(gy - cy) <= r)
    else:
        m = (gx - cx) ** 2 + (gy - cy) ** 2 <= r * r
    if not m.any():
        m[cy, cx] = True
    return binary_mask(m)


def estimate_flat_background(image: Image, exclude: Mask) -> np.ndarray:
    """Per-channel median color outside the (dilated) excluded region."""
    keep = ~kernels.dilate(exclude.bool().astype(np.uint8), 2).astype(bool)
    if not keep.any():
        keep = ~exclude.bool()
    return np.median(image.pixels[keep], axis=0).astype(np.float32)


def erase_region(image: Image, region: np.ndarray, color: np.ndarray) -> Image:
    """Replace a region with a flat color (used to truncate subjects)."""
    pixels = image.pixels.copy()
    pixels[region.astype(bool)] = color
    return Image(np.clip(pixels, 0.0, 1.0), source_id=image.source_id)


# -- synthetic toy corpora -----------------------------------------------


def _two_tone_colors(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Dark-toned background, light-toned subject, random tints: the two
    tones stay luminance-separated so fill direction is measurable."""
    bg_value = rng.uniform(0.05, 0.38)
    fg_value = rng.uniform(0.62, 0.95)
    bg_tint = rng.uniform(0.6, 1.0, size=3)
    fg_tint = rng.uniform(0.6, 1.0, size=3)
    bg = (bg_value * bg_tint / bg_tint.max()).astype(np.float32)
    fg = (fg_value * fg_tint / fg_tint.max()).astype(np.float32)
    return bg, fg


def make_shapes_image(rng: np.random.Generator, size: int = 32, source_id: str = "") -> tuple[Image, Mask]:
    """One solid shape (rectangle or ellipse) on a uniform background."""
    bg, fg = _two_tone_colors(rng)
    canvas = np.broadcast_to(bg, (size, size, 3)).copy()
    side = int(rng.integers(size // 3, size // 2 + 1))
    cx = int(rng.integers(side // 2 + 1, size - side // 2 - 1))
    cy = int(rng.integers(side // 2 + 1, size - side // 2 - 1))
    gy, gx = np.mgrid[0:size, 0:size]
    if rng.random() < 0.5:
        mask = (np.abs(gx - cx) <= side // 2) & (np.abs(gy - cy) <= side // 2)
    else:
        rx = max(2, side // 2)
        ry = max(2, int(rng.integers(side // 3, side // 2 + 1)))
        mask = ((gx - cx) / rx) ** 2 + ((gy - cy) / ry) ** 2 <= 1.0
    canvas[mask] = fg
    return Image(canvas, source_id=source_id), binary_mask(mask)


def make_shapes_corpus(n: int, size: int = 32, seed: int = 0) -> list[tuple[Image, Mask]]:
    rng = np.random.default_rng(seed)
    return [make_shapes_image(rng, size=size, source_id=f"shapes-{seed}-{i}") for i in range(n)]


def sample_batch(
    task: str, corpus: list[tuple[Image, Mask]], batch_size: int, rng: np.random.Generator
) -> list[TrainingSample]:
    """Draw a batch of TrainingSamples for `task` from a shapes corpus."""
    out: list[TrainingSample] = []
    guard = 0
    while len(out) < batch_size:
        guard += 1
        if guard > batch_size * 50:
            raise SkipSample("could not assemble a full batch")
        image, mask = corpus[int(rng.integers(len(corpus)))]
        try:
            if task == "remove":
                out.append(gen_removal_sample(image, [mask], rng))
            elif task == "complete":
                out.append(gen_completion_sample(image, mask, rng))
            elif task == "harmonize":
                # Inharmonious patches occur on subjects and plain regions
                # alike; train the correction on both, and keep a share of
                # already-harmonious pairs so it learns to do nothing then.
                region = mask if rng.random() < 0.5 else random_blob_mask(image.shape, rng)
                out.append(make_harmonization_sample(image, region, rng, clean_fraction=0.35))
            else:
                raise ContractViolation(f"unknown task {task!r}")
        except SkipSample:
            continue
    return out
