"""Core value types passed between modules.

All images are H×W×3 float32 in [0,1]; masks are H×W float32 in [0,1];
disparity maps are H×W float32, larger = closer to the camera. Arrays are
kept C-contiguous so the compiled kernels can consume them directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InputError

MIN_SIDE = 8


def _as_f32(arr) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(arr, dtype=np.float32))


@dataclass(frozen=True)
class Image:
    """A unit of editing: H×W×3 float pixels in [0,1]."""

    pixels: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pixels", _as_f32(self.pixels))
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3:
            raise InputError(f"image must be H×W×3, got shape {p.shape}")
        if p.shape[0] < MIN_SIDE or p.shape[1] < MIN_SIDE:
            raise InputError(f"image sides must be ≥ {MIN_SIDE}, got {p.shape[:2]}")
        if not np.isfinite(p).all():
            raise InputError("image contains non-finite values")
        if p.min() < 0.0 or p.max() > 1.0:
            raise InputError("image values must lie in [0,1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[0], self.pixels.shape[1]

    def with_pixels(self, pixels: np.ndarray) -> "Image":
        return Image(np.clip(pixels, 0.0, 1.0), source_id=self.source_id)


@dataclass(frozen=True)
class Mask:
    """H×W float mask; binary for selections, fractional for mattes."""

    values: np.ndarray
    kind: str = "binary"  # "binary" | "alpha"

    def __post_init__(self):
        object.__setattr__(self, "values", _as_f32(self.values))
        v = self.values
        if v.ndim != 2:
            raise InputError(f"mask must be H×W, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise InputError("mask contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise InputError("mask values must lie in [0,1]")
        if self.kind not in ("binary", "alpha"):
            raise InputError(f"unknown mask kind {self.kind!r}")
        if self.kind == "binary" and not np.isin(v, (0.0, 1.0)).all():
            raise InputError("binary mask may contain only {0,1}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[0], self.values.shape[1]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.values))

    def is_empty(self) -> bool:
        return not np.any(self.values)

    def bool(self) -> np.ndarray:
        return self.values > 0.5

    def bbox(self) -> tuple[int, int, int, int]:
        """Tight (x0, y0, x1, y1) bounding box, exclusive upper bounds."""
        ys, xs = np.nonzero(self.values)
        if ys.size == 0:
            raise ContractViolation("bbox of an empty mask")
        return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1

    def centroid(self) -> tuple[float, float]:
        """(x, y) centroid of nonzero pixels."""
        ys, xs = np.nonzero(self.values)
        if ys.size == 0:
            raise ContractViolation("centroid of an empty mask")
        return float(xs.mean()), float(ys.mean())


def binary_mask(values) -> Mask:
    """Build a binary Mask from any array-like (thresholded at 0.5)."""
    arr = np.asarray(values)
    return Mask((arr > 0.5).astype(np.float32) if arr.dtype != bool else arr.astype(np.float32), kind="binary")


@dataclass(frozen=True)
class DepthMap:
    """Relative disparity, larger = closer to the camera."""

    disparity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "disparity", _as_f32(self.disparity))
        d = self.disparity
        if d.ndim != 2:
            raise InputError(f"disparity must be H×W, got shape {d.shape}")
        if not np.isfinite(d).all():
            raise InputError("disparity contains non-finite values")
        if d.min() < 0.0:
            raise InputError("disparity must be non-negative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.disparity.shape[0], self.disparity.shape[1]

    def median_over(self, mask: Mask) -> float:
        sel = self.disparity[mask.bool()]
        if sel.size == 0:
            raise ContractViolation("median disparity over an empty mask")
        return float(np.median(sel))


@dataclass(frozen=True)
class NoiseLevel:
    """Normalized noise level t ∈ [0,1]; 0 = clean, 1 = pure noise."""

    t: float

    def __post_init__(self):
        t = float(self.t)
        if not (0.0 <= t <= 1.0) or not np.isfinite(t):
            raise InputError(f"noise level must lie in [0,1], got {t}")
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class ConditionSequence:
    """L×D float token matrix fed to the denoiser's cross-attention."""

    tokens: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tokens", _as_f32(self.tokens))
        tok = self.tokens
        if tok.ndim != 2 or tok.shape[0] < 1 or tok.shape[1] < 1:
            raise InputError(f"condition sequence must be L×D with L,D ≥ 1, got {tok.shape}")
        if not np.isfinite(tok).all():
            raise InputError("condition sequence contains non-finite values")

    @property
    def length(self) -> int:
        return self.tokens.shape[0]

    @property
    def width(self) -> int:
        return self.tokens.shape[1]


def require_same_shape(*shaped, what: str = "inputs") -> None:
    shapes = {s.shape[:2] if hasattr(s, "shape") else None for s in shaped}
    if len(shapes) > 1:
        raise ContractViolation(f"{what} disagree on spatial shape: {sorted(map(str, shapes))}")
