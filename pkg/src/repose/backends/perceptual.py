"""Weight-free perceptual distance: multi-scale random-conv features.

Desk-scale stand-in for a learned patch-similarity metric. A small pixel
term guarantees distance is zero iff the inputs are identical; the random
feature stack (fixed seed) adds texture sensitivity. The variant label is
recorded in every evaluation report.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import InputError
from ..types import Image
from .base import PerceptualMetric

PIXEL_TERM_WEIGHT = 0.1


class RandomFeatureDistance(PerceptualMetric):
    variant = "randconv-3scale-v1"

    def __init__(self, seed: int = 17, channels: int = 8, scales: int = 3):
        self.seed = seed
        self.scales = scales
        gen = torch.Generator().manual_seed(seed)
        self.filters = []
        c_in = 3
        for _ in range(scales):
            w = torch.randn(channels, c_in, 3, 3, generator=gen)
            w = w / w.flatten(1).norm(dim=1).view(-1, 1, 1, 1)
            self.filters.append(w)
            c_in = channels

    def _features(self, pixels: np.ndarray) -> list[torch.Tensor]:
        x = torch.from_numpy(pixels.transpose(2, 0, 1)[None].astype(np.float32))
        feats = []
        for w in self.filters:
            x = F.conv2d(x, w, stride=2, padding=1)
            x = torch.tanh(x)
            norm = x.square().sum(dim=1, keepdim=True).sqrt() + 1e-8
            feats.append(x / norm)
        return feats

    def distance(self, a: Image, b: Image) -> float:
        if a.shape != b.shape:
            raise InputError(f"image shapes disagree: {a.shape} vs {b.shape}")
        pixel_term = float(np.sqrt(np.mean((a.pixels - b.pixels) ** 2)))
        if pixel_term == 0.0:
            return 0.0
        with torch.no_grad():
            fa = self._features(a.pixels)
            fb = self._features(b.pixels)
            feat_term = sum(float((x - y).square().mean()) for x, y in zip(fa, fb))
        return PIXEL_TERM_WEIGHT * pixel_term + feat_term
