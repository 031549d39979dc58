import numpy as np
import pytest
import torch

from repose.backends.mock import (
    MockDepthEstimator,
    MockMatteEstimator,
    MockSegmenter,
    MockTextScorer,
    SceneObject,
)
from repose.inversion.recipes import build_toy_stack, toy_corpus
from repose.types import DepthMap, Image, Mask, binary_mask

torch.set_num_threads(2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_two_object_scene(size: int = 48):
    """Gray background, red square, blue circle; returns image + object masks."""
    pixels = np.full((size, size, 3), 0.5, dtype=np.float32)
    square = np.zeros((size, size), dtype=bool)
    square[8:20, 6:18] = True
    pixels[square] = (0.9, 0.1, 0.1)
    gy, gx = np.mgrid[0:size, 0:size]
    circle = (gx - 34) ** 2 + (gy - 32) ** 2 <= 8**2
    pixels[circle] = (0.1, 0.2, 0.9)
    image = Image(pixels, source_id="two-object")
    return image, binary_mask(square), binary_mask(circle)


@pytest.fixture
def two_object_scene():
    return make_two_object_scene()


@pytest.fixture
def mock_backends(two_object_scene):
    image, square, circle = two_object_scene
    objects = [SceneObject(square, "red square", 0.95), SceneObject(circle, "blue circle", 0.90)]
    segmenter = MockSegmenter()
    segmenter.register(image.source_id, objects)
    text = MockTextScorer()
    text.register(image.source_id, objects)
    return segmenter, text, MockDepthEstimator(), MockMatteEstimator()


def two_plane_depth(shape, near=3.0, far=1.0, split=None):
    """Left half far, right half near (disparity: larger = closer)."""
    h, w = shape
    split = w // 2 if split is None else split
    d = np.full((h, w), far, dtype=np.float32)
    d[:, split:] = near
    return DepthMap(d)


@pytest.fixture(scope="session")
def toy_stack(tmp_path_factory):
    """The calibrated toy backbone plus trained task prompts.

    Trains from seeds on first use (several CPU-minutes); set
    REPOSE_TOY_CACHE to reuse artifacts across pytest sessions.
    """
    import os

    cache = os.environ.get("REPOSE_TOY_CACHE") or tmp_path_factory.mktemp("toy_stack")
    backend, prompts = build_toy_stack(cache_dir=cache)
    return backend, prompts


@pytest.fixture(scope="session")
def toy_fixtures():
    """Held-out two-tone scenes with contested masks for fill-direction
    checks: alternating subject-portion masks and translated-footprint
    masks, each with the region where remove/complete fills must differ."""
    from repose import kernels
    from repose.inversion.datagen import gen_removal_sample, half_plane_portion, make_shapes_corpus

    rng = np.random.default_rng(99)
    fixtures = []
    for i, (img, subj) in enumerate(make_shapes_corpus(80, size=32, seed=123)):
        if i % 2 == 0:
            portion = None
            for _ in range(20):
                cand = half_plane_portion(subj.bool().astype(np.uint8), rng)
                if 0.1 * subj.area <= cand.sum() <= 0.6 * subj.area:
                    portion = cand
                    break
            if portion is None:
                continue
            mask = binary_mask(kernels.dilate(portion, 2))
            region = kernels.erode(portion, 1)
            region = region if region.sum() > 4 else portion
        else:
            try:
                sample = gen_removal_sample(img, [subj], rng)
            except Exception:
                continue
            mask = sample.mask
            core = kernels.erode(mask.bool().astype(np.uint8), 1)
            region = core if core.sum() > 4 else mask.bool().astype(np.uint8)
            region = region & ~subj.bool().astype(np.uint8)
            if region.sum() < 5:
                continue
        subject_color = img.pixels[subj.bool()].mean(axis=0)
        background_color = img.pixels[~kernels.dilate(subj.bool().astype(np.uint8), 2).astype(bool)].mean(axis=0)
        fixtures.append((img, mask, region.astype(bool), subject_color, background_color))
    return fixtures[:50]


def make_shifted_fixture(rng, size=32, shift=0.25):
    """A two-tone scene with a brightness-shifted blob (inharmonious patch)."""
    from repose.inversion.datagen import make_shapes_corpus, random_blob_mask

    img, _subj = make_shapes_corpus(1, size=size, seed=int(rng.integers(1e6)))[0]
    mask = random_blob_mask(img.shape, rng)
    pixels = img.pixels.copy()
    sel = mask.bool()
    pixels[sel] = np.clip(pixels[sel] + shift, 1 / 255, 1)
    return Image(pixels), mask, img
