"""Kernel correctness: compiled and fallback paths agree, and morphology
matches scipy's reference implementation."""

import numpy as np
import pytest
import scipy.ndimage as ndi

from repose import kernels
from repose.kernels import fallback


def disk_structure(radius):
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    return dx * dx + dy * dy <= radius * radius


@pytest.fixture
def blob_mask(rng):
    mask = (rng.random((40, 40)) > 0.8).astype(np.uint8)
    mask[15:25, 10:20] = 1
    return mask


@pytest.mark.parametrize("radius", [1, 2, 3, 5])
def test_dilate_matches_scipy(blob_mask, radius):
    ours = kernels.dilate(blob_mask, radius)
    ref = ndi.binary_dilation(blob_mask.astype(bool), structure=disk_structure(radius))
    assert np.array_equal(ours.astype(bool), ref)


@pytest.mark.parametrize("radius", [1, 2, 4])
def test_erode_matches_scipy(blob_mask, radius):
    ours = kernels.erode(blob_mask, radius)
    # Outside-frame counts as mask interior so frame-touching masks keep
    # their border under erosion (no feather seam at the image edge).
    ref = ndi.binary_erosion(blob_mask.astype(bool), structure=disk_structure(radius), border_value=1)
    assert np.array_equal(ours.astype(bool), ref)


def test_zero_radius_is_identity(blob_mask):
    assert np.array_equal(kernels.dilate(blob_mask, 0), blob_mask != 0)
    assert np.array_equal(kernels.erode(blob_mask, 0), blob_mask != 0)


def test_compiled_and_fallback_agree(rng, blob_mask):
    img = rng.random((40, 40, 3)).astype(np.float32)
    alpha = rng.random((40, 40)).astype(np.float32)
    cases = [
        ("dilate", (blob_mask, 2)),
        ("erode", (blob_mask, 2)),
        ("warp_mask_nn", (blob_mask, 3.5, -2.25, 1.4, 20.0, 19.5)),
        ("warp_image_bilinear", (img, 1.25, -0.5, 0.8, 19.0, 21.0, 0.1)),
        ("blend", (img, img[::-1].copy(), alpha)),
    ]
    for name, args in cases:
        a = getattr(kernels, name)(*args)
        b = getattr(fallback, name)(*args)
        assert np.array_equal(a, b), f"{name} differs between backends"


def test_warp_identity(blob_mask):
    out = kernels.warp_mask_nn(blob_mask, 0.0, 0.0, 1.0, 20.0, 20.0)
    assert np.array_equal(out, blob_mask != 0)


def test_warp_pure_translation(blob_mask):
    out = kernels.warp_mask_nn(blob_mask, 5.0, 3.0, 1.0, 0.0, 0.0)
    expected = np.zeros_like(blob_mask)
    expected[3:, 5:] = blob_mask[:-3, :-5]
    assert np.array_equal(out, expected != 0)


def test_warp_scale_preserves_centroid():
    mask = np.zeros((60, 60), dtype=np.uint8)
    mask[20:30, 24:34] = 1
    ys, xs = np.nonzero(mask)
    cx, cy = xs.mean(), ys.mean()
    out = kernels.warp_mask_nn(mask, 0.0, 0.0, 2.0, cx, cy)
    oys, oxs = np.nonzero(out)
    assert abs(oxs.mean() - cx) < 1.0 and abs(oys.mean() - cy) < 1.0
    assert out.sum() == pytest.approx(mask.sum() * 4, rel=0.15)


def test_blend_endpoints(rng):
    a = rng.random((12, 12, 3)).astype(np.float32)
    b = rng.random((12, 12, 3)).astype(np.float32)
    assert np.array_equal(kernels.blend(a, b, np.zeros((12, 12), np.float32)), a)
    assert np.allclose(kernels.blend(a, b, np.ones((12, 12), np.float32)), b, atol=1e-6)


def test_feather_ramp_profile():
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[5:15, 5:15] = 1
    ramp = kernels.feather_ramp(mask, 2)
    assert ramp[0, 0] == 0.0
    assert ramp[10, 10] == 1.0
    assert 0.0 < ramp[5, 10] < 1.0
    assert np.all(ramp[mask == 0] == 0.0)


def test_outer_feather_reaches_outside():
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[8:12, 8:12] = 1
    ramp = kernels.outer_feather_ramp(mask, 2)
    assert np.all(ramp[mask == 1] == 1.0)
    assert ramp[7, 10] > 0.0
    assert ramp[0, 0] == 0.0
