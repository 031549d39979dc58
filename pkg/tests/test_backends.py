"""Backend contracts: value types, programmed mocks, heuristics, the toy
denoiser interface, and the perceptual metric."""

import numpy as np
import pytest
import torch

from repose.backends.builtin import ColorNameTextScorer, ColorRegionSegmenter, GroundPlaneDepth
from repose.backends.mock import MockMatteEstimator, MockSegmenter, SceneObject
from repose.backends.perceptual import RandomFeatureDistance
from repose.backends.registry import build_backends
from repose.backends.toy import ToyDenoiser
from repose.errors import ConfigError, InputError
from repose.inversion import pretrain_backbone
from repose.generate.sampler import SamplerConfig, masked_generate
from repose.types import ConditionSequence, DepthMap, Image, Mask, NoiseLevel, binary_mask

from conftest import make_two_object_scene


class TestValueTypes:
    def test_image_rejects_out_of_range(self):
        with pytest.raises(InputError):
            Image(np.full((8, 8, 3), 1.5, dtype=np.float32))

    def test_image_rejects_non_finite(self):
        bad = np.zeros((8, 8, 3), dtype=np.float32)
        bad[0, 0, 0] = np.nan
        with pytest.raises(InputError):
            Image(bad)

    def test_image_rejects_small(self):
        with pytest.raises(InputError):
            Image(np.zeros((4, 8, 3), dtype=np.float32))

    def test_binary_mask_rejects_fractions(self):
        with pytest.raises(InputError):
            Mask(np.full((8, 8), 0.4, dtype=np.float32), kind="binary")

    def test_alpha_mask_accepts_fractions(self):
        Mask(np.full((8, 8), 0.4, dtype=np.float32), kind="alpha")

    def test_depth_rejects_negative(self):
        with pytest.raises(InputError):
            DepthMap(np.full((8, 8), -1.0, dtype=np.float32))

    def test_noise_level_bounds(self):
        NoiseLevel(0.0)
        NoiseLevel(1.0)
        with pytest.raises(InputError):
            NoiseLevel(1.5)

    def test_condition_sequence_dims(self):
        with pytest.raises(InputError):
            ConditionSequence(np.zeros((0, 4), dtype=np.float32))


class TestMockSegmenter:
    def test_point_inside_object_returns_its_mask(self, two_object_scene, mock_backends):
        image, square, _ = two_object_scene
        segmenter = mock_backends[0]
        ranked = segmenter.segment(image, (10, 12))
        assert np.array_equal(ranked[0][0].bool(), square.bool())
        assert ranked[0][1] == pytest.approx(0.95)

    def test_box_covering_object_high_iou(self, two_object_scene, mock_backends):
        image, square, _ = two_object_scene
        segmenter = mock_backends[0]
        ranked = segmenter.segment(image, square.bbox())
        inter = np.logical_and(ranked[0][0].bool(), square.bool()).sum()
        union = np.logical_or(ranked[0][0].bool(), square.bool()).sum()
        assert inter / union >= 0.99

    def test_background_point_disjoint_from_objects(self, two_object_scene, mock_backends):
        image, square, circle = two_object_scene
        segmenter = mock_backends[0]
        ranked = segmenter.segment(image, (2, 45))
        returned = ranked[0][0].bool()
        # brute-force IoU against each fixture mask: must be zero overlap
        for fixture in (square, circle):
            assert np.logical_and(returned, fixture.bool()).sum() == 0

    def test_out_of_bounds_point_rejected(self, two_object_scene, mock_backends):
        image, _, _ = two_object_scene
        with pytest.raises(InputError):
            mock_backends[0].segment(image, (999, 0))

    def test_segment_all_blank_image_empty(self, mock_backends):
        blank = Image(np.zeros((16, 16, 3), dtype=np.float32), source_id="unregistered")
        assert mock_backends[0].segment_all(blank) == []

    def test_segment_all_three_objects_dedup(self):
        size = 32
        masks = []
        for x0 in (2, 12, 22):
            m = np.zeros((size, size), dtype=bool)
            m[4:12, x0 : x0 + 8] = True
            masks.append(binary_mask(m))
        # a duplicate shifted by one pixel overlaps ~87% and must be dropped
        dup = np.zeros((size, size), dtype=bool)
        dup[4:12, 3:11] = True
        segmenter = MockSegmenter()
        objects = [SceneObject(m, f"block {i}", 0.9 - 0.01 * i) for i, m in enumerate(masks)]
        objects.append(SceneObject(binary_mask(dup), "block dup", 0.5))
        image = Image(np.zeros((size, size, 3), dtype=np.float32), source_id="three")
        segmenter.register("three", objects)
        result = segmenter.segment_all(image)
        assert len(result) == 3

    def test_segment_all_union_covers_foreground(self, two_object_scene, mock_backends):
        image, square, circle = two_object_scene
        result = mock_backends[0].segment_all(image)
        union = np.zeros(image.shape, dtype=bool)
        for mask, _conf in result:
            union |= mask.bool()
        foreground = np.logical_or(square.bool(), circle.bool())
        covered = np.logical_and(union, foreground).sum() / foreground.sum()
        assert covered >= 0.95

    def test_confidences_descending(self, two_object_scene, mock_backends):
        image, _, _ = two_object_scene
        result = mock_backends[0].segment_all(image)
        confs = [c for _m, c in result]
        assert confs == sorted(confs, reverse=True)


class TestTextScorer:
    def test_deterministic(self, two_object_scene, mock_backends):
        image, square, _ = two_object_scene
        text = mock_backends[1]
        assert text.text_score(image, square, "red square") == text.text_score(image, square, "red square")

    def test_label_match_ranks_correct_mask(self, two_object_scene, mock_backends):
        image, square, circle = two_object_scene
        text = mock_backends[1]
        assert text.text_score(image, square, "red square") > text.text_score(image, circle, "red square")

    def test_argmax_over_proposals_matches_ground_truth(self, two_object_scene, mock_backends):
        image, square, _circle = two_object_scene
        segmenter, text = mock_backends[0], mock_backends[1]
        proposals = segmenter.segment_all(image)
        scores = [text.text_score(image, m, "red square") for m, _ in proposals]
        best = proposals[int(np.argmax(scores))][0]
        assert np.array_equal(best.bool(), square.bool())

    def test_empty_mask_rejected(self, two_object_scene, mock_backends):
        image, _, _ = two_object_scene
        empty = binary_mask(np.zeros(image.shape, dtype=bool))
        with pytest.raises(InputError):
            mock_backends[1].text_score(image, empty, "anything")


class TestDepth:
    def test_programmed_ramp_returned_exactly(self, two_object_scene, mock_backends):
        image, _, _ = two_object_scene
        depth = mock_backends[2]
        ramp = np.linspace(0.5, 2.0, image.height, dtype=np.float32)[:, None].repeat(image.width, axis=1)
        depth.register(image.source_id, ramp)
        assert np.array_equal(depth.estimate_depth(image).disparity, ramp)

    def test_two_plane_medians_ordered(self, two_object_scene, mock_backends):
        image, square, circle = two_object_scene
        depth = mock_backends[2]
        planes = np.full(image.shape, 1.0, dtype=np.float32)
        planes[:, : image.width // 2] = 3.0  # left half nearer
        depth.register(image.source_id, planes)
        dm = depth.estimate_depth(image)
        assert dm.median_over(square) > dm.median_over(circle)

    def test_mock_invariant_to_channel_permutation(self, mock_backends):
        depth = mock_backends[2]
        gray = np.random.default_rng(3).random((16, 16, 1)).astype(np.float32).repeat(3, axis=2)
        a = Image(gray, source_id="gray")
        b = Image(gray[..., [2, 0, 1]], source_id="gray")
        assert np.array_equal(depth.estimate_depth(a).disparity, depth.estimate_depth(b).disparity)

    def test_ground_plane_prior(self):
        image = Image(np.zeros((32, 32, 3), dtype=np.float32))
        dm = GroundPlaneDepth().estimate_depth(image)
        assert dm.disparity[-1].mean() > dm.disparity[0].mean()


class TestMatte:
    def test_no_unknown_region_returns_trimap(self, two_object_scene):
        image, square, _ = two_object_scene
        trimap = Mask(square.values, kind="alpha")
        alpha = MockMatteEstimator().estimate_matte(image, trimap)
        assert np.array_equal(alpha.values, trimap.values)

    def test_invalid_levels_rejected(self, two_object_scene):
        image, _, _ = two_object_scene
        bad = Mask(np.full(image.shape, 0.3, dtype=np.float32), kind="alpha")
        with pytest.raises(InputError):
            MockMatteEstimator().estimate_matte(image, bad)

    def test_all_unknown_in_range(self, two_object_scene):
        image, _, _ = two_object_scene
        trimap = Mask(np.full(image.shape, 0.5, dtype=np.float32), kind="alpha")
        alpha = MockMatteEstimator().estimate_matte(image, trimap)
        assert alpha.values.min() >= 0.0 and alpha.values.max() <= 1.0

    def test_known_regions_exact_and_band_fractional(self, two_object_scene):
        image, square, _ = two_object_scene
        from repose.preprocess.compositing import build_trimap

        trimap = build_trimap(square)
        alpha = MockMatteEstimator().estimate_matte(image, trimap)
        assert np.all(alpha.values[trimap.values == 1.0] == 1.0)
        assert np.all(alpha.values[trimap.values == 0.0] == 0.0)
        band = trimap.values == 0.5
        assert 0.05 < alpha.values[band].mean() < 0.95


class TestColorRegionBackends:
    def test_click_selects_color_region(self):
        image, square, _ = make_two_object_scene()
        ranked = ColorRegionSegmenter().segment(image, (10, 12))
        inter = np.logical_and(ranked[0][0].bool(), square.bool()).sum()
        assert inter / square.area > 0.95

    def test_color_name_scoring(self):
        image, square, circle = make_two_object_scene()
        scorer = ColorNameTextScorer()
        assert scorer.text_score(image, square, "the red one") > scorer.text_score(image, circle, "the red one")


class TestToyDenoiser:
    def test_zero_latent_finite_output_same_shape(self):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=0)
        latent = np.zeros((8, 8, 3), dtype=np.float32)
        cond = ConditionSequence(np.zeros((4, 16), dtype=np.float32))
        mask = binary_mask(np.ones((8, 8), dtype=bool))
        cond_img = Image(np.full((8, 8, 3), 0.5, dtype=np.float32))
        out = backend.denoise(latent, NoiseLevel(0.0), cond, mask, cond_img)
        assert out.shape == latent.shape
        assert np.isfinite(out).all()

    def test_deterministic_given_inputs(self, rng):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=0)
        latent = rng.standard_normal((10, 10, 3)).astype(np.float32)
        cond = ConditionSequence(rng.standard_normal((4, 16)).astype(np.float32))
        mask = binary_mask(rng.random((10, 10)) > 0.5)
        cond_img = Image(rng.random((10, 10, 3)).astype(np.float32))
        a = backend.denoise(latent, NoiseLevel(0.4), cond, mask, cond_img)
        b = backend.denoise(latent, NoiseLevel(0.4), cond, mask, cond_img)
        assert np.array_equal(a, b)

    def test_shape_mismatch_rejected(self):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=0)
        with pytest.raises(InputError):
            backend.denoise(
                np.zeros((8, 8, 3), dtype=np.float32),
                NoiseLevel(0.1),
                ConditionSequence(np.zeros((4, 16), dtype=np.float32)),
                binary_mask(np.ones((10, 10), dtype=bool)),
                Image(np.zeros((8, 8, 3), dtype=np.float32)),
            )

    def test_non_finite_rejected(self):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=0)
        bad = np.full((8, 8, 3), np.inf, dtype=np.float32)
        with pytest.raises(InputError):
            backend.denoise(
                bad,
                NoiseLevel(0.1),
                ConditionSequence(np.zeros((4, 16), dtype=np.float32)),
                binary_mask(np.ones((8, 8), dtype=bool)),
                Image(np.zeros((8, 8, 3), dtype=np.float32)),
            )

    def test_condition_width_mismatch_rejected(self):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=0)
        with pytest.raises(InputError):
            backend.denoise(
                np.zeros((8, 8, 3), dtype=np.float32),
                NoiseLevel(0.1),
                ConditionSequence(np.zeros((4, 8), dtype=np.float32)),
                binary_mask(np.ones((8, 8), dtype=bool)),
                Image(np.zeros((8, 8, 3), dtype=np.float32)),
            )

    def test_schedule_endpoints(self):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=0)
        assert backend.alpha_bar(0.0) == pytest.approx(1.0)
        assert backend.alpha_bar(1.0) == pytest.approx(0.0, abs=1e-12)

    def test_save_load_roundtrip(self, tmp_path):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=4)
        path = tmp_path / "toy.pt"
        backend.save(path)
        loaded = ToyDenoiser.load(path)
        assert loaded.fingerprint() == backend.fingerprint()

    def test_instruction_embedding_deterministic(self):
        backend = ToyDenoiser(cond_width=16, channels=8, seed=4)
        a = backend.encode_instruction("complete the subject", length=6)
        b = backend.encode_instruction("complete the subject", length=6)
        assert np.array_equal(a, b)
        assert a.shape == (6, 16)

    def test_constant_gray_training_fills_gray(self):
        # A backbone trained on constant mid-gray images should generate
        # mid-gray from pure noise over the full schedule.
        size = 8
        gray = Image(np.full((size, size, 3), 0.5, dtype=np.float32))
        full = binary_mask(np.ones((size, size), dtype=bool))
        corpus = [(gray, binary_mask(np.pad(np.ones((6, 6), bool), 1)))] * 8
        backend = ToyDenoiser(cond_width=16, channels=8, seed=2)
        pretrain_backbone(backend, corpus, steps=250, batch_size=8, lr=3e-3, seed=0)
        tokens = backend.encode_instruction("restore the image", length=4)
        cfg = SamplerConfig(steps=20, seed=1, working_resolution=size)
        out, _trace = masked_generate(gray, full, tokens, backend, cfg, task="remove")
        assert abs(out.pixels.mean() - 0.5) < 0.1


class TestPerceptualDistance:
    def test_identity_is_zero(self, rng):
        metric = RandomFeatureDistance()
        img = Image(rng.random((32, 32, 3)).astype(np.float32))
        assert metric.distance(img, img) == 0.0

    def test_symmetry(self, rng):
        metric = RandomFeatureDistance()
        a = Image(rng.random((32, 32, 3)).astype(np.float32))
        b = Image(rng.random((32, 32, 3)).astype(np.float32))
        assert metric.distance(a, b) == pytest.approx(metric.distance(b, a), abs=1e-9)

    def test_noise_monotonicity_over_seeded_trials(self):
        metric = RandomFeatureDistance()
        base_rng = np.random.default_rng(42)
        base = Image(base_rng.random((32, 32, 3)).astype(np.float32) * 0.8 + 0.1)
        wins = 0
        for trial in range(100):
            t_rng = np.random.default_rng(1000 + trial)
            noise = t_rng.standard_normal(base.pixels.shape)
            small = Image(np.clip(base.pixels + 0.01 * noise, 0, 1))
            large = Image(np.clip(base.pixels + 0.10 * noise, 0, 1))
            wins += metric.distance(base, large) > metric.distance(base, small)
        assert wins == 100

    def test_shape_mismatch_rejected(self, rng):
        metric = RandomFeatureDistance()
        a = Image(rng.random((32, 32, 3)).astype(np.float32))
        b = Image(rng.random((16, 16, 3)).astype(np.float32))
        with pytest.raises(InputError):
            metric.distance(a, b)


class TestRegistry:
    def test_unknown_name_is_startup_error(self):
        with pytest.raises(ConfigError):
            build_backends({"segmenter": {"name": "nonexistent"}})

    def test_default_bundle_builds(self):
        bundle = build_backends({})
        assert bundle.denoiser.condition_width == 32
        assert set(bundle.fingerprints()) == {"segmenter", "text", "depth", "matte", "denoiser", "perceptual"}

    def test_missing_weights_path_rejected(self):
        with pytest.raises(ConfigError):
            build_backends({"denoiser": {"name": "toy", "weights": "/nonexistent/weights.pt"}})

    def test_frozen_backend_referential_transparency(self, rng):
        bundle = build_backends({})
        img = Image(rng.random((16, 16, 3)).astype(np.float32), source_id="x")
        d1 = bundle.depth.estimate_depth(img).disparity
        d2 = bundle.depth.estimate_depth(img).disparity
        assert np.array_equal(d1, d2)
