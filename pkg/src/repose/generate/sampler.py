"""Iterative masked generation: a deterministic clamped-estimate sampler
over the backend's noise schedule, with feathered re-compositing.

Pixels where the mask is zero are returned bitwise-equal to the input; the
generated region is blended through a linear feather ramp just inside the
mask boundary (harmonization feathers outward instead, see executors).
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np
from PIL import Image as PILImage

from .. import kernels
from ..errors import InputError
from ..types import ConditionSequence, Image, Mask, NoiseLevel, binary_mask

TOY_RES_RANGE = (8, 128)
ALLOWED_WORKING_RES = (256, 512)


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 24
    guidance: float = 1.0
    seed: int = 0
    working_resolution: int = 512
    t_start: float = 0.98
    t_end: float = 0.0
    feather: int = 2

    def __post_init__(self):
        if not (1 <= self.steps <= 1000):
            raise InputError(f"steps must lie in [1, 1000], got {self.steps}")
        if self.guidance < 0:
            raise InputError(f"guidance must be ≥ 0, got {self.guidance}")
        wr = self.working_resolution
        toy = TOY_RES_RANGE[0] <= wr <= TOY_RES_RANGE[1]
        if not toy and wr not in ALLOWED_WORKING_RES:
            raise InputError(
                f"working_resolution must be in {ALLOWED_WORKING_RES} or a toy size "
                f"{TOY_RES_RANGE[0]}–{TOY_RES_RANGE[1]}, got {wr}"
            )

    def replace(self, **kw) -> "SamplerConfig":
        data = {f: getattr(self, f) for f in ("steps", "guidance", "seed", "working_resolution", "t_start", "t_end", "feather")}
        data.update(kw)
        return SamplerConfig(**data)


@dataclass
class GenerationTrace:
    """Everything needed to replay a generation bitwise on the same backend."""

    task: str
    seed: int
    steps: int
    t_start: float
    t_end: float
    guidance: float
    feather: int
    working_resolution: int
    adapter_scale: float
    condition_full_image: bool
    anchored: bool
    backend_fingerprint: str
    image_digest: str
    mask_digest: str
    prompt_digest: str
    resampled: bool = False
    per_step_s: list[float] = field(default_factory=list)

    def config(self) -> SamplerConfig:
        return SamplerConfig(
            steps=self.steps,
            guidance=self.guidance,
            seed=self.seed,
            working_resolution=self.working_resolution,
            t_start=self.t_start,
            t_end=self.t_end,
            feather=self.feather,
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def digest_array(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()[:16]


def _resize_pixels(pixels: np.ndarray, size: tuple[int, int], resample) -> np.ndarray:
    pil = PILImage.fromarray((np.clip(pixels, 0.0, 1.0) * 255.0).round().astype(np.uint8))
    out = pil.resize((size[1], size[0]), resample)
    return np.asarray(out, dtype=np.float32) / 255.0


def denoising_loop(
    backend,
    cond: ConditionSequence,
    mask: Mask,
    cond_image: Image,
    cfg: SamplerConfig,
    trace: GenerationTrace,
    anchor: Image | None = None,
    null_tokens: np.ndarray | None = None,
) -> np.ndarray:
    """Run the schedule from t_start to t_end; returns the final clean-image
    estimate in [0,1]. Deterministic given (inputs, seed, backend).

    With `anchor` the walk starts from the noised anchor image rather than
    pure noise (the regime residual-objective harmonization is trained in).
    Guidance ≠ 1 extrapolates away from `null_tokens` (zeros by default)."""
    h, w = mask.shape
    rng = np.random.default_rng(cfg.seed)
    x = rng.standard_normal((h, w, 3)).astype(np.float32)
    if anchor is not None:
        ab0 = backend.alpha_bar(cfg.t_start)
        x = np.sqrt(ab0) * (2.0 * anchor.pixels - 1.0) + np.sqrt(1.0 - ab0) * x
        x = x.astype(np.float32)
    ts = np.linspace(cfg.t_start, cfg.t_end, cfg.steps + 1)
    zero_cond = None
    if cfg.guidance != 1.0:
        zero_cond = ConditionSequence(
            np.zeros_like(cond.tokens) if null_tokens is None else np.asarray(null_tokens, dtype=np.float32)
        )
    x0 = np.zeros_like(x)
    for k in range(cfg.steps):
        tic = time.perf_counter()
        t_k, t_n = float(ts[k]), float(ts[k + 1])
        eps_hat = backend.denoise(x, NoiseLevel(t_k), cond, mask, cond_image)
        if zero_cond is not None:
            eps_unc = backend.denoise(x, NoiseLevel(t_k), zero_cond, mask, cond_image)
            eps_hat = eps_unc + cfg.guidance * (eps_hat - eps_unc)
        ab_k, ab_n = backend.alpha_bar(t_k), backend.alpha_bar(t_n)
        x0 = (x - np.sqrt(1.0 - ab_k) * eps_hat) / max(np.sqrt(ab_k), 1e-3)
        x0 = np.clip(x0, -1.0, 1.0)
        x = np.sqrt(ab_n) * x0 + np.sqrt(1.0 - ab_n) * eps_hat
        trace.per_step_s.append(time.perf_counter() - tic)
    return ((x0.astype(np.float32) + 1.0) / 2.0).clip(0.0, 1.0)


def masked_generate(
    image: Image,
    mask: Mask,
    prompt_tokens: np.ndarray,
    backend,
    cfg: SamplerConfig,
    task: str,
    adapter=None,
    adapter_scale: float = 0.0,
    condition_full_image: bool = False,
    feather_outward: bool = False,
    anchor_to_image: bool = False,
    null_tokens: np.ndarray | None = None,
) -> tuple[Image, GenerationTrace]:
    """Shared executor body: resolution policy, sampling, re-compositing."""
    if mask.is_empty():
        raise InputError("mask must be non-empty", field="mask")
    if image.shape != mask.shape:
        raise InputError(f"mask shape {mask.shape} does not match image {image.shape}")
    cond = ConditionSequence(prompt_tokens)
    if cond.width != backend.condition_width:
        raise InputError(
            f"prompt width {cond.width} does not match backend width {backend.condition_width}"
        )
    runner = backend if adapter is None else backend.with_adapter(adapter, adapter_scale)

    trace = GenerationTrace(
        task=task,
        seed=cfg.seed,
        steps=cfg.steps,
        t_start=cfg.t_start,
        t_end=cfg.t_end,
        guidance=cfg.guidance,
        feather=cfg.feather,
        working_resolution=cfg.working_resolution,
        adapter_scale=adapter_scale,
        condition_full_image=condition_full_image,
        anchored=anchor_to_image,
        backend_fingerprint=backend.fingerprint(),
        image_digest=digest_array(image.pixels),
        mask_digest=digest_array(mask.values),
        prompt_digest=digest_array(np.asarray(prompt_tokens, dtype=np.float32)),
    )

    h, w = image.shape
    native_pixels = image.pixels
    native_mask = mask.bool().astype(np.uint8)
    if min(h, w) > cfg.working_resolution:
        trace.resampled = True
        s = cfg.working_resolution / min(h, w)
        lh, lw = max(8, int(round(h * s))), max(8, int(round(w * s)))
        low_pixels = _resize_pixels(native_pixels, (lh, lw), PILImage.BICUBIC)
        low_mask = np.asarray(
            PILImage.fromarray((native_mask * 255)).resize((lw, lh), PILImage.NEAREST)
        )
        low_mask = (low_mask > 127).astype(np.float32)
        if not low_mask.any():
            raise InputError("mask vanished at working resolution; enlarge the mask")
        run_image = Image(low_pixels, source_id=image.source_id)
        run_mask = Mask(low_mask, kind="binary")
    else:
        run_image = image
        run_mask = binary_mask(native_mask)

    cond_pixels = run_image.pixels if condition_full_image else run_image.pixels * (1.0 - run_mask.values[..., None])
    cond_image = Image(cond_pixels, source_id=image.source_id)
    generated = denoising_loop(
        runner, cond, run_mask, cond_image, cfg, trace,
        anchor=run_image if anchor_to_image else None,
        null_tokens=null_tokens,
    )

    if trace.resampled:
        generated = _resize_pixels(generated, (h, w), PILImage.BICUBIC)

    if feather_outward:
        alpha = kernels.outer_feather_ramp(native_mask, cfg.feather)
    else:
        alpha = kernels.feather_ramp(native_mask, cfg.feather)
    out = native_pixels.copy()
    sel = alpha > 0.0
    out[sel] = native_pixels[sel] * (1.0 - alpha[sel][:, None]) + generated[sel] * alpha[sel][:, None]
    return image.with_pixels(out), trace
