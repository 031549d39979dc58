"""Task executors: removal/completion inpainting, local harmonization, and
shadow routing. Adapter-scale discipline is enforced here: 0 for
remove/complete, 1 for harmonize."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ContractViolation, InputError
from ..inversion.datagen import translate_mask
from ..inversion.lora import LoraAdapter
from ..inversion.prompts import TaskPrompt
from ..types import Image, Mask, binary_mask
from .sampler import GenerationTrace, SamplerConfig, masked_generate

HARMONIZE_T_END = 0.5
HARMONIZE_T_START = 0.8
SHADOW_BAND_RADIUS = 3


@dataclass
class PromptSet:
    """The learned prompts a deployment carries, plus the harmonize adapter."""

    remove: TaskPrompt | None = None
    complete: TaskPrompt | None = None
    harmonize: TaskPrompt | None = None
    adapter: LoraAdapter | None = None

    def require(self, task: str) -> TaskPrompt:
        prompt = getattr(self, task, None)
        if prompt is None:
            raise ContractViolation(f"no {task!r} prompt loaded")
        if prompt.task != task:
            raise ContractViolation(f"prompt tagged {prompt.task!r} bound to the {task!r} slot")
        return prompt


def inpaint(
    image: Image, mask: Mask, prompt: TaskPrompt, backend, cfg: SamplerConfig, adapter=None
) -> tuple[Image, GenerationTrace]:
    """Prompt-conditioned masked regeneration; adapter forced to scale 0."""
    if prompt.task not in ("remove", "complete"):
        raise ContractViolation(f"inpaint expects a remove/complete prompt, got {prompt.task!r}")
    return masked_generate(
        image,
        mask,
        prompt.tokens,
        backend,
        cfg,
        task=prompt.task,
        adapter=adapter,
        adapter_scale=0.0,
        condition_full_image=False,
    )


def remove_subject(
    image: Image, void_mask: Mask, prompts: PromptSet, backend, cfg: SamplerConfig
) -> tuple[Image, GenerationTrace]:
    return inpaint(image, void_mask, prompts.require("remove"), backend, cfg, adapter=prompts.adapter)


def complete_subject(
    image: Image, completion_mask: Mask, prompts: PromptSet, backend, cfg: SamplerConfig
) -> tuple[Image, GenerationTrace]:
    return inpaint(image, completion_mask, prompts.require("complete"), backend, cfg, adapter=prompts.adapter)


def harmonize(
    image: Image, mask: Mask, prompt: TaskPrompt, adapter: LoraAdapter | None, backend, cfg: SamplerConfig
) -> tuple[Image, GenerationTrace]:
    """Appearance-only adjustment confined to the mask (+2 px feather).

    The condition channel carries the full image, the adapter rides at
    scale 1, and the schedule stops at the residual objective's fixed point
    rather than t=0.
    """
    if prompt.task != "harmonize":
        raise ContractViolation(f"harmonize expects a harmonize prompt, got {prompt.task!r}")
    if adapter is None:
        raise ContractViolation("harmonize requires a LoRA adapter")
    run_cfg = cfg
    if run_cfg.t_end <= 0.0:
        run_cfg = run_cfg.replace(t_end=HARMONIZE_T_END)
    if run_cfg.t_start > HARMONIZE_T_START:
        run_cfg = run_cfg.replace(t_start=HARMONIZE_T_START)
    return masked_generate(
        image,
        mask,
        prompt.tokens,
        backend,
        run_cfg,
        task="harmonize",
        adapter=adapter,
        adapter_scale=1.0,
        condition_full_image=True,
        feather_outward=True,
        anchor_to_image=True,
    )


def default_shadow_band(subject_mask: Mask) -> Mask:
    """Fallback completion mask for shadows: the dilation ring below the
    subject's vertical midpoint (where a ground shadow would sit)."""
    sel = subject_mask.bool().astype(np.uint8)
    ring = kernels.dilate(sel, SHADOW_BAND_RADIUS).astype(bool) & ~sel.astype(bool)
    cy = subject_mask.centroid()[1]
    gy = np.arange(sel.shape[0])[:, None]
    band = ring & (gy >= int(cy))
    return binary_mask(band)


def generate_shadow(
    image: Image,
    subject_mask: Mask,
    shadow_mode: str,
    shadow_region: Mask | None,
    prompts: PromptSet,
    backend,
    cfg: SamplerConfig,
    prior_shadow_mask: Mask | None = None,
    displacement: tuple[int, int] = (0, 0),
) -> tuple[Image, GenerationTrace]:
    """Route shadows: completion over the (translated) shadow footprint, or
    harmonization over a user-provided region."""
    if shadow_mode == "none":
        raise ContractViolation("generate_shadow must not be invoked with mode 'none'")
    if shadow_mode == "complete":
        if prior_shadow_mask is not None:
            moved = translate_mask(prior_shadow_mask.bool().astype(np.uint8), *displacement)
            if not moved.any():
                raise InputError("translated shadow footprint left the frame", field="shadow")
            mask = binary_mask(moved)
        else:
            mask = default_shadow_band(subject_mask)
            if mask.is_empty():
                raise InputError("no room below the subject for a shadow band", field="shadow")
        return complete_subject(image, mask, prompts, backend, cfg)
    if shadow_mode == "synthesize":
        if shadow_region is None or shadow_region.is_empty():
            raise InputError("shadow_mode 'synthesize' requires a shadow region", field="shadow_region")
        return harmonize(image, shadow_region, prompts.require("harmonize"), prompts.adapter, backend, cfg)
    raise InputError(f"unknown shadow mode {shadow_mode!r}", field="shadow_mode")


def replay_trace(
    trace: GenerationTrace, image: Image, mask: Mask, prompt: TaskPrompt, backend, adapter=None
) -> Image:
    """Re-run a recorded generation; bitwise-equal on the same backend."""
    from .sampler import digest_array

    mismatches = []
    if digest_array(image.pixels) != trace.image_digest:
        mismatches.append("image")
    if digest_array(mask.values) != trace.mask_digest:
        mismatches.append("mask")
    if digest_array(prompt.tokens) != trace.prompt_digest:
        mismatches.append("prompt")
    if backend.fingerprint() != trace.backend_fingerprint:
        mismatches.append("backend")
    if mismatches:
        raise ContractViolation(f"trace replay inputs differ: {', '.join(mismatches)}")
    out, _ = masked_generate(
        image,
        mask,
        prompt.tokens,
        backend,
        trace.config(),
        task=trace.task,
        adapter=adapter,
        adapter_scale=trace.adapter_scale,
        condition_full_image=trace.condition_full_image,
        feather_outward=trace.task == "harmonize",
        anchor_to_image=trace.anchored,
    )
    return out
