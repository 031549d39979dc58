"""Prompt (and adapter) optimization against a frozen backbone, plus the
toy-backbone bootstrap used to stand in for a pretrained inpainting model."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .. import kernels
from ..errors import ContractViolation, ReposeError
from ..types import Image, Mask, binary_mask
from .datagen import (
    TrainingSample,
    make_harmonization_sample,
    random_blob_mask,
    sample_batch,
    translate_mask,
)
from .lora import LoraAdapter
from .losses import draw_noise, residual_loss
from .prompts import TaskPrompt, init_prompt


class TrainingDiverged(ReposeError):
    """Loss went non-finite; carries step diagnostics."""

    def __init__(self, step, loss, recent):
        super().__init__(f"non-finite loss {loss} at step {step}; recent losses: {recent}")
        self.step = step


# Instruction strings whose encoded embeddings initialize each task prompt
# and condition the toy backbone's pretraining. "restore" is pretraining-only:
# it builds the offset-correction circuit that harmonization training later
# bridges onto through the adapter; inference never invokes it directly.
TASK_INSTRUCTIONS = {
    "remove": "fill the region with surrounding background",
    "complete": "complete the subject inside the region",
    "harmonize": "blend the region with its surroundings",
    "neutral": "restore the image",
    "restore": "match the region to its surroundings",
}


@dataclass
class TrainConfig:
    """Optimization settings. Full-scale defaults follow the reference
    recipe (AdamW, lr 8e-5, weight decay 0.01, batch 32); toy runs override
    lr/steps/batch."""

    lr: float = 8.0e-5
    weight_decay: float = 0.01
    batch_size: int = 32
    steps: int = 9000
    seed: int = 0
    grad_clip: float = 1.0
    prompt_length: int = 8
    lora_rank: int = 4
    val_batches: int = 4
    eval_every: int = 50
    dataset_id: str = ""
    init_instruction: str | None = None
    adapter_lr: float | None = None  # defaults to 20×lr: zero-init factors need larger steps

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    prompt: TaskPrompt
    adapter: LoraAdapter | None
    log: list[dict] = field(default_factory=list)
    config: TrainConfig = field(default_factory=TrainConfig)
    best_val: float = float("inf")


def _dataset_fn(dataset, task: str):
    if callable(dataset):
        return dataset
    if isinstance(dataset, (list, tuple)) and dataset and isinstance(dataset[0], TrainingSample):
        pool = list(dataset)

        def from_pool(batch_size: int, rng: np.random.Generator):
            idx = rng.integers(len(pool), size=batch_size)
            return [pool[i] for i in idx]

        return from_pool
    if isinstance(dataset, (list, tuple)):  # (Image, Mask) corpus
        corpus = list(dataset)
        return lambda batch_size, rng: sample_batch(task, corpus, batch_size, rng)
    raise ContractViolation(f"unsupported dataset type {type(dataset).__name__}")


def train_prompt(
    task: str,
    dataset,
    backend,
    config: TrainConfig,
    init: TaskPrompt | None = None,
) -> TrainResult:
    """Decoupled-weight-decay descent on the prompt tokens (plus adapter
    factors for harmonize) with the backbone frozen; checkpoints the best
    state by held-out validation loss."""
    harmonize = task == "harmonize"
    draw = _dataset_fn(dataset, task)
    rng = np.random.default_rng(config.seed)
    dtype = getattr(backend, "dtype", torch.float32)

    if init is not None:
        prompt = init
        if prompt.task != task:
            raise ContractViolation(f"init prompt task {prompt.task!r} != requested {task!r}")
    elif config.init_instruction and hasattr(backend, "encode_instruction"):
        seed_tokens = backend.encode_instruction(config.init_instruction, length=config.prompt_length)
        prompt = init_prompt(*seed_tokens.shape, task=task, seed_embedding=seed_tokens)
    else:
        prompt = init_prompt(config.prompt_length, backend.condition_width, task=task, rng=config.seed)

    tokens = torch.tensor(prompt.tokens, dtype=dtype, requires_grad=True)
    adapter = None
    params = [tokens]
    param_groups = [{"params": [tokens], "lr": config.lr}]
    if harmonize:
        adapter = LoraAdapter.create(
            backend.net.lora_layer_dims(), rank=config.lora_rank, seed=config.seed, dtype=dtype
        ).requires_grad_(True)
        params += adapter.parameters()
        adapter_lr = config.adapter_lr if config.adapter_lr is not None else config.lr * 20.0
        param_groups.append({"params": adapter.parameters(), "lr": adapter_lr})

    # Frozen validation batches and noise so checkpoint selection is stable.
    val_rng = np.random.default_rng((config.seed, 0x5EED))
    val_set = [draw(config.batch_size, val_rng) for _ in range(config.val_batches)]
    val_noise = [draw_noise(b, val_rng) for b in val_set]

    def val_loss() -> float:
        with torch.no_grad():
            total = 0.0
            for b, (t_np, eps_np) in zip(val_set, val_noise):
                total += float(
                    residual_loss(
                        tokens, backend, b, t_np, eps_np,
                        adapter=adapter, adapter_scale=1.0 if harmonize else 0.0,
                        harmonize=harmonize,
                    )
                )
            return total / len(val_set)

    opt = torch.optim.AdamW(param_groups, lr=config.lr, weight_decay=config.weight_decay)
    log: list[dict] = []
    best = float("inf")
    best_tokens = tokens.detach().clone()
    best_adapter = adapter.detached() if adapter is not None else None

    for step in range(config.steps):
        batch = draw(config.batch_size, rng)
        t_np, eps_np = draw_noise(batch, rng)
        loss = residual_loss(
            tokens, backend, batch, t_np, eps_np,
            adapter=adapter, adapter_scale=1.0 if harmonize else 0.0, harmonize=harmonize,
        )
        if not torch.isfinite(loss):
            recent = [round(e["loss"], 4) for e in log[-5:]]
            raise TrainingDiverged(step, loss.item(), recent)
        opt.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(params, config.grad_clip)
        opt.step()
        entry = {"step": step, "loss": loss.item()}
        if step % config.eval_every == 0 or step == config.steps - 1:
            v = val_loss()
            entry["val_loss"] = v
            if v < best:
                best = v
                best_tokens = tokens.detach().clone()
                best_adapter = adapter.detached() if adapter is not None else None
        log.append(entry)

    meta = {
        "task": task,
        "steps": config.steps,
        "lr": config.lr,
        "dataset_id": config.dataset_id,
        "best_val_loss": best,
        "backend_fingerprint": backend.fingerprint(),
    }
    final_prompt = prompt.with_tokens(best_tokens.cpu().numpy().astype(np.float32), training_meta=meta)
    return TrainResult(prompt=final_prompt, adapter=best_adapter, log=log, config=config, best_val=best)


# -- toy backbone bootstrap ----------------------------------------------


def pretrain_backbone(
    backend,
    corpus: list[tuple[Image, Mask]],
    steps: int = 1200,
    batch_size: int = 16,
    lr: float = 2e-3,
    seed: int = 0,
    visible_condition_frac: float = 0.2,
    instruction_jitter: float = 0.05,
    prompt_length: int = 8,
) -> list[dict]:
    """Bootstrap the toy backbone as an instruction-conditioned inpainter.

    Like a production model trained with captions, the backbone must learn
    to be steered by its condition tokens, or downstream prompt learning
    has no leverage. Each pretraining sample is conditioned on the encoded
    instruction matching its mask provenance (background-content masks →
    the background-fill instruction, subject-portion masks → the
    completion instruction, random blobs → neutral), with small jitter so
    the condition manifold stays smooth. A fraction of samples carry the
    full image in the condition channel so the backbone also learns to
    reproduce visible content, the behavior local harmonization rides on.
    Leaves the backbone frozen afterwards.
    """
    rng = np.random.default_rng(seed)
    dtype = getattr(backend, "dtype", torch.float32)
    backend.net.requires_grad_(True)
    backend.net.train()
    embeddings = {
        key: backend.encode_instruction(text, length=prompt_length)
        for key, text in TASK_INSTRUCTIONS.items()
    }
    opt = torch.optim.AdamW(backend.net.parameters(), lr=lr, weight_decay=0.01)
    log: list[dict] = []

    def masked_sample(image: Image, mask: Mask) -> TrainingSample:
        return TrainingSample(
            image=image, mask=mask, target=image,
            unmasked_condition=Image(image.pixels * (1.0 - mask.values[..., None]), source_id=image.source_id),
        )

    def counterfactual_pair(image: Image, subject: Mask) -> tuple[TrainingSample, TrainingSample] | None:
        """Same context, same mask, opposite ground truth: the subject either
        continues under the mask or was never there. Only the instruction can
        tell the two apart, which is what makes the backbone steerable."""
        from .datagen import erase_region, estimate_flat_background, half_plane_portion

        src = subject.bool().astype(np.uint8)
        area = int(src.sum())
        for _ in range(10):
            portion = half_plane_portion(src, rng)
            if 0.1 * area <= portion.sum() <= 0.6 * area:
                # No dilation: the mask must lie inside the subject so the
                # two variants' ground truths are cleanly opposite; a ring
                # crossing the remainder would re-introduce bright truth
                # under the remove instruction.
                mask = binary_mask(portion)
                bg = estimate_flat_background(image, subject)
                truncated = erase_region(image, portion, bg)
                return masked_sample(image, mask), masked_sample(truncated, mask)
        return None

    def jitter(tokens: np.ndarray) -> np.ndarray:
        return (tokens + rng.normal(0.0, instruction_jitter, size=tokens.shape)).astype(np.float32)

    def draw_items() -> list[tuple[TrainingSample, np.ndarray, bool, float]]:
        """(sample, condition, shares-noise-with-previous, weight boost).
        Counterfactual pair members share one (t, ε) draw so the gradient
        difference between them isolates the instruction; copy members get
        extra weight because adapter-free harmonization must reproduce the
        input precisely."""
        items: list[tuple[TrainingSample, np.ndarray, bool, float]] = []
        while len(items) < batch_size:
            image, subject = corpus[int(rng.integers(len(corpus)))]
            style = rng.random()
            if style < 0.50 and len(items) + 2 <= batch_size:
                pair = counterfactual_pair(image, subject)
                if pair is not None:
                    complete_variant, remove_variant = pair
                    items.append((complete_variant, jitter(embeddings["complete"]), False, 1.0))
                    items.append((remove_variant, jitter(embeddings["remove"]), True, 1.0))
                    continue
            if style < 0.68 and len(items) + 2 <= batch_size:
                # Copy/restore counterfactual: identical shifted condition,
                # but the truth keeps the shift under the blend instruction
                # and drops it under the restore instruction. This is what
                # keeps an adapter-free harmonize call a faithful copy.
                region = subject if rng.random() < 0.5 else random_blob_mask(image.shape, rng)
                shifted = make_harmonization_sample(image, region, rng)
                keep = TrainingSample(
                    image=shifted.image, mask=region, target=shifted.image, unmasked_condition=shifted.image
                )
                undo = TrainingSample(
                    image=image, mask=region, target=image, unmasked_condition=shifted.image
                )
                items.append((keep, jitter(embeddings["harmonize"]), False, 3.0))
                items.append((undo, jitter(embeddings["restore"]), True, 1.0))
                continue
            if style < 0.80:  # background-content masks need the extra weight:
                # the local bright-remainder prior already favors completion.
                base = None
                for _ in range(10):
                    cand = sample_batch("remove", [(image, subject)], 1, rng)[0]
                    overlap = (cand.mask.bool() & subject.bool()).sum() / max(cand.mask.area, 1)
                    if overlap <= 0.1:
                        base = cand
                        break
                if base is None:  # crowded frame: fall back to the last draw
                    base = cand
                instruction = embeddings["remove"]
            elif style < 0.90:
                base = sample_batch("complete", [(image, subject)], 1, rng)[0]
                instruction = embeddings["complete"]
            else:
                base = masked_sample(image, random_blob_mask(image.shape, rng))
                instruction = embeddings["neutral"]
            if instruction is not embeddings["restore"] and rng.random() < visible_condition_frac:
                base = TrainingSample(
                    image=base.image, mask=base.mask, target=base.target, unmasked_condition=base.image
                )
                which = "harmonize" if rng.random() < 0.7 else "neutral"
                instruction = embeddings[which]
            items.append((base, jitter(instruction), False, 1.0))
        return items

    snr_weight_cap = 20.0
    for step in range(steps):
        items = draw_items()
        batch = [it[0] for it in items]
        cond = torch.from_numpy(np.stack([it[1] for it in items])).to(dtype)
        boosts = np.array([it[3] for it in items])
        t_np, eps_np = draw_noise(batch, rng)
        for i, (_, _, shares, _) in enumerate(items):
            if shares:
                t_np[i] = t_np[i - 1]
                eps_np[i] = eps_np[i - 1]
        # Equalize clean-image error across noise levels: the plain ε loss
        # underweights content decisions at high t, which is exactly where
        # sampling commits content and conditioning must act.
        ab = np.array([backend.alpha_bar(float(t)) for t in t_np])
        weights = np.minimum((1.0 - ab) / np.maximum(ab, 1e-3), snr_weight_cap) * boosts
        weights = weights / weights.mean()
        loss = residual_loss(cond, backend, batch, t_np, eps_np, sample_weights=weights)
        if not torch.isfinite(loss):
            raise TrainingDiverged(step, loss.item(), [round(e["loss"], 4) for e in log[-5:]])
        opt.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(backend.net.parameters(), 1.0)
        opt.step()
        log.append({"step": step, "loss": loss.item()})

    backend.net.requires_grad_(False)
    backend.net.eval()
    return log
