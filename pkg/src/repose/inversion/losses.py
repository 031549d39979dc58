"""Training objectives for prompt learning.

Inpainting form: E‖ε − ε_θ([x_t, m, x⊙(1−m)], t, z)‖²_F with ε ~ N(0,1)
and t ~ U(0,1); squared Frobenius norm summed per sample, averaged over
the batch. Harmonization form regresses ε + x − x* with the condition
channel carrying the full inharmonious image. The backbone stays frozen;
gradients reach only the prompt tokens (and adapter factors).

Noise draw order is part of the determinism contract: for each sample in
batch order, one uniform t then one standard-normal ε of image shape.
"""

from __future__ import annotations

import numpy as np
import torch

from ..errors import ContractViolation, InputError
from ..types import Image
from .lora import LoraAdapter
from .prompts import TaskPrompt


def draw_noise(batch, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample (t, ε) draws in a frozen, documented order."""
    ts, eps = [], []
    for sample in batch:
        ts.append(rng.uniform(0.0, 1.0))
        eps.append(rng.standard_normal(sample.image.pixels.shape))
    return np.asarray(ts), np.stack(eps)


def _nchw(arrs: list[np.ndarray], dtype: torch.dtype) -> torch.Tensor:
    return torch.from_numpy(np.stack(arrs).transpose(0, 3, 1, 2).copy()).to(dtype)


def _backend_dtype(backend) -> torch.dtype:
    return getattr(backend, "dtype", torch.float32)


def residual_loss(
    tokens: torch.Tensor,
    backend,
    batch,
    t_np: np.ndarray,
    eps_np: np.ndarray,
    adapter: LoraAdapter | None = None,
    adapter_scale: float = 0.0,
    harmonize: bool = False,
    sample_weights: np.ndarray | None = None,
) -> torch.Tensor:
    """Differentiable loss tensor shared by both objectives and the trainer.

    `sample_weights` (pretraining only) rescales each sample's squared
    residual; the spec objectives always run unweighted."""
    dtype = _backend_dtype(backend)
    x = _nchw([2.0 * s.image.pixels - 1.0 for s in batch], dtype)
    cond_img = _nchw([2.0 * s.unmasked_condition.pixels - 1.0 for s in batch], dtype)
    m = torch.from_numpy(np.stack([s.mask.values for s in batch])[:, None].copy()).to(dtype)
    eps = _nchw(list(eps_np), dtype)
    t = torch.from_numpy(t_np.copy()).to(dtype)
    ab = torch.tensor([backend.alpha_bar(float(tv)) for tv in t_np], dtype=dtype)
    ab = ab.view(-1, 1, 1, 1)
    x_t = torch.sqrt(ab) * x + torch.sqrt(1.0 - ab) * eps
    if harmonize:
        target_clean = _nchw([2.0 * s.target.pixels - 1.0 for s in batch], dtype)
        target = eps + (x - target_clean)
    else:
        target = eps
    cond = tokens.unsqueeze(0).expand(len(batch), -1, -1) if tokens.dim() == 2 else tokens
    pred = backend.predict_noise_t(x_t, t, cond, m, cond_img, adapter=adapter, adapter_scale=adapter_scale)
    per_sample = ((target - pred) ** 2).sum(dim=(1, 2, 3))
    if sample_weights is not None:
        per_sample = per_sample * torch.from_numpy(np.asarray(sample_weights)).to(dtype)
    return per_sample.mean()


def _tokens_tensor(prompt: TaskPrompt, backend, requires_grad: bool) -> torch.Tensor:
    return torch.tensor(prompt.tokens, dtype=_backend_dtype(backend), requires_grad=requires_grad)


def loss_inpaint(prompt: TaskPrompt, backend, batch, rng: np.random.Generator) -> float:
    """Scalar removal/completion objective on one batch."""
    if prompt.task not in ("remove", "complete"):
        raise ContractViolation(f"loss_inpaint expects a remove/complete prompt, got {prompt.task!r}")
    t_np, eps_np = draw_noise(batch, rng)
    with torch.no_grad():
        tokens = _tokens_tensor(prompt, backend, requires_grad=False)
        return float(residual_loss(tokens, backend, batch, t_np, eps_np))


def loss_and_grad_inpaint(
    prompt: TaskPrompt, backend, batch, rng: np.random.Generator
) -> tuple[float, np.ndarray]:
    """Loss plus the analytic gradient with respect to the prompt tokens."""
    if prompt.task not in ("remove", "complete"):
        raise ContractViolation(f"loss_inpaint expects a remove/complete prompt, got {prompt.task!r}")
    t_np, eps_np = draw_noise(batch, rng)
    tokens = _tokens_tensor(prompt, backend, requires_grad=True)
    loss = residual_loss(tokens, backend, batch, t_np, eps_np)
    loss.backward()
    return float(loss), tokens.grad.detach().cpu().numpy()


def harmonization_target(x, x_star, eps: np.ndarray) -> np.ndarray:
    """Regression target ε + x − x*; exactly ε when x equals x*."""
    xa = x.pixels if isinstance(x, Image) else np.asarray(x)
    xb = x_star.pixels if isinstance(x_star, Image) else np.asarray(x_star)
    eps = np.asarray(eps)
    if xa.shape != xb.shape or xa.shape != eps.shape:
        raise InputError(f"shape mismatch: x {xa.shape}, x* {xb.shape}, ε {eps.shape}")
    return eps + (xa - xb)


def loss_harmonize(
    prompt: TaskPrompt, adapter: LoraAdapter, backend, batch, rng: np.random.Generator
) -> float:
    """Scalar harmonization objective; adapter rides at scale 1 in training."""
    if prompt.task != "harmonize":
        raise ContractViolation(f"loss_harmonize expects a harmonize prompt, got {prompt.task!r}")
    if adapter is None:
        raise ContractViolation("loss_harmonize requires a LoRA adapter")
    t_np, eps_np = draw_noise(batch, rng)
    with torch.no_grad():
        tokens = _tokens_tensor(prompt, backend, requires_grad=False)
        return float(
            residual_loss(
                tokens, backend, batch, t_np, eps_np, adapter=adapter, adapter_scale=1.0, harmonize=True
            )
        )


def loss_and_grad_harmonize(
    prompt: TaskPrompt, adapter: LoraAdapter, backend, batch, rng: np.random.Generator
) -> tuple[float, np.ndarray, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Loss plus gradients for the prompt tokens and every adapter factor."""
    if prompt.task != "harmonize":
        raise ContractViolation(f"loss_harmonize expects a harmonize prompt, got {prompt.task!r}")
    t_np, eps_np = draw_noise(batch, rng)
    tokens = _tokens_tensor(prompt, backend, requires_grad=True)
    adapter.requires_grad_(True)
    for p in adapter.parameters():
        p.grad = None
    loss = residual_loss(
        tokens, backend, batch, t_np, eps_np, adapter=adapter, adapter_scale=1.0, harmonize=True
    )
    loss.backward()
    factor_grads = {
        name: (
            a.grad.detach().cpu().numpy() if a.grad is not None else np.zeros(a.shape),
            b.grad.detach().cpu().numpy() if b.grad is not None else np.zeros(b.shape),
        )
        for name, (a, b) in adapter.factors.items()
    }
    adapter.requires_grad_(False)
    return float(loss), tokens.grad.detach().cpu().numpy(), factor_grads
