"""Self-contained toy denoiser: a small conv encoder/decoder with one
self-attention and one cross-attention block over the condition sequence.

It implements the same mask-conditioned denoising contract as a production
inpainting backend (input stack [noised image, mask, unmasked-region
condition], normalized noise level, L×D condition tokens) at toy sizes, so
every downstream module compiles against the interface alone. The noise
schedule is a backend property: alpha_bar(t) = cos²(π t / 2).
"""

from __future__ import annotations

import hashlib
import math

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..errors import InputError
from ..types import ConditionSequence, Image, Mask, NoiseLevel
from .base import Denoiser

SELF_ATTN_LAYERS = ("self_attn.q", "self_attn.k", "self_attn.v", "self_attn.out")
CROSS_ATTN_LAYERS = ("cross_attn.q", "cross_attn.k", "cross_attn.v", "cross_attn.out", "cond_film")


class ToyDenoiserNet(nn.Module):
    """Input stack: x_t, mask, condition image, t map, plus the analytic
    noise implied by the condition image, (x_t − √ᾱ·cond)/√(1−ᾱ) — where
    the condition is faithful, predicting noise reduces to passing that
    channel through, so capacity goes to the masked region."""

    ANALYTIC_CLAMP = 6.0

    def __init__(self, cond_width: int = 32, channels: int = 24, attn_width: int = 32):
        super().__init__()
        c = channels
        self.cond_width = cond_width
        self.channels = channels
        self.attn_width = attn_width
        self.conv_in = nn.Conv2d(11, c, 3, padding=1)
        self.down = nn.Conv2d(c, 2 * c, 3, stride=2, padding=1)
        self.ln_self = nn.LayerNorm(2 * c)
        self.self_q = nn.Linear(2 * c, 2 * c)
        self.self_k = nn.Linear(2 * c, 2 * c)
        self.self_v = nn.Linear(2 * c, 2 * c)
        self.self_out = nn.Linear(2 * c, 2 * c)
        self.ln_cross = nn.LayerNorm(2 * c)
        self.cross_q = nn.Linear(2 * c, attn_width)
        self.cross_k = nn.Linear(cond_width, attn_width)
        self.cross_v = nn.Linear(cond_width, attn_width)
        self.cross_out = nn.Linear(attn_width, 2 * c)
        # Pooled-condition channel modulation: per-pixel cross-attention alone
        # is too weak a channel for a global steering bit at this scale.
        self.cond_film = nn.Linear(cond_width, 4 * c)
        # Direct masked output bias from the pooled condition: gives the
        # instruction an unobstructed path to the generated region's color.
        self.cond_out = nn.Linear(cond_width, 3)
        self.mid = nn.Conv2d(2 * c, 2 * c, 3, padding=1)
        self.up = nn.Conv2d(2 * c, c, 3, padding=1)
        self.conv_out = nn.Conv2d(c, 3, 3, padding=1)

    def lora_layer_dims(self) -> dict[str, tuple[int, int]]:
        """Adapter targets: the attention blocks plus the pooled-condition
        modulation. In a production backbone self-attention alone carries
        the content pathway; this toy's self-attention atrophies during
        pretraining, so the conditioning projections are adapted too."""
        d = 2 * self.channels
        dims = {name: (d, d) for name in SELF_ATTN_LAYERS}
        dims["cross_attn.q"] = (d, self.attn_width)
        dims["cross_attn.k"] = (self.cond_width, self.attn_width)
        dims["cross_attn.v"] = (self.cond_width, self.attn_width)
        dims["cross_attn.out"] = (self.attn_width, d)
        dims["cond_film"] = (self.cond_width, 2 * d)
        return dims

    def _proj(self, name: str, linear: nn.Linear, x: torch.Tensor, adapter, scale: float) -> torch.Tensor:
        out = linear(x)
        if adapter is not None and scale != 0.0:
            corr = adapter.correction(name, x)
            if corr is not None:
                out = out + scale * corr
        return out

    def forward(
        self,
        x_t: torch.Tensor,
        t: torch.Tensor,
        cond: torch.Tensor,
        mask: torch.Tensor,
        cond_image: torch.Tensor,
        adapter=None,
        adapter_scale: float = 0.0,
    ) -> torch.Tensor:
        b, _, h, w = x_t.shape
        tmap = t.view(b, 1, 1, 1).expand(b, 1, h, w)
        ab = torch.cos(math.pi * t.view(b, 1, 1, 1) / 2.0) ** 2
        analytic = (x_t - torch.sqrt(ab) * cond_image) / torch.sqrt(torch.clamp(1.0 - ab, min=1e-4))
        # Gate the passthrough to pixels where the condition image carries
        # content (zeroed pixels are the masked-out inpaint convention).
        # Without the gate the channel hands back the training noise inside
        # inpaint masks and the net dodges content decisions entirely; with
        # it, a full-image condition (harmonization) legitimately flows
        # through everywhere.
        valid = (cond_image.amax(dim=1, keepdim=True) > -0.9995).to(x_t.dtype)
        analytic = analytic.clamp(-self.ANALYTIC_CLAMP, self.ANALYTIC_CLAMP) * valid
        x = torch.cat([x_t, mask, cond_image, tmap, analytic], dim=1)
        analytic_skip = analytic
        pad_h, pad_w = h % 2, w % 2
        if pad_h or pad_w:
            x = F.pad(x, (0, pad_w, 0, pad_h), mode="replicate")
        h1 = F.silu(self.conv_in(x))
        h2 = F.silu(self.down(h1))
        bb, c2, hb, wb = h2.shape
        tok = h2.flatten(2).transpose(1, 2)

        n = self.ln_self(tok)
        q = self._proj("self_attn.q", self.self_q, n, adapter, adapter_scale)
        k = self._proj("self_attn.k", self.self_k, n, adapter, adapter_scale)
        v = self._proj("self_attn.v", self.self_v, n, adapter, adapter_scale)
        att = torch.softmax(q @ k.transpose(1, 2) / math.sqrt(c2), dim=-1) @ v
        tok = tok + self._proj("self_attn.out", self.self_out, att, adapter, adapter_scale)

        # Condition pathways are gated by the (downsampled) mask: the prompt
        # steers what gets generated without disturbing reconstruction of
        # the visible region, mirroring how semantic conditioning leaves
        # unmasked content alone in production inpainting models.
        mask_padded = x[:, 3:4]
        gate = F.avg_pool2d(mask_padded, 2)
        gate_tok = gate.flatten(2).transpose(1, 2)

        n = self.ln_cross(tok)
        cq = self._proj("cross_attn.q", self.cross_q, n, adapter, adapter_scale)
        ck = self._proj("cross_attn.k", self.cross_k, cond, adapter, adapter_scale)
        cv = self._proj("cross_attn.v", self.cross_v, cond, adapter, adapter_scale)
        catt = torch.softmax(cq @ ck.transpose(1, 2) / math.sqrt(self.attn_width), dim=-1) @ cv
        tok = tok + gate_tok * self._proj("cross_attn.out", self.cross_out, catt, adapter, adapter_scale)

        h3 = tok.transpose(1, 2).reshape(bb, c2, hb, wb)
        gamma_beta = self._proj("cond_film", self.cond_film, cond.mean(dim=1), adapter, adapter_scale)
        gamma, beta = gamma_beta.chunk(2, dim=1)
        h3 = h3 + gate * (h3 * gamma[:, :, None, None] + beta[:, :, None, None])
        h4 = F.silu(self.mid(h3))
        h5 = F.silu(self.up(F.interpolate(h4, scale_factor=2, mode="nearest")) + h1)
        # The analytic estimate is the exact answer wherever the condition is
        # faithful; the network head only needs the residual (content inside
        # inpaint masks, corrections for harmonization).
        out = self.conv_out(h5)[:, :, :h, :w] + analytic_skip
        out = out + mask * self.cond_out(cond.mean(dim=1))[:, :, None, None]
        return out


class ToyDenoiser(Denoiser):
    """Denoiser backend wrapping ToyDenoiserNet; frozen after construction."""

    def __init__(
        self,
        cond_width: int = 32,
        channels: int = 24,
        attn_width: int = 32,
        max_condition_length: int = 77,
        seed: int = 0,
        dtype: torch.dtype = torch.float32,
        base_prompt: np.ndarray | None = None,
    ):
        self.condition_width = cond_width
        self.max_condition_length = max_condition_length
        self.seed = seed
        self.dtype = dtype
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            self.net = ToyDenoiserNet(cond_width, channels, attn_width)
        self.net.to(dtype)
        self.net.requires_grad_(False)
        self.net.eval()
        self.base_prompt = None if base_prompt is None else np.asarray(base_prompt, dtype=np.float32)
        self._adapter = None
        self._adapter_scale = 0.0

    # -- schedule -------------------------------------------------------

    def alpha_bar(self, t: float) -> float:
        return float(math.cos(math.pi * float(t) / 2.0) ** 2)

    def noise_to(self, x_model: np.ndarray, t: float, eps: np.ndarray) -> np.ndarray:
        ab = self.alpha_bar(t)
        return np.sqrt(ab) * x_model + np.sqrt(1.0 - ab) * eps

    # -- adapters -------------------------------------------------------

    def with_adapter(self, adapter, scale: float) -> "ToyDenoiser":
        view = object.__new__(ToyDenoiser)
        view.__dict__.update(self.__dict__)
        view._adapter = adapter
        view._adapter_scale = float(scale)
        return view

    @property
    def adapter_scale(self) -> float:
        return self._adapter_scale

    # -- inference ------------------------------------------------------

    def _to_t(self, arr: np.ndarray) -> torch.Tensor:
        return torch.from_numpy(np.ascontiguousarray(arr)).to(self.dtype)

    def predict_noise_t(
        self,
        x_t: torch.Tensor,
        t: torch.Tensor,
        cond: torch.Tensor,
        mask: torch.Tensor,
        cond_image: torch.Tensor,
        adapter=None,
        adapter_scale: float = 0.0,
    ) -> torch.Tensor:
        """Differentiable torch-space forward used by training and sampling."""
        return self.net(x_t, t, cond, mask, cond_image, adapter=adapter, adapter_scale=adapter_scale)

    def denoise(
        self,
        latent: np.ndarray,
        t: NoiseLevel,
        cond: ConditionSequence,
        mask: Mask,
        masked_image: Image,
    ) -> np.ndarray:
        latent = np.asarray(latent)
        self.check_denoise_inputs(latent, cond, mask, masked_image)
        if cond.length > self.max_condition_length:
            raise InputError(
                f"condition length {cond.length} exceeds backend maximum {self.max_condition_length}"
            )
        x_t = self._to_t(latent.transpose(2, 0, 1)[None])
        tt = torch.full((1,), float(t.t), dtype=self.dtype)
        ct = self._to_t(cond.tokens[None])
        mt = self._to_t(mask.values[None, None])
        it = self._to_t(self.to_model_space(masked_image.pixels).transpose(2, 0, 1)[None])
        with torch.no_grad():
            out = self.predict_noise_t(
                x_t, tt, ct, mt, it, adapter=self._adapter, adapter_scale=self._adapter_scale
            )
        return out[0].numpy().transpose(1, 2, 0).astype(latent.dtype, copy=False)

    def encode_instruction(self, text: str, length: int = 8) -> np.ndarray:
        """Deterministic instruction embedding: the toy stand-in for a text
        encoder. Same (text, backend seed) always yields the same tokens, so
        prompts can be initialized from task instruction strings."""
        digest = hashlib.sha256(text.encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little") ^ self.seed)
        return rng.normal(0.0, 0.5, size=(length, self.condition_width)).astype(np.float32)

    # -- identity and persistence ----------------------------------------

    def parameter_digest(self) -> str:
        h = hashlib.sha256()
        for name, p in sorted(self.net.state_dict().items()):
            h.update(name.encode())
            h.update(p.detach().cpu().numpy().astype("<f8").tobytes())
        return h.hexdigest()

    def fingerprint(self) -> str:
        arch = f"toy/c{self.net.channels}/a{self.net.attn_width}/d{self.condition_width}"
        return f"{arch}/{self.parameter_digest()[:16]}"

    def save(self, path) -> None:
        torch.save(
            {
                "format_version": 1,
                "cond_width": self.condition_width,
                "channels": self.net.channels,
                "attn_width": self.net.attn_width,
                "max_condition_length": self.max_condition_length,
                "seed": self.seed,
                "state": {k: v.detach().cpu() for k, v in self.net.state_dict().items()},
                "base_prompt": None if self.base_prompt is None else self.base_prompt,
            },
            path,
        )

    @classmethod
    def load(cls, path, dtype: torch.dtype = torch.float32) -> "ToyDenoiser":
        blob = torch.load(path, weights_only=False)
        model = cls(
            cond_width=blob["cond_width"],
            channels=blob["channels"],
            attn_width=blob["attn_width"],
            max_condition_length=blob["max_condition_length"],
            seed=blob["seed"],
            dtype=dtype,
            base_prompt=blob.get("base_prompt"),
        )
        model.net.load_state_dict({k: v.to(dtype) for k, v in blob["state"].items()})
        model.net.requires_grad_(False)
        return model
