"""Low-rank adapter: additive per-layer correction base(x) + c·(x·A·B).

With scale c = 0 the adapter is a mathematical no-op; remove/complete
generation runs at c = 0 and harmonization at c = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import ContractViolation


def apply_lora(base_out, lora_out, c: float):
    """Elementwise base_out + c·lora_out; c = 0 returns base_out untouched."""
    if base_out.shape != lora_out.shape:
        raise ContractViolation(f"lora output shape {lora_out.shape} != base {base_out.shape}")
    if c == 0.0:
        return base_out
    return base_out + c * lora_out


@dataclass
class LoraAdapter:
    """Per-target-layer factor pairs (A: in×r, B: r×out) with runtime scale."""

    factors: dict[str, tuple[torch.Tensor, torch.Tensor]]
    rank: int
    scale: float = 1.0
    init_seed: int = field(default=0)

    def __post_init__(self):
        if self.rank < 1:
            raise ContractViolation(f"lora rank must be ≥ 1, got {self.rank}")

    @classmethod
    def create(
        cls,
        layer_dims: dict[str, tuple[int, int]],
        rank: int = 4,
        seed: int = 0,
        dtype: torch.dtype = torch.float32,
    ) -> "LoraAdapter":
        """Gaussian A (σ=0.02), zero B: the adapter starts as an exact no-op."""
        gen = torch.Generator().manual_seed(seed)
        factors = {}
        for name, (d_in, d_out) in layer_dims.items():
            a = torch.randn(d_in, rank, generator=gen, dtype=dtype) * 0.02
            b = torch.zeros(rank, d_out, dtype=dtype)
            factors[name] = (a, b)
        return cls(factors=factors, rank=rank, init_seed=seed)

    def correction(self, name: str, x: torch.Tensor) -> torch.Tensor | None:
        pair = self.factors.get(name)
        if pair is None:
            return None
        a, b = pair
        return (x @ a) @ b

    def parameters(self) -> list[torch.Tensor]:
        out: list[torch.Tensor] = []
        for a, b in self.factors.values():
            out.extend((a, b))
        return out

    def requires_grad_(self, flag: bool) -> "LoraAdapter":
        for p in self.parameters():
            p.requires_grad_(flag)
        return self

    def detached(self) -> "LoraAdapter":
        return LoraAdapter(
            factors={k: (a.detach().clone(), b.detach().clone()) for k, (a, b) in self.factors.items()},
            rank=self.rank,
            scale=self.scale,
            init_seed=self.init_seed,
        )

    def to_arrays(self) -> dict[str, np.ndarray]:
        """Flat little-endian float32 arrays for checkpointing."""
        out: dict[str, np.ndarray] = {}
        for name, (a, b) in self.factors.items():
            out[f"{name}.A"] = a.detach().cpu().numpy().astype("<f4")
            out[f"{name}.B"] = b.detach().cpu().numpy().astype("<f4")
        return out

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray], rank: int, scale: float = 1.0) -> "LoraAdapter":
        names = sorted({k.rsplit(".", 1)[0] for k in arrays})
        factors = {}
        for name in names:
            a = torch.from_numpy(np.ascontiguousarray(arrays[f"{name}.A"], dtype=np.float32))
            b = torch.from_numpy(np.ascontiguousarray(arrays[f"{name}.B"], dtype=np.float32))
            factors[name] = (a, b)
        return cls(factors=factors, rank=rank, scale=scale)
