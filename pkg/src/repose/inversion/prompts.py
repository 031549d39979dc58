"""Learnable per-task condition sequences that replace text-encoder output."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation, InputError
from ..types import ConditionSequence

TASKS = ("remove", "complete", "harmonize")


@dataclass(frozen=True)
class TaskPrompt:
    """L×D learned token matrix for one task tag; the tag is immutable."""

    tokens: np.ndarray
    task: str
    init_source: str = "gaussian"
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ContractViolation(f"unknown task tag {self.task!r}; expected one of {TASKS}")
        tok = np.ascontiguousarray(np.asarray(self.tokens, dtype=np.float32))
        object.__setattr__(self, "tokens", tok)
        if tok.ndim != 2 or tok.shape[0] < 1 or tok.shape[1] < 1:
            raise InputError(f"prompt tokens must be L×D, got shape {tok.shape}")
        if not np.isfinite(tok).all():
            raise InputError("prompt tokens contain non-finite values")

    @property
    def length(self) -> int:
        return self.tokens.shape[0]

    @property
    def width(self) -> int:
        return self.tokens.shape[1]

    def condition(self) -> ConditionSequence:
        return ConditionSequence(self.tokens)

    def with_tokens(self, tokens: np.ndarray, training_meta: dict | None = None) -> "TaskPrompt":
        return TaskPrompt(
            tokens=tokens,
            task=self.task,
            init_source=self.init_source,
            training_meta=self.training_meta if training_meta is None else training_meta,
        )

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(self.tokens.astype("<f4").tobytes()).hexdigest()


def init_prompt(
    length: int,
    width: int,
    task: str,
    seed_embedding: np.ndarray | None = None,
    rng: np.random.Generator | int | None = None,
) -> TaskPrompt:
    """Fresh prompt: the seed embedding verbatim when given (e.g. an encoded
    instruction string), otherwise i.i.d. Gaussian(0, 0.02) tokens."""
    if length < 1 or width < 1:
        raise InputError(f"prompt dims must be positive, got L={length}, D={width}")
    if seed_embedding is not None:
        seed = np.asarray(seed_embedding, dtype=np.float32)
        if seed.shape != (length, width):
            raise InputError(
                f"seed embedding shape {seed.shape} does not match requested ({length}, {width})"
            )
        return TaskPrompt(tokens=seed, task=task, init_source="seed-embedding")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    tokens = rng.normal(0.0, 0.02, size=(length, width)).astype(np.float32)
    return TaskPrompt(tokens=tokens, task=task, init_source="gaussian")
