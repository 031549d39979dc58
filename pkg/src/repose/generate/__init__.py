from .executors import (
    PromptSet,
    complete_subject,
    default_shadow_band,
    generate_shadow,
    harmonize,
    inpaint,
    remove_subject,
    replay_trace,
)
from .sampler import GenerationTrace, SamplerConfig, digest_array, masked_generate

__all__ = [
    "GenerationTrace",
    "PromptSet",
    "SamplerConfig",
    "complete_subject",
    "default_shadow_band",
    "digest_array",
    "generate_shadow",
    "harmonize",
    "inpaint",
    "masked_generate",
    "remove_subject",
    "replay_trace",
]
