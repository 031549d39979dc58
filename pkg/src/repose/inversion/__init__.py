from .checkpoint import CheckpointBundle, load_checkpoint, save_checkpoint
from .datagen import (
    TrainingSample,
    gen_completion_sample,
    gen_removal_sample,
    half_plane_portion,
    make_harmonization_sample,
    make_shapes_corpus,
    make_shapes_image,
    sample_batch,
    translate_mask,
)
from .lora import LoraAdapter, apply_lora
from .losses import (
    draw_noise,
    harmonization_target,
    loss_and_grad_harmonize,
    loss_and_grad_inpaint,
    loss_harmonize,
    loss_inpaint,
    residual_loss,
)
from .prompts import TASKS, TaskPrompt, init_prompt
from .training import TrainConfig, TrainResult, TrainingDiverged, pretrain_backbone, train_prompt

__all__ = [
    "CheckpointBundle",
    "LoraAdapter",
    "TASKS",
    "TaskPrompt",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "TrainingSample",
    "apply_lora",
    "draw_noise",
    "gen_completion_sample",
    "gen_removal_sample",
    "half_plane_portion",
    "harmonization_target",
    "init_prompt",
    "load_checkpoint",
    "loss_and_grad_harmonize",
    "loss_and_grad_inpaint",
    "loss_harmonize",
    "loss_inpaint",
    "make_harmonization_sample",
    "make_shapes_corpus",
    "make_shapes_image",
    "pretrain_backbone",
    "residual_loss",
    "sample_batch",
    "save_checkpoint",
    "train_prompt",
    "translate_mask",
]
