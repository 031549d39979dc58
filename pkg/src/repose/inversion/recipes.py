"""Calibrated desk-scale training recipe for the toy stack.

Builds a steerable toy backbone plus the three task prompts (and the
harmonize adapter) from nothing but seeds, in a few CPU-minutes. Tests and
the demo CLI share it; REPOSE_TOY_CACHE can point at a directory to reuse
artifacts across sessions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from ..backends.toy import ToyDenoiser
from ..generate.executors import PromptSet
from .checkpoint import load_checkpoint, save_checkpoint
from .datagen import make_shapes_corpus
from .training import TASK_INSTRUCTIONS, TrainConfig, pretrain_backbone, train_prompt

TOY_SIZE = 32
TOY_CORPUS_N = 300
TOY_CORPUS_SEED = 7


@dataclass
class ToyRecipe:
    channels: int = 32
    cond_width: int = 32
    backbone_seed: int = 1
    pretrain_steps: int = 2400
    pretrain_lr: float = 2e-3
    batch_size: int = 16
    prompt_steps: int = 400
    prompt_lr: float = 2e-4
    harmonize_steps: int = 1200
    harmonize_lr: float = 1e-4
    harmonize_adapter_lr: float = 3e-3
    harmonize_rank: int = 8

    def prompt_config(self, task: str, seed: int) -> TrainConfig:
        if task == "harmonize":
            return TrainConfig(
                lr=self.harmonize_lr,
                weight_decay=0.01,
                batch_size=self.batch_size,
                steps=self.harmonize_steps,
                seed=seed,
                prompt_length=8,
                eval_every=50,
                init_instruction=TASK_INSTRUCTIONS["harmonize"],
                adapter_lr=self.harmonize_adapter_lr,
                lora_rank=self.harmonize_rank,
                dataset_id=f"shapes-{TOY_CORPUS_SEED}",
            )
        return TrainConfig(
            lr=self.prompt_lr,
            weight_decay=0.01,
            batch_size=self.batch_size,
            steps=self.prompt_steps,
            seed=seed,
            prompt_length=8,
            eval_every=50,
            init_instruction=TASK_INSTRUCTIONS[task],
            dataset_id=f"shapes-{TOY_CORPUS_SEED}",
        )


def toy_corpus(n: int = TOY_CORPUS_N, size: int = TOY_SIZE, seed: int = TOY_CORPUS_SEED):
    return make_shapes_corpus(n, size=size, seed=seed)


def build_toy_stack(
    cache_dir: str | Path | None = None,
    recipe: ToyRecipe | None = None,
) -> tuple[ToyDenoiser, PromptSet]:
    """Pretrain the backbone and the three task prompts (or load them from
    the cache directory when present and complete)."""
    recipe = recipe or ToyRecipe()
    cache = Path(cache_dir or os.environ.get("REPOSE_TOY_CACHE", "")) if (cache_dir or os.environ.get("REPOSE_TOY_CACHE")) else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
        paths = {
            "backbone": cache / "toy_backbone.pt",
            "remove": cache / "prompt_remove.npz",
            "complete": cache / "prompt_complete.npz",
            "harmonize": cache / "prompt_harmonize.npz",
        }
        if all(p.exists() for p in paths.values()):
            backend = ToyDenoiser.load(paths["backbone"])
            bundles = {task: load_checkpoint(paths[task]) for task in ("remove", "complete", "harmonize")}
            return backend, PromptSet(
                remove=bundles["remove"].prompt,
                complete=bundles["complete"].prompt,
                harmonize=bundles["harmonize"].prompt,
                adapter=bundles["harmonize"].adapter,
            )

    corpus = toy_corpus()
    backend = ToyDenoiser(cond_width=recipe.cond_width, channels=recipe.channels, seed=recipe.backbone_seed)
    pretrain_backbone(
        backend,
        corpus,
        steps=recipe.pretrain_steps,
        batch_size=recipe.batch_size,
        lr=recipe.pretrain_lr,
        seed=3,
        visible_condition_frac=0.25,
    )
    results = {
        "remove": train_prompt("remove", corpus, backend, recipe.prompt_config("remove", 11)),
        "complete": train_prompt("complete", corpus, backend, recipe.prompt_config("complete", 12)),
        "harmonize": train_prompt("harmonize", corpus, backend, recipe.prompt_config("harmonize", 13)),
    }
    prompts = PromptSet(
        remove=results["remove"].prompt,
        complete=results["complete"].prompt,
        harmonize=results["harmonize"].prompt,
        adapter=results["harmonize"].adapter,
    )
    if cache is not None:
        backend.save(paths["backbone"])
        for task, res in results.items():
            save_checkpoint(
                paths[task],
                res.prompt,
                adapter=res.adapter,
                config=res.config.to_dict(),
                backend_fingerprint=backend.fingerprint(),
            )
    return backend, prompts
