"""Prompt checkpoint container: little-endian NPZ plus a JSON sidecar.

Holds {format_version, task tag, L, D, token matrix, optional adapter
factors and rank, training config, backend fingerprint}; tokens are stored
as 32-bit floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError
from .lora import LoraAdapter
from .prompts import TaskPrompt

FORMAT_VERSION = 1


@dataclass
class CheckpointBundle:
    prompt: TaskPrompt
    adapter: LoraAdapter | None
    config: dict
    backend_fingerprint: str
    format_version: int


def save_checkpoint(
    path,
    prompt: TaskPrompt,
    adapter: LoraAdapter | None = None,
    config: dict | None = None,
    backend_fingerprint: str = "",
) -> Path:
    """Write the checkpoint and its human-readable sidecar; returns the
    sidecar path."""
    path = Path(path)
    arrays: dict[str, np.ndarray] = {
        "format_version": np.asarray([FORMAT_VERSION], dtype="<i4"),
        "tokens": prompt.tokens.astype("<f4"),
        "task": np.frombuffer(prompt.task.encode(), dtype=np.uint8),
        "meta_json": np.frombuffer(
            json.dumps(
                {
                    "init_source": prompt.init_source,
                    "training_meta": prompt.training_meta,
                    "config": config or {},
                    "backend_fingerprint": backend_fingerprint,
                }
            ).encode(),
            dtype=np.uint8,
        ),
    }
    if adapter is not None:
        arrays["adapter_rank"] = np.asarray([adapter.rank], dtype="<i4")
        for key, arr in adapter.to_arrays().items():
            arrays[f"adapter/{key}"] = arr
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)

    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(
        json.dumps(
            {
                "format_version": FORMAT_VERSION,
                "task": prompt.task,
                "L": prompt.length,
                "D": prompt.width,
                "has_adapter": adapter is not None,
                "adapter_rank": adapter.rank if adapter is not None else None,
                "init_source": prompt.init_source,
                "training_meta": prompt.training_meta,
                "config": config or {},
                "backend_fingerprint": backend_fingerprint,
                "tokens_digest": prompt.digest(),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return sidecar


def load_checkpoint(path) -> CheckpointBundle:
    path = Path(path)
    if not path.exists():
        raise InputError(f"checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as blob:
        version = int(blob["format_version"][0])
        if version > FORMAT_VERSION:
            raise InputError(f"unsupported checkpoint format version {version}")
        task = bytes(blob["task"].tobytes()).decode()
        meta = json.loads(bytes(blob["meta_json"].tobytes()).decode())
        prompt = TaskPrompt(
            tokens=np.asarray(blob["tokens"], dtype=np.float32),
            task=task,
            init_source=meta.get("init_source", "checkpoint"),
            training_meta=meta.get("training_meta", {}),
        )
        adapter = None
        if "adapter_rank" in blob:
            rank = int(blob["adapter_rank"][0])
            arrays = {
                key[len("adapter/") :]: np.asarray(blob[key])
                for key in blob.files
                if key.startswith("adapter/")
            }
            adapter = LoraAdapter.from_arrays(arrays, rank=rank)
    return CheckpointBundle(
        prompt=prompt,
        adapter=adapter,
        config=meta.get("config", {}),
        backend_fingerprint=meta.get("backend_fingerprint", ""),
        format_version=version,
    )
