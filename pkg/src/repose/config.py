"""Deployment configuration: strict YAML with every violation reported.

Unknown keys are rejected and referenced paths must exist at startup, so a
bad config fails loudly before any model state loads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .backends.registry import BackendBundle, build_backends
from .errors import ConfigError
from .generate.executors import PromptSet
from .generate.sampler import SamplerConfig
from .inversion.checkpoint import load_checkpoint

KNOWN_KEYS = {
    "backends": {"segmenter", "text", "depth", "matte", "denoiser", "perceptual"},
    "prompts": {"remove", "complete", "harmonize"},
    "sampler": {"steps", "guidance", "seed", "working_resolution", "t_start", "t_end", "feather"},
    "geometry": {"scale_clamp", "trimap_erode", "trimap_dilate"},
    "datasets": {"res"},
    "service": {"host", "port", "store_dir", "watermark"},
}

DEFAULTS = {
    "backends": {},
    "prompts": {},
    "sampler": {},
    "geometry": {"scale_clamp": [0.25, 4.0], "trimap_erode": 2, "trimap_dilate": 4},
    "datasets": {},
    "service": {"host": "127.0.0.1", "port": 8008, "store_dir": None, "watermark": False},
}


@dataclass
class Config:
    backends: dict = field(default_factory=dict)
    prompts: dict = field(default_factory=dict)
    sampler: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    datasets: dict = field(default_factory=dict)
    service: dict = field(default_factory=dict)
    source_path: str = ""

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(**self.sampler)

    def build_backends(self) -> BackendBundle:
        return build_backends(self.backends)

    def load_prompts(self) -> PromptSet:
        prompts = PromptSet()
        for task in ("remove", "complete", "harmonize"):
            path = self.prompts.get(task)
            if not path:
                continue
            bundle = load_checkpoint(path)
            if bundle.prompt.task != task:
                raise ConfigError(f"checkpoint {path} holds a {bundle.prompt.task!r} prompt, expected {task!r}")
            setattr(prompts, task, bundle.prompt)
            if task == "harmonize" and bundle.adapter is not None:
                prompts.adapter = bundle.adapter
        return prompts


def _validate(raw: dict, base_dir: Path) -> list[str]:
    violations = []
    for key in raw:
        if key not in KNOWN_KEYS:
            violations.append(f"unknown top-level key {key!r}")
    for section, known in KNOWN_KEYS.items():
        block = raw.get(section)
        if block is None:
            continue
        if not isinstance(block, dict):
            violations.append(f"section {section!r} must be a mapping")
            continue
        for key in block:
            if key not in known:
                violations.append(f"unknown key {section}.{key}")
    for task, path in (raw.get("prompts") or {}).items():
        if path and not (base_dir / path).exists() and not Path(path).exists():
            violations.append(f"prompts.{task} path does not exist: {path}")
    weights = (raw.get("backends") or {}).get("denoiser", {}).get("weights")
    if weights and weights != "mock" and not (base_dir / weights).exists() and not Path(weights).exists():
        violations.append(f"backends.denoiser.weights path does not exist: {weights}")
    res = (raw.get("datasets") or {}).get("res")
    if res and not (base_dir / res).exists() and not Path(res).exists():
        violations.append(f"datasets.res path does not exist: {res}")
    return violations


def _resolve(base_dir: Path, path: str | None) -> str | None:
    if not path:
        return path
    p = Path(path)
    if p.exists():
        return str(p)
    return str(base_dir / path)


def load_config(path) -> Config:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text()) or {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    violations = _validate(raw, path.parent)
    if violations:
        raise ConfigError(violations)
    merged = {}
    for section, defaults in DEFAULTS.items():
        merged[section] = {**defaults, **(raw.get(section) or {})}
    base = path.parent
    merged["prompts"] = {k: _resolve(base, v) for k, v in merged["prompts"].items()}
    if merged["backends"].get("denoiser", {}).get("weights") not in (None, "mock"):
        merged["backends"] = {**merged["backends"]}
        merged["backends"]["denoiser"] = {**merged["backends"]["denoiser"]}
        merged["backends"]["denoiser"]["weights"] = _resolve(
            base, merged["backends"]["denoiser"]["weights"]
        )
    if merged["datasets"].get("res"):
        merged["datasets"]["res"] = _resolve(base, merged["datasets"]["res"])
    if merged["service"].get("store_dir"):
        merged["service"]["store_dir"] = str(base / merged["service"]["store_dir"]) if not Path(merged["service"]["store_dir"]).is_absolute() else merged["service"]["store_dir"]
    return Config(**merged, source_path=str(path))
