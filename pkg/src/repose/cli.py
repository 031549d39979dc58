"""Command-line surface: reposition, train-prompt, eval-res, benchmark,
serve, validate-dataset. Exit code 0 on success; failures print a
machine-readable JSON error to stderr and exit nonzero."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import Config, load_config
from .errors import ReposeError
from .evaluation.dataset import load_image_file, load_mask_file, load_res
from .evaluation.demo import demo_dataset_path
from .evaluation.harness import benchmark as run_benchmark
from .evaluation.harness import copy_input_system, evaluate_reposition, oracle_system
from .generate.executors import PromptSet
from .inversion.checkpoint import save_checkpoint
from .inversion.recipes import toy_corpus
from .inversion.training import TASK_INSTRUCTIONS, TrainConfig, pretrain_backbone, train_prompt
from .preprocess.geometry import RepositionSpec
from .preprocess.selection import SubjectSelection, identify_subject
from .service.codec import encode_image_png
from .types import Image


def _fail(message: str, code: int = 1, **extra) -> int:
    print(json.dumps({"error": message, **extra}), file=sys.stderr)
    return code


def _parse_query(raw: str):
    if raw.startswith("text:"):
        return raw[len("text:") :]
    parts = [float(v) for v in raw.split(",")]
    if len(parts) in (2, 4):
        return tuple(parts)
    raise ReposeError(f"query must be 'x,y', 'x0,y0,x1,y1', or 'text:...', got {raw!r}")


def _save_image(image: Image, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_image_png(image))


def _dataset_path(raw: str) -> Path:
    if raw == "demo":
        return demo_dataset_path()
    return Path(raw)


def cmd_reposition(args) -> int:
    from .pipeline.reposition import reposition

    config = load_config(args.config)
    backends = config.build_backends()
    prompts = config.load_prompts()
    image = load_image_file(Path(args.image))
    selection = identify_subject(image, _parse_query(args.query), backends.segmenter, backends.text)
    dx, dy = (int(v) for v in args.displacement.split(","))
    spec = RepositionSpec(
        displacement=(dx, dy),
        preserve_occlusion=args.preserve_occlusion,
        preserve_perspective=args.preserve_perspective,
        use_matting=args.use_matting,
        completion_mask=load_mask_file(Path(args.completion_mask)) if args.completion_mask else None,
        apply_harmonization=args.harmonize,
        shadow_mode=args.shadow_mode,
        shadow_region=load_mask_file(Path(args.shadow_region)) if args.shadow_region else None,
        seed=args.seed,
    )
    cfg = config.sampler_config().replace(seed=args.seed)
    result = reposition(image, selection, spec, prompts, backends, cfg, debug_stages=bool(args.debug_dir))
    _save_image(result.output, Path(args.output))
    if args.debug_dir and result.stage_images:
        for name, stage_img in result.stage_images.items():
            _save_image(stage_img, Path(args.debug_dir) / f"{name}.png")
    print(json.dumps({"output": args.output, "plan": result.summary()["scale"], "traces": len(result.traces)}))
    return 0


def cmd_train_prompt(args) -> int:
    from .backends.toy import ToyDenoiser

    if args.dataset == "synthetic-shapes":
        corpus = toy_corpus(n=args.dataset_size, size=args.size, seed=args.dataset_seed)
    else:
        corpus = _load_mask_corpus(Path(args.dataset))
    weights = Path(args.backend_weights)
    if weights.exists():
        backend = ToyDenoiser.load(weights)
    elif args.init_backbone_steps > 0:
        backend = ToyDenoiser(cond_width=args.cond_width, channels=args.channels, seed=args.seed)
        pretrain_backbone(backend, corpus, steps=args.init_backbone_steps, batch_size=args.batch_size, seed=args.seed)
        weights.parent.mkdir(parents=True, exist_ok=True)
        backend.save(weights)
    else:
        return _fail(f"backend weights not found: {weights} (pass --init-backbone-steps to bootstrap)")
    config = TrainConfig(
        lr=args.lr,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        steps=args.steps,
        seed=args.seed,
        prompt_length=args.prompt_length,
        init_instruction=TASK_INSTRUCTIONS.get(args.task),
        adapter_lr=args.adapter_lr,
        lora_rank=args.lora_rank,
        dataset_id=args.dataset,
    )
    result = train_prompt(args.task, corpus, backend, config)
    sidecar = save_checkpoint(
        Path(args.out),
        result.prompt,
        adapter=result.adapter,
        config=config.to_dict(),
        backend_fingerprint=backend.fingerprint(),
    )
    print(
        json.dumps(
            {
                "checkpoint": args.out,
                "sidecar": str(sidecar),
                "best_val_loss": result.best_val,
                "final_loss": result.log[-1]["loss"],
            }
        )
    )
    return 0


def _load_mask_corpus(root: Path):
    """Directory corpus: images/*.png with matching masks/*.png."""
    images_dir, masks_dir = root / "images", root / "masks"
    if not images_dir.is_dir() or not masks_dir.is_dir():
        raise ReposeError(f"dataset {root} must contain images/ and masks/")
    corpus = []
    for img_path in sorted(images_dir.glob("*.png")):
        mask_path = masks_dir / img_path.name
        if mask_path.exists():
            corpus.append((load_image_file(img_path), load_mask_file(mask_path)))
    if not corpus:
        raise ReposeError(f"no (image, mask) pairs found under {root}")
    return corpus


def _build_pipeline_system(config: Config):
    from .pipeline.reposition import reposition

    backends = config.build_backends()
    prompts = config.load_prompts()
    cfg = config.sampler_config()

    def system(case):
        selection = SubjectSelection(
            mask=case.source_mask, bbox=case.source_mask.bbox(), query="annotation", confidence=1.0
        )
        spec = RepositionSpec(displacement=case.direction, seed=cfg.seed)
        return reposition(case.source, selection, spec, prompts, backends, cfg).output

    return system


def cmd_eval_res(args) -> int:
    dataset = load_res(_dataset_path(args.dataset))
    if not dataset.pairs:
        return _fail(f"no valid pairs in {args.dataset}", errors=dataset.errors)
    if args.system == "oracle":
        system = oracle_system
        perceptual_cfg = {"name": "randconv"}
        config = None
    elif args.system == "copy-input":
        system = copy_input_system
        perceptual_cfg = {"name": "randconv"}
        config = None
    else:
        config = load_config(args.config)
        system = _build_pipeline_system(config)
        perceptual_cfg = config.backends.get("perceptual", {"name": "randconv"})
    from .backends.registry import PERCEPTUAL_METRICS

    perceptual = PERCEPTUAL_METRICS[perceptual_cfg.get("name", "randconv")]()
    report = evaluate_reposition(system, dataset, perceptual)
    report.write(Path(args.report))
    agg = report.aggregate()
    print(f"cases: {agg['cases_scored']} scored, {agg['cases_failed']} failed")
    for name, stats in agg.items():
        if isinstance(stats, dict):
            print(f"  {name}: mean {stats['mean']:.6f} ± {stats['stddev']:.6f} (n={stats['count']})")
    print(f"report: {args.report}")
    return 0


def cmd_benchmark(args) -> int:
    root = Path(args.dataset)
    triples = []
    for img_path in sorted((root / "inputs").glob("*.png")):
        mask_path = root / "masks" / img_path.name
        truth_path = root / "truths" / img_path.name
        if mask_path.exists() and truth_path.exists():
            triples.append(
                (load_image_file(img_path), load_mask_file(mask_path), load_image_file(truth_path))
            )
    if not triples:
        return _fail(f"no (inputs, masks, truths) triples under {root}")
    if args.system == "identity":
        system = lambda image, mask: image  # noqa: E731 - trivial baseline
        perceptual = None
    else:
        config = load_config(args.config)
        backends = config.build_backends()
        prompts = config.load_prompts()
        cfg = config.sampler_config()
        from .generate.executors import complete_subject, harmonize, remove_subject

        def system(image, mask):
            if args.task == "harmonize":
                return harmonize(image, mask, prompts.require("harmonize"), prompts.adapter, backends.denoiser, cfg)[0]
            if args.task == "outpaint":
                return complete_subject(image, mask, prompts, backends.denoiser, cfg)[0]
            return remove_subject(image, mask, prompts, backends.denoiser, cfg)[0]

        perceptual = backends.perceptual
    report = run_benchmark(args.task, triples, system, perceptual=perceptual)
    report.write(Path(args.report))
    agg = report.aggregate()
    print(f"task: {args.task}; cases: {agg['cases_scored']} scored, {agg['cases_failed']} failed")
    for name in ("psnr", "ssim", "mse", "lpips"):
        if name in agg:
            print(f"  {name}: mean {agg[name]['mean']:.4f} ± {agg[name]['stddev']:.4f}")
    print(f"report: {args.report}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.service["host"], port=int(config.service["port"]), log_level="warning")
    return 0


def cmd_validate_dataset(args) -> int:
    report = load_res(_dataset_path(args.dataset))
    cases = len(report.cases())
    print(f"{len(report.pairs)} pairs, {cases} cases")
    for err in report.errors:
        print(f"  invalid pair {err['pair']}: {err['error']}")
    return 0 if not report.errors else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repose", description="Subject repositioning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reposition", help="Reposition a subject in one image")
    p.add_argument("--config", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--query", required=True, help="'x,y', 'x0,y0,x1,y1', or 'text:...'")
    p.add_argument("--displacement", default="0,0", help="dx,dy in pixels")
    p.add_argument("--preserve-occlusion", action="store_true")
    p.add_argument("--preserve-perspective", action="store_true")
    p.add_argument("--use-matting", action="store_true")
    p.add_argument("--harmonize", action="store_true")
    p.add_argument("--shadow-mode", default="none", choices=["none", "complete", "synthesize"])
    p.add_argument("--shadow-region", default=None)
    p.add_argument("--completion-mask", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--debug-dir", default=None)
    p.set_defaults(func=cmd_reposition)

    p = sub.add_parser("train-prompt", help="Learn a task prompt against a frozen backbone")
    p.add_argument("--task", required=True, choices=["remove", "complete", "harmonize"])
    p.add_argument("--dataset", default="synthetic-shapes", help="'synthetic-shapes' or a dataset directory")
    p.add_argument("--dataset-size", type=int, default=300)
    p.add_argument("--dataset-seed", type=int, default=7)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--backend-weights", required=True)
    p.add_argument("--init-backbone-steps", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--adapter-lr", type=float, default=None)
    p.add_argument("--lora-rank", type=int, default=4)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--prompt-length", type=int, default=8)
    p.add_argument("--cond-width", type=int, default=32)
    p.add_argument("--channels", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_prompt)

    p = sub.add_parser("eval-res", help="Evaluate repositioning on a paired dataset")
    p.add_argument("--dataset", required=True, help="dataset directory, manifest file, or 'demo'")
    p.add_argument("--report", required=True)
    p.add_argument("--system", default="pipeline", choices=["pipeline", "oracle", "copy-input"])
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_eval_res)

    p = sub.add_parser("benchmark", help="Run a standard benchmark task")
    p.add_argument("--task", required=True, choices=["inpaint", "outpaint", "harmonize"])
    p.add_argument("--dataset", required=True, help="directory with inputs/ masks/ truths/")
    p.add_argument("--report", required=True)
    p.add_argument("--system", default="pipeline", choices=["pipeline", "identity"])
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("serve", help="Run the HTTP session API")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate-dataset", help="Validate a paired dataset's layout")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_validate_dataset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("eval-res", "benchmark") and args.system == "pipeline" and not args.config:
        return _fail("--config is required when --system pipeline")
    try:
        return args.func(args)
    except ReposeError as exc:
        extra = {"violations": exc.violations} if hasattr(exc, "violations") else {}
        return _fail(str(exc), **extra)


if __name__ == "__main__":
    sys.exit(main())
