"""Evaluation runners: repositioning over paired datasets and the standard
inpaint/outpaint/harmonize benchmarks. Failed cases are excluded from
aggregates with the count disclosed."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..backends.base import PerceptualMetric
from ..errors import InputError
from ..types import Image, Mask
from .dataset import DatasetReport, RepositionCase
from .metrics import FULL_SCALE_REFERENCE, MetricReport, config_fingerprint, fid_stub, mse, psnr, ssim

BENCHMARK_TASKS = ("inpaint", "outpaint", "harmonize")


def evaluate_reposition(
    system: Callable[[RepositionCase], Image],
    dataset: DatasetReport,
    perceptual: PerceptualMetric,
) -> MetricReport:
    """Score `system` on every case (both directions of every pair) by
    perceptual distance to the paired ground truth."""
    report = MetricReport(
        task="reposition",
        metric_variants={"lpips": perceptual.variant},
        config_fingerprint=config_fingerprint({"perceptual": perceptual.fingerprint()}),
        reference_full_scale=FULL_SCALE_REFERENCE["reposition"],
    )
    for case in dataset.cases():
        try:
            output = system(case)
            if output.shape != case.target.shape:
                raise InputError(f"system output shape {output.shape} != target {case.target.shape}")
            report.add_case(case.case_id, {"lpips": perceptual.distance(output, case.target)})
        except Exception as exc:
            report.add_failure(case.case_id, str(exc))
    return report


def _is_border_band(mask: Mask) -> bool:
    """A border band touches the frame edge and leaves the center unmasked."""
    m = mask.bool()
    touches_border = bool(m[0, :].any() or m[-1, :].any() or m[:, 0].any() or m[:, -1].any())
    center = m[m.shape[0] // 4 : -m.shape[0] // 4 or None, m.shape[1] // 4 : -m.shape[1] // 4 or None]
    return touches_border and not center.all()


def benchmark(
    task: str,
    dataset: list[tuple[Image, Mask, Image]],
    system: Callable[[Image, Mask], Image],
    perceptual: PerceptualMetric | None = None,
) -> MetricReport:
    """Standard-format benchmark over (input, mask, ground truth) triples.

    Outpainting masks must be border bands; harmonization additionally
    reports MSE. FID remains an interface stub at desk scale."""
    if task not in BENCHMARK_TASKS:
        raise InputError(f"task must be one of {BENCHMARK_TASKS}", field="task")
    variants = {"psnr": "formula", "ssim": f"uniform-window-7"}
    if perceptual is not None:
        variants["lpips"] = perceptual.variant
    report = MetricReport(
        task=task,
        metric_variants=variants,
        config_fingerprint=config_fingerprint({"task": task, "n": len(dataset)}),
        reference_full_scale=FULL_SCALE_REFERENCE.get(task, {}),
    )
    for idx, (image, mask, truth) in enumerate(dataset):
        case_id = f"{task}-{idx:04d}"
        try:
            if task == "outpaint" and not _is_border_band(mask):
                raise InputError("outpainting masks must touch the image border")
            output = system(image, mask)
            values = {
                "psnr": psnr(output, truth),
                "ssim": ssim(output, truth),
                "fid": fid_stub(output, truth),
            }
            if perceptual is not None:
                values["lpips"] = perceptual.distance(output, truth)
            if task == "harmonize":
                values["mse"] = mse(output, truth)
            report.add_case(case_id, values)
        except Exception as exc:
            report.add_failure(case_id, str(exc))
    return report


def copy_input_system(case: RepositionCase) -> Image:
    """Baseline that returns the source unchanged."""
    return case.source


def oracle_system(case: RepositionCase) -> Image:
    """Upper bound that returns the ground-truth target."""
    return case.target
