from .dataset import DatasetReport, RepositionCase, ResPair, load_image_file, load_mask_file, load_res
from .demo import demo_dataset_path, make_demo_dataset
from .harness import benchmark, copy_input_system, evaluate_reposition, oracle_system
from .metrics import (
    FULL_SCALE_REFERENCE,
    MetricReport,
    config_fingerprint,
    fid_stub,
    mse,
    psnr,
    ssim,
)

__all__ = [
    "DatasetReport",
    "FULL_SCALE_REFERENCE",
    "MetricReport",
    "RepositionCase",
    "ResPair",
    "benchmark",
    "config_fingerprint",
    "copy_input_system",
    "demo_dataset_path",
    "evaluate_reposition",
    "fid_stub",
    "load_image_file",
    "load_mask_file",
    "load_res",
    "make_demo_dataset",
    "mse",
    "oracle_system",
    "psnr",
    "ssim",
]
