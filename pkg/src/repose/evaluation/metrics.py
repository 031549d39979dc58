"""Reference-formula image metrics and the report container.

PSNR is capped at 100 dB for identical images; SSIM uses a 7×7 uniform
window with K1=0.01, K2=0.03 on a unit data range. Implementations are
plain formula transcriptions so the test suite can check them against
brute-force loops to 1e-9.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from statistics import mean, pstdev

import numpy as np

from ..errors import InputError
from ..types import Image

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 7
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Published full-scale reference results, wired into reports as context
# only; desk-scale runs do not reproduce them.
FULL_SCALE_REFERENCE = {
    "reposition": {"lpips": 0.156},
    "inpaint": {"psnr": 21.98, "ssim": 0.87, "fid": 24.40, "lpips": 0.13},
    "outpaint": {"psnr": 16.00, "ssim": 0.73, "fid": 29.06, "lpips": 0.31},
    "harmonize": {"psnr": 31.88, "mse": 78.74},
}


def _pixels(img) -> np.ndarray:
    return img.pixels.astype(np.float64) if isinstance(img, Image) else np.asarray(img, dtype=np.float64)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InputError(f"image shapes disagree: {a.shape} vs {b.shape}")


def mse(a, b) -> float:
    pa, pb = _pixels(a), _pixels(b)
    _check_pair(pa, pb)
    return float(np.mean((pa - pb) ** 2))


def psnr(a, b, data_range: float = 1.0) -> float:
    err = mse(a, b)
    if err == 0.0:
        return PSNR_CAP_DB
    return float(min(10.0 * np.log10(data_range**2 / err), PSNR_CAP_DB))


def _uniform_windows(x: np.ndarray, win: int) -> np.ndarray:
    """All win×win window means via a cumulative-sum box filter (valid mode)."""
    c = np.cumsum(np.cumsum(x, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)), mode="constant")
    h, w = x.shape
    out = c[win : h + 1, win : w + 1] - c[win : h + 1, : w + 1 - win] - c[: h + 1 - win, win : w + 1] + c[: h + 1 - win, : w + 1 - win]
    return out / (win * win)


def ssim(a, b, data_range: float = 1.0, window: int = SSIM_WINDOW) -> float:
    """Mean structural similarity over valid uniform windows, averaged over
    channels for color inputs."""
    pa, pb = _pixels(a), _pixels(b)
    _check_pair(pa, pb)
    if pa.ndim == 2:
        pa, pb = pa[..., None], pb[..., None]
    if pa.shape[0] < window or pa.shape[1] < window:
        raise InputError(f"images must be at least {window}×{window} for SSIM")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    channel_scores = []
    for ch in range(pa.shape[2]):
        x, y = pa[..., ch], pb[..., ch]
        mu_x = _uniform_windows(x, window)
        mu_y = _uniform_windows(y, window)
        xx = _uniform_windows(x * x, window) - mu_x**2
        yy = _uniform_windows(y * y, window) - mu_y**2
        xy = _uniform_windows(x * y, window) - mu_x * mu_y
        score = ((2 * mu_x * mu_y + c1) * (2 * xy + c2)) / ((mu_x**2 + mu_y**2 + c1) * (xx + yy + c2))
        channel_scores.append(score.mean())
    return float(np.mean(channel_scores))


def fid_stub(*_args, **_kwargs) -> None:
    """Interface placeholder: distribution-level scoring needs sample counts
    far beyond desk scale, so reports carry None for FID."""
    return None


@dataclass
class MetricReport:
    """Per-case metric records plus recomputable aggregates."""

    task: str
    cases: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    metric_variants: dict[str, str] = field(default_factory=dict)
    config_fingerprint: str = ""
    reference_full_scale: dict = field(default_factory=dict)

    def add_case(self, case_id: str, values: dict) -> None:
        self.cases.append({"case": case_id, **values})

    def add_failure(self, case_id: str, reason: str) -> None:
        self.failures.append({"case": case_id, "reason": reason})

    def metric_names(self) -> list[str]:
        names: list[str] = []
        for case in self.cases:
            for key in case:
                if key != "case" and key not in names:
                    names.append(key)
        return names

    def aggregate(self) -> dict:
        out = {}
        for name in self.metric_names():
            values = [c[name] for c in self.cases if c.get(name) is not None]
            if values:
                out[name] = {
                    "mean": mean(values),
                    "stddev": pstdev(values) if len(values) > 1 else 0.0,
                    "count": len(values),
                }
        out["cases_scored"] = len(self.cases)
        out["cases_failed"] = len(self.failures)
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "task": self.task,
                "aggregate": self.aggregate(),
                "metric_variants": self.metric_variants,
                "config_fingerprint": self.config_fingerprint,
                "reference_full_scale": self.reference_full_scale,
                "failures": self.failures,
                "cases": self.cases,
            },
            indent=2,
            sort_keys=True,
        )

    def write(self, path) -> None:
        """One JSON record per case plus an aggregate header line."""
        from pathlib import Path

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            header = {
                "task": self.task,
                "aggregate": self.aggregate(),
                "metric_variants": self.metric_variants,
                "config_fingerprint": self.config_fingerprint,
                "reference_full_scale": self.reference_full_scale,
                "failures": self.failures,
            }
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for case in self.cases:
                fh.write(json.dumps(case, sort_keys=True) + "\n")


def config_fingerprint(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]
