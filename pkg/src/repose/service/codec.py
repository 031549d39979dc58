"""Wire codecs: PNG for lossless image round-trips (JPEG accepted on input
only), base64 transport, and uint8 quantization as the canonical pixel
precision so persisted sessions resume byte-identically."""

from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image as PILImage
from PIL.PngImagePlugin import PngInfo

from ..errors import InputError
from ..types import Image, Mask, binary_mask
from .watermark import METADATA_KEY, METADATA_VALUE, apply_watermark


def quantize(image: Image) -> Image:
    """Snap pixels to uint8 precision (the service's canonical form)."""
    u8 = (np.clip(image.pixels, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    return Image(u8.astype(np.float32) / 255.0, source_id=image.source_id)


def image_to_u8(image: Image) -> np.ndarray:
    return (np.clip(image.pixels, 0.0, 1.0) * 255.0).round().astype(np.uint8)


def encode_image_png(image: Image, watermark: bool = False) -> bytes:
    u8 = image_to_u8(image)
    info = None
    if watermark:
        u8 = apply_watermark(u8)
        info = PngInfo()
        info.add_text(METADATA_KEY, METADATA_VALUE)
    buf = io.BytesIO()
    PILImage.fromarray(u8).save(buf, format="PNG", pnginfo=info)
    return buf.getvalue()


def decode_image(data: bytes, source_id: str = "") -> Image:
    """PNG or JPEG input → float image."""
    try:
        with PILImage.open(io.BytesIO(data)) as pil:
            if pil.format not in ("PNG", "JPEG"):
                raise InputError(f"unsupported image format {pil.format!r}; send PNG or JPEG", field="image")
            arr = np.asarray(pil.convert("RGB"), dtype=np.float32) / 255.0
    except InputError:
        raise
    except Exception as exc:
        raise InputError(f"could not decode image: {exc}", field="image") from exc
    return Image(arr, source_id=source_id)


def image_to_b64(image: Image, watermark: bool = False) -> str:
    return base64.b64encode(encode_image_png(image, watermark=watermark)).decode()


def b64_to_image(data: str, source_id: str = "") -> Image:
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception as exc:
        raise InputError(f"invalid base64 image payload: {exc}", field="image") from exc
    return decode_image(raw, source_id=source_id)


def mask_to_b64(mask: Mask) -> str:
    u8 = (np.clip(mask.values, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(u8, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()


def b64_to_mask(data: str, kind: str = "binary") -> Mask:
    try:
        raw = base64.b64decode(data, validate=True)
        with PILImage.open(io.BytesIO(raw)) as pil:
            arr = np.asarray(pil.convert("L"), dtype=np.float32) / 255.0
    except Exception as exc:
        raise InputError(f"invalid mask payload: {exc}", field="mask") from exc
    if kind == "binary":
        return binary_mask(arr > 0.5)
    return Mask(arr, kind=kind)
