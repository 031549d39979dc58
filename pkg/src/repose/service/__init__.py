from .app import create_app, reposition_spec_schema
from .codec import (
    b64_to_image,
    b64_to_mask,
    decode_image,
    encode_image_png,
    image_to_b64,
    mask_to_b64,
    quantize,
)
from .store import SessionStore
from .watermark import apply_watermark, detect_watermark

__all__ = [
    "SessionStore",
    "apply_watermark",
    "b64_to_image",
    "b64_to_mask",
    "create_app",
    "decode_image",
    "detect_watermark",
    "encode_image_png",
    "image_to_b64",
    "mask_to_b64",
    "quantize",
    "reposition_spec_schema",
]
