"""Invisible output watermark: a fixed 256-bit signature embedded in the two
least-significant bits of the blue channel over the bottom-right 16×16
block, plus a metadata text chunk in the PNG. A detector verifies presence.
"""

from __future__ import annotations

import hashlib

import numpy as np

BLOCK = 16
MATCH_THRESHOLD = 0.95
METADATA_KEY = "repose-watermark"
METADATA_VALUE = "v1"

_signature_bytes = hashlib.sha256(b"repose-watermark-v1").digest()
SIGNATURE_BITS = np.unpackbits(np.frombuffer(_signature_bytes, dtype=np.uint8)).astype(np.uint8)


def apply_watermark(rgb_u8: np.ndarray) -> np.ndarray:
    """Write each signature bit into both LSBs of a blue-channel pixel."""
    out = rgb_u8.copy()
    h, w = out.shape[:2]
    if h < BLOCK or w < BLOCK:
        return out
    block = out[h - BLOCK : h, w - BLOCK : w, 2]
    bits = SIGNATURE_BITS.reshape(BLOCK, BLOCK)
    block &= np.uint8(0b11111100)
    block |= bits * np.uint8(0b11)
    out[h - BLOCK : h, w - BLOCK : w, 2] = block
    return out


def detect_watermark(rgb_u8: np.ndarray) -> bool:
    """Majority-decode both LSBs and compare against the signature."""
    h, w = rgb_u8.shape[:2]
    if h < BLOCK or w < BLOCK:
        return False
    block = rgb_u8[h - BLOCK : h, w - BLOCK : w, 2]
    low = block & 0b01
    high = (block & 0b10) >> 1
    decoded = ((low + high) >= 1).astype(np.uint8)
    agree = (low == high).astype(np.uint8)
    decoded = np.where(agree, low, decoded)
    match = (decoded == SIGNATURE_BITS.reshape(BLOCK, BLOCK)).mean()
    return bool(match >= MATCH_THRESHOLD)
