"""Message layout: 1-byte mode tag, 4-byte little-endian payload length, float32 LE payload."""
from __future__ import annotations

import struct

import numpy as np

from cascade.config import Mode
from utils.errors import ContractError

HEADER = struct.Struct("<BI")
TAGS = {Mode.INFORMATIVE: 0, Mode.COMPRESSED: 1}
MODES = {tag: mode for mode, tag in TAGS.items()}


def encode_message(mode, code) -> bytes:
    payload = np.ascontiguousarray(np.asarray(code).reshape(-1), dtype="<f4").tobytes()
    return HEADER.pack(TAGS[Mode.parse(mode)], len(payload)) + payload


def decode_message(data: bytes) -> tuple[Mode, np.ndarray]:
    if len(data) < HEADER.size:
        raise ContractError(f"message too short: {len(data)} bytes")
    tag, length = HEADER.unpack_from(data)
    if tag not in MODES:
        raise ContractError(f"unknown mode tag {tag}")
    if len(data) - HEADER.size != length or length % 4:
        raise ContractError(f"payload length {length} does not match message of {len(data)} bytes")
    code = np.frombuffer(data, dtype="<f4", offset=HEADER.size).astype(np.float64)
    return MODES[tag], code
