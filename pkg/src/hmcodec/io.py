"""Bit-exact interchange formats: binary heatmap tensors and keypoint JSON.

The binary layout is a 20-byte header (magic "HMAP", version, dtype tag,
two reserved zero bytes, then K/H/W as little-endian u32) followed by a
joint-major, row-major float32 little-endian payload. Keypoint documents
are JSON objects with keys "lambda", "keypoints" and optionally
"fallbacks", in that order.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Heatmap
from .errors import FormatError, InvalidInput

MAGIC = b"HMAP"
VERSION = 1
DTYPE_F32LE = 0

_HEADER = struct.Struct("<4sBBHIII")
HEADER_SIZE = _HEADER.size  # 20 bytes


@dataclass(frozen=True)
class HeatmapFileHeader:
    """Parsed header of a heatmap tensor file."""

    count: int
    height: int
    width: int
    magic: bytes = MAGIC
    version: int = VERSION
    dtype: int = DTYPE_F32LE

    def pack(self) -> bytes:
        return _HEADER.pack(self.magic, self.version, self.dtype, 0, self.count, self.height, self.width)

    @classmethod
    def unpack(cls, data: bytes) -> "HeatmapFileHeader":
        if len(data) < 4 or data[:4] != MAGIC:
            raise FormatError("magic", f"expected {MAGIC!r}, got {bytes(data[:4])!r}")
        if len(data) < HEADER_SIZE:
            raise FormatError("length", f"header truncated at {len(data)} bytes")
        magic, version, dtype, reserved, count, height, width = _HEADER.unpack_from(data)
        if version != VERSION:
            raise FormatError("version", f"expected {VERSION}, got {version}")
        if dtype != DTYPE_F32LE:
            raise FormatError("dtype", f"expected {DTYPE_F32LE} (f32le), got {dtype}")
        if reserved != 0:
            raise FormatError("reserved", f"expected zero bytes, got {reserved:#06x}")
        if count < 1 or height < 1 or width < 1:
            raise FormatError("shape", f"K={count} H={height} W={width} must all be >= 1")
        return cls(count=count, height=height, width=width)


def write_heatmaps(path, heatmaps: Sequence[Heatmap]) -> None:
    """Write heatmaps of one shared shape; identical input gives identical bytes."""
    if not heatmaps:
        raise InvalidInput("at least one heatmap is required")
    height = heatmaps[0].height
    width = heatmaps[0].width
    for k, h in enumerate(heatmaps):
        if h.height != height or h.width != width:
            raise InvalidInput(
                f"heatmap {k} is {h.height}x{h.width}, expected {height}x{width} like heatmap 0"
            )
    header = HeatmapFileHeader(count=len(heatmaps), height=height, width=width)
    with open(path, "wb") as fh:
        fh.write(header.pack())
        for h in heatmaps:
            fh.write(np.asarray(h.values, dtype="<f4").tobytes())


def read_heatmaps(path) -> list[Heatmap]:
    """Read and validate a heatmap tensor file."""
    with open(path, "rb") as fh:
        data = fh.read()
    header = HeatmapFileHeader.unpack(data)
    expected = header.count * header.height * header.width * 4
    payload = len(data) - HEADER_SIZE
    if payload != expected:
        raise FormatError("length", f"payload is {payload} bytes, expected {expected}")
    arr = np.frombuffer(data, dtype="<f4", offset=HEADER_SIZE)
    arr = arr.reshape(header.count, header.height, header.width)
    if not np.isfinite(arr).all():
        raise FormatError("nan", "payload contains non-finite values")
    if header.height < 3 or header.width < 3:
        raise FormatError("shape", f"{header.height}x{header.width} grid is below the 3x3 minimum")
    return [Heatmap._wrap(arr[k].astype(np.float64)) for k in range(header.count)]


@dataclass(frozen=True)
class KeypointDocument:
    """Decoded keypoints with their resolution ratio and optional fallback labels."""

    lam: float
    keypoints: tuple[tuple[float, float, float], ...]
    fallbacks: tuple[str, ...] | None = None

    def __post_init__(self):
        if not (isinstance(self.lam, (int, float)) and not isinstance(self.lam, bool)):
            raise InvalidInput(f"lambda must be a number, got {self.lam!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidInput(f"lambda must be positive and finite, got {self.lam}")
        object.__setattr__(self, "lam", float(self.lam))
        kps = tuple(tuple(float(x) for x in kp) for kp in self.keypoints)
        for kp in kps:
            if len(kp) != 3:
                raise InvalidInput(f"keypoints must be (x, y, score) triples, got {kp!r}")
            if not all(math.isfinite(x) for x in kp):
                raise InvalidInput(f"keypoint values must be finite, got {kp!r}")
        object.__setattr__(self, "keypoints", kps)
        if self.fallbacks is not None:
            fbs = tuple(str(f) for f in self.fallbacks)
            if len(fbs) != len(kps):
                raise InvalidInput(
                    f"{len(fbs)} fallback labels for {len(kps)} keypoints"
                )
            object.__setattr__(self, "fallbacks", fbs)


def _require_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise FormatError(field, f"expected a finite number, got {value!r}")
    return float(value)


def read_keypoints(path) -> KeypointDocument:
    """Parse a keypoint JSON document; unknown fields are ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("json", str(exc)) from None
    if not isinstance(raw, dict):
        raise FormatError("document", "top level must be a JSON object")
    if "lambda" not in raw:
        raise FormatError("lambda", "missing field")
    lam = _require_number(raw["lambda"], "lambda")
    if lam <= 0:
        raise FormatError("lambda", f"must be positive, got {lam}")
    if "keypoints" not in raw:
        raise FormatError("keypoints", "missing field")
    entries = raw["keypoints"]
    if not isinstance(entries, list):
        raise FormatError("keypoints", "expected an array of [x, y, score] arrays")
    keypoints = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, list) or len(entry) != 3:
            raise FormatError("keypoints", f"entry {i} must be an [x, y, score] array, got {entry!r}")
        keypoints.append(tuple(_require_number(x, "keypoints") for x in entry))
    fallbacks = None
    if "fallbacks" in raw:
        fb = raw["fallbacks"]
        if not isinstance(fb, list) or not all(isinstance(x, str) for x in fb):
            raise FormatError("fallbacks", "expected an array of strings")
        if len(fb) != len(keypoints):
            raise FormatError("fallbacks", f"{len(fb)} labels for {len(keypoints)} keypoints")
        fallbacks = tuple(fb)
    return KeypointDocument(lam=lam, keypoints=tuple(keypoints), fallbacks=fallbacks)


def write_keypoints(path, doc: KeypointDocument) -> None:
    """Write a keypoint document with fixed key order: lambda, keypoints, fallbacks."""
    obj: dict = {
        "lambda": doc.lam,
        "keypoints": [list(kp) for kp in doc.keypoints],
    }
    if doc.fallbacks is not None:
        obj["fallbacks"] = list(doc.fallbacks)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
