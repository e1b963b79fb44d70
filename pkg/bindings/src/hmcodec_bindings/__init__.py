"""Batch array bindings for the hmcodec keypoint heatmap codec.

Training and inference pipelines hold heatmaps as contiguous float32
tensors; these bindings run the codec directly on such buffers, with no
file round-trips. Every result is produced by the hmcodec implementation
itself, so coordinates, scores, and fallback codes are bit-identical to
what the CLI yields over the file formats on the same data.

Fallback codes in the decode output follow ``hmcodec.FALLBACK_CODES``:
0 none, 1 border, 2 non_negative_definite, 3 step_capped,
4 ambiguous_second_max.

The heavy lifting happens inside numpy kernels, which drop the interpreter
lock while they run; the thin Python dispatch around them does not.
"""

from __future__ import annotations

import numpy as np

from hmcodec import (
    DecodeConfig,
    EncodingConfig,
    FALLBACK_CODES,
    GaussianParams,
    Heatmap,
    KeypointDocument,
    decode,
    encode,
)
from hmcodec import read_heatmaps as _read_heatmap_objects
from hmcodec import read_keypoints, write_keypoints  # noqa: F401  (mirrored format API)
from hmcodec import write_heatmaps as _write_heatmap_objects

__version__ = "0.1.0"

__all__ = [
    "FALLBACK_CODES",
    "KeypointDocument",
    "bind_decode",
    "bind_encode",
    "read_heatmaps_array",
    "read_keypoints",
    "write_heatmaps_array",
    "write_keypoints",
]


def _check_batch(batch: np.ndarray) -> np.ndarray:
    """Validate a borrowed heatmap buffer and view it as (K, H, W)."""
    if not isinstance(batch, np.ndarray):
        raise TypeError(f"batch must be a numpy array, got {type(batch).__name__}")
    if batch.dtype != np.float32:
        raise ValueError(f"batch must be float32, got dtype {batch.dtype}")
    if batch.ndim == 2:
        batch = batch[None]
    elif batch.ndim != 3:
        raise ValueError(f"batch must be 2-D (HxW) or 3-D (KxHxW), got ndim {batch.ndim}")
    if not batch.flags.c_contiguous:
        raise ValueError("batch must be C-contiguous (row-major)")
    if batch.size and not np.isfinite(batch).all():
        raise ValueError("batch must contain only finite values")
    return batch


def bind_decode(
    batch: np.ndarray,
    method: str = "dark",
    modulate: bool = False,
    sigma: float | None = None,
    lam: float = 1.0,
    step_cap: float = 1.0,
) -> np.ndarray:
    """Decode a float32 heatmap batch into a K x 4 array.

    ``batch`` is (H, W) or (K, H, W), C-contiguous float32; it is never
    mutated. Each output row is (x, y, score, fallback code) with x and y
    in original-image space (lam applied).
    """
    batch = _check_batch(batch)
    config = DecodeConfig(
        method=method,
        modulate=modulate,
        sigma=GaussianParams(sigma) if sigma is not None else None,
        lam=lam,
        step_cap=step_cap,
    )
    out = np.empty((batch.shape[0], 4), dtype=np.float64)
    for k in range(batch.shape[0]):
        result = decode(Heatmap(batch[k]), config)
        out[k, 0] = result.p_hat[0]
        out[k, 1] = result.p_hat[1]
        out[k, 2] = result.confidence
        out[k, 3] = FALLBACK_CODES[result.fallback]
    return out


def bind_encode(
    keypoints: np.ndarray,
    lam: float,
    sigma: float,
    height: int,
    width: int,
    mode: str = "unbiased",
    quantiser: str = "floor",
    normalization: str = "peak_one",
) -> np.ndarray:
    """Encode a K x 2 array of original-image coordinates into K x H x W float32 targets.

    The output is freshly allocated and owned by the caller; its bytes are
    identical to the payload the CLI's encode subcommand writes for the
    same inputs.
    """
    pts = np.asarray(keypoints, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"keypoints must be a Kx2 array, got shape {pts.shape}")
    config = EncodingConfig(
        lam=lam,
        sigma=GaussianParams(sigma),
        mode=mode,
        quantiser=quantiser,
        normalization=normalization,
    )
    out = np.empty((pts.shape[0], height, width), dtype=np.float32)
    for k in range(pts.shape[0]):
        heatmap, _ = encode((float(pts[k, 0]), float(pts[k, 1])), config, height, width)
        out[k] = heatmap.values.astype(np.float32)
    return out


def read_heatmaps_array(path) -> np.ndarray:
    """Read a heatmap tensor file as a (K, H, W) float32 array."""
    heatmaps = _read_heatmap_objects(path)
    return np.stack([h.values.astype(np.float32) for h in heatmaps])


def write_heatmaps_array(path, batch: np.ndarray) -> None:
    """Write a (K, H, W) or (H, W) float32 array in the heatmap tensor format."""
    batch = _check_batch(batch)
    _write_heatmap_objects(path, [Heatmap(batch[k]) for k in range(batch.shape[0])])
