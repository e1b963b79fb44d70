"""Heatmap -> sub-pixel coordinate decoding.

Three methods are provided: raw argmax, the fixed 0.25-px shift toward the
second maximum, and the distribution-aware method ("dark"): optional
Gaussian re-smoothing of the heatmap, then a single Newton step on the
log-heatmap around the maximal pixel. Every degenerate input degrades to a
coarser estimate with a fallback flag instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import Coord, GaussianParams, Heatmap, _check_ratio
from .errors import AmbiguousSecondMax, BorderMax, InvalidConfig

METHODS = ("argmax", "standard_shift", "dark")

FALLBACK_NONE = "none"
FALLBACK_BORDER = "border"
FALLBACK_NON_NEGATIVE_DEFINITE = "non_negative_definite"
FALLBACK_STEP_CAPPED = "step_capped"
FALLBACK_AMBIGUOUS_SECOND_MAX = "ambiguous_second_max"

FALLBACK_KINDS = (
    FALLBACK_NONE,
    FALLBACK_BORDER,
    FALLBACK_NON_NEGATIVE_DEFINITE,
    FALLBACK_STEP_CAPPED,
    FALLBACK_AMBIGUOUS_SECOND_MAX,
)

# Numeric codes for array-oriented consumers (stable, order matches FALLBACK_KINDS).
FALLBACK_CODES = {kind: code for code, kind in enumerate(FALLBACK_KINDS)}

# Below this determinant magnitude the 2x2 Newton system is treated as singular.
_DET_EPS = 1e-12


@dataclass(frozen=True)
class DecodeConfig:
    """Decoding method and its knobs.

    ``sigma`` is the spread the heatmaps were trained/synthesized with; it
    is required for the dark method and whenever modulation is on. ``lam``
    is the resolution ratio used to map the result back to original-image
    space. Newton steps larger than ``step_cap`` pixels per axis are
    clamped, and activations are clamped to ``log_floor`` before the log.
    """

    method: str = "dark"
    modulate: bool = False
    sigma: GaussianParams | None = None
    lam: float = 1.0
    step_cap: float = 1.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidConfig(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "lam", _check_ratio(self.lam))
        if self.sigma is not None and not isinstance(self.sigma, GaussianParams):
            object.__setattr__(self, "sigma", GaussianParams(self.sigma))
        if (self.modulate or self.method == "dark") and self.sigma is None:
            raise InvalidConfig("sigma is required when modulate=True or method='dark'")
        if not (isinstance(self.step_cap, (int, float)) and self.step_cap > 0):
            raise InvalidConfig(f"step_cap must be positive, got {self.step_cap!r}")
        if not (isinstance(self.log_floor, (int, float)) and self.log_floor > 0):
            raise InvalidConfig(f"log_floor must be positive, got {self.log_floor!r}")


@dataclass(frozen=True, slots=True)
class DecodeResult:
    """One decoded keypoint.

    ``m`` is the maximal pixel of the map the decoder localized on, ``p``
    the refined heatmap-space coordinate, ``p_hat = lam * p`` the
    original-image coordinate, and ``confidence`` the maximum of the
    (unmodulated) input heatmap.
    """

    m: tuple[int, int]
    p: Coord
    p_hat: Coord
    confidence: float
    fallback: str = FALLBACK_NONE


@dataclass(frozen=True, eq=False)
class LogPatch:
    """The 3x3 log-activation neighborhood of a maximal pixel.

    ``d1`` holds the central-difference gradient estimate and ``d2`` the
    symmetric 2x2 curvature (Hessian) estimate at the patch center.
    """

    values: np.ndarray
    d1: tuple[float, float]
    d2: np.ndarray


@dataclass(frozen=True, eq=False)
class ModulationKernel:
    """Separable 1-D Gaussian smoothing weights, truncated at radius ceil(3 sigma)."""

    sigma: float
    radius: int
    weights: np.ndarray


@lru_cache(maxsize=64)
def _kernel_weights(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w /= w.sum()
    w.flags.writeable = False
    return w


@lru_cache(maxsize=64)
def _conv_matrix(sigma: float, n: int) -> np.ndarray:
    # Banded matrix applying the 1-D kernel along an axis of length n with
    # replicate padding: out-of-range taps accumulate onto the edge samples.
    w = _kernel_weights(sigma)
    radius = (len(w) - 1) // 2
    taps = len(w)
    i = np.repeat(np.arange(n), taps)
    j = np.clip(i + np.tile(np.arange(-radius, radius + 1), n), 0, n - 1)
    mat = np.zeros((n, n), dtype=np.float64)
    np.add.at(mat, (i, j), np.tile(w, n))
    mat.flags.writeable = False
    return mat


def modulation_kernel(params: GaussianParams) -> ModulationKernel:
    """Build the separable smoothing kernel used by distribution modulation."""
    if not isinstance(params, GaussianParams):
        params = GaussianParams(params)
    w = _kernel_weights(params.sigma)
    return ModulationKernel(sigma=params.sigma, radius=(len(w) - 1) // 2, weights=w)


def _argmax_rowmajor(values: np.ndarray) -> tuple[int, int, float]:
    # First maximal pixel in row-major scan order.
    idx = int(np.argmax(values))
    w = values.shape[1]
    return idx % w, idx // w, float(values.flat[idx])


def argmax_decode(h: Heatmap) -> tuple[tuple[int, int], float]:
    """Return the first maximal pixel (u, v) in row-major order and its value."""
    mx, my, value = _argmax_rowmajor(h.values)
    return (mx, my), value


def second_max(h: Heatmap, m: tuple[int, int]) -> tuple[int, int]:
    """Return the globally second-highest pixel (row-major tie-break), s != m.

    Raises AmbiguousSecondMax when every pixel holds the same value.
    """
    v = h.values
    if v.min() == v.max():
        raise AmbiguousSecondMax("all pixels are equal")
    return _second_max_values(v, m)


def _second_max_values(values: np.ndarray, m: tuple[int, int]) -> tuple[int, int]:
    masked = values.copy()
    masked[m[1], m[0]] = -np.inf
    idx = int(np.argmax(masked))
    w = values.shape[1]
    return idx % w, idx // w


def standard_shift_decode(h: Heatmap) -> Coord:
    """Shift the argmax 0.25 px toward the global second maximum.

    Raises AmbiguousSecondMax on constant heatmaps; callers fall back to
    the raw argmax with a flag.
    """
    v = h.values
    mx, my, _ = _argmax_rowmajor(v)
    return _shift_from(v, mx, my)


def _shift_from(values: np.ndarray, mx: int, my: int) -> Coord:
    if values.min() == values.max():
        raise AmbiguousSecondMax("all pixels are equal")
    sx, sy = _second_max_values(values, (mx, my))
    du = sx - mx
    dv = sy - my
    norm = math.hypot(du, dv)
    return (mx + 0.25 * du / norm, my + 0.25 * dv / norm)


def modulate(h: Heatmap, sigma: GaussianParams) -> tuple[Heatmap, bool]:
    """Smooth multi-peak structure out of a heatmap, preserving its magnitude.

    Applies a separable Gaussian convolution with replicate padding, then
    rescales affinely so the output spans [0, max(h)]. An (effectively)
    constant input cannot be rescaled; it is returned unchanged with the
    degenerate flag set.
    """
    if not isinstance(sigma, GaussianParams):
        sigma = GaussianParams(sigma)
    out, degenerate = _modulate_values(h.values, sigma.sigma)
    if degenerate:
        return h, True
    return Heatmap._wrap(out), False


def _modulate_values(
    values: np.ndarray, sigma: float, peak: float | None = None
) -> tuple[np.ndarray, bool]:
    h, w = values.shape
    out = _conv_matrix(sigma, h) @ values @ _conv_matrix(sigma, w).T
    mn = out.min()
    mx = out.max()
    # A span within a few ulps of the magnitude is rounding noise from an
    # (effectively) constant input; rescaling would amplify it into garbage.
    if mx - mn <= 16.0 * np.finfo(np.float64).eps * max(abs(mx), abs(mn)):
        return values, True
    if peak is None:
        peak = values.max()
    # (h' - min) / (max - min) * max(h): the extremes land exactly on 0 and max(h).
    out -= mn
    out /= mx - mn
    out *= peak
    return out, False


def build_log_patch(h_mod: Heatmap, m: tuple[int, int], log_floor: float = 1e-10) -> LogPatch:
    """Extract the 3x3 log neighborhood of m with derivative estimates.

    Activations are clamped to ``log_floor`` before the log so zeros and
    negatives stay finite. Raises BorderMax if m has no full neighborhood.
    """
    mx, my = m
    v = h_mod.values
    hgt, wid = v.shape
    if not (1 <= mx <= wid - 2 and 1 <= my <= hgt - 2):
        raise BorderMax(f"maximal pixel {m} is on the border of a {hgt}x{wid} grid")
    patch, d1u, d1v, duu, dvv, duv = _log_patch_scalars(v, mx, my, log_floor)
    values = np.array(patch, dtype=np.float64)
    d2 = np.array([[duu, duv], [duv, dvv]], dtype=np.float64)
    return LogPatch(values=values, d1=(d1u, d1v), d2=d2)


def _log_patch_scalars(v: np.ndarray, mx: int, my: int, floor: float):
    # Row-major 3x3 patch of ln(max(value, floor)); p[r][c] has r along v, c along u.
    log = math.log
    p = [
        [
            log(val) if (val := float(v[my + r - 1, mx + c - 1])) > floor else log(floor)
            for c in range(3)
        ]
        for r in range(3)
    ]
    d1u = (p[1][2] - p[1][0]) / 2.0
    d1v = (p[2][1] - p[0][1]) / 2.0
    duu = p[1][2] - 2.0 * p[1][1] + p[1][0]
    dvv = p[2][1] - 2.0 * p[1][1] + p[0][1]
    duv = (p[2][2] - p[2][0] - p[0][2] + p[0][0]) / 4.0
    return p, d1u, d1v, duu, dvv, duv


def newton_refine(
    m: tuple[int, int], patch: LogPatch, step_cap: float = 1.0
) -> tuple[Coord, str]:
    """One Newton step on the log-heatmap: mu = m - d2^{-1} d1.

    The step is taken only when the curvature is negative definite and
    comfortably non-singular; otherwise mu = m with a fallback flag. Steps
    beyond ``step_cap`` per axis are clamped component-wise.
    """
    d1u, d1v = patch.d1
    duu = float(patch.d2[0, 0])
    duv = float(patch.d2[0, 1])
    dvv = float(patch.d2[1, 1])
    pu, pv, fallback = _newton_scalars(m[0], m[1], d1u, d1v, duu, dvv, duv, step_cap)
    return (pu, pv), fallback


def _newton_scalars(mx, my, d1u, d1v, duu, dvv, duv, step_cap):
    det = duu * dvv - duv * duv
    # Negative definite (both eigenvalues < 0) iff duu < 0 and det > 0.
    if not (duu < 0.0 and det > 0.0) or abs(det) < _DET_EPS:
        return float(mx), float(my), FALLBACK_NON_NEGATIVE_DEFINITE
    ou = (-d1u * dvv + d1v * duv) / det
    ov = (-d1v * duu + d1u * duv) / det
    fallback = FALLBACK_NONE
    if abs(ou) > step_cap or abs(ov) > step_cap:
        ou = min(max(ou, -step_cap), step_cap)
        ov = min(max(ov, -step_cap), step_cap)
        fallback = FALLBACK_STEP_CAPPED
    return mx + ou, my + ov, fallback


def recover_resolution(p: Coord, lam: float) -> Coord:
    """Map a heatmap-space coordinate back to original-image space: lam * p."""
    lam = _check_ratio(lam)
    return (lam * p[0], lam * p[1])


def dark_decode(h: Heatmap, config: DecodeConfig) -> DecodeResult:
    """Full distribution-aware decode of one heatmap.

    Pipeline: optional distribution modulation, argmax on the working map,
    log-patch Newton refinement, then resolution recovery. A border argmax
    falls back to the 0.25-px shift (and that, on a constant map, to the
    raw argmax); curvature degeneracies keep the argmax. The result always
    carries the reached fallback kind, never an exception.
    """
    v = h.values
    if config.modulate:
        confidence = float(v.max())
        work, _ = _modulate_values(v, config.sigma.sigma, peak=confidence)
        mx, my, _ = _argmax_rowmajor(work)
    else:
        work = v
        mx, my, confidence = _argmax_rowmajor(v)
    hgt, wid = v.shape
    if 1 <= mx <= wid - 2 and 1 <= my <= hgt - 2:
        _, d1u, d1v, duu, dvv, duv = _log_patch_scalars(work, mx, my, config.log_floor)
        pu, pv, fallback = _newton_scalars(mx, my, d1u, d1v, duu, dvv, duv, config.step_cap)
    else:
        fallback = FALLBACK_BORDER
        try:
            pu, pv = _shift_from(work, mx, my)
        except AmbiguousSecondMax:
            pu, pv = float(mx), float(my)
            fallback = FALLBACK_AMBIGUOUS_SECOND_MAX
    lam = config.lam
    return DecodeResult(
        m=(mx, my),
        p=(pu, pv),
        p_hat=(lam * pu, lam * pv),
        confidence=confidence,
        fallback=fallback,
    )


def decode(h: Heatmap, config: DecodeConfig) -> DecodeResult:
    """Decode one heatmap with the configured method."""
    if config.method == "dark":
        return dark_decode(h, config)
    v = h.values
    if config.modulate:
        confidence = float(v.max())
        work, _ = _modulate_values(v, config.sigma.sigma, peak=confidence)
        mx, my, _ = _argmax_rowmajor(work)
    else:
        work = v
        mx, my, confidence = _argmax_rowmajor(v)
    fallback = FALLBACK_NONE
    if config.method == "argmax":
        pu, pv = float(mx), float(my)
    else:
        try:
            pu, pv = _shift_from(work, mx, my)
        except AmbiguousSecondMax:
            pu, pv = float(mx), float(my)
            fallback = FALLBACK_AMBIGUOUS_SECOND_MAX
    lam = config.lam
    return DecodeResult(
        m=(mx, my),
        p=(pu, pv),
        p_hat=(lam * pu, lam * pv),
        confidence=confidence,
        fallback=fallback,
    )


def decode_batch(heatmaps: Sequence[Heatmap], config: DecodeConfig) -> list[DecodeResult]:
    """Decode a batch of heatmaps; results are ordered by input index."""
    return [decode(h, config) for h in heatmaps]
