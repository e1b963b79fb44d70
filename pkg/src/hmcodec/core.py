"""Gaussian heatmap targets and the coordinate -> heatmap encoding pipeline.

Coordinates are (u, v) pairs where u indexes columns (x) and v indexes rows
(y); heatmap grids are stored row-major, so the activation of pixel (u, v)
is ``values[v, u]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig

Coord = tuple[float, float]

MODES = ("biased", "unbiased")
QUANTISERS = ("floor", "ceil", "round")
NORMALIZATIONS = ("normalized", "peak_one")

# The decoder needs an interior pixel with a full 3x3 neighborhood to exist.
MIN_SIDE = 3


def _check_coord(g, name: str = "coordinate") -> Coord:
    try:
        u, v = g
        u = float(u)
        v = float(v)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{name} must be a pair of numbers, got {g!r}") from None
    if not (math.isfinite(u) and math.isfinite(v)):
        raise InvalidConfig(f"{name} must be finite, got {g!r}")
    return u, v


def _check_ratio(lam) -> float:
    if not isinstance(lam, (int, float)) or isinstance(lam, bool):
        raise InvalidConfig(f"resolution ratio must be a number, got {lam!r}")
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        raise InvalidConfig(f"resolution ratio must be positive and finite, got {lam}")
    return lam


@dataclass(frozen=True, eq=False)
class Heatmap:
    """A single-joint H x W grid of finite activations.

    Values are copied into a read-only float64 array at construction, so a
    Heatmap is immutable and safe to share across threads.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, order="C", copy=True)
        self._validate(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @staticmethod
    def _validate(v: np.ndarray) -> None:
        if v.ndim != 2:
            raise InvalidConfig(f"heatmap values must be a 2-D grid, got ndim={v.ndim}")
        if v.shape[0] < MIN_SIDE or v.shape[1] < MIN_SIDE:
            raise InvalidConfig(
                f"heatmap must be at least {MIN_SIDE}x{MIN_SIDE}, got {v.shape[0]}x{v.shape[1]}"
            )
        if not np.isfinite(v).all():
            raise InvalidConfig("heatmap values must all be finite")

    @classmethod
    def _wrap(cls, values: np.ndarray) -> "Heatmap":
        # Internal fast path: `values` is a freshly allocated, finite,
        # C-contiguous float64 array that no one else holds a reference to.
        obj = object.__new__(cls)
        values.flags.writeable = False
        object.__setattr__(obj, "values", values)
        return obj

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GaussianParams:
    """Isotropic spread of a Gaussian kernel, in heatmap pixels."""

    sigma: float

    def __post_init__(self):
        s = self.sigma
        if isinstance(s, bool) or not isinstance(s, (int, float)):
            raise InvalidConfig(f"sigma must be a number, got {s!r}")
        s = float(s)
        if not math.isfinite(s) or s <= 0:
            raise InvalidConfig(f"sigma must be positive and finite, got {s}")
        object.__setattr__(self, "sigma", s)

    @property
    def covariance(self) -> np.ndarray:
        """The implied 2x2 covariance, diag(sigma^2, sigma^2)."""
        s2 = self.sigma * self.sigma
        return np.array([[s2, 0.0], [0.0, s2]])


@dataclass(frozen=True)
class GroundTruthJoint:
    """A joint coordinate at every stage of the encoding pipeline.

    ``g`` is the original-image coordinate, ``g_prime`` the reduced
    (heatmap-space) coordinate, and ``g_double_prime`` the quantised pixel;
    the latter is None for unbiased encoding, which never quantises.
    """

    g: Coord
    g_prime: Coord
    g_double_prime: tuple[int, int] | None = None


@dataclass(frozen=True)
class EncodingConfig:
    """How a ground-truth coordinate becomes a heatmap target."""

    lam: float
    sigma: GaussianParams
    mode: str = "unbiased"
    quantiser: str = "floor"
    normalization: str = "peak_one"

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_ratio(self.lam))
        if not isinstance(self.sigma, GaussianParams):
            object.__setattr__(self, "sigma", GaussianParams(self.sigma))
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.quantiser not in QUANTISERS:
            raise InvalidConfig(f"quantiser must be one of {QUANTISERS}, got {self.quantiser!r}")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidConfig(
                f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}"
            )


def reduce_coordinate(g: Coord, lam: float) -> Coord:
    """Map an original-image coordinate into heatmap space: g / lam per axis."""
    lam = _check_ratio(lam)
    u, v = _check_coord(g)
    return (u / lam, v / lam)


def _round_half_away(x: float) -> int:
    # Ties resolve away from zero: 12.5 -> 13, -12.5 -> -13.
    if x >= 0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)


_QUANTISE_FNS = {
    "floor": math.floor,
    "ceil": math.ceil,
    "round": _round_half_away,
}


def quantise_coordinate(g_prime: Coord, quantiser: str = "floor") -> tuple[int, int]:
    """Snap a heatmap-space coordinate to an integer pixel."""
    try:
        fn = _QUANTISE_FNS[quantiser]
    except KeyError:
        raise InvalidConfig(f"quantiser must be one of {QUANTISERS}, got {quantiser!r}") from None
    u, v = _check_coord(g_prime)
    return (fn(u), fn(v))


def synthesize_heatmap(
    center: Coord,
    params: GaussianParams,
    height: int,
    width: int,
    normalization: str = "peak_one",
) -> Heatmap:
    """Evaluate an isotropic Gaussian bump at every pixel of an H x W grid.

    The value at pixel (x, y) is A * exp(-((x-u)^2 + (y-v)^2) / (2 sigma^2))
    with A = 1/(2 pi sigma^2) for ``normalized`` and A = 1 for ``peak_one``.
    The kernel is evaluated on the full grid with no truncation window, so
    off-grid centers simply produce a truncated one-sided bump.
    """
    if not isinstance(params, GaussianParams):
        params = GaussianParams(params)
    if normalization not in NORMALIZATIONS:
        raise InvalidConfig(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    if height < MIN_SIDE or width < MIN_SIDE:
        raise InvalidConfig(f"degenerate grid: {height}x{width} (need at least {MIN_SIDE}x{MIN_SIDE})")
    u, v = _check_coord(center, "center")

    dx2 = (np.arange(width, dtype=np.float64) - u) ** 2
    dy2 = (np.arange(height, dtype=np.float64) - v) ** 2
    inv = 1.0 / (2.0 * params.sigma * params.sigma)
    values = np.exp(-(dx2[None, :] + dy2[:, None]) * inv)
    if normalization == "normalized":
        values *= 1.0 / (2.0 * math.pi * params.sigma * params.sigma)
    return Heatmap._wrap(values)


def encode(
    joint: Coord, config: EncodingConfig, height: int, width: int
) -> tuple[Heatmap, GroundTruthJoint]:
    """Encode an original-image joint coordinate into a heatmap target.

    Biased mode reduces then quantises before synthesis; unbiased mode
    centers the kernel at the exact reduced coordinate. The returned
    GroundTruthJoint records every intermediate coordinate.
    """
    g = _check_coord(joint, "joint")
    g_prime = reduce_coordinate(g, config.lam)
    if config.mode == "biased":
        g_double_prime = quantise_coordinate(g_prime, config.quantiser)
        center: Coord = (float(g_double_prime[0]), float(g_double_prime[1]))
    else:
        g_double_prime = None
        center = g_prime
    heatmap = synthesize_heatmap(center, config.sigma, height, width, config.normalization)
    return heatmap, GroundTruthJoint(g=g, g_prime=g_prime, g_double_prime=g_double_prime)
