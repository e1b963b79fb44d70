"""Seeded synthetic decoding trials, noise models, and PCK-style metrics.

Each trial synthesizes a heatmap around a known sub-pixel center, optionally
corrupts it, and scores one or more decoding configurations against the
pre-quantisation ground truth in original-image space. Trials are pure
functions of (seed, index), so evaluation is reproducible for any worker
count.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    Coord,
    EncodingConfig,
    GaussianParams,
    Heatmap,
    MODES,
    QUANTISERS,
    encode,
    _check_ratio,
)
from .decode import FALLBACK_CODES, FALLBACK_KINDS, DecodeConfig, decode
from .errors import InvalidConfig, InvalidInput

NOISE_KINDS = ("none", "gaussian_additive", "impulse")

# Margin keeping noiseless argmaxes interior, so border fallbacks do not
# pollute accuracy measurements. Border behavior is unit-tested separately.
_CENTER_MARGIN = 2

DEFAULT_PCK_THRESHOLDS = (0.01, 0.02, 0.05)


@dataclass(frozen=True)
class NoiseModel:
    """Synthetic stand-in for prediction error on top of a clean target.

    ``amplitude`` is a fraction of the clean heatmap's peak; ``density`` is
    the per-pixel probability of an impulse (impulse kind only). Noisy
    values are clamped at 0 from below.
    """

    kind: str = "none"
    amplitude: float = 0.0
    density: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidConfig(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not (isinstance(self.amplitude, (int, float)) and self.amplitude >= 0):
            raise InvalidConfig(f"noise amplitude must be >= 0, got {self.amplitude!r}")
        if not (isinstance(self.density, (int, float)) and 0.0 <= self.density <= 1.0):
            raise InvalidConfig(f"noise density must be in [0, 1], got {self.density!r}")


@dataclass(frozen=True)
class TrialSpec:
    """A reproducible family of (heatmap, true center) pairs."""

    count: int
    height: int
    width: int
    sigma_range: tuple[float, float]
    lam: float
    encoding_mode: str = "unbiased"
    quantiser: str = "floor"
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.count, int) and self.count >= 1):
            raise InvalidConfig(f"count must be an integer >= 1, got {self.count!r}")
        lo, hi = self.sigma_range
        if not (0 < lo <= hi):
            raise InvalidConfig(f"sigma_range must satisfy 0 < low <= high, got {self.sigma_range!r}")
        min_side = 2 * _CENTER_MARGIN + 1
        if self.height < min_side or self.width < min_side:
            raise InvalidConfig(
                f"grid must be at least {min_side}x{min_side} for interior centers, "
                f"got {self.height}x{self.width}"
            )
        object.__setattr__(self, "lam", _check_ratio(self.lam))
        if self.encoding_mode not in MODES:
            raise InvalidConfig(f"encoding_mode must be one of {MODES}, got {self.encoding_mode!r}")
        if self.quantiser not in QUANTISERS:
            raise InvalidConfig(f"quantiser must be one of {QUANTISERS}, got {self.quantiser!r}")
        if not isinstance(self.seed, int):
            raise InvalidConfig(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class ErrorStats:
    """Accuracy and fallback summary for one decoding configuration.

    Errors are Euclidean distances in original-image pixels against the
    pre-quantisation ground truth. ``throughput`` is decode calls per
    second and is the only field that varies between identical runs.
    """

    mean: float
    median: float
    p95: float
    fallbacks: dict[str, int]
    throughput: float
    pck: dict[float, float]
    pck_norm: float


@dataclass(frozen=True)
class PckResult:
    """Fraction of predictions within threshold * norm of ground truth."""

    threshold: float
    norm: float
    fraction: float


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based generator keyed by (seed, index): trials are
    # reproducible and independent of evaluation order.
    entropy = (seed & 0xFFFFFFFFFFFFFFFF, index)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def generate_trial(spec: TrialSpec, index: int) -> tuple[Heatmap, Coord]:
    """Produce trial ``index``: a heatmap and its true center in original space."""
    if not (0 <= index < spec.count):
        raise InvalidInput(f"index must be in [0, {spec.count}), got {index}")
    rng = _trial_rng(spec.seed, index)
    lo, hi = spec.sigma_range
    sigma = float(rng.uniform(lo, hi))
    u = float(rng.uniform(_CENTER_MARGIN, spec.width - 1 - _CENTER_MARGIN))
    v = float(rng.uniform(_CENTER_MARGIN, spec.height - 1 - _CENTER_MARGIN))
    g = (spec.lam * u, spec.lam * v)
    config = EncodingConfig(
        lam=spec.lam,
        sigma=GaussianParams(sigma),
        mode=spec.encoding_mode,
        quantiser=spec.quantiser,
    )
    heatmap, _ = encode(g, config, spec.height, spec.width)
    heatmap = _apply_noise(heatmap, spec.noise, rng)
    return heatmap, g


def _apply_noise(h: Heatmap, noise: NoiseModel, rng: np.random.Generator) -> Heatmap:
    if noise.kind == "none":
        return h
    v = h.values
    peak = v.max()
    if noise.kind == "gaussian_additive":
        out = v + rng.normal(0.0, noise.amplitude * peak, v.shape)
        np.maximum(out, 0.0, out=out)
    else:  # impulse
        out = v.copy()
        mask = rng.random(v.shape) < noise.density
        out[mask] += noise.amplitude * peak
    return Heatmap._wrap(out)


def evaluate(
    spec: TrialSpec,
    methods: Sequence[DecodeConfig],
    *,
    pck_thresholds: Sequence[float] = DEFAULT_PCK_THRESHOLDS,
    pck_norm: float | None = None,
    workers: int = 1,
) -> list[ErrorStats]:
    """Decode every trial with every method and summarize per method.

    ``pck_norm`` defaults to lam * max(height, width), an image-size-style
    normalization. All statistics except throughput are pure functions of
    (spec, methods) and are identical for any ``workers`` value: per-trial
    results land in index-ordered arrays before any reduction.
    """
    if not methods:
        raise InvalidInput("at least one decode method is required")
    for cfg in methods:
        if cfg.lam != spec.lam:
            raise InvalidInput(
                f"method lam {cfg.lam} disagrees with trial lam {spec.lam}; "
                "errors would mix coordinate spaces"
            )
    if workers < 1:
        raise InvalidInput(f"workers must be >= 1, got {workers}")
    norm = spec.lam * max(spec.height, spec.width) if pck_norm is None else float(pck_norm)
    if norm <= 0:
        raise InvalidInput(f"pck_norm must be positive, got {norm}")

    n = spec.count
    n_methods = len(methods)
    errors = np.empty((n_methods, n), dtype=np.float64)
    codes = np.empty((n_methods, n), dtype=np.int8)
    durations = np.empty((n_methods, n), dtype=np.float64)
    perf = time.perf_counter

    def run_trial(i: int) -> None:
        heatmap, (gu, gv) = generate_trial(spec, i)
        for j, cfg in enumerate(methods):
            t0 = perf()
            result = decode(heatmap, cfg)
            durations[j, i] = perf() - t0
            errors[j, i] = math.hypot(result.p_hat[0] - gu, result.p_hat[1] - gv)
            codes[j, i] = FALLBACK_CODES[result.fallback]

    if workers == 1:
        for i in range(n):
            run_trial(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_trial, range(n)))

    stats = []
    for j in range(n_methods):
        err = errors[j]
        counts = np.bincount(codes[j], minlength=len(FALLBACK_KINDS))
        total_time = float(durations[j].sum())
        stats.append(
            ErrorStats(
                mean=float(np.mean(err)),
                median=float(np.median(err)),
                p95=float(np.percentile(err, 95)),
                fallbacks={kind: int(counts[k]) for k, kind in enumerate(FALLBACK_KINDS)},
                throughput=n / total_time if total_time > 0 else math.inf,
                pck={float(t): float(np.mean(err <= t * norm)) for t in pck_thresholds},
                pck_norm=norm,
            )
        )
    return stats


def pck(
    predictions: Sequence[Coord],
    ground_truths: Sequence[Coord],
    threshold: float,
    norm: float,
) -> PckResult:
    """Percentage of predictions within threshold * norm of ground truth (inclusive)."""
    if len(predictions) != len(ground_truths):
        raise InvalidInput(
            f"prediction/ground-truth length mismatch: {len(predictions)} vs {len(ground_truths)}"
        )
    if len(predictions) < 1:
        raise InvalidInput("at least one prediction is required")
    if not (isinstance(threshold, (int, float)) and threshold > 0):
        raise InvalidConfig(f"threshold must be positive, got {threshold!r}")
    if not (isinstance(norm, (int, float)) and norm > 0):
        raise InvalidConfig(f"norm must be positive, got {norm!r}")
    preds = np.asarray(predictions, dtype=np.float64)
    gts = np.asarray(ground_truths, dtype=np.float64)
    dist = np.hypot(preds[:, 0] - gts[:, 0], preds[:, 1] - gts[:, 1])
    fraction = float(np.mean(dist <= threshold * norm))
    return PckResult(threshold=float(threshold), norm=float(norm), fraction=fraction)


def compare_report(stats: Sequence[ErrorStats], labels: Sequence[str]) -> str:
    """Render an aligned text table, one row per method, in input order."""
    if not stats:
        raise InvalidInput("at least one ErrorStats is required")
    if len(stats) != len(labels):
        raise InvalidInput(f"stats/labels length mismatch: {len(stats)} vs {len(labels)}")
    thresholds = sorted(stats[0].pck)
    header = (
        ["method", "mean_px", "median_px", "p95_px"]
        + [f"pck@{t:g}" for t in thresholds]
        + list(FALLBACK_KINDS)
        + ["hm/s"]
    )
    rows = [header]
    for label, st in zip(labels, stats):
        rows.append(
            [label, f"{st.mean:.4f}", f"{st.median:.4f}", f"{st.p95:.4f}"]
            + [f"{st.pck[t]:.4f}" for t in thresholds]
            + [str(st.fallbacks[kind]) for kind in FALLBACK_KINDS]
            + [f"{st.throughput:.0f}"]
        )
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip() for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    lines.append(f"pck_norm: {stats[0].pck_norm:g} px (original space)")
    return "\n".join(lines)


def stats_to_json(
    spec: TrialSpec, stats: Sequence[ErrorStats], labels: Sequence[str]
) -> str:
    """Machine-readable report. Timing fields are omitted so identical runs
    serialize to identical bytes."""
    if len(stats) != len(labels):
        raise InvalidInput(f"stats/labels length mismatch: {len(stats)} vs {len(labels)}")
    doc = {
        "spec": {
            "trials": spec.count,
            "height": spec.height,
            "width": spec.width,
            "sigma_lo": spec.sigma_range[0],
            "sigma_hi": spec.sigma_range[1],
            "lambda": spec.lam,
            "encoding": spec.encoding_mode,
            "quantiser": spec.quantiser,
            "noise": {
                "kind": spec.noise.kind,
                "amplitude": spec.noise.amplitude,
                "density": spec.noise.density,
            },
            "seed": spec.seed,
        },
        "pck_norm": stats[0].pck_norm if stats else None,
        "methods": [
            {
                "label": label,
                "mean": st.mean,
                "median": st.median,
                "p95": st.p95,
                "pck": {str(t): st.pck[t] for t in sorted(st.pck)},
                "fallbacks": {kind: st.fallbacks[kind] for kind in FALLBACK_KINDS},
            }
            for label, st in zip(labels, stats)
        ],
    }
    return json.dumps(doc, indent=2)
