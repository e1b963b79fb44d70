"""Independent reference implementations used to cross-check the library.

Everything here is deliberately brute-force and shares no code with the
package: dense convolution by explicit kernel-tap accumulation, center
recovery by template grid search, and analytic derivatives of
multi-Gaussian fields.
"""

from __future__ import annotations

import math

import numpy as np


def dense_gaussian_convolve(values: np.ndarray, sigma: float) -> np.ndarray:
    """2-D Gaussian convolution with replicate padding, one kernel tap at a time."""
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k1 = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    k1 /= k1.sum()
    k2 = np.outer(k1, k1)
    padded = np.pad(values, radius, mode="edge")
    h, w = values.shape
    out = np.zeros_like(values)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            out += k2[dy, dx] * padded[dy : dy + h, dx : dx + w]
    return out


def rescale_to_span(values: np.ndarray, peak: float) -> np.ndarray:
    """Affine rescale onto [0, peak]."""
    mn = values.min()
    mx = values.max()
    return (values - mn) / (mx - mn) * peak


def grid_search_center(
    values: np.ndarray,
    sigma: float,
    around: tuple[float, float],
    half_window: float = 0.5,
    resolution: float = 1e-3,
) -> tuple[float, float]:
    """Best-fitting Gaussian center by exhaustive template search.

    Minimizes the sum of squared differences between the heatmap and a
    peak-one Gaussian template over every candidate center on a regular
    grid of the given resolution. The separable structure of the template
    makes the full search tractable:

        SSE(u, v) = sum h^2 - 2 * gy(v) . (h @ gx(u)) + sum gx(u)^2 * sum gy(v)^2
    """
    h, w = values.shape
    n = int(round(2 * half_window / resolution)) + 1
    cand_u = around[0] - half_window + resolution * np.arange(n)
    cand_v = around[1] - half_window + resolution * np.arange(n)

    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    inv = 1.0 / (2.0 * sigma * sigma)
    gx = np.exp(-((xs[None, :] - cand_u[:, None]) ** 2) * inv)  # (n, W)
    gy = np.exp(-((ys[None, :] - cand_v[:, None]) ** 2) * inv)  # (n, H)

    cross = gy @ (values @ gx.T)  # (n_v, n_u): sum_xy h * gx * gy
    sq = np.outer((gy * gy).sum(axis=1), (gx * gx).sum(axis=1))
    sse = sq - 2.0 * cross  # constant sum h^2 dropped
    iv, iu = np.unravel_index(int(np.argmin(sse)), sse.shape)
    return float(cand_u[iu]), float(cand_v[iv])


class MultiGaussianField:
    """Analytic sum of isotropic Gaussians with exact log-derivatives."""

    def __init__(self, components: list[tuple[float, float, float, float]]):
        # components: (amplitude, center_u, center_v, sigma)
        self.components = components

    def value(self, u: float, v: float) -> float:
        total = 0.0
        for a, cu, cv, s in self.components:
            total += a * math.exp(-(((u - cu) ** 2 + (v - cv) ** 2)) / (2.0 * s * s))
        return total

    def sample(self, height: int, width: int) -> np.ndarray:
        out = np.empty((height, width), dtype=np.float64)
        for y in range(height):
            for x in range(width):
                out[y, x] = self.value(x, y)
        return out

    def log_gradient(self, u: float, v: float) -> tuple[float, float]:
        f = 0.0
        fu = 0.0
        fv = 0.0
        for a, cu, cv, s in self.components:
            g = a * math.exp(-(((u - cu) ** 2 + (v - cv) ** 2)) / (2.0 * s * s))
            f += g
            fu += g * (-(u - cu) / (s * s))
            fv += g * (-(v - cv) / (s * s))
        return fu / f, fv / f

    def log_hessian(self, u: float, v: float) -> np.ndarray:
        f = 0.0
        grad = np.zeros(2)
        hess = np.zeros((2, 2))
        for a, cu, cv, s in self.components:
            g = a * math.exp(-(((u - cu) ** 2 + (v - cv) ** 2)) / (2.0 * s * s))
            du = -(u - cu) / (s * s)
            dv = -(v - cv) / (s * s)
            f += g
            grad += g * np.array([du, dv])
            hess += g * (np.outer([du, dv], [du, dv]) - np.eye(2) / (s * s))
        grad /= f
        return hess / f - np.outer(grad, grad)

    def stencil_log_derivatives(self, u: float, v: float, step: float):
        """Central-difference estimates of the log-field at an arbitrary step."""
        p = {}
        for du in (-1, 0, 1):
            for dv in (-1, 0, 1):
                p[(du, dv)] = math.log(self.value(u + du * step, v + dv * step))
        d1u = (p[(1, 0)] - p[(-1, 0)]) / (2 * step)
        d1v = (p[(0, 1)] - p[(0, -1)]) / (2 * step)
        duu = (p[(1, 0)] - 2 * p[(0, 0)] + p[(-1, 0)]) / (step * step)
        dvv = (p[(0, 1)] - 2 * p[(0, 0)] + p[(0, -1)]) / (step * step)
        duv = (p[(1, 1)] - p[(1, -1)] - p[(-1, 1)] + p[(-1, -1)]) / (4 * step * step)
        return (d1u, d1v), np.array([[duu, duv], [duv, dvv]])


def monte_carlo_mean_offset_norm(samples: int, seed: int) -> float:
    """E[||U||] for U uniform on the unit square centered at the origin."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-0.5, 0.5, size=(samples, 2))
    return float(np.mean(np.hypot(pts[:, 0], pts[:, 1])))


def monte_carlo_mean_floor_displacement(samples: int, seed: int) -> float:
    """E[||(frac(u), frac(v))||] for the floor quantiser's displacement."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(samples, 2))
    return float(np.mean(np.hypot(pts[:, 0], pts[:, 1])))
