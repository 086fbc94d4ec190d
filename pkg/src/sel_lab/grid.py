"""Radial functions sampled on logarithmic grids r_j = e^{s_j}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_NODES = 4000
DEFAULT_SPAN = (-12.0, 8.0)


def sphere_area(N: int) -> float:
    """Surface measure of S^{N-1}; 1 for N = 1 (the half line)."""
    if N == 1:
        return 1.0
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def default_s_range(alpha: float) -> tuple[float, float]:
    """s-window [-12, 8] / |2 - alpha|, or [-12, 12] when alpha = 2."""
    d = abs(2.0 - float(alpha))
    if d == 0.0:
        return -12.0, 12.0
    return DEFAULT_SPAN[0] / d, DEFAULT_SPAN[1] / d


def log_grid(alpha: float = 0.0, n: int = DEFAULT_NODES, s_min: float | None = None, s_max: float | None = None):
    """Uniform s-nodes and radii for the default window of ``alpha``."""
    lo, hi = default_s_range(alpha)
    lo = lo if s_min is None else s_min
    hi = hi if s_max is None else s_max
    if not hi > lo:
        raise ValueError(f"empty s-range [{lo}, {hi}]")
    if n < 5:
        raise ValueError("a grid needs at least 5 nodes")
    s = np.linspace(lo, hi, n)
    return s, np.exp(s)


@dataclass
class RadialGridFunction:
    """Values of a radial function on strictly increasing radii.

    Norms integrate against r^{N-1} dr times the sphere area, computed in
    s = log r with the trapezoid rule.
    """

    r: np.ndarray
    values: np.ndarray
    N: int = 3
    p: float = 2.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.values = np.asarray(self.values)
        if self.r.ndim != 1 or self.r.shape != self.values.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if np.any(self.r <= 0) or np.any(np.diff(self.r) <= 0):
            raise ValueError("grid radii must be positive and strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function has non-finite values")

    @classmethod
    def from_function(cls, fn, r, N=3, p=2.0, **meta):
        r = np.asarray(r, dtype=float)
        return cls(r, fn(r), N, p, dict(meta))

    @property
    def s(self) -> np.ndarray:
        return np.log(self.r)

    @property
    def h(self) -> float:
        """Uniform step in s; raises if the grid is not log-uniform."""
        ds = np.diff(self.s)
        if not np.allclose(ds, ds[0], rtol=1e-9, atol=1e-12):
            raise ValueError("grid is not uniform in log r")
        return float(ds[0])

    def with_values(self, values) -> RadialGridFunction:
        return RadialGridFunction(self.r, values, self.N, self.p, dict(self.meta))

    def integral(self, integrand: np.ndarray) -> float:
        """sphere_area * int integrand(r) r^{N-1} dr, done in s."""
        return sphere_area(self.N) * float(np.trapezoid(integrand * self.r**self.N, self.s))

    def lp_norm(self, p: float | None = None, weight_power: float = 0.0) -> float:
        """|| r^{weight_power} u ||_{L^p(R^N)}."""
        p = self.p if p is None else p
        a = np.abs(self.values) * self.r**weight_power
        m = float(a.max()) if a.size else 0.0
        if m == 0.0:
            return 0.0
        return m * self.integral((a / m) ** p) ** (1.0 / p)

    def restrict(self, lo: int, hi: int) -> RadialGridFunction:
        return RadialGridFunction(self.r[lo:hi], self.values[lo:hi], self.N, self.p, dict(self.meta))


def smooth_bump(x: np.ndarray, a: float, b: float) -> np.ndarray:
    """C-infinity bump equal to exp(1 - 1/(1 - t^2)) on (a, b), zero outside."""
    x = np.asarray(x, dtype=float)
    t = (2.0 * x - (a + b)) / (b - a)
    out = np.zeros_like(x)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def smooth_plateau(x: np.ndarray, a: float, b: float, ramp: float) -> np.ndarray:
    """C-infinity cutoff: 0 below a, 1 on [a+ramp, b-ramp], 0 above b."""
    x = np.asarray(x, dtype=float)

    def step(t):
        t = np.clip(t, 0.0, 1.0)
        g = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        h = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        return g / (g + h)

    return step((x - a) / ramp) * step((b - x) / ramp)
