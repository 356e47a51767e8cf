"""Densities and scalar discrepancies for 1D sample sets.

Kernel density estimation uses a Gaussian kernel with the 1D Scott
bandwidth h = std(samples, ddof=1) * n**(-1/5), matching the common
library default.  Ground-truth marginals of schedule-interpolated
Gaussian-mixture data are available in closed form for comparison.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ShapeError
from .schedules import Schedule, coefficients
from .training import GaussianMixtureSpec

# Default comparison grid: spans the toy mixture and the noise many sigmas out.
DEFAULT_GRID = np.linspace(-4.0, 4.0, 2001)

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

_KDE_CHUNK = 2048


@dataclass
class DensityGrid:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ShapeError(f"grid/values must be equal-length 1D: "
                             f"{self.grid.shape} vs {self.values.shape}")
        if np.any(np.diff(self.grid) <= 0):
            raise ShapeError("grid must be strictly increasing")

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


def gaussian_pdf(x, mean=0.0, std=1.0):
    z = (np.asarray(x, dtype=np.float64) - mean) / std
    return _INV_SQRT_2PI / std * np.exp(-0.5 * z * z)


def scott_bandwidth(samples) -> float:
    samples = np.ravel(np.asarray(samples, dtype=np.float64))
    n = samples.size
    if n < 2:
        raise DegenerateDataError(f"need >= 2 samples for KDE, got {n}")
    sigma = float(samples.std(ddof=1))
    if sigma <= 0.0 or not np.isfinite(sigma):
        raise DegenerateDataError("zero or non-finite sample variance")
    return sigma * n ** (-0.2)


def kde_density(samples, grid=None) -> DensityGrid:
    """Gaussian-kernel density of 1D samples on a grid (Scott bandwidth)."""
    samples = np.ravel(np.asarray(samples, dtype=np.float64))
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    h = scott_bandwidth(samples)
    vals = np.zeros_like(grid)
    # accumulate over sample chunks to bound memory on large sample sets
    for lo in range(0, samples.size, _KDE_CHUNK):
        z = (grid[:, None] - samples[None, lo:lo + _KDE_CHUNK]) / h
        vals += np.exp(-0.5 * z * z).sum(axis=1)
    vals *= _INV_SQRT_2PI / (samples.size * h)
    return DensityGrid(grid=grid, values=vals)


def mixture_marginal_density(spec: GaussianMixtureSpec, schedule: Schedule, t,
                             grid=None) -> DensityGrid:
    """Exact marginal of x_t = alpha_t*x1 + beta_t*x0 for mixture data.

    Each component contributes N(alpha*mu_i, alpha^2*sigma_i^2 + beta^2)
    since the noise is standard normal.
    """
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    c = coefficients(schedule, t)
    alpha, beta = float(c.alpha), float(c.beta)
    vals = np.zeros_like(grid)
    for w, mu, sd in zip(spec.weights, spec.means, spec.stds):
        var = alpha * alpha * sd * sd + beta * beta
        vals += w * gaussian_pdf(grid, mean=alpha * mu, std=np.sqrt(var))
    return DensityGrid(grid=grid, values=vals)


def l1_distance(a: DensityGrid, b: DensityGrid) -> float:
    """Trapezoidal integral of |a - b|; 0 iff identical, at most 2 for densities."""
    if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
        raise ShapeError("density grids differ")
    return float(np.trapezoid(np.abs(a.values - b.values), a.grid))


def ks_statistic(samples, cdf) -> float:
    """One-sample two-sided Kolmogorov-Smirnov statistic against cdf."""
    xs = np.sort(np.ravel(np.asarray(samples, dtype=np.float64)))
    n = xs.size
    if n < 1:
        raise DegenerateDataError("need at least one sample")
    f = np.asarray(cdf(xs), dtype=np.float64)
    steps_hi = np.arange(1, n + 1) / n
    steps_lo = np.arange(0, n) / n
    return float(max(np.max(steps_hi - f), np.max(f - steps_lo)))
