"""Slow-flow diagnostic: how far generated states lag the interpolation path.

For a generated state x_hat at sampling time t, the slowed timestep is
the time m whose ground-truth interpolation between the path's own
(x0, x1) endpoints is nearest to x_hat.  For the linear schedule this is
the orthogonal projection onto the line through x0 and x1; for the GVP
schedule it is found by grid search over candidate times.  Aggregating
min/max/median/mean of m over a population of paths at every sampling
time yields the envelope report.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegeneratePairError, ShapeError
from .sampling import SampleMethod, SamplerConfig, euler_sample, heun_sample
from .schedules import Schedule, coefficients

DEGENERATE_PAIR_TOL = 1e-12


def _as_batch(x):
    """Accept a single vector (d,) or a batch (n, d); return (n, d) plus flag."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ShapeError(f"expected vector or (n, d) batch, got shape {x.shape}")


def slowed_timestep_linear(x_hat, x0, x1):
    """Projection timestep m = (x_hat-x0).(x1-x0) / ||x1-x0||^2.

    Exact nearest-interpolation time for the linear schedule; may fall
    outside [0, 1].  Inputs are single vectors or aligned (n, d) batches.
    """
    xh, single = _as_batch(x_hat)
    x0b, _ = _as_batch(x0)
    x1b, _ = _as_batch(x1)
    if xh.shape != x0b.shape or xh.shape != x1b.shape:
        raise ShapeError(f"shape mismatch: {xh.shape}, {x0b.shape}, {x1b.shape}")
    direction = x1b - x0b
    den = np.einsum("nd,nd->n", direction, direction)
    if np.any(np.sqrt(den) < DEGENERATE_PAIR_TOL):
        raise DegeneratePairError("||x1 - x0|| below tolerance; projection undefined")
    m = np.einsum("nd,nd->n", xh - x0b, direction) / den
    return float(m[0]) if single else m


def slowed_timestep_search(schedule: Schedule, x_hat, x0, x1, grid_n: int = 1000):
    """Nearest-interpolation timestep by grid search over [0, 1].

    Returns the argmin over grid_n uniformly spaced candidate times of
    ||x_hat - interpolate(m, x0, x1)||; ties break toward smaller m.
    Works for either schedule; it is the estimator of record for GVP.
    """
    if grid_n < 2:
        raise ConfigError(f"grid_n must be >= 2, got {grid_n}")
    xh, single = _as_batch(x_hat)
    x0b, _ = _as_batch(x0)
    x1b, _ = _as_batch(x1)
    if xh.shape != x0b.shape or xh.shape != x1b.shape:
        raise ShapeError(f"shape mismatch: {xh.shape}, {x0b.shape}, {x1b.shape}")
    grid = np.linspace(0.0, 1.0, grid_n)
    c = coefficients(schedule, grid)
    # candidates: (n, g, d) = alpha_g * x1 + beta_g * x0
    cand = (c.alpha[None, :, None] * x1b[:, None, :]
            + c.beta[None, :, None] * x0b[:, None, :])
    dist2 = np.einsum("ngd->ng", (xh[:, None, :] - cand) ** 2)
    m = grid[np.argmin(dist2, axis=1)]
    return float(m[0]) if single else m


@dataclass
class SlowFlowReport:
    """Per-sampling-time envelope of slowed timesteps over a population.

    The min/max/median/mean columns are computed on values clamped to
    [0, 1]; raw_min/raw_max record the unclamped projection extremes and
    clamped_fraction the share of paths whose raw value fell outside.
    """

    sampling_times: np.ndarray
    min_m: np.ndarray
    max_m: np.ndarray
    median_m: np.ndarray
    mean_m: np.ndarray
    raw_min_m: np.ndarray
    raw_max_m: np.ndarray
    clamped_fraction: np.ndarray
    population: int
    model_tag: str = ""

    def envelope_width(self, t: float) -> float:
        idx = int(np.argmin(np.abs(self.sampling_times - t)))
        if abs(self.sampling_times[idx] - t) > 1e-9:
            raise ConfigError(f"time {t} not on the report grid")
        return float(self.max_m[idx] - self.min_m[idx])


def slowflow_envelope(network, schedule: Schedule, data_samples, noise_samples,
                      sampler_config: SamplerConfig, model_tag: str = "",
                      grid_n: int = 1000) -> SlowFlowReport:
    """Integrate one ODE path per (noise, data) pair and report the envelope.

    Each path starts from its noise sample; at every grid time the slowed
    timestep of the generated state is measured against that path's own
    endpoints (projection for linear, grid search for GVP).
    """
    x1, _ = _as_batch(data_samples)
    x0, _ = _as_batch(noise_samples)
    if x1.shape != x0.shape:
        raise ShapeError(f"data/noise shape mismatch: {x1.shape} vs {x0.shape}")
    if x1.shape[0] < 1:
        raise ConfigError("population must be >= 1")
    if sampler_config.method not in (SampleMethod.EULER, SampleMethod.HEUN):
        raise ConfigError("slow-flow envelopes use an ODE sampler (euler or heun)")
    cfg = SamplerConfig(**{**sampler_config.to_dict(), "record_trajectory": True})
    run = euler_sample if cfg.method is SampleMethod.EULER else heun_sample
    _, traj = run(network, schedule, cfg, x0)

    times = traj.times
    mins, maxs, medians, means = [], [], [], []
    raw_mins, raw_maxs, fracs = [], [], []
    for state in traj.states:
        if schedule is Schedule.LINEAR:
            m_raw = slowed_timestep_linear(state, x0, x1)
        else:
            m_raw = slowed_timestep_search(schedule, state, x0, x1, grid_n=grid_n)
        m = np.clip(m_raw, 0.0, 1.0)
        mins.append(m.min())
        maxs.append(m.max())
        medians.append(np.median(m))
        means.append(m.mean())
        raw_mins.append(m_raw.min())
        raw_maxs.append(m_raw.max())
        fracs.append(np.mean((m_raw < 0.0) | (m_raw > 1.0)))
    return SlowFlowReport(
        sampling_times=np.asarray(times),
        min_m=np.asarray(mins),
        max_m=np.asarray(maxs),
        median_m=np.asarray(medians),
        mean_m=np.asarray(means),
        raw_min_m=np.asarray(raw_mins),
        raw_max_m=np.asarray(raw_maxs),
        clamped_fraction=np.asarray(fracs),
        population=x1.shape[0],
        model_tag=model_tag,
    )
