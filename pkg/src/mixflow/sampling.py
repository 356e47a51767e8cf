"""ODE/SDE samplers over a trained velocity field.

All samplers integrate forward in time on a uniform grid from t_start to
t_end.  `network` may be a net.Network or any callable (x_batch, t) ->
velocity_batch, which lets tests drive the integrators with exact
velocity fields.

The stochastic sampler discretizes

    dx = [u(x, t) - 0.5 * w(t) * score(x, t)] dt + sqrt(w(t)) dW

with Euler-Maruyama, where the score comes from the velocity via
schedules.velocity_to_score.  Because the score is singular at t = 1 it
stops at t_end <= 1 - SDE_MARGIN and bridges the remaining interval with
a single deterministic Euler step.

The epsilon-scaled sampler shrinks the noise component of each velocity
prediction before stepping: the prediction is split into implied
(noise, data) endpoint estimates, the noise estimate is divided by
lambda(t) = k*t + b, and the velocity is reassembled.  With lambda == 1
it reduces bit-exactly to the plain Euler sampler.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, IntegrationError
from .net import Network, forward
from .schedules import Schedule, coefficients, noise_estimate, velocity_to_score

SDE_MARGIN = 1e-3


class SampleMethod(str, Enum):
    EULER = "euler"
    HEUN = "heun"
    SDE = "sde"
    EPSILON_SCALED_EULER = "epsilon_scaled_euler"


@dataclass
class SamplerConfig:
    method: SampleMethod = SampleMethod.EULER
    steps: int = 5
    t_start: float = 0.0
    t_end: float = 1.0
    sde_coefficient: float = 1.0      # constant diffusion coefficient w
    epsilon_k: float = 1e-4           # lambda(t) = k*t + b
    epsilon_b: float = 1.005
    record_trajectory: bool = False
    seed: int = 0

    def __post_init__(self):
        self.method = SampleMethod(self.method)
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not (0.0 <= self.t_start < self.t_end <= 1.0):
            raise ConfigError(
                f"need 0 <= t_start < t_end <= 1, got [{self.t_start}, {self.t_end}]")
        if self.method is SampleMethod.SDE and self.t_end > 1.0 - SDE_MARGIN:
            raise ConfigError(
                f"SDE sampling requires t_end <= {1.0 - SDE_MARGIN} "
                f"(score singularity margin), got {self.t_end}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.steps + 1)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "steps": self.steps,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "sde_coefficient": self.sde_coefficient,
            "epsilon_k": self.epsilon_k,
            "epsilon_b": self.epsilon_b,
            "record_trajectory": self.record_trajectory,
            "seed": self.seed,
        }


@dataclass
class Trajectory:
    times: np.ndarray
    states: list  # one (n, d) array per recorded time


def velocity_fn(network):
    """Adapter: Network -> callable, callables pass through."""
    if isinstance(network, Network):
        return lambda x, t: forward(network, x, t)
    if callable(network):
        return network
    raise ConfigError(f"expected Network or callable velocity field, got {type(network)!r}")


def _check_state(x, step):
    if not np.all(np.isfinite(x)):
        raise IntegrationError(f"non-finite state at step {step}", step=step)


class _Recorder:
    def __init__(self, enabled: bool, t0: float, x0: np.ndarray):
        self.enabled = enabled
        self.times = [t0]
        self.states = [np.array(x0, dtype=np.float64)] if enabled else []

    def push(self, t: float, x: np.ndarray):
        self.times.append(t)
        if self.enabled:
            self.states.append(x.copy())

    def trajectory(self):
        if not self.enabled:
            return None
        return Trajectory(times=np.asarray(self.times), states=self.states)


def euler_sample(network, schedule: Schedule, config: SamplerConfig, x0_batch):
    """First-order Euler integration: x <- x + dt * u(x, t)."""
    u = velocity_fn(network)
    times = config.grid()
    dt = times[1] - times[0]
    x = np.asarray(x0_batch, dtype=np.float64)
    rec = _Recorder(config.record_trajectory, times[0], x)
    for i in range(config.steps):
        x = x + dt * u(x, times[i])
        _check_state(x, i)
        rec.push(times[i + 1], x)
    return x, rec.trajectory()


def heun_sample(network, schedule: Schedule, config: SamplerConfig, x0_batch):
    """Second-order Heun integration (explicit trapezoid)."""
    u = velocity_fn(network)
    times = config.grid()
    dt = times[1] - times[0]
    x = np.asarray(x0_batch, dtype=np.float64)
    rec = _Recorder(config.record_trajectory, times[0], x)
    for i in range(config.steps):
        v0 = u(x, times[i])
        x_pred = x + dt * v0
        x = x + (0.5 * dt) * (v0 + u(x_pred, times[i + 1]))
        _check_state(x, i)
        rec.push(times[i + 1], x)
    return x, rec.trajectory()


def sde_sample(network, schedule: Schedule, config: SamplerConfig, x0_batch,
               rng: np.random.Generator):
    """Euler-Maruyama on the velocity/score SDE, then bridge t_end -> 1.

    With sde_coefficient identically zero the main loop is bit-identical
    to euler_sample on the same grid (the bridge step is extra).
    """
    if config.method is not SampleMethod.SDE:
        raise ConfigError("sde_sample requires config.method == 'sde'")
    u = velocity_fn(network)
    w = config.sde_coefficient
    w_of_t = w if callable(w) else (lambda _t, _w=float(w): _w)
    times = config.grid()
    dt = times[1] - times[0]
    sqrt_dt = np.sqrt(dt)
    x = np.asarray(x0_batch, dtype=np.float64)
    rec = _Recorder(config.record_trajectory, times[0], x)
    for i in range(config.steps):
        t = times[i]
        wt = w_of_t(t)
        if wt < 0:
            raise ConfigError(f"diffusion coefficient must be nonnegative, got {wt} at t={t}")
        v = u(x, t)
        score = velocity_to_score(schedule, t, x, v)
        drift = v - (0.5 * wt) * score
        noise = (np.sqrt(wt) * sqrt_dt) * rng.standard_normal(x.shape)
        x = x + dt * drift + noise
        _check_state(x, i)
        rec.push(times[i + 1], x)
    t_end = times[-1]
    if t_end < 1.0:
        x = x + (1.0 - t_end) * u(x, t_end)
        _check_state(x, config.steps)
        rec.push(1.0, x)
    return x, rec.trajectory()


def epsilon_scaled_sample(network, schedule: Schedule, config: SamplerConfig, x0_batch):
    """Euler sampling with the implied noise estimate scaled by 1/lambda(t)."""
    u = velocity_fn(network)
    times = config.grid()
    lam = config.epsilon_k * times + config.epsilon_b
    if np.any(lam <= 0.0):
        raise ConfigError(
            f"epsilon scaling lambda(t) = {config.epsilon_k}*t + {config.epsilon_b} "
            "must be positive on the sampling grid")
    dt = times[1] - times[0]
    x = np.asarray(x0_batch, dtype=np.float64)
    rec = _Recorder(config.record_trajectory, times[0], x)
    for i in range(config.steps):
        t = times[i]
        v = u(x, t)
        x0_hat = noise_estimate(schedule, t, x, v)
        beta_dot = coefficients(schedule, t).beta_dot
        v_scaled = v + (beta_dot * (1.0 / lam[i] - 1.0)) * x0_hat
        x = x + dt * v_scaled
        _check_state(x, i)
        rec.push(times[i + 1], x)
    return x, rec.trajectory()


def sample(network, schedule: Schedule, config: SamplerConfig, x0_batch,
           rng: np.random.Generator | None = None):
    """Dispatch on config.method."""
    if config.method is SampleMethod.EULER:
        return euler_sample(network, schedule, config, x0_batch)
    if config.method is SampleMethod.HEUN:
        return heun_sample(network, schedule, config, x0_batch)
    if config.method is SampleMethod.SDE:
        if rng is None:
            rng = np.random.default_rng(config.seed)
        return sde_sample(network, schedule, config, x0_batch, rng)
    if config.method is SampleMethod.EPSILON_SCALED_EULER:
        return epsilon_scaled_sample(network, schedule, config, x0_batch)
    raise ConfigError(f"unknown sampling method {config.method!r}")
