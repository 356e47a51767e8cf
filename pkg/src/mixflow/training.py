"""Training objectives and the resumable training loop.

Three loss variants share one mean-squared velocity objective and differ
only in how the network input is assembled from a (noise, data, time)
draw:

  standard:            input (x_t, t),      target u*(x_t, t)
  mixflow:             input (x_{m_t}, t),  target u*(x_t, t), with the
                       slowed timestep m_t ~ U[(1-gamma)t, t] and the
                       training timestep t ~ Beta(2,1) (density 2t), so
                       that (m_t, t) pairs cover their band evenly
  input_perturbation:  input interpolate(t, x0 + strength*xi, x1),
                       target u*(x_t, t) with the unperturbed x0

RNG consumption order per step is fixed and part of the reproducibility
contract: x0 first, then t, then the variant extras (m_t or xi).  The
training loop draws the data batch x1 before calling the step, using one
derived stream per global iteration (see seeds.iteration_rng), which
makes resumed runs bit-identical to uninterrupted ones.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import seeds
from .errors import ConfigError, NumericError
from .net import (AdamState, Checkpoint, adam_step, loss_and_grad, mlp_init,
                  parameters)
from .schedules import Schedule, interpolate, target_velocity


class TrainVariant(str, Enum):
    STANDARD = "standard"
    MIXFLOW = "mixflow"
    INPUT_PERTURBATION = "input_perturbation"


class TimeDistribution(str, Enum):
    UNIFORM01 = "uniform01"
    BETA21 = "beta21"


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """1D Gaussian mixture describing the data distribution."""

    weights: tuple
    means: tuple
    stds: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        sd = np.asarray(self.stds, dtype=np.float64)
        if not (w.shape == mu.shape == sd.shape) or w.ndim != 1 or w.size == 0:
            raise ConfigError("mixture weights/means/stds must be equal-length 1D tuples")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("mixture weights must be nonnegative and sum to 1")
        if np.any(sd <= 0):
            raise ConfigError("mixture stds must be positive")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n data points, shape (n, 1)."""
        idx = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        mu = np.asarray(self.means)[idx]
        sd = np.asarray(self.stds)[idx]
        return (mu + sd * rng.standard_normal(n))[:, None]

    def to_dict(self) -> dict:
        return {"weights": list(self.weights), "means": list(self.means),
                "stds": list(self.stds)}

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianMixtureSpec":
        return cls(weights=tuple(d["weights"]), means=tuple(d["means"]),
                   stds=tuple(d["stds"]))


# Two well-separated narrow modes; the noise distribution is N(0, 1).
TOY_DATA = GaussianMixtureSpec(weights=(0.5, 0.5), means=(-2.0, 2.0), stds=(0.1, 0.1))


@dataclass
class TrainConfig:
    variant: TrainVariant = TrainVariant.STANDARD
    gamma: float = 1.0                    # mixflow slowed-range coefficient
    perturbation_strength: float = 0.15   # input_perturbation only
    t_distribution: TimeDistribution = TimeDistribution.UNIFORM01  # standard only
    lr: float = 1e-3
    batch_size: int = 2048
    iterations: int = 26000
    seed: int = 0
    schedule: Schedule = Schedule.LINEAR
    data: GaussianMixtureSpec = field(default_factory=lambda: TOY_DATA)
    hidden_dims: tuple = (256, 256, 256, 256)
    log_every: int = 100

    def __post_init__(self):
        self.variant = TrainVariant(self.variant)
        self.t_distribution = TimeDistribution(self.t_distribution)
        self.schedule = Schedule(self.schedule)
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.perturbation_strength < 0.0:
            raise ConfigError("perturbation_strength must be nonnegative")
        if self.lr <= 0 or self.batch_size < 1 or self.iterations < 0 or self.log_every < 1:
            raise ConfigError("lr must be positive; batch_size, log_every >= 1; iterations >= 0")

    @property
    def layer_dims(self) -> list:
        return [2, *self.hidden_dims, 1]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "gamma": self.gamma,
            "perturbation_strength": self.perturbation_strength,
            "t_distribution": self.t_distribution.value,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "iterations": self.iterations,
            "seed": self.seed,
            "schedule": self.schedule.value,
            "data": self.data.to_dict(),
            "hidden_dims": list(self.hidden_dims),
            "log_every": self.log_every,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "data" in d:
            d["data"] = GaussianMixtureSpec.from_dict(d["data"])
        if "hidden_dims" in d:
            d["hidden_dims"] = tuple(d["hidden_dims"])
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def sample_t_beta(rng: np.random.Generator, size=None):
    """Training timesteps with density 2t on [0, 1] (inverse CDF sqrt(u))."""
    if size is None:
        return float(np.sqrt(rng.random()))
    return np.sqrt(rng.random(size))


def sample_slowed_timestep(rng: np.random.Generator, t, gamma: float):
    """Slowed timesteps uniform on [(1-gamma)t, t].

    Computed as t * ((1-gamma) + gamma*u); the factored form guarantees
    m <= t in floating point and degenerates to exactly t at gamma = 0.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must be in [0, 1], got {gamma}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ConfigError(f"timestep outside [0, 1]: {t!r}")
    u = rng.random() if t.ndim == 0 else rng.random(t.shape)
    m = t * ((1.0 - gamma) + gamma * u)
    return float(m) if t.ndim == 0 else m


def slowed_inputs(schedule: Schedule, x0, x1, t, m):
    """Assemble one training example set: input x_m, condition t, target u*(x_t, t)."""
    x_in = interpolate(schedule, m, x0, x1)
    target = target_velocity(schedule, t, x0, x1)
    return x_in, t, target


def perturbed_inputs(schedule: Schedule, x0, x1, t, strength: float, xi):
    """Input built from perturbed noise x0 + strength*xi; target keeps the clean x0."""
    x_in = interpolate(schedule, t, x0 + strength * xi, x1)
    target = target_velocity(schedule, t, x0, x1)
    return x_in, t, target


def standard_batch(schedule: Schedule, x1, rng, t_distribution=TimeDistribution.UNIFORM01):
    """Draw (x0, t) and assemble a standard training batch."""
    x1 = np.asarray(x1, dtype=np.float64)
    x0 = rng.standard_normal(x1.shape)
    n = x1.shape[0]
    if TimeDistribution(t_distribution) is TimeDistribution.BETA21:
        t = sample_t_beta(rng, n)
    else:
        t = rng.random(n)
    return slowed_inputs(schedule, x0, x1, t, t)


def mixflow_batch(schedule: Schedule, x1, rng, gamma: float):
    """Draw (x0, t, m_t) and assemble a slowed-interpolation batch."""
    x1 = np.asarray(x1, dtype=np.float64)
    x0 = rng.standard_normal(x1.shape)
    t = sample_t_beta(rng, x1.shape[0])
    m = sample_slowed_timestep(rng, t, gamma)
    return slowed_inputs(schedule, x0, x1, t, m)


def input_perturbation_batch(schedule: Schedule, x1, rng, strength: float):
    """Draw (x0, t, xi) and assemble a perturbed-input batch."""
    if strength < 0:
        raise ConfigError("perturbation strength must be nonnegative")
    x1 = np.asarray(x1, dtype=np.float64)
    x0 = rng.standard_normal(x1.shape)
    t = rng.random(x1.shape[0])
    xi = rng.standard_normal(x1.shape)
    return perturbed_inputs(schedule, x0, x1, t, strength, xi)


def _apply_batch(checkpoint: Checkpoint, x_in, t, target):
    try:
        loss, grads = loss_and_grad(checkpoint.network, x_in, t, target)
    except NumericError as e:
        raise NumericError(f"{e} (iteration {checkpoint.iteration}); checkpoint intact",
                           checkpoint=checkpoint) from e
    adam_step(parameters(checkpoint.network), grads, checkpoint.adam)
    checkpoint.iteration += 1
    return loss, checkpoint


def standard_train_step(checkpoint: Checkpoint, x1, rng,
                        t_distribution=TimeDistribution.UNIFORM01):
    x_in, t, target = standard_batch(checkpoint.schedule, x1, rng, t_distribution)
    return _apply_batch(checkpoint, x_in, t, target)


def mixflow_train_step(checkpoint: Checkpoint, x1, rng, gamma: float):
    x_in, t, target = mixflow_batch(checkpoint.schedule, x1, rng, gamma)
    return _apply_batch(checkpoint, x_in, t, target)


def input_perturbation_train_step(checkpoint: Checkpoint, x1, rng, strength: float):
    x_in, t, target = input_perturbation_batch(checkpoint.schedule, x1, rng, strength)
    return _apply_batch(checkpoint, x_in, t, target)


def _run_step(config: TrainConfig, checkpoint: Checkpoint, x1, rng):
    if config.variant is TrainVariant.MIXFLOW:
        return mixflow_train_step(checkpoint, x1, rng, config.gamma)
    if config.variant is TrainVariant.INPUT_PERTURBATION:
        return input_perturbation_train_step(checkpoint, x1, rng,
                                             config.perturbation_strength)
    return standard_train_step(checkpoint, x1, rng, config.t_distribution)


def fresh_checkpoint(config: TrainConfig) -> Checkpoint:
    network = mlp_init(config.layer_dims, seeds.derived_seed(config.seed, seeds.INIT))
    adam = AdamState.fresh(parameters(network), lr=config.lr)
    return Checkpoint(network=network, adam=adam, schedule=config.schedule,
                      iteration=0, rng_seed=config.seed,
                      train_variant=config.variant.value)


def train_loop(config: TrainConfig, initial: Checkpoint | None = None,
               snapshot_at: int | None = None, snapshot_cb=None):
    """Run config.iterations variant steps; returns (checkpoint, loss log).

    The loss log is a list of (global_iteration, loss) pairs recorded
    every config.log_every steps.  When resuming, the checkpoint's
    optimizer state continues and the iteration count accumulates; the
    network/schedule must match the config.  `snapshot_at` invokes
    `snapshot_cb(checkpoint)` when the global iteration count reaches
    that value (used to split one run into cached stages).
    """
    if initial is None:
        checkpoint = fresh_checkpoint(config)
    else:
        checkpoint = initial
        if checkpoint.schedule is not config.schedule:
            raise ConfigError(
                f"resume schedule mismatch: checkpoint {checkpoint.schedule.value}, "
                f"config {config.schedule.value}")
        if list(checkpoint.network.layer_dims) != config.layer_dims:
            raise ConfigError(
                f"resume dims mismatch: checkpoint {checkpoint.network.layer_dims}, "
                f"config {config.layer_dims}")
        checkpoint.adam.lr = config.lr
        checkpoint.rng_seed = config.seed
        checkpoint.train_variant = config.variant.value

    loss_log = []
    if snapshot_at is not None and checkpoint.iteration == snapshot_at and snapshot_cb:
        snapshot_cb(checkpoint)
    for _ in range(config.iterations):
        rng = seeds.iteration_rng(config.seed, checkpoint.iteration)
        x1 = config.data.sample(rng, config.batch_size)
        try:
            loss, checkpoint = _run_step(config, checkpoint, x1, rng)
        except NumericError as e:
            e.loss_log = loss_log
            raise
        if checkpoint.iteration % config.log_every == 0:
            loss_log.append((checkpoint.iteration, loss))
        if snapshot_at is not None and checkpoint.iteration == snapshot_at and snapshot_cb:
            snapshot_cb(checkpoint)
    return checkpoint, loss_log
