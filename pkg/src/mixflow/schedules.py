"""Interpolation schedules between noise and data.

Time convention: t = 0 is pure noise, t = 1 is pure data.  A schedule
defines coefficients (alpha_t, beta_t) with alpha_0 = 0, beta_0 = 1 and
alpha_1 = 1, beta_1 = 0; the path through state space is

    x_t = alpha_t * x1 + beta_t * x0

with x1 a data point and x0 a noise point.  The time derivative of the
path, alpha_dot * x1 + beta_dot * x0, is the regression target for the
velocity network.

Two schedules are supported:

  linear: alpha_t = t,            beta_t = 1 - t
  gvp:    alpha_t = sin(pi*t/2),  beta_t = cos(pi*t/2)   (variance preserving)
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .errors import DomainError, ShapeError, SingularityError

# beta_t below this is treated as singular for score conversion.
BETA_SINGULARITY_TOL = 1e-6

_HALF_PI = 0.5 * math.pi


class Schedule(str, Enum):
    LINEAR = "linear"
    GVP = "gvp"

    @classmethod
    def from_string(cls, s: str) -> "Schedule":
        try:
            return cls(s.lower())
        except ValueError:
            raise DomainError(f"unknown schedule kind {s!r}; expected 'linear' or 'gvp'") from None


@dataclass(frozen=True)
class Coefficients:
    """(alpha, beta) and their time derivatives at one or more times."""

    alpha: np.ndarray
    beta: np.ndarray
    alpha_dot: np.ndarray
    beta_dot: np.ndarray


def _check_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainError(f"timestep outside [0, 1]: {t!r}")
    return t


def coefficients(schedule: Schedule, t) -> Coefficients:
    """Evaluate (alpha, beta, alpha_dot, beta_dot) at t (scalar or array)."""
    t = _check_time(t)
    if schedule is Schedule.LINEAR:
        one = np.ones_like(t)
        return Coefficients(alpha=t, beta=1.0 - t, alpha_dot=one, beta_dot=-one)
    if schedule is Schedule.GVP:
        a = np.sin(_HALF_PI * t)
        b = np.cos(_HALF_PI * t)
        return Coefficients(alpha=a, beta=b, alpha_dot=_HALF_PI * b, beta_dot=-_HALF_PI * a)
    raise DomainError(f"unknown schedule {schedule!r}")


def path_wronskian(schedule: Schedule) -> float:
    """alpha_dot*beta - alpha*beta_dot, constant for both schedules.

    Hardcoded rather than recomputed so score conversion does not suffer
    cancellation near the endpoints.
    """
    if schedule is Schedule.LINEAR:
        return 1.0
    if schedule is Schedule.GVP:
        return _HALF_PI
    raise DomainError(f"unknown schedule {schedule!r}")


def _broadcast_t(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Right-pad t with singleton axes so it broadcasts over x's trailing dims."""
    extra = x.ndim - t.ndim
    if extra < 0:
        raise ShapeError(f"time batch has more dims than state: {t.shape} vs {x.shape}")
    return t.reshape(t.shape + (1,) * extra)


def _check_pair(x0, x1):
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    if x0.shape != x1.shape:
        raise ShapeError(f"noise/data shape mismatch: {x0.shape} vs {x1.shape}")
    return x0, x1


def interpolate(schedule: Schedule, t, x0, x1) -> np.ndarray:
    """alpha_t * x1 + beta_t * x0."""
    x0, x1 = _check_pair(x0, x1)
    c = coefficients(schedule, t)
    a = _broadcast_t(c.alpha, x1)
    b = _broadcast_t(c.beta, x0)
    return a * x1 + b * x0


def target_velocity(schedule: Schedule, t, x0, x1) -> np.ndarray:
    """alpha_dot_t * x1 + beta_dot_t * x0 (time derivative of interpolate).

    For the linear schedule this is x1 - x0 independent of t.
    """
    x0, x1 = _check_pair(x0, x1)
    c = coefficients(schedule, t)
    ad = _broadcast_t(c.alpha_dot, x1)
    bd = _broadcast_t(c.beta_dot, x0)
    return ad * x1 + bd * x0


def noise_estimate(schedule: Schedule, t, x, v) -> np.ndarray:
    """Estimate of the noise endpoint x0 implied by state x and velocity v.

    Solves the 2x2 system x = alpha*x1 + beta*x0, v = alpha_dot*x1 +
    beta_dot*x0 for x0:  x0_hat = (alpha_dot*x - alpha*v) / wronskian.
    """
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    c = coefficients(schedule, t)
    w = path_wronskian(schedule)
    ad = _broadcast_t(c.alpha_dot, x)
    a = _broadcast_t(c.alpha, x)
    return (ad * x - a * v) / w


def data_estimate(schedule: Schedule, t, x, v) -> np.ndarray:
    """Estimate of the data endpoint x1 implied by state x and velocity v."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    c = coefficients(schedule, t)
    w = path_wronskian(schedule)
    bd = _broadcast_t(c.beta_dot, x)
    b = _broadcast_t(c.beta, x)
    return (b * v - bd * x) / w


def velocity_to_score(schedule: Schedule, t, x, v) -> np.ndarray:
    """Score consistent with velocity v at state x: -x0_hat / beta_t.

    Requires beta_t above BETA_SINGULARITY_TOL, i.e. t bounded away from 1.
    """
    c = coefficients(schedule, t)
    if np.any(c.beta <= BETA_SINGULARITY_TOL):
        raise SingularityError(
            f"score conversion at t={t!r}: beta_t <= {BETA_SINGULARITY_TOL}"
        )
    x = np.asarray(x, dtype=np.float64)
    b = _broadcast_t(c.beta, x)
    return -noise_estimate(schedule, t, x, v) / b
