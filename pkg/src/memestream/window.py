"""Time discretization and the landmark / damped / sliding window models."""

import enum
from dataclasses import dataclass


class WindowModel(enum.Enum):
    SLIDING = "sliding"
    LANDMARK = "landmark"
    DAMPED = "damped"


@dataclass(frozen=True)
class WindowConfig:
    delta_t: int = 3600
    ell: int = 6
    # decay rate for the damped model only; no principled default exists
    lam: float = 1.0
    model: WindowModel = WindowModel.SLIDING

    def __post_init__(self):
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.model is WindowModel.DAMPED and not self.lam > 0:
            raise ValueError("lambda must be positive for the damped model")

    @property
    def length(self):
        return self.ell * self.delta_t


def window_interval(T, cfg: WindowConfig):
    """(lower_exclusive, upper_inclusive) bounds of the data the window holds at time T."""
    if cfg.model is WindowModel.SLIDING:
        return (T - cfg.ell * cfg.delta_t, T)
    return (0, T)


def expiry_cutoff(T, cfg: WindowConfig):
    """Timestamps <= the returned value are out of the window; None means nothing expires."""
    if cfg.model is WindowModel.SLIDING:
        return T - cfg.ell * cfg.delta_t
    return None


def in_window(t, T, cfg: WindowConfig):
    lo, hi = window_interval(T, cfg)
    if cfg.model is not WindowModel.SLIDING:
        return t <= hi
    return lo < t <= hi


def damped_weight(t, T, lam):
    if t > T:
        raise ValueError(f"event time {t} is after the current time {T}")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return 2.0 ** (-lam * (T - t))


def advance(T, cfg: WindowConfig):
    return T + cfg.delta_t


def step_end(t, cfg: WindowConfig, origin=0):
    """End T of the step (T - delta_t, T] that contains timestamp t."""
    return origin - ((origin - t) // cfg.delta_t) * cfg.delta_t
