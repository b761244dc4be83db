"""Transitionless-driving schedules for the parametric drive.

The drive is lambda(t) = lambda0(t) + i lambda1(t) with
lambda0 = Delta tanh(2 r(t)) and the counterdiabatic correction
lambda1 = -dr/dt, which keeps the instantaneous Bogoliubov mode in its
ground state at arbitrary ramp speed.  Shapes are analytic closed forms so
the derivative is exact; dense sampling exists only for serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Gaussian ramp width: sigma = tau_on / GAUSSIAN_WIDTH_DIV, with an offset
# subtraction so r(0) = 0 exactly (the bare Gaussian leaves ~4e-6 residual).
GAUSSIAN_WIDTH_DIV = 5.0


@dataclass(frozen=True)
class PulseSchedule:
    """Analytic ramp of the squeezing parameter r(t) and the matching drive."""

    r_target: float
    tau_on: float
    shape: str  # gaussian | sudden
    direction: str  # on | off
    Delta: float
    dt_sample: float = 0.0  # 0 -> tau_on / 200 when serializing

    def __post_init__(self):
        if self.tau_on <= 0:
            raise ConfigError("ramp duration must be positive")
        if self.r_target < 0:
            raise ConfigError("r_target must be nonnegative")
        if self.shape not in ("gaussian", "sudden"):
            raise ConfigError(f"unknown pulse shape {self.shape!r}")
        if self.direction not in ("on", "off"):
            raise ConfigError(f"unknown pulse direction {self.direction!r}")

    # -- instantaneous squeezing -------------------------------------------
    def _r_on(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        if t >= self.tau_on:
            return self.r_target
        sigma = self.tau_on / GAUSSIAN_WIDTH_DIV
        c = math.exp(-0.5 * (self.tau_on / sigma) ** 2)
        u = math.exp(-0.5 * ((t - self.tau_on) / sigma) ** 2)
        return self.r_target * (u - c) / (1.0 - c)

    def _rdot_on(self, t: float) -> float:
        if t <= 0.0 or t >= self.tau_on:
            return 0.0
        sigma = self.tau_on / GAUSSIAN_WIDTH_DIV
        c = math.exp(-0.5 * (self.tau_on / sigma) ** 2)
        u = math.exp(-0.5 * ((t - self.tau_on) / sigma) ** 2)
        return self.r_target / (1.0 - c) * u * (self.tau_on - t) / sigma**2

    def r_of(self, t: float) -> float:
        if self.shape == "sudden":
            if self.direction == "on":
                return self.r_target if t > 0.0 else 0.0
            return 0.0 if t > 0.0 else self.r_target
        if self.direction == "on":
            return self._r_on(t)
        return self._r_on(self.tau_on - t)

    def rdot_of(self, t: float) -> float:
        if self.shape == "sudden":
            return 0.0
        if self.direction == "on":
            return self._rdot_on(t)
        return -self._rdot_on(self.tau_on - t)

    def lam_of(self, t: float) -> complex:
        lam0 = self.Delta * math.tanh(2.0 * self.r_of(t))
        lam1 = -self.rdot_of(t)
        return complex(lam0, lam1)

    def e_beta_of(self, t: float) -> float:
        return self.Delta / math.cosh(2.0 * self.r_of(t))

    def samples(self, dt: float | None = None):
        """Dense (t, lam0, lam1, r) table for serialization/plotting."""
        step = dt or self.dt_sample or self.tau_on / 200.0
        ts = np.arange(0.0, self.tau_on + 0.5 * step, step)
        lam = np.array([self.lam_of(t) for t in ts])
        rr = np.array([self.r_of(t) for t in ts])
        return ts, lam.real, lam.imag, rr


def td_schedule(
    r_target: float,
    tau_on: float,
    shape: str = "gaussian",
    Delta: float = 1.0,
    direction: str = "on",
) -> PulseSchedule:
    if tau_on <= 0:
        raise ConfigError("ramp duration must be positive")
    return PulseSchedule(r_target, tau_on, shape, direction, Delta)


def eval_schedule(schedule: PulseSchedule, t: float):
    """(lambda(t), r(t), dr/dt(t)) at one time."""
    if t < 0:
        raise ConfigError("schedules are defined for t >= 0")
    return schedule.lam_of(t), schedule.r_of(t), schedule.rdot_of(t)
