"""Homodyne detection of a squeezed-coherent beam that may have picked up a phase shift.

The beam ``|alpha, lambda>`` (``alpha = |alpha| e^{i theta}``,
``lambda = r e^{i phi_sq}``) is rotated by ``beta``; homodyne detection of the
quadrature at angle ``phi`` then yields Gaussian outcomes.  The null
hypothesis is ``beta = 0``.  Detectors are ideal (unit efficiency).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bayes import PosteriorReport, PriorSpec
from .errors import ConfigError
from .model import MeasurementModel, evaluate_posterior
from .numerics import gaussian_pdf

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SqueezedCoherentState:
    alpha_mag: float
    alpha_phase: float = 0.0
    squeeze_mag: float = 0.0
    squeeze_phase: float = 0.0

    def __post_init__(self):
        if not self.alpha_mag >= 0:
            raise ConfigError(f"|alpha| must be >= 0, got {self.alpha_mag}")
        if not self.squeeze_mag >= 0:
            raise ConfigError(f"squeezing r must be >= 0, got {self.squeeze_mag}")
        object.__setattr__(self, "alpha_phase", float(self.alpha_phase) % TWO_PI)
        object.__setattr__(self, "squeeze_phase", float(self.squeeze_phase) % TWO_PI)


@dataclass(frozen=True)
class HomodyneConfig:
    quadrature_phase: float = 0.0
    shift: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.quadrature_phase) and math.isfinite(self.shift)):
            raise ConfigError("homodyne phases must be finite")


def _moments(state: SqueezedCoherentState, quadrature_phase, shift):
    angle = quadrature_phase + shift
    mean = math.sqrt(2.0) * state.alpha_mag * np.cos(state.alpha_phase - angle)
    tilt = angle - 0.5 * state.squeeze_phase
    r2 = 2.0 * state.squeeze_mag
    var = 0.5 * (math.exp(r2) * np.sin(tilt) ** 2 + math.exp(-r2) * np.cos(tilt) ** 2)
    return mean, var


def quadrature_moments(state: SqueezedCoherentState, config: HomodyneConfig) -> tuple[float, float]:
    """Mean and variance of the measured quadrature after the shift ``config.shift``."""
    mean, var = _moments(state, config.quadrature_phase, config.shift)
    return float(mean), float(var)


def outcome_pdf(q, state: SqueezedCoherentState, config: HomodyneConfig):
    mean, var = quadrature_moments(state, config)
    return gaussian_pdf(q, mean, var)


class HomodyneModel(MeasurementModel):
    """Quadrature outcome as a function of the unknown shift ``beta``."""

    tag = "homodyne"

    def __init__(self, state: SqueezedCoherentState, quadrature_phase: float = 0.0):
        self.state = state
        self.quadrature_phase = float(quadrature_phase)

    def moments(self, phase):
        return _moments(self.state, self.quadrature_phase, np.asarray(phase, dtype=float))


def homodyne_posterior(
    q: float,
    state: SqueezedCoherentState,
    prior: PriorSpec,
    tol: float = 1e-10,
    quadrature_phase: float = 0.0,
) -> PosteriorReport:
    """Posterior weight of "no shift" given one quadrature outcome ``q``.

    The alternative averages the shifted Gaussian, with its shift-dependent
    variance, over the prior on ``beta``.
    """
    lo, hi = prior.alt.support
    if lo < -math.pi - 1e-12 or hi > math.pi + 1e-12:
        raise ConfigError(f"homodyne alternative must live in [-pi, pi], got [{lo}, {hi}]")
    return evaluate_posterior(HomodyneModel(state, quadrature_phase), prior, q, tol)
