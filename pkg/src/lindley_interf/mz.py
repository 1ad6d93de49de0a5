"""Mach-Zehnder difference-photocurrent models.

The output operator ``D(phi) = eta (f^dag f - e^dag e)`` can be written in
terms of the input modes as
``eta [(a^dag a - b^dag b) cos phi + i (b^dag a - a^dag b) sin phi]``.
With a coherent beam in ``a`` and vacuum in ``b`` the two output counts are
independent Poisson variates, so ``d`` follows a Skellam law with
``mu1 = eta |alpha|^2 cos^2(phi/2)`` and ``mu2 = eta |alpha|^2 sin^2(phi/2)``.
With squeezed vacuum in ``b`` only the first two moments are available and
``d`` is modeled as Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .bayes import PosteriorReport, PriorSpec
from .errors import ConfigError, DivergentSensitivity
from .model import MeasurementModel, cos_exact, evaluate_posterior
from .numerics import gaussian_pdf, log_bessel_i, log_sum_exp

VARIANCE_VARIANTS = ("as_printed", "consistent")


@dataclass(frozen=True)
class Coherent:
    alpha_mag: float

    def __post_init__(self):
        if not self.alpha_mag >= 0:
            raise ConfigError(f"|alpha| must be >= 0, got {self.alpha_mag}")


@dataclass(frozen=True)
class Squeezed:
    alpha_mag: float
    squeeze_mag: float
    squeeze_phase: float = math.pi

    def __post_init__(self):
        if not self.alpha_mag >= 0:
            raise ConfigError(f"|alpha| must be >= 0, got {self.alpha_mag}")
        if not self.squeeze_mag >= 0:
            raise ConfigError(f"squeezing r must be >= 0, got {self.squeeze_mag}")


@dataclass(frozen=True)
class MZConfig:
    """Interferometer input, detector efficiency and working point.

    ``variance_variant`` picks the squeezed-input noise formula: ``as_printed``
    keeps the ``eta (1 - eta) / 2`` loss term, ``consistent`` uses
    ``eta (1 - eta)`` so that ``r = 0`` reproduces the coherent variance.
    """

    input: Union[Coherent, Squeezed]
    efficiency: float = 1.0
    working_point: float = math.pi / 2
    variance_variant: str = "as_printed"

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ConfigError(f"efficiency eta must lie in (0, 1], got {self.efficiency}")
        if self.variance_variant not in VARIANCE_VARIANTS:
            raise ConfigError(f"variance_variant must be one of {VARIANCE_VARIANTS}")


def _poisson_logpmf(k, mu):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = k * np.log(mu) - mu - special.gammaln(k + 1.0)
    out = np.where(mu == 0, np.where(k == 0, 0.0, -np.inf), out)
    return np.where(k < 0, -np.inf, out)


def coherent_log_pmf(d, alpha_mag: float, eta: float, phi):
    """Log Skellam probability of the photocount difference ``d`` at phase ``phi``.

    Broadcasts over ``d`` and ``phi``.  Uses the rates ``mu1``/``mu2`` of the two
    output ports, so the removable singularity of the ``(1+cos)/(1-cos)``
    prefactor at ``phi in {0, pi}`` never appears: there the law is a plain
    Poisson on ``+d`` (resp. ``-d``).
    """
    d = np.asarray(d, dtype=float)
    phi = np.asarray(phi, dtype=float)
    d, phi = np.broadcast_arrays(d, phi)
    n = eta * alpha_mag * alpha_mag
    c = cos_exact(0.5 * phi)  # exactly 0 at phi = pi
    s = np.sin(0.5 * phi)
    mu1 = n * c * c
    mu2 = n * s * s

    out = np.empty(d.shape, dtype=float)
    both = (mu1 > 0) & (mu2 > 0)
    if np.any(both):
        m1, m2, db = mu1[both], mu2[both], d[both]
        arg = 2.0 * n * np.abs(c[both] * s[both])
        # ln(mu1/mu2) = 2 atanh(cos phi); that form is exact at pi/2 (pmf(d) == pmf(-d)),
        # the log difference is better conditioned near the endpoints
        cos_phi = cos_exact(phi[both])
        log_ratio = np.where(
            np.abs(cos_phi) < 0.5,
            2.0 * np.arctanh(np.clip(cos_phi, -0.5, 0.5)),
            np.log(m1) - np.log(m2),
        )
        out[both] = -n + 0.5 * db * log_ratio + log_bessel_i(np.abs(db), arg)
    only1 = (mu2 == 0) & ~both
    if np.any(only1):
        out[only1] = _poisson_logpmf(d[only1], mu1[only1])
    only2 = (mu1 == 0) & (mu2 > 0)
    if np.any(only2):
        out[only2] = _poisson_logpmf(-d[only2], mu2[only2])
    if out.ndim == 0:
        return float(out)
    return out


def coherent_moments(alpha_mag: float, eta: float, phi) -> tuple:
    n = eta * alpha_mag * alpha_mag
    mean = n * cos_exact(phi)
    if np.ndim(mean) == 0:
        return float(mean), float(n)
    return mean, np.full(np.shape(mean), n)


def _squeezed_arrays(config: MZConfig, phi):
    if not isinstance(config.input, Squeezed):
        raise ConfigError("squeezed moments need a Squeezed input")
    eta = config.efficiency
    a2 = config.input.alpha_mag ** 2
    r = config.input.squeeze_mag
    sh, ch = math.sinh(r), math.cosh(r)
    cphi = cos_exact(phi)
    sphi = np.sin(np.asarray(phi, dtype=float))
    mean = eta * cphi * (a2 - sh * sh)
    loss = eta * (1.0 - eta) * (a2 + sh * sh)
    if config.variance_variant == "as_printed":
        loss = 0.5 * loss
    # |alpha|^2 is used wherever the printed noise formula writes alpha^2
    signal = a2 + 2.0 * sh * sh * ch * ch * cphi**2 + sphi**2 * (sh * sh * (1.0 + 2.0 * a2) - 2.0 * a2 * sh * ch)
    var = loss + eta * eta * signal
    return mean, var


def squeezed_moments(config: MZConfig, phi) -> tuple:
    mean, var = _squeezed_arrays(config, phi)
    if np.ndim(mean) == 0:
        return float(mean), float(var)
    return mean, var


def squeezed_outcome_pdf(d, config: MZConfig, phi):
    mean, var = squeezed_moments(config, phi)
    return gaussian_pdf(d, mean, var)


class CoherentMZModel(MeasurementModel):
    lattice = True
    tag = "mz-coherent"

    def __init__(self, alpha_mag: float, eta: float):
        self.alpha_mag = float(alpha_mag)
        self.eta = float(eta)

    def moments(self, phase):
        return coherent_moments(self.alpha_mag, self.eta, phase)

    def log_likelihood(self, outcome, phase):
        return coherent_log_pmf(outcome, self.alpha_mag, self.eta, phase)

    def check_outcome(self, outcome) -> float:
        x = float(outcome)
        if x != round(x):
            raise ConfigError(f"coherent photocount differences are integers, got {outcome}")
        return x

    def sample(self, rng: np.random.Generator, phase, size=None):
        n = self.eta * self.alpha_mag**2
        phase = np.asarray(phase, dtype=float)
        mu1 = n * cos_exact(0.5 * phase) ** 2
        mu2 = n * np.sin(0.5 * phase) ** 2
        return rng.poisson(mu1, size) - rng.poisson(mu2, size)

    def pvalue(self, outcome, phase0, two_sided: bool = True) -> float:
        """Exact lattice tail: mass of all ``d'`` at least as far from the mean as ``d``."""
        mean, var = self.moments(phase0)
        sd = math.sqrt(var)
        d = float(outcome)
        dev = abs(d - mean)
        slack = 1e-9 * (1.0 + abs(d))
        reach = int(math.ceil(dev + 40.0 * sd + 40.0))
        centre = int(round(mean))
        grid = np.arange(centre - reach, centre + reach + 1, dtype=float)
        upper = grid[grid - mean >= dev - slack]
        lower = grid[mean - grid >= dev - slack]
        if not two_sided:
            tail = upper if d >= mean else lower
            return float(math.exp(min(0.0, log_sum_exp(self.log_likelihood(tail, phase0)))))
        if dev <= slack:
            return 1.0
        terms = np.concatenate([self.log_likelihood(upper, phase0), self.log_likelihood(lower, phase0)])
        return float(math.exp(min(0.0, log_sum_exp(terms))))


class SqueezedMZModel(MeasurementModel):
    tag = "mz-squeezed"

    def __init__(self, config: MZConfig):
        if not isinstance(config.input, Squeezed):
            raise ConfigError("SqueezedMZModel needs a Squeezed input")
        self.config = config

    def moments(self, phase):
        return _squeezed_arrays(self.config, phase)


def model_for(config: MZConfig) -> MeasurementModel:
    if isinstance(config.input, Coherent):
        return CoherentMZModel(config.input.alpha_mag, config.efficiency)
    return SqueezedMZModel(config)


def sensitivity(config: MZConfig, phi0: float | None = None) -> float:
    """Phase uncertainty from linear error propagation at the working point."""
    phi0 = config.working_point if phi0 is None else phi0
    if isinstance(config.input, Coherent):
        s = abs(math.sin(phi0))
        if s < 1e-12:
            raise DivergentSensitivity(f"mean photocurrent is stationary at phi0={phi0}")
        return 1.0 / (math.sqrt(config.efficiency) * config.input.alpha_mag * s)
    h = 1e-5
    slope = (squeezed_moments(config, phi0 + h)[0] - squeezed_moments(config, phi0 - h)[0]) / (2 * h)
    if abs(slope) < 1e-12:
        raise DivergentSensitivity(f"mean photocurrent is stationary at phi0={phi0}")
    return math.sqrt(squeezed_moments(config, phi0)[1]) / abs(slope)


def mz_posterior(d, config: MZConfig, prior: PriorSpec, tol: float = 1e-10) -> PosteriorReport:
    """Posterior weight of "no phase change" for one difference-photocurrent outcome.

    Coherent input uses the exact Skellam pmf (integer ``d``); squeezed input
    uses the Gaussian approximation with phase-dependent variance inside the
    alternative's integral.
    """
    lo, hi = prior.alt.support
    if lo < -1e-12 or hi > math.pi + 1e-12:
        raise ConfigError(f"MZ alternative must live in [0, pi], got [{lo}, {hi}]")
    return evaluate_posterior(model_for(config), prior, d, tol)
