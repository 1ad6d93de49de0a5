"""Sharp-null hypothesis testing: priors, marginal likelihoods, posteriors.

The null hypothesis pins the phase to a single value; the alternative
spreads the remaining prior mass over a phase interval.  Posterior odds are
always formed from log likelihoods and mapped back through a logistic, so
Bayes factors far beyond the float range still give a sensible ``z_bar0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import expit

from .errors import ConfigError, Indeterminate
from .numerics import adaptive_integrate, wrapped_normal_pdf


@dataclass(frozen=True)
class Flat:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ConfigError(f"flat prior needs a nonempty finite interval, got [{self.lo}, {self.hi}]")

    @property
    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    def log_pdf(self, phi):
        return np.full(np.shape(phi), -math.log(self.hi - self.lo))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)


@dataclass(frozen=True)
class WrappedNormal:
    """Gaussian wrapped onto one period; support is ``[lo, lo + period]``.

    ``lo`` defaults to ``center - period / 2`` so the peak sits mid-interval.
    """

    center: float
    sigma: float
    period: float
    lo: Optional[float] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError(f"wrapped normal sigma must be > 0, got {self.sigma}")
        if not self.period > 0:
            raise ConfigError(f"wrapped normal period must be > 0, got {self.period}")

    @property
    def support(self) -> tuple[float, float]:
        lo = self.center - 0.5 * self.period if self.lo is None else self.lo
        return lo, lo + self.period

    def log_pdf(self, phi):
        with np.errstate(divide="ignore"):
            return np.log(wrapped_normal_pdf(phi, self.center, self.sigma, self.period))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        lo, _ = self.support
        raw = self.center + self.sigma * rng.standard_normal(size)
        return lo + np.mod(raw - lo, self.period)


@dataclass(frozen=True)
class PointMass:
    value: float

    @property
    def support(self) -> tuple[float, float]:
        return self.value, self.value

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.value))


AltDensity = Union[Flat, WrappedNormal, PointMass]


@dataclass(frozen=True)
class PriorSpec:
    """Prior weight of the sharp null and the alternative's phase density."""

    null_weight: float
    null_value: float
    alt: AltDensity

    def __post_init__(self):
        if not 0.0 <= self.null_weight <= 1.0:
            raise ConfigError(f"null weight z0 must lie in [0, 1], got {self.null_weight}")
        if not math.isfinite(self.null_value):
            raise ConfigError("null phase must be finite")


@dataclass
class PosteriorReport:
    posterior_null: float
    log_likelihood_null: float
    log_likelihood_alt: float
    null_weight: float
    outcome: Optional[float] = None
    lattice: Optional[bool] = None
    pvalue: Optional[float] = None
    classification: Optional[str] = None
    sigma_units: Optional[float] = None

    @property
    def likelihood_null(self) -> float:
        return math.exp(self.log_likelihood_null)

    @property
    def likelihood_alt(self) -> float:
        return math.exp(self.log_likelihood_alt)

    @property
    def log_bayes_factor(self) -> float:
        return log_bayes_factor(self.log_likelihood_null, self.log_likelihood_alt)

    @property
    def bayes_factor(self) -> float:
        lbf = self.log_bayes_factor
        return math.inf if lbf > 709.0 else math.exp(lbf)

    @property
    def posterior_alt(self) -> float:
        return 1.0 - self.posterior_null


def log_bayes_factor(log_null: float, log_alt: float) -> float:
    if log_null == -math.inf and log_alt == -math.inf:
        return math.nan
    return log_alt - log_null


def posterior_null_from_logs(log_null: float, log_alt: float, z0: float) -> float:
    """Posterior weight of the null from log marginal likelihoods."""
    if not 0.0 <= z0 <= 1.0:
        raise ValueError(f"z0 must lie in [0, 1], got {z0}")
    if z0 == 1.0:
        return 1.0
    if z0 == 0.0:
        return 0.0
    if log_null == -math.inf and log_alt == -math.inf:
        raise Indeterminate("outcome has zero likelihood under both hypotheses")
    # z_bar0 = 1 / (1 + (1 - z0)/z0 * BF) = expit(logit(z0) - ln BF)
    logit_z0 = math.log(z0) - math.log1p(-z0)
    return float(expit(logit_z0 - (log_alt - log_null)))


def posterior_null(likelihood_null: float, likelihood_alt: float, z0: float) -> float:
    """Posterior probability of the null, ``{1 + (1-z0)/z0 * L_alt/L_null}^-1``."""
    if likelihood_null < 0 or likelihood_alt < 0:
        raise ValueError("likelihoods must be non-negative")
    with np.errstate(divide="ignore"):
        return posterior_null_from_logs(
            float(np.log(likelihood_null)), float(np.log(likelihood_alt)), z0
        )


def gaussian_closed_form_posterior(x: float, phi0: float, sigma: float, tau: float, z0: float) -> float:
    """Null posterior for a Gaussian outcome with a Gaussian alternative prior.

    Outcome ``x ~ N(phi, sigma^2)``, null ``phi = phi0``, alternative
    ``phi ~ N(phi0, tau^2)``.  ``tau = 0`` collapses the alternative onto the
    null and returns ``z0``; ``tau -> inf`` drives the result to 1 for any ``x``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    s2 = sigma * sigma
    t2 = tau * tau
    log_bf = 0.5 * (math.log(s2) - math.log(s2 + t2)) + t2 * (x - phi0) ** 2 / (2.0 * s2 * (s2 + t2))
    return posterior_null_from_logs(0.0, log_bf, z0)


_SCAN_POINTS = 2049


def log_marginal_likelihood_alt(
    log_likelihood: Callable[[np.ndarray], np.ndarray],
    prior: Union[PriorSpec, AltDensity],
    tol: float = 1e-10,
) -> float:
    """``ln`` of the alternative's marginal likelihood ``int pi_1(phi) p(x|phi) dphi``.

    ``log_likelihood`` maps an array of phases to log densities at the fixed
    outcome.  The integrand is rescaled by its maximum on a coarse grid before
    quadrature, so ``tol`` acts as a relative tolerance on the result.
    """
    alt = prior.alt if isinstance(prior, PriorSpec) else prior
    if isinstance(alt, PointMass):
        raise ValueError("point-mass alternative is degenerate; use a narrow WrappedNormal")
    lo, hi = alt.support

    grid = np.linspace(lo, hi, _SCAN_POINTS)[1:-1]
    if isinstance(alt, WrappedNormal):
        grid = np.sort(np.append(grid, lo + np.mod(alt.center - lo, alt.period)))
    g = np.asarray(log_likelihood(grid), dtype=float) + alt.log_pdf(grid)
    shift = float(np.max(g))
    if shift == -math.inf:
        return -math.inf
    peak = float(grid[np.argmax(g)])

    def integrand(phi):
        with np.errstate(under="ignore"):
            return np.exp(log_likelihood(phi) + alt.log_pdf(phi) - shift)

    rough = float(trapezoid(np.exp(g - shift), grid))
    scale = min(1.0, max(rough, 1e-12))
    breaks = [peak]
    if isinstance(alt, WrappedNormal):
        breaks.append(lo + np.mod(alt.center - lo, alt.period))
    result = adaptive_integrate(integrand, lo, hi, tol * scale, breakpoints=breaks)
    if result.value <= 0.0:
        return -math.inf
    return shift + math.log(result.value)


def marginal_likelihood_alt(
    likelihood: Callable[[np.ndarray], np.ndarray],
    prior: Union[PriorSpec, AltDensity],
    tol: float = 1e-10,
) -> float:
    """Marginal likelihood of the alternative for a plain density callable."""

    def log_lik(phi):
        with np.errstate(divide="ignore"):
            return np.log(np.broadcast_to(np.asarray(likelihood(phi), dtype=float), np.shape(phi)))

    return math.exp(log_marginal_likelihood_alt(log_lik, prior, tol))
