"""Common surface of the outcome models (homodyne, coherent MZ, squeezed MZ)."""

from __future__ import annotations

import math

import numpy as np

from .bayes import PosteriorReport, PriorSpec, log_marginal_likelihood_alt, posterior_null_from_logs
from .numerics import gaussian_logpdf, gaussian_two_sided_tail


def cos_exact(phi):
    """``cos(phi)`` written as ``sin(pi/2 - phi)``, which is exactly 0 at pi/2."""
    return np.sin(0.5 * np.pi - np.asarray(phi, dtype=float))


class MeasurementModel:
    """Outcome law ``p(outcome | phase)`` for one detection scheme.

    Subclasses provide ``moments(phase) -> (mean, variance)`` (vectorized in
    phase) and may override ``log_likelihood`` and ``pvalue``.  The default
    likelihood is the Gaussian with those moments.
    """

    lattice = False
    tag = "gaussian"

    def moments(self, phase):
        raise NotImplementedError

    def log_likelihood(self, outcome, phase):
        mean, var = self.moments(phase)
        return gaussian_logpdf(outcome, mean, var)

    def likelihood(self, outcome, phase):
        return np.exp(self.log_likelihood(outcome, phase))

    def sample(self, rng: np.random.Generator, phase, size=None):
        mean, var = self.moments(phase)
        return rng.normal(mean, np.sqrt(var), size)

    def check_outcome(self, outcome) -> float:
        return float(outcome)

    def pvalue(self, outcome, phase0, two_sided: bool = True) -> float:
        """Tail probability of a deviation at least as large as ``outcome``'s."""
        mean, var = self.moments(phase0)
        z = (float(outcome) - float(mean)) / math.sqrt(float(var))
        p = float(gaussian_two_sided_tail(z))
        return p if two_sided else 0.5 * p

    def null_sigma(self, phase0) -> float:
        return math.sqrt(float(self.moments(phase0)[1]))


def evaluate_posterior(model: MeasurementModel, prior: PriorSpec, outcome, tol: float = 1e-10) -> PosteriorReport:
    """Posterior report for one outcome; p-value and class are left unset."""
    x = model.check_outcome(outcome)
    log_null = float(model.log_likelihood(x, prior.null_value))
    log_alt = log_marginal_likelihood_alt(lambda phi: model.log_likelihood(x, phi), prior, tol)
    z_bar0 = posterior_null_from_logs(log_null, log_alt, prior.null_weight)
    return PosteriorReport(
        posterior_null=z_bar0,
        log_likelihood_null=log_null,
        log_likelihood_alt=log_alt,
        null_weight=prior.null_weight,
        outcome=x,
        lattice=model.lattice,
    )
