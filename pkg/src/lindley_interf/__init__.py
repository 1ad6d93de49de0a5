"""Bayesian hypothesis testing of phase shifts in optical interferometry.

Homodyne and Mach-Zehnder (coherent and squeezed input) outcome models, the
posterior probability of the "no shift" hypothesis, the matching frequentist
tail test, and tools to locate outcomes where the two disagree.
"""

from .bayes import (
    Flat,
    PointMass,
    PosteriorReport,
    PriorSpec,
    WrappedNormal,
    gaussian_closed_form_posterior,
    log_marginal_likelihood_alt,
    marginal_likelihood_alt,
    posterior_null,
)
from .errors import (
    ConfigError,
    DivergentSensitivity,
    Indeterminate,
    LindleyError,
    NonConvergence,
    NumericalError,
)
from .homodyne import HomodyneConfig, SqueezedCoherentState, homodyne_posterior, outcome_pdf, quadrature_moments
from .mz import (
    Coherent,
    MZConfig,
    Squeezed,
    coherent_log_pmf,
    coherent_moments,
    mz_posterior,
    sensitivity,
    squeezed_moments,
    squeezed_outcome_pdf,
)
from .paradox import Region, RegionReport, ScanTable, classify, frequentist_pvalue, paradox_window, scan
from .scenario import Scenario

__version__ = "0.1.0"
