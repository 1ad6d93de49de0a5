"""A flat, picklable description of one experiment: model + prior + test settings."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

from .bayes import Flat, PosteriorReport, PriorSpec, WrappedNormal
from .errors import ConfigError
from .homodyne import HomodyneModel, SqueezedCoherentState
from .model import MeasurementModel, evaluate_posterior
from .mz import Coherent, MZConfig, Squeezed, model_for

KINDS = ("homodyne", "mz-coherent", "mz-squeezed")
PRIOR_KINDS = ("flat", "wrapped")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to turn an outcome into a posterior and a p-value.

    ``None`` fields take per-kind defaults: the homodyne test uses the null
    shift 0 and the interval ``[-pi, pi]``; the interferometer uses the
    working point ``pi/2`` and ``[0, pi]``.  ``sigma_phase`` is the phase at
    which the outcome spread used for sigma-unit distances is evaluated
    (defaults to the null phase).
    """

    kind: str = "mz-coherent"
    alpha: float = 10.0
    r: float = 1.0
    squeeze_phase: Optional[float] = None
    eta: float = 0.7
    z0: float = 0.99
    prior: str = "flat"
    prior_sigma: float = 1.0
    interval_lo: Optional[float] = None
    interval_hi: Optional[float] = None
    null_value: Optional[float] = None
    variant: str = "as_printed"
    sigma_phase: Optional[float] = None
    two_sided: bool = True
    tol: float = 1e-10

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"scenario must be one of {KINDS}, got {self.kind!r}")
        if self.prior not in PRIOR_KINDS:
            raise ConfigError(f"prior must be one of {PRIOR_KINDS}, got {self.prior!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if not self.prior_sigma > 0:
            raise ConfigError(f"prior_sigma must be > 0, got {self.prior_sigma}")
        # build once so every invariant is checked at construction time
        self.model()
        self.prior_spec()

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def interval(self) -> tuple[float, float]:
        lo, hi = (-math.pi, math.pi) if self.kind == "homodyne" else (0.0, math.pi)
        return (
            lo if self.interval_lo is None else self.interval_lo,
            hi if self.interval_hi is None else self.interval_hi,
        )

    @property
    def null_phase(self) -> float:
        if self.null_value is not None:
            return self.null_value
        return 0.0 if self.kind == "homodyne" else math.pi / 2

    def model(self) -> MeasurementModel:
        if self.kind == "homodyne":
            sq = 0.0 if self.squeeze_phase is None else self.squeeze_phase
            return HomodyneModel(SqueezedCoherentState(self.alpha, 0.0, self.r, sq))
        return model_for(self.mz_config())

    def mz_config(self) -> MZConfig:
        if self.kind == "mz-coherent":
            inp = Coherent(self.alpha)
        elif self.kind == "mz-squeezed":
            sq = math.pi if self.squeeze_phase is None else self.squeeze_phase
            inp = Squeezed(self.alpha, self.r, sq)
        else:
            raise ConfigError("homodyne scenario has no interferometer config")
        return MZConfig(inp, self.eta, self.null_phase, self.variant)

    def prior_spec(self) -> PriorSpec:
        lo, hi = self.interval
        if self.prior == "flat":
            alt = Flat(lo, hi)
        else:
            alt = WrappedNormal(self.null_phase, self.prior_sigma, hi - lo, lo)
        return PriorSpec(self.z0, self.null_phase, alt)

    def null_mean(self) -> float:
        return float(self.model().moments(self.null_phase)[0])

    def norm_sigma(self) -> float:
        phase = self.null_phase if self.sigma_phase is None else self.sigma_phase
        return math.sqrt(float(self.model().moments(phase)[1]))

    def outcome_at(self, t: float) -> float:
        """Outcome ``t`` sigma-units above the null mean (rounded on a lattice)."""
        x = self.null_mean() + t * self.norm_sigma()
        return float(round(x)) if self.model().lattice else x

    def sigma_units(self, outcome: float) -> float:
        return abs(outcome - self.null_mean()) / self.norm_sigma()

    def posterior(self, outcome) -> PosteriorReport:
        return evaluate_posterior(self.model(), self.prior_spec(), outcome, self.tol)

    def pvalue(self, outcome) -> float:
        return self.model().pvalue(outcome, self.null_phase, self.two_sided)
