"""Monte Carlo oracles for the outcome models and the posterior.

Random streams come from numpy's PCG64.  A batch is cut into fixed blocks
of ``BLOCK`` draws and block ``i`` uses the child seed
``SeedSequence(seed, spawn_key=(i,))``, so the output depends only on
``(seed, count, params)`` and never on how many workers drew the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from .bayes import PointMass
from .model import cos_exact, evaluate_posterior
from .numerics import adaptive_integrate
from .scenario import Scenario

BLOCK = 1 << 16


@dataclass(frozen=True)
class SampleBatch:
    outcomes: np.ndarray
    model_tag: str
    phase_used: float
    seed: int
    count: int

    def __post_init__(self):
        if len(self.outcomes) != self.count:
            raise ValueError("outcome count does not match batch size")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _blocked(count: int, seed: int, draw: Callable[[np.random.Generator, int], np.ndarray], workers: int = 1):
    if count < 1:
        raise ValueError("count must be >= 1")
    sizes = [min(BLOCK, count - start) for start in range(0, count, BLOCK)]

    def run(i):
        return draw(block_rng(seed, i), sizes[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    return np.concatenate(parts)


def sample_coherent_mz(count: int, alpha_mag: float, eta: float, phi: float, seed: int, workers: int = 1) -> SampleBatch:
    """Photocount differences ``N1 - N2`` of the two output ports."""
    n = eta * alpha_mag * alpha_mag
    mu1 = n * float(cos_exact(0.5 * phi)) ** 2
    mu2 = n * math.sin(0.5 * phi) ** 2

    def draw(rng, size):
        return rng.poisson(mu1, size) - rng.poisson(mu2, size)

    out = _blocked(count, seed, draw, workers)
    return SampleBatch(out, "mz-coherent", float(phi), seed, count)


def sample_gaussian_model(count: int, mean: float, variance: float, seed: int,
                          tag: str = "gaussian", phase: float = math.nan, workers: int = 1) -> SampleBatch:
    if not variance > 0:
        raise ValueError("variance must be positive")
    sd = math.sqrt(variance)
    out = _blocked(count, seed, lambda rng, size: rng.normal(mean, sd, size), workers)
    return SampleBatch(out, tag, float(phase), seed, count)


class DistributionCheck(NamedTuple):
    max_abs_freq_error: float
    chi_square_stat: float
    dof: int

    def chi_square_quantile(self, q: float = 0.999) -> float:
        return float(stats.chi2.ppf(q, self.dof))

    def chi_square_ok(self, q: float = 0.999) -> bool:
        return self.chi_square_stat <= self.chi_square_quantile(q)


def _chi_square(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    # merge neighbouring cells until each expects at least min_expected hits
    obs_p, exp_p = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_p.append(o_acc)
            exp_p.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_p:
            obs_p[-1] += o_acc
            exp_p[-1] += e_acc
        else:
            obs_p.append(o_acc)
            exp_p.append(e_acc)
    obs_p, exp_p = np.array(obs_p), np.array(exp_p)
    stat = float(np.sum((obs_p - exp_p) ** 2 / exp_p))
    return stat, max(len(exp_p) - 1, 1)


def empirical_distribution_check(
    batch: SampleBatch,
    analytic: Callable,
    *,
    lattice: Optional[bool] = None,
    edges: Optional[Sequence[float]] = None,
) -> DistributionCheck:
    """Compare sample frequencies with an analytic pmf (lattice) or binned pdf.

    For lattice batches ``analytic`` maps integer outcomes to probabilities and
    every integer between the sample extremes (widened by the analytic mass)
    is a cell.  For continuous batches ``analytic`` is a density and ``edges``
    defaults to 50 bins over the sample mean +- 5 sample sd; the mass outside
    the edges forms one extra cell.
    """
    x = np.asarray(batch.outcomes)
    n = batch.count
    if lattice is None:
        lattice = np.issubdtype(x.dtype, np.integer)

    if lattice:
        lo, hi = int(x.min()), int(x.max())
        pad = max(10, int(0.5 * (hi - lo)))
        support = np.arange(lo - pad, hi + pad + 1)
        probs = np.asarray(analytic(support), dtype=float)
        counts = np.bincount(x - support[0], minlength=support.size).astype(float)
        freq_err = float(np.max(np.abs(counts / n - probs)))
        stat, dof = _chi_square(counts, n * probs)
        return DistributionCheck(freq_err, stat, dof)

    if edges is None:
        m, s = float(x.mean()), float(x.std())
        edges = np.linspace(m - 5 * s, m + 5 * s, 51)
    edges = np.asarray(edges, dtype=float)
    probs = np.array([
        adaptive_integrate(analytic, a, b, 1e-12).value for a, b in zip(edges[:-1], edges[1:])
    ])
    counts, _ = np.histogram(x, bins=edges)
    counts = counts.astype(float)
    outside_p = max(0.0, 1.0 - probs.sum())
    outside_c = float(n - counts.sum())
    freq_err = float(max(np.max(np.abs(counts / n - probs)), abs(outside_c / n - outside_p)))
    stat, dof = _chi_square(np.append(counts, outside_c), n * np.append(probs, outside_p))
    return DistributionCheck(freq_err, stat, dof)


# ---------------------------------------------------------------------------
# posterior calibration

PhaseGenerator = Callable[[np.random.Generator, int], tuple]


def prior_generator(scenario: Scenario) -> PhaseGenerator:
    """Draw (null is true, phase) pairs from the scenario's own prior."""
    prior = scenario.prior_spec()

    def gen(rng, size):
        is_null = rng.random(size) < prior.null_weight
        phases = np.where(is_null, prior.null_value, prior.alt.sample(rng, size))
        return is_null, phases

    return gen


def always_null_generator(scenario: Scenario) -> PhaseGenerator:
    phase0 = scenario.null_phase

    def gen(rng, size):
        return np.ones(size, dtype=bool), np.full(size, phase0)

    return gen


@dataclass(frozen=True)
class CalibrationBin:
    lo: float
    hi: float
    count: int
    null_count: int
    mean_z_bar0: float

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def null_fraction(self) -> float:
        return self.null_count / self.count if self.count else math.nan

    @property
    def calibration_error(self) -> float:
        return abs(self.null_fraction - self.mean_z_bar0) if self.count else math.nan

    @property
    def standard_error(self) -> float:
        if not self.count:
            return math.inf
        p = self.mean_z_bar0
        return math.sqrt(max(p * (1 - p), 1e-12) / self.count)


@dataclass(frozen=True)
class CalibrationTable:
    bins: tuple
    n_trials: int
    seed: int

    def counts(self) -> list[int]:
        return [b.count for b in self.bins]


def posterior_calibration(
    n_trials: int,
    scenario: Scenario,
    true_phase_generator: Optional[PhaseGenerator] = None,
    seed: int = 0,
    n_bins: int = 10,
) -> CalibrationTable:
    """Bin simulated trials by reported ``z_bar0`` and record how often the null was true.

    Outcomes are drawn from the scenario's model at the generated phases.
    Lattice outcomes share one posterior evaluation per distinct value.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    gen = true_phase_generator or prior_generator(scenario)
    model = scenario.model()
    prior = scenario.prior_spec()
    if isinstance(prior.alt, PointMass):
        raise ValueError("calibration needs a proper alternative density")

    def draw(rng, size):
        is_null, phases = gen(rng, size)
        outcomes = model.sample(rng, np.asarray(phases, dtype=float))
        return np.column_stack([np.asarray(is_null, dtype=float), outcomes])

    table = _blocked(n_trials, seed, draw)
    is_null = table[:, 0].astype(bool)
    outcomes = table[:, 1]

    if model.lattice:
        uniq, inverse = np.unique(outcomes, return_inverse=True)
        z_u = np.array([evaluate_posterior(model, prior, u, scenario.tol).posterior_null for u in uniq])
        z = z_u[inverse]
    else:
        z = np.array([evaluate_posterior(model, prior, x, scenario.tol).posterior_null for x in outcomes])

    edges = np.linspace(0.0, 1.0, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, n_bins - 1)
    bins = []
    for k in range(n_bins):
        sel = idx == k
        cnt = int(sel.sum())
        bins.append(CalibrationBin(
            lo=float(edges[k]), hi=float(edges[k + 1]), count=cnt,
            null_count=int(is_null[sel].sum()),
            mean_z_bar0=float(z[sel].mean()) if cnt else math.nan,
        ))
    return CalibrationTable(tuple(bins), n_trials, seed)
