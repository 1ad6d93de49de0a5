"""Frequentist counterpart, region classification and parameter scans."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .bayes import PosteriorReport
from .errors import ConfigError, LindleyError
from .model import MeasurementModel
from .scenario import Scenario


class Region(str, Enum):
    AGREE_NULL = "AgreeNull"
    AGREE_ALT = "AgreeAlt"
    PARADOX = "Paradox"

    def __str__(self) -> str:
        return self.value


def frequentist_pvalue(d, model: MeasurementModel, null_phase: float, two_sided: bool = True) -> float:
    """Probability, under the null phase, of an outcome at least as far from the mean as ``d``.

    Exact lattice tail for the Skellam model, Gaussian tail otherwise.
    """
    return model.pvalue(d, null_phase, two_sided)


def classify(z_bar0: float, pvalue: float, alpha_freq: float = 0.05) -> Region:
    """Paradox when the test rejects the null but the posterior still favors it."""
    for name, v in (("z_bar0", z_bar0), ("pvalue", pvalue), ("alpha_freq", alpha_freq)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    if pvalue < alpha_freq:
        return Region.PARADOX if z_bar0 > 0.5 else Region.AGREE_ALT
    return Region.AGREE_NULL


@dataclass(frozen=True)
class RegionReport:
    outcome: float
    z_bar0: float
    pvalue: float
    classification: Region
    sigma_units: float
    log_bayes_factor: float = math.nan


def evaluate(scenario: Scenario, outcome, alpha_freq: float = 0.05) -> PosteriorReport:
    """Full report for one outcome: posterior, p-value, class and sigma distance."""
    report = scenario.posterior(outcome)
    report.pvalue = scenario.pvalue(report.outcome)
    report.classification = classify(report.posterior_null, report.pvalue, alpha_freq)
    report.sigma_units = scenario.sigma_units(report.outcome)
    return report


def region_report(scenario: Scenario, outcome, alpha_freq: float = 0.05) -> RegionReport:
    rep = evaluate(scenario, outcome, alpha_freq)
    return RegionReport(
        outcome=rep.outcome,
        z_bar0=rep.posterior_null,
        pvalue=rep.pvalue,
        classification=rep.classification,
        sigma_units=rep.sigma_units,
        log_bayes_factor=rep.log_bayes_factor,
    )


@dataclass(frozen=True)
class ParadoxWindow:
    """Outcomes ``[lo, hi]`` (and their sigma distances) classified Paradox."""

    lo: float
    hi: float
    lo_sigma: float
    hi_sigma: float
    cells: tuple = ()


def scan_outcomes(scenario: Scenario, grid_step: float, t_max: float = 8.0, side: int = 1) -> list[float]:
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    ts = np.arange(0.0, t_max + 0.5 * grid_step, grid_step)
    outcomes = []
    for t in ts:
        x = scenario.outcome_at(side * float(t))
        if not outcomes or x != outcomes[-1]:
            outcomes.append(x)
    return outcomes


def paradox_window(
    scenario: Scenario,
    alpha_freq: float = 0.05,
    grid_step: float = 0.05,
    t_max: float = 8.0,
    side: int = 1,
) -> Optional[ParadoxWindow]:
    """Longest contiguous run of Paradox outcomes on ``[0, t_max]`` sigma.

    Returns ``None`` when no scanned outcome is a paradox.  Lattice models scan
    the distinct integers hit by the sigma grid.
    """
    cells = [region_report(scenario, x, alpha_freq) for x in scan_outcomes(scenario, grid_step, t_max, side)]
    best: tuple[int, int] | None = None
    start = None
    for i, c in enumerate(cells + [None]):
        inside = c is not None and c.classification is Region.PARADOX
        if inside and start is None:
            start = i
        elif not inside and start is not None:
            if best is None or (i - start) > (best[1] - best[0]):
                best = (start, i)
            start = None
    if best is None:
        return None
    run = tuple(cells[best[0]:best[1]])
    return ParadoxWindow(
        lo=run[0].outcome, hi=run[-1].outcome,
        lo_sigma=run[0].sigma_units, hi_sigma=run[-1].sigma_units,
        cells=run,
    )


# ---------------------------------------------------------------------------
# scans

OUTCOME_AXES = ("t", "d")
PARAM_AXES = {
    "eta": "eta",
    "alpha": "alpha",
    "prior_sigma": "prior_sigma",
    "z0": "z0",
    "r": "r",
}
REPORT_COLUMNS = ("d", "sigma_units", "z_bar0", "pvalue", "class", "log_bayes_factor")


@dataclass(frozen=True)
class ScanCell:
    coords: tuple
    report: RegionReport


@dataclass
class ScanTable:
    axes: dict
    cells: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = math.prod(len(v) for v in self.axes.values())
        if len(self.cells) != expected:
            raise ValueError(f"scan table has {len(self.cells)} cells for {expected} grid points")

    @property
    def axis_names(self) -> list[str]:
        return list(self.axes)

    def rows(self) -> list[dict]:
        out = []
        for cell in self.cells:
            row = dict(zip(self.axes, cell.coords))
            r = cell.report
            row.update(d=r.outcome, sigma_units=r.sigma_units, z_bar0=r.z_bar0, pvalue=r.pvalue)
            row["class"] = str(r.classification)
            row["log_bayes_factor"] = r.log_bayes_factor
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.axes, *REPORT_COLUMNS])
        for row in self.rows():
            writer.writerow([_fmt(row[k]) for k in (*self.axes, *REPORT_COLUMNS)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScanTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        n_axes = len(header) - len(REPORT_COLUMNS)
        if n_axes < 1 or tuple(header[n_axes:]) != REPORT_COLUMNS:
            raise ValueError(f"unrecognized scan CSV header: {header}")
        names = header[:n_axes]
        axes: dict = {n: [] for n in names}
        cells = []
        for row in reader:
            coords = tuple(float(v) for v in row[:n_axes])
            for n, v in zip(names, coords):
                if v not in axes[n]:
                    axes[n].append(v)
            d, su, z, p, klass, lbf = row[n_axes:]
            cells.append(ScanCell(coords, RegionReport(
                outcome=float(d), z_bar0=float(z), pvalue=float(p),
                classification=Region(klass), sigma_units=float(su), log_bayes_factor=float(lbf),
            )))
        return cls(axes=axes, cells=cells)

    def to_json(self) -> str:
        payload = {
            "axes": self.axes,
            "metadata": self.metadata,
            "cells": [
                {"coords": dict(zip(self.axes, c.coords)),
                 **{k: (str(v) if isinstance(v, Region) else v) for k, v in asdict(c.report).items()}}
                for c in self.cells
            ],
        }
        return json.dumps(payload, indent=1, allow_nan=True)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows()])


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def _cell_scenario(base: Scenario, names: Sequence[str], coords: tuple) -> tuple[Scenario, str, float]:
    changes = {}
    outcome_axis, outcome_value = None, None
    for name, value in zip(names, coords):
        if name in OUTCOME_AXES:
            outcome_axis, outcome_value = name, value
        else:
            changes[PARAM_AXES[name]] = value
    return replace(base, **changes), outcome_axis, outcome_value


def _eval_cell(args):
    base, names, coords, alpha_freq = args
    try:
        sc, axis, value = _cell_scenario(base, names, coords)
        outcome = sc.outcome_at(value) if axis == "t" else value
        return region_report(sc, outcome, alpha_freq)
    except LindleyError as exc:
        raise type(exc)(f"scan cell {dict(zip(names, coords))}: {exc}") from exc


def scan(
    scenario: Scenario,
    axes: Mapping[str, Sequence[float]],
    alpha_freq: float = 0.05,
    workers: int = 1,
) -> ScanTable:
    """Evaluate every grid point of ``axes`` (row-major, first axis slowest).

    Exactly one outcome axis is required: ``t`` (sigma units above the null
    mean) or ``d`` (raw outcomes).  Other axes override scenario fields.
    Results do not depend on ``workers``.
    """
    if not axes:
        raise ConfigError("scan needs at least one axis")
    names = list(axes)
    unknown = [n for n in names if n not in OUTCOME_AXES and n not in PARAM_AXES]
    if unknown:
        raise ConfigError(f"unknown scan axes {unknown}; allowed: {[*OUTCOME_AXES, *PARAM_AXES]}")
    if sum(n in OUTCOME_AXES for n in names) != 1:
        raise ConfigError("scan needs exactly one outcome axis ('t' or 'd')")
    grid = {n: [float(v) for v in axes[n]] for n in names}
    for n, vals in grid.items():
        if not vals:
            raise ConfigError(f"scan axis {n!r} is empty")
    jobs = [(scenario, names, coords, alpha_freq) for coords in itertools.product(*grid.values())]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_eval_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        reports = [_eval_cell(j) for j in jobs]
    cells = [ScanCell(j[2], rep) for j, rep in zip(jobs, reports)]
    metadata = {
        "scenario": asdict(scenario),
        "alpha_freq": alpha_freq,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return ScanTable(axes=grid, cells=cells, metadata=metadata)


# ---------------------------------------------------------------------------
# figure presets

def _ts(step: float = 0.25, stop: float = 6.0) -> list[float]:
    return [round(x, 10) for x in np.arange(0.0, stop + 0.5 * step, step)]


def figure_preset(name: str) -> tuple[Scenario, dict]:
    """Frozen scenario and axes for the three posterior figures."""
    if name == "fig3":
        # left panel: alpha in {5, 10, 15} at eta 0.7; right panel: eta sweep at alpha 10
        sc = Scenario(kind="mz-coherent", alpha=10.0, eta=0.7, z0=0.99, prior="flat")
        return sc, {"t": _ts(), "eta": [0.5, 0.7, 0.9, 1.0], "alpha": [5.0, 10.0, 15.0]}
    if name == "fig4":
        sc = Scenario(kind="mz-coherent", alpha=10.0, eta=0.7, z0=0.99, prior="wrapped")
        sigmas = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 2.0, 5.0, 10.0]
        return sc, {"t": _ts(), "prior_sigma": sigmas, "eta": [0.7, 0.5]}
    if name == "fig5":
        # noise for the sigma distance is taken at phi = 0, mean at phi0 = pi/2
        sc = Scenario(kind="mz-squeezed", alpha=10.0, r=1.0, squeeze_phase=math.pi,
                      z0=0.99, prior="flat", sigma_phase=0.0)
        return sc, {"t": _ts(), "eta": [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]}
    raise ConfigError(f"unknown preset {name!r}; choose fig3, fig4 or fig5")


PRESETS = ("fig3", "fig4", "fig5")
