"""``lindley-interf``: evaluate outcomes, run figure scans, validate by simulation.

Exit codes: 0 success, 1 a statistical validation check failed, 2 bad
configuration, 3 numerical failure.

Configuration files are flat ``key = value`` lines; ``#`` starts a comment.
Keys are the long flag names (``prior-sigma`` or ``prior_sigma``); flags given
on the command line override the file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, LindleyError, NumericalError
from .homodyne import HomodyneConfig, SqueezedCoherentState, outcome_pdf, quadrature_moments
from .mz import coherent_log_pmf
from .paradox import PRESETS, evaluate, figure_preset, scan
from .plot import render_svg
from .scenario import KINDS, Scenario
from .sim import (
    empirical_distribution_check,
    posterior_calibration,
    sample_coherent_mz,
    sample_gaussian_model,
)

OUTPUT_DIR_ENV = "LINDLEY_INTERF_OUTPUT_DIR"
FORMATS = ("csv", "json", "svg")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "mz-coherent"
    alpha: float = 10.0
    r: float = 1.0
    squeeze_phase: Optional[float] = None
    eta: Optional[float] = None
    z0: Optional[float] = None
    prior: str = "flat"
    prior_sigma: float = 1.0
    interval_lo: Optional[float] = None
    interval_hi: Optional[float] = None
    null_value: Optional[float] = None
    variant: str = "as_printed"
    sigma_phase: Optional[float] = None
    alpha_freq: float = 0.05
    two_sided: bool = True
    tol: float = 1e-10
    format: str = "csv"
    output: Optional[str] = None
    seed: int = 12345

    def build_scenario(self) -> Scenario:
        homodyne = self.scenario == "homodyne"
        return Scenario(
            kind=self.scenario,
            alpha=self.alpha,
            r=self.r,
            squeeze_phase=self.squeeze_phase,
            eta=(1.0 if homodyne else 0.7) if self.eta is None else self.eta,
            z0=(0.9 if homodyne else 0.99) if self.z0 is None else self.z0,
            prior=self.prior,
            prior_sigma=self.prior_sigma,
            interval_lo=self.interval_lo,
            interval_hi=self.interval_hi,
            null_value=self.null_value,
            variant=self.variant,
            sigma_phase=self.sigma_phase,
            two_sided=self.two_sided,
            tol=self.tol,
        )

    def validate(self) -> Scenario:
        if self.scenario not in KINDS:
            raise ConfigError(f"scenario must be one of {KINDS}, got {self.scenario!r}")
        if not 0.0 < self.alpha_freq < 1.0:
            raise ConfigError(f"alpha_freq must lie in (0, 1), got {self.alpha_freq}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        return self.build_scenario()


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    text = raw.strip()
    if "bool" in kind:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if "Optional" in kind and text.lower() in ("", "none"):
        return None
    try:
        if "float" in kind:
            return float(text)
        if "int" in kind:
            return int(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return text


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; unknown keys are an error."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--scenario", choices=KINDS)
    p.add_argument("--alpha", type=float, help="coherent amplitude |alpha|")
    p.add_argument("--r", type=float, help="squeezing parameter r")
    p.add_argument("--squeeze-phase", type=float, help="squeezing phase (radians)")
    p.add_argument("--eta", type=float, help="detector efficiency (MZ only)")
    p.add_argument("--z0", type=float, help="prior probability of the null")
    p.add_argument("--prior", choices=("flat", "wrapped"))
    p.add_argument("--prior-sigma", type=float, help="wrapped-normal prior width (radians)")
    p.add_argument("--interval-lo", type=float)
    p.add_argument("--interval-hi", type=float)
    p.add_argument("--null-value", type=float, help="null phase (radians)")
    p.add_argument("--variant", choices=("as_printed", "consistent"), help="squeezed MZ variance formula")
    p.add_argument("--sigma-phase", type=float, help="phase at which sigma units are measured")
    p.add_argument("--alpha-freq", type=float, help="frequentist significance level")
    p.add_argument("--one-sided", dest="two_sided", action="store_const", const=False)
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--output", "-o")
    p.add_argument("--seed", type=int)


def resolve_config(args: argparse.Namespace, base: Optional[dict] = None) -> RunConfig:
    values = dict(base or {})
    if args.config:
        values.update(read_config_file(args.config))
    for key in _FIELD_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _output_path(cfg: RunConfig, stem: str, fmt: str) -> Path:
    if cfg.output:
        return Path(cfg.output)
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{stem}.{fmt}"


# ---------------------------------------------------------------------------
# commands

def cmd_posterior(args) -> int:
    cfg = resolve_config(args)
    sc = cfg.validate()
    if (args.outcome is None) == (args.sigma_units is None):
        raise ConfigError("give exactly one of OUTCOME or --sigma-units")
    outcome = sc.outcome_at(args.sigma_units) if args.outcome is None else args.outcome
    rep = evaluate(sc, outcome, cfg.alpha_freq)
    record = {
        "outcome": rep.outcome,
        "z_bar0": rep.posterior_null,
        "pvalue": rep.pvalue,
        "classification": str(rep.classification),
        "sigma_units": rep.sigma_units,
        "bayes_factor": rep.bayes_factor,
        "log_bayes_factor": rep.log_bayes_factor,
        "likelihood_null": rep.likelihood_null,
        "likelihood_alt": rep.likelihood_alt,
    }
    if cfg.format == "json":
        print(json.dumps(record))
    else:
        print(f"{'scenario':<18}{sc.kind}")
        for k, v in record.items():
            print(f"{k:<18}{v}")
    return EXIT_OK


def parse_axis(spec: str) -> tuple[str, list[float]]:
    """``name=lo:hi:step`` (inclusive) or ``name=v1,v2,...``."""
    if "=" not in spec:
        raise ConfigError(f"axis spec {spec!r} must look like name=values")
    name, vals = (s.strip() for s in spec.split("=", 1))
    try:
        if ":" in vals:
            lo, hi, step = (float(x) for x in vals.split(":"))
            if step <= 0 or hi < lo:
                raise ConfigError(f"axis {name}: need lo <= hi and step > 0")
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values = [round(lo + i * step, 12) for i in range(n)]
        else:
            values = [float(x) for x in vals.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse axis spec {spec!r}") from None
    if not values:
        raise ConfigError(f"axis {name} is empty")
    return name, values


def cmd_scan(args) -> int:
    base = {}
    axes: dict = {}
    stem = "scan"
    if args.preset:
        sc0, axes = figure_preset(args.preset)
        stem = args.preset
        base = {
            "scenario": sc0.kind, "alpha": sc0.alpha, "r": sc0.r, "squeeze_phase": sc0.squeeze_phase,
            "eta": sc0.eta, "z0": sc0.z0, "prior": sc0.prior, "prior_sigma": sc0.prior_sigma,
            "sigma_phase": sc0.sigma_phase,
        }
    for spec in args.axis or []:
        name, values = parse_axis(spec)
        axes[name] = values
    if not axes:
        raise ConfigError("no scan axes given (use --preset or --axis)")
    cfg = resolve_config(args, base)
    sc = cfg.validate()
    table = scan(sc, axes, cfg.alpha_freq, workers=args.workers)
    if cfg.format == "csv":
        text = table.to_csv()
    elif cfg.format == "json":
        text = table.to_json()
    else:
        text = render_svg(table, stem)
    path = _output_path(cfg, stem, cfg.format)
    _atomic_write(path, text)
    print(f"wrote {len(table.cells)} cells to {path}")
    if args.plot:
        _atomic_write(Path(args.plot), render_svg(table, stem))
        print(f"wrote plot to {args.plot}")
    return EXIT_OK


def _check_line(name: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'}  {name:<24}{detail}"


def cmd_validate(args) -> int:
    cfg = resolve_config(args)
    sc = cfg.validate()
    if args.trials < 10**4:
        raise ConfigError(f"validate needs at least 10^4 trials, got {args.trials}")
    lines = []
    all_ok = True

    # Skellam photocount statistics at the working point
    mz = sc if sc.kind == "mz-coherent" else replace(sc, kind="mz-coherent", z0=cfg.z0 or 0.99)
    phase0 = mz.null_phase
    batch = sample_coherent_mz(args.trials, mz.alpha, mz.eta, phase0, cfg.seed)
    shift = 1 if args.perturb_pmf else 0

    def pmf(d):
        return np.exp(coherent_log_pmf(np.asarray(d) - shift, mz.alpha, mz.eta, phase0))

    chk = empirical_distribution_check(batch, pmf, lattice=True)
    ok = chk.max_abs_freq_error < 3e-3 and chk.chi_square_ok(0.999)
    all_ok &= ok
    lines.append(_check_line("skellam_distribution", ok,
                             f"max|freq-pmf|={chk.max_abs_freq_error:.3e} chi2={chk.chi_square_stat:.2f} "
                             f"dof={chk.dof} q999={chk.chi_square_quantile():.2f}"))

    # Gaussian quadrature statistics of the homodyne null
    state = SqueezedCoherentState(cfg.alpha, 0.0, cfg.r, cfg.squeeze_phase or 0.0)
    hc = HomodyneConfig()
    m, v = quadrature_moments(state, hc)
    gbatch = sample_gaussian_model(args.trials, m, v, cfg.seed + 1, tag="homodyne", phase=0.0)
    edges = np.linspace(m - 5 * math.sqrt(v), m + 5 * math.sqrt(v), 51)
    gchk = empirical_distribution_check(gbatch, lambda q: outcome_pdf(q, state, hc), lattice=False, edges=edges)
    ok = gchk.max_abs_freq_error < 3e-3 and gchk.chi_square_ok(0.999)
    all_ok &= ok
    lines.append(_check_line("gaussian_distribution", ok,
                             f"max|freq-p|={gchk.max_abs_freq_error:.3e} chi2={gchk.chi_square_stat:.2f} "
                             f"dof={gchk.dof} q999={gchk.chi_square_quantile():.2f}"))

    # posterior calibration on the coherent interferometer
    cal = posterior_calibration(args.calibration_trials, mz, seed=cfg.seed + 2)
    worst = 0.0
    ok = True
    for b in cal.bins:
        if not b.count:
            continue
        worst = max(worst, b.calibration_error)
        # small bins are judged against their binomial spread
        if b.calibration_error >= max(0.05, 4.0 * b.standard_error):
            ok = False
    all_ok &= ok
    lines.append(_check_line("posterior_calibration", ok,
                             f"worst decile |freq-z|={worst:.4f} over {cal.n_trials} trials"))

    for line in lines:
        print(line)
    print("all checks passed" if all_ok else "validation FAILED")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindley-interf", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("posterior", help="posterior, p-value and class for one outcome")
    _add_config_flags(p)
    p.add_argument("outcome", type=float, nargs="?")
    p.add_argument("--sigma-units", type=float, help="outcome given as sigma units above the null mean")
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("scan", help="grid scan written as CSV/JSON/SVG")
    _add_config_flags(p)
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--axis", action="append", help="name=lo:hi:step or name=v1,v2 (repeatable)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot", help="also write an SVG plot here")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("validate", help="Monte Carlo checks of the models and the posterior")
    _add_config_flags(p)
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--calibration-trials", type=int, default=10**5)
    p.add_argument("--perturb-pmf", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"lindley-interf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"lindley-interf: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LindleyError as exc:
        print(f"lindley-interf: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
