"""Experiment runner: figure-style sweeps to CSV plus a JSON manifest.

Subcommands: wdist, snrcdf, outage, rate, ser, quantization, correlation,
sweep.  Output is data only (one CSV per curve, fixed column schema), never
rendered plots.  Exit codes: 0 success, 2 configuration error, 3 numerical
consistency failure.

Configuration is a nested YAML file; dB quantities carry a ``_db`` key
suffix.  An empty (or missing) file yields the documented default
configuration; a previously written manifest can be passed back through
``--config`` to reproduce a run byte-for-byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .channel import Distances, Modulation, PathLossModel, SystemConfig
from .cltapprox import w_stats
from .correlation import AngleSpread, CorrelationConfig, simulate_scheme_rates
from .errors import ConfigError, IrsLinkError, NumericalConsistencyError, UnsupportedShapeError
from .metrics import (asymptotic_outage, asymptotic_ser, outage_probability,
                      quantized_rate_bounds, rate_bounds, ser_upper_bound)
from .montecarlo import (SimPlan, empirical_ber, empirical_cdf, empirical_outage,
                         empirical_rate, simulate_snr_samples)
from .snrdist import SnrCdfParams, envelope_pdf, snr_cdf

CSV_HEADER = ["x_unit", "x", "analytic", "asymptotic", "mc", "mc_ci_low", "mc_ci_high"]

KINDS = ("wdist", "snrcdf", "outage", "rate", "ser", "quantization", "correlation", "sweep")

# Documented defaults: the standard geometry (source-destination 100 m,
# surface legs 60 m each), shapes (2, 3, 4), eta 0.9, BPSK, 20 dB transmit
# SNR, 10 dB outage threshold.  The reference path-loss offset enters as a
# gain, hence the negative zeta0_db; see README.
DEFAULT_CONFIG = {
    "n_elements": 16,
    "eta": 0.9,
    "fading": {"m_v": 2.0, "m_g": 3.0, "m_h": 4.0},
    "distances": {"d_sd_m": 100.0, "d_si_m": 60.0, "d_di_m": 60.0},
    "pathloss": {"zeta0_db": -42.0, "exponent": 3.5},
    "gamma_bar_db": 20.0,
    "gamma_th_db": 10.0,
    "modulation": {"alpha": 1.0, "beta": 2.0},
    "trials": 100_000,
    "seed": 1,
    "workers": 1,
    "sweep": {"variable": "gamma_bar_db", "values": [float(x) for x in range(0, 46, 3)]},
    "quantization": {"bits": [1, 2, 4], "n_values": [32, 64, 128]},
    "correlation": {
        "surface_side_m": 1.0,
        "wavelength_m": 0.1,
        "n_values": [16, 36, 64, 100, 144],
        "aoa": {"mean_az_deg": 45.0, "std_az_deg": 5.7, "mean_el_deg": 60.0, "std_el_deg": 5.7},
        "aod": {"mean_az_deg": -30.0, "std_az_deg": 5.7, "mean_el_deg": 75.0, "std_el_deg": 5.7},
    },
}


@dataclass
class ExperimentSpec:
    kind: str
    config: SystemConfig
    plan: SimPlan
    resolved: dict = field(default_factory=dict)
    sweep_variable: str = "gamma_bar_db"
    sweep_values: tuple = ()
    gamma_th_db: float = 10.0
    quantization_bits: tuple = (1, 2, 4)
    quantization_n: tuple = (32, 64, 128)
    output_dir: Path = Path("out")
    use_mc: bool = True


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def validate_config(raw: dict | None, kind: str = "sweep") -> tuple[SystemConfig, dict]:
    """Resolve the raw mapping against defaults; aggregate every violation."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(["configuration root must be a mapping"])
    resolved = _merge(DEFAULT_CONFIG, raw)
    errors = []

    def grab(path, cast, check=None, message=None):
        node = resolved
        try:
            for part in path.split("."):
                node = node[part]
            value = cast(node)
        except (KeyError, TypeError, ValueError):
            errors.append(f"{path}: missing or malformed")
            return None
        if check is not None and not check(value):
            errors.append(f"{path}: {message}")
            return None
        return value

    n = grab("n_elements", int, lambda v: v >= 0, "must be >= 0")
    eta = grab("eta", float, lambda v: 0 < v <= 1.0, "eta_n must lie in (0, 1]")
    m_v = grab("fading.m_v", float, lambda v: v >= 0.5, "Nakagami shape must be >= 0.5")
    m_g = grab("fading.m_g", float, lambda v: v >= 0.5, "Nakagami shape must be >= 0.5")
    m_h = grab("fading.m_h", float, lambda v: v >= 0.5, "Nakagami shape must be >= 0.5")
    d_sd = grab("distances.d_sd_m", float, lambda v: v > 0, "distance must be positive")
    d_si = grab("distances.d_si_m", float, lambda v: v > 0, "distance must be positive")
    d_di = grab("distances.d_di_m", float, lambda v: v > 0, "distance must be positive")
    zeta0 = grab("pathloss.zeta0_db", float)
    ple = grab("pathloss.exponent", float, lambda v: v > 0, "exponent must be positive")
    gbar_db = grab("gamma_bar_db", float)
    gth_db = grab("gamma_th_db", float)
    alpha = grab("modulation.alpha", float, lambda v: v > 0, "alpha must be positive")
    beta = grab("modulation.beta", float, lambda v: v > 0, "beta must be positive")
    trials = grab("trials", int, lambda v: v >= 1, "trials must be >= 1")
    seed = grab("seed", int)
    workers = grab("workers", int, lambda v: v >= 1, "workers must be >= 1")
    values = grab("sweep.values", list, lambda v: len(v) > 0, "sweep values must be nonempty")
    variable = grab("sweep.variable", str,
                    lambda v: v in ("gamma_bar_db", "n_elements"),
                    "sweep variable must be gamma_bar_db or n_elements")

    if values is not None:
        vals = [float(v) for v in values]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            errors.append("sweep.values: must be strictly increasing")

    if kind in ("snrcdf", "outage") and m_v is not None:
        if abs(2 * m_v - round(2 * m_v)) > 1e-12:
            errors.append(
                f"fading.m_v: {m_v} has no closed-form SNR distribution; use a "
                "multiple of 1/2 (0.5, 1, 1.5, ...) or run Monte-Carlo sweeps only")

    if errors:
        raise ConfigError(errors)

    cfg = SystemConfig.from_geometry(
        n_elements=n, m_v=m_v, m_g=m_g, m_h=m_h,
        distances=Distances(d_sd=d_sd, d_si=d_si, d_di=d_di),
        pathloss=PathLossModel(zeta0_db=zeta0, exponent=ple),
        eta=eta, gamma_bar_db=gbar_db,
        modulation=Modulation(alpha=alpha, beta=beta),
    )
    resolved["gamma_th_db"] = gth_db
    resolved["trials"], resolved["seed"], resolved["workers"] = trials, seed, workers
    return cfg, resolved


def _spec_from_resolved(kind: str, resolved: dict, out_dir: Path,
                        use_mc: bool = True) -> ExperimentSpec:
    cfg, resolved = validate_config(resolved, kind)
    plan = SimPlan(trials=int(resolved["trials"]), seed=int(resolved["seed"]),
                   workers=int(resolved["workers"]))
    quant = resolved["quantization"]
    return ExperimentSpec(
        kind=kind, config=cfg, plan=plan, resolved=resolved,
        sweep_variable=resolved["sweep"]["variable"],
        sweep_values=tuple(float(v) for v in resolved["sweep"]["values"]),
        gamma_th_db=float(resolved["gamma_th_db"]),
        quantization_bits=tuple(int(b) for b in quant["bits"]),
        quantization_n=tuple(int(v) for v in quant["n_values"]),
        output_dir=out_dir, use_mc=use_mc,
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".12g")


def _write_curve(path: Path, x_unit: str, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([x_unit, _fmt(row[0])] + [_fmt(v) for v in row[1:]])


def _curve_rows(x, analytic=None, asymptotic=None, mc=None, lo=None, hi=None):
    def pick(seq, i):
        return None if seq is None else seq[i]
    return [(xi, pick(analytic, i), pick(asymptotic, i), pick(mc, i), pick(lo, i), pick(hi, i))
            for i, xi in enumerate(x)]


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return f"irslink-{__version__}"


def _gamma_sweep(spec: ExperimentSpec):
    if spec.sweep_variable != "gamma_bar_db":
        raise ConfigError([f"{spec.kind}: sweep variable must be gamma_bar_db"])
    return list(spec.sweep_values)


def _run_wdist(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    cfg = spec.config
    tn = w_stats(cfg)
    sd = tn.sigma_bar
    grid = np.linspace(max(1e-9, tn.mu_bar - 5 * sd), tn.mu_bar + 5 * sd, 201)
    xi_phi = tn.xi / math.sqrt(2 * math.pi * tn.sigma2_bar)
    pdf = xi_phi * np.exp(-((grid - tn.mu_bar) ** 2) / (2 * tn.sigma2_bar))
    from .specfun import gaussian_q
    cdf = 1.0 - tn.xi * gaussian_q((grid - tn.mu_bar) / sd)
    mc_pdf = mc_cdf = None
    if spec.use_mc:
        samples = _reflected_sum_samples(cfg, spec.plan)
        hist, edges = np.histogram(samples, bins=80,
                                   range=(float(grid[0]), float(grid[-1])), density=True)
        centers = 0.5 * (edges[1:] + edges[:-1])
        mc_pdf = np.interp(grid, centers, hist)
        mc_cdf = empirical_cdf(samples)(grid)
        extras["mc_trials"] = spec.plan.trials
    files["wdist_pdf"] = _emit(spec, "wdist_pdf.csv", "w",
                               _curve_rows(grid, analytic=pdf, mc=mc_pdf))
    files["wdist_cdf"] = _emit(spec, "wdist_cdf.csv", "w",
                               _curve_rows(grid, analytic=cdf, mc=mc_cdf))
    extras["mu_bar"], extras["sigma2_bar"], extras["xi"] = tn.mu_bar, tn.sigma2_bar, tn.xi


def _reflected_sum_samples(cfg: SystemConfig, plan: SimPlan) -> np.ndarray:
    from .montecarlo import _chunk_size, chunk_rng
    size = _chunk_size(cfg.n_elements)
    parts = []
    for index, start in enumerate(range(0, plan.trials, size)):
        count = min(size, plan.trials - start)
        rng = chunk_rng(plan.seed, index)
        g = np.sqrt(rng.gamma(cfg.g.m, np.broadcast_to(cfg.zeta_g, (count, cfg.n_elements))))
        h = np.sqrt(rng.gamma(cfg.h.m, np.broadcast_to(cfg.zeta_h, (count, cfg.n_elements))))
        parts.append((g * h * cfg.eta).sum(axis=1))
    return np.concatenate(parts)


def _run_snrcdf(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    cfg = spec.config
    params = SnrCdfParams.from_config(cfg)
    mean_db = 10 * math.log10(cfg.gamma_bar * (params.tn.mu_bar**2 + 1e-300))
    grid_db = np.linspace(mean_db - 12.0, mean_db + 6.0, 121)
    y = 10 ** (grid_db / 10)
    analytic = snr_cdf(y, params)
    mc = None
    if spec.use_mc:
        samples = simulate_snr_samples(cfg, spec.plan)
        mc = empirical_cdf(samples)(y)
        extras["ks_distance"] = float(np.max(np.abs(mc - analytic)))
    files["snrcdf"] = _emit(spec, "snrcdf.csv", "gamma_db",
                            _curve_rows(grid_db, analytic=analytic, mc=mc))


def _run_outage(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    cfg = spec.config
    gamma_th = 10 ** (spec.gamma_th_db / 10)
    sweep = _gamma_sweep(spec)
    analytic, asymptote = [], []
    result, evaluator = asymptotic_outage(cfg, gamma_th)
    extras["diversity_order"] = result.g_d
    extras["log10_omega_op"] = result.log_omega_op / math.log(10)
    for db in sweep:
        c = cfg.with_gamma_bar_db(db)
        analytic.append(outage_probability(gamma_th, SnrCdfParams.from_config(c)))
        asymptote.append(evaluator(c.gamma_bar))
    files["outage_analytic"] = _emit(spec, "outage_analytic.csv", "gamma_bar_db",
                                     _curve_rows(sweep, analytic=analytic))
    files["outage_asymptotic"] = _emit(spec, "outage_asymptotic.csv", "gamma_bar_db",
                                       _curve_rows(sweep, asymptotic=asymptote))
    if spec.use_mc:
        mc, lo, hi = [], [], []
        for db in sweep:
            est = empirical_outage(
                simulate_snr_samples(cfg.with_gamma_bar_db(db), spec.plan), gamma_th)
            mc.append(est.value)
            lo.append(est.ci_low)
            hi.append(est.ci_high)
        files["outage_mc"] = _emit(spec, "outage_mc.csv", "gamma_bar_db",
                                   _curve_rows(sweep, mc=mc, lo=lo, hi=hi))


def _run_rate(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    cfg = spec.config
    sweep = _gamma_sweep(spec)
    lbs, ubs = [], []
    for db in sweep:
        b = rate_bounds(cfg.with_gamma_bar_db(db))
        lbs.append(b.lower)
        ubs.append(b.upper)
    files["rate_lower"] = _emit(spec, "rate_lower.csv", "gamma_bar_db",
                                _curve_rows(sweep, analytic=lbs))
    files["rate_upper"] = _emit(spec, "rate_upper.csv", "gamma_bar_db",
                                _curve_rows(sweep, analytic=ubs))
    if spec.use_mc:
        mc, lo, hi = [], [], []
        for db in sweep:
            est = empirical_rate(simulate_snr_samples(cfg.with_gamma_bar_db(db), spec.plan))
            mc.append(est.value)
            lo.append(est.ci_low)
            hi.append(est.ci_high)
        files["rate_mc"] = _emit(spec, "rate_mc.csv", "gamma_bar_db",
                                 _curve_rows(sweep, mc=mc, lo=lo, hi=hi))


def _run_ser(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    cfg = spec.config
    sweep = _gamma_sweep(spec)
    bound = [ser_upper_bound(cfg.with_gamma_bar_db(db)) for db in sweep]
    result, evaluator = asymptotic_ser(cfg)
    asym = [evaluator(10 ** (db / 10)) for db in sweep]
    extras["diversity_order"] = result.g_d
    extras["coding_gain"] = result.g_c
    files["ser_bound"] = _emit(spec, "ser_bound.csv", "gamma_bar_db",
                               _curve_rows(sweep, analytic=bound))
    files["ser_asymptotic"] = _emit(spec, "ser_asymptotic.csv", "gamma_bar_db",
                                    _curve_rows(sweep, asymptotic=asym))
    if spec.use_mc:
        mod = cfg.modulation
        mc, lo, hi = [], [], []
        for db in sweep:
            est = empirical_ber(simulate_snr_samples(cfg.with_gamma_bar_db(db), spec.plan),
                                mod.alpha, mod.beta)
            mc.append(est.value)
            lo.append(est.ci_low)
            hi.append(est.ci_high)
        files["ser_mc"] = _emit(spec, "ser_mc.csv", "gamma_bar_db",
                                _curve_rows(sweep, mc=mc, lo=lo, hi=hi))


def _run_quantization(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    sweep = _gamma_sweep(spec)
    for n in spec.quantization_n:
        cfg_n = spec.config.with_n_elements(n)
        for bits in spec.quantization_bits:
            analytic, mc, lo, hi = [], None, None, None
            for db in sweep:
                c = cfg_n.with_gamma_bar_db(db)
                qb, cb = quantized_rate_bounds(c, bits), rate_bounds(c)
                analytic.append(100.0 * (qb.lower + qb.upper) / (cb.lower + cb.upper))
            if spec.use_mc:
                mc, lo, hi = [], [], []
                for db in sweep:
                    c = cfg_n.with_gamma_bar_db(db)
                    plain = empirical_rate(simulate_snr_samples(c, spec.plan))
                    quant = empirical_rate(simulate_snr_samples(
                        c, SimPlan(trials=spec.plan.trials, seed=spec.plan.seed,
                                   workers=spec.plan.workers, quantization_bits=bits)))
                    pct = 100.0 * quant.value / plain.value
                    width = 100.0 * (quant.ci_high - quant.ci_low) / plain.value
                    mc.append(pct)
                    lo.append(pct - width / 2)
                    hi.append(pct + width / 2)
            name = f"quantization_b{bits}_n{n}"
            files[name] = _emit(spec, f"{name}.csv", "gamma_bar_db",
                                _curve_rows(sweep, analytic=analytic, mc=mc, lo=lo, hi=hi))


def _correlation_config(resolved: dict, n: int) -> CorrelationConfig:
    cc = resolved["correlation"]
    def spread(block):
        return AngleSpread(
            mean_az=math.radians(float(block["mean_az_deg"])),
            std_az=math.radians(float(block["std_az_deg"])),
            mean_el=math.radians(float(block["mean_el_deg"])),
            std_el=math.radians(float(block["std_el_deg"])),
        )
    return CorrelationConfig.square_surface(
        n, float(cc["surface_side_m"]), float(cc["wavelength_m"]),
        aoa=spread(cc["aoa"]), aod=spread(cc["aod"]))


def _run_correlation(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    n_values = [int(v) for v in spec.resolved["correlation"]["n_values"]]
    curves = {1: ([], [], []), 2: ([], [], [])}
    for n in n_values:
        cfg_n = spec.config.with_n_elements(n)
        corr = _correlation_config(spec.resolved, n)
        rates = simulate_scheme_rates(cfg_n, corr, spec.plan)
        for s in (1, 2):
            curves[s][0].append(rates[s].value)
            curves[s][1].append(rates[s].ci_low)
            curves[s][2].append(rates[s].ci_high)
    for s in (1, 2):
        name = f"correlation_scheme{s}"
        files[name] = _emit(spec, f"{name}.csv", "n_elements",
                            _curve_rows(n_values, mc=curves[s][0],
                                        lo=curves[s][1], hi=curves[s][2]))


def _run_sweep(spec: ExperimentSpec, files: dict, extras: dict) -> None:
    cfg = spec.config
    sweep = list(spec.sweep_values)
    lbs, ubs, mc, lo, hi = [], [], [], [], []
    for value in sweep:
        if spec.sweep_variable == "gamma_bar_db":
            c = cfg.with_gamma_bar_db(value)
        else:
            c = cfg.with_n_elements(int(value))
        b = rate_bounds(c)
        lbs.append(b.lower)
        ubs.append(b.upper)
        if spec.use_mc:
            est = empirical_rate(simulate_snr_samples(c, spec.plan))
            mc.append(est.value)
            lo.append(est.ci_low)
            hi.append(est.ci_high)
    unit = spec.sweep_variable
    files["sweep_rate_lower"] = _emit(spec, "sweep_rate_lower.csv", unit,
                                      _curve_rows(sweep, analytic=lbs))
    files["sweep_rate_upper"] = _emit(spec, "sweep_rate_upper.csv", unit,
                                      _curve_rows(sweep, analytic=ubs))
    if spec.use_mc:
        files["sweep_rate_mc"] = _emit(spec, "sweep_rate_mc.csv", unit,
                                       _curve_rows(sweep, mc=mc, lo=lo, hi=hi))


def _emit(spec: ExperimentSpec, name: str, x_unit: str, rows) -> str:
    path = spec.output_dir / name
    _write_curve(path, x_unit, rows)
    return name


_RUNNERS = {
    "wdist": _run_wdist,
    "snrcdf": _run_snrcdf,
    "outage": _run_outage,
    "rate": _run_rate,
    "ser": _run_ser,
    "quantization": _run_quantization,
    "correlation": _run_correlation,
    "sweep": _run_sweep,
}


def run_experiment(spec: ExperimentSpec) -> Path:
    """Execute one experiment; returns the manifest path."""
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    files: dict[str, str] = {}
    extras: dict[str, object] = {}
    _RUNNERS[spec.kind](spec, files, extras)
    manifest = {
        "experiment": {
            "kind": spec.kind,
            "config": spec.resolved,
            "no_mc": not spec.use_mc,
        },
        "artifact": {"build": _git_describe(), "version": __version__},
        "wall_clock_seconds": round(time.time() - started, 3),
        "files": files,
        "extras": extras,
    }
    path = spec.output_dir / "manifest.json"
    with path.open("w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return path


def load_config_file(path: str | None) -> dict:
    """YAML config or a previously written JSON manifest (re-ingestion)."""
    if path is None:
        return {}
    text = Path(path).read_text()
    if not text.strip():
        return {}
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError(["configuration root must be a mapping"])
    if "experiment" in data and isinstance(data["experiment"], dict):
        return data["experiment"].get("config", {})
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irslink",
        description="Analytic + Monte-Carlo performance curves for a surface-aided link")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="YAML config (or a manifest.json to reproduce)")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument("--trials", type=int, help="override the Monte-Carlo trial count")
        p.add_argument("--workers", type=int, help="override the worker count")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--no-mc", action="store_true",
                       help="emit analytic curves only, leaving MC columns empty")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config_file(args.config)
        for key, val in (("seed", args.seed), ("trials", args.trials),
                         ("workers", args.workers)):
            if val is not None:
                raw[key] = val
        spec = _spec_from_resolved(args.kind, raw, Path(args.out),
                                   use_mc=not args.no_mc)
        manifest = run_experiment(spec)
    except (ConfigError, UnsupportedShapeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalConsistencyError as exc:
        print(f"numerical consistency failure: {exc}", file=sys.stderr)
        return 3
    print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
