"""Command-line surface: JSON experiment configs, pipeline orchestration, artifacts.

Subcommands: analyze, transform, convexity, solve-jko, solve-fd, compare,
sweep.  Every run is deterministic given (config, seed): outputs are CSV
tables with full-precision floats, JSON reports with sorted keys, and static
SVG plots.  All physical parameters are dimensionless.  On failure the
process prints a machine-readable error object and exits nonzero (2 for
configuration errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .convexity import ConvexityReport, convexity_report
from .energy import InternalEnergy, entropy_energy, power_energy
from .errors import ConfigError, DegflowError
from .fdsolver import FdConfig, FdTrajectory, compare_jko_fd, solve_original, solve_rescaled
from .jko import FlowTrajectory, JkoConfig, check_estimates, run_flow
from .mobility import MobilityFunction, check_assumptions, interior_grid, power_mobility
from .svgplot import line_plot
from .transform import (
    PotentialSpec,
    build_coefficients,
    build_map,
    quadratic_potential,
    zero_potential,
)
from .transport1d import (
    DensityProfile,
    bump_density,
    gaussian_density,
    quantiles_to_density,
    uniform_density,
)

_FMT = "%.17g"


# ---------------------------------------------------------------------------
# configuration schema
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "mobility", "potential", "energy", "initial", "solver", "jko", "fd",
    "convexity", "grid_n", "seed", "sweep", "compare_times",
}
_SECTION_KEYS = {
    "mobility": {"kind", "p"},
    "potential": {"kind", "c"},
    "energy": {"kind", "m"},
    "initial": {"kind", "mean", "sigma", "lo", "hi", "center", "width", "path"},
    "jko": {"tau", "n", "T", "newton_tol", "max_newton", "save_every"},
    "fd": {"domain", "cells", "cfl", "T", "L", "n_snapshots"},
    "convexity": {"n_p", "n_q", "q_min", "q_max"},
    "sweep": {"parameter", "values"},
}


def _check_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"section '{where}' must be an object")
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}.{key}'" if where else f"unknown key '{key}'")


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing required key '{where}.{key}'")
    return d[key]


def _number(d: dict, key: str, where: str, default=None, lo=None, hi=None, integer=False):
    if key not in d:
        if default is not None:
            return default
        raise ConfigError(f"missing required key '{where}.{key}'")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{where}.{key}' must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"'{where}.{key}' must be an integer")
    v = int(v) if integer else float(v)
    if lo is not None and v < lo:
        raise ConfigError(f"'{where}.{key}' must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"'{where}.{key}' must be <= {hi}")
    return v


def parse_mobility(d: dict) -> MobilityFunction:
    _check_keys(d, _SECTION_KEYS["mobility"], "mobility")
    kind = _need(d, "kind", "mobility")
    if kind == "power":
        return power_mobility(_number(d, "p", "mobility", lo=1e-12))
    if kind == "custom":
        raise ConfigError("custom mobilities are available through the library API only")
    raise ConfigError(f"unknown mobility kind '{kind}'")


def parse_potential(d: dict | None) -> PotentialSpec:
    if d is None:
        return zero_potential()
    _check_keys(d, _SECTION_KEYS["potential"], "potential")
    kind = _need(d, "kind", "potential")
    if kind == "zero":
        return zero_potential()
    if kind == "quadratic":
        return quadratic_potential(_number(d, "c", "potential", lo=0.0))
    if kind == "custom":
        raise ConfigError("custom potentials are available through the library API only")
    raise ConfigError(f"unknown potential kind '{kind}'")


def parse_energy(d: dict | None) -> InternalEnergy:
    if d is None:
        return entropy_energy()
    _check_keys(d, _SECTION_KEYS["energy"], "energy")
    kind = _need(d, "kind", "energy")
    if kind == "entropy":
        return entropy_energy()
    if kind == "power":
        m = _number(d, "m", "energy")
        if not m > 1.0:
            raise ConfigError("'energy.m' must be > 1")
        return power_energy(m)
    raise ConfigError(f"unknown energy kind '{kind}'")


def build_initial_density(d: dict, domain: str, config_dir: Path | None = None) -> DensityProfile:
    """Materialize the initial-datum spec as a density profile in `domain` ('x' or 'y')."""
    _check_keys(d, _SECTION_KEYS["initial"], "initial")
    kind = _need(d, "kind", "initial")
    if kind == "gaussian":
        mean = _number(d, "mean", "initial", default=0.0)
        sigma = _number(d, "sigma", "initial", lo=1e-12)
        if domain == "x":
            if abs(mean) + 8.0 * sigma >= 1.0:
                raise ConfigError("gaussian initial datum must fit inside (-1, 1) up to 8 sigma")
            return gaussian_density(mean, sigma, mean - 8.0 * sigma, mean + 8.0 * sigma, 4001)
        return gaussian_density(mean, sigma, mean - 10.0 * sigma, mean + 10.0 * sigma, 4001)
    if kind == "uniform":
        lo = _number(d, "lo", "initial")
        hi = _number(d, "hi", "initial")
        if not hi > lo:
            raise ConfigError("'initial.hi' must exceed 'initial.lo'")
        if domain == "x" and (lo <= -1.0 or hi >= 1.0):
            raise ConfigError("uniform initial datum must lie inside (-1, 1)")
        return uniform_density(lo, hi, 2001, pad=0.05 * (hi - lo))
    if kind == "bump":
        center = _number(d, "center", "initial", default=0.0)
        width = _number(d, "width", "initial", lo=1e-12)
        if domain == "x" and (center - width / 2 <= -1.0 or center + width / 2 >= 1.0):
            raise ConfigError("bump support must lie inside (-1, 1)")
        return bump_density(center, width)
    if kind == "csv":
        path = Path(_need(d, "path", "initial"))
        if config_dir is not None and not path.is_absolute():
            path = config_dir / path
        if not path.exists():
            raise ConfigError(f"initial datum file does not exist: {path}")
        return DensityProfile.from_csv(path)
    raise ConfigError(f"unknown initial datum kind '{kind}'")


def parse_jko(d: dict | None) -> tuple[JkoConfig, int] | None:
    if d is None:
        return None
    _check_keys(d, _SECTION_KEYS["jko"], "jko")
    cfg = JkoConfig(
        tau=_number(d, "tau", "jko", lo=1e-15),
        n=_number(d, "n", "jko", lo=4, integer=True),
        T=_number(d, "T", "jko", lo=0.0),
        newton_tol=_number(d, "newton_tol", "jko", default=1e-9, lo=1e-16),
        max_newton=_number(d, "max_newton", "jko", default=60, lo=1, integer=True),
    )
    save_every = _number(d, "save_every", "jko", default=max(1, cfg.n_steps // 10 or 1),
                         lo=1, integer=True)
    return cfg, save_every


def parse_fd(d: dict | None) -> FdConfig | None:
    if d is None:
        return None
    _check_keys(d, _SECTION_KEYS["fd"], "fd")
    domain = d.get("domain", "y")
    if domain not in ("x", "y"):
        raise ConfigError("'fd.domain' must be 'x' or 'y'")
    T = _number(d, "T", "fd", lo=0.0)
    n_snap = _number(d, "n_snapshots", "fd", default=11, lo=2, integer=True)
    save_times = tuple(np.linspace(0.0, T, n_snap)) if T > 0 else (0.0,)
    return FdConfig(
        domain=domain,
        cells=_number(d, "cells", "fd", lo=16, integer=True),
        T=T,
        cfl=_number(d, "cfl", "fd", default=0.9, lo=1e-6, hi=1.0),
        L=_number(d, "L", "fd", default=8.0, lo=1e-6),
        save_times=save_times,
    )


@dataclass
class ExperimentConfig:
    """Parsed and validated experiment description."""

    raw: dict
    mobility: MobilityFunction
    potential: PotentialSpec
    energy: InternalEnergy
    initial: dict | None
    solver: str | None
    jko: JkoConfig | None
    jko_save_every: int
    fd: FdConfig | None
    convexity_opts: dict
    grid_n: int
    seed: int
    config_dir: Path | None = None


def parse_config(raw: dict, config_dir: Path | None = None) -> ExperimentConfig:
    _check_keys(raw, _TOP_KEYS, "")
    if "mobility" not in raw:
        raise ConfigError("missing required key 'mobility'")
    mobility = parse_mobility(raw["mobility"])
    potential = parse_potential(raw.get("potential"))
    energy = parse_energy(raw.get("energy"))
    solver = raw.get("solver")
    if solver is not None and solver not in ("jko", "fd", "both"):
        raise ConfigError("'solver' must be one of 'jko', 'fd', 'both'")
    jko_parsed = parse_jko(raw.get("jko"))
    conv = raw.get("convexity") or {}
    _check_keys(conv, _SECTION_KEYS["convexity"], "convexity")
    convexity_opts = {
        "n_p": _number(conv, "n_p", "convexity", default=64, lo=8, integer=True),
        "n_q": _number(conv, "n_q", "convexity", default=64, lo=8, integer=True),
        "q_range": (
            _number(conv, "q_min", "convexity", default=1e-3, lo=1e-12),
            _number(conv, "q_max", "convexity", default=1e3),
        ),
    }
    if "sweep" in raw:
        _check_keys(raw["sweep"], _SECTION_KEYS["sweep"], "sweep")
    return ExperimentConfig(
        raw=raw,
        mobility=mobility,
        potential=potential,
        energy=energy,
        initial=raw.get("initial"),
        solver=solver,
        jko=None if jko_parsed is None else jko_parsed[0],
        jko_save_every=1 if jko_parsed is None else jko_parsed[1],
        fd=parse_fd(raw.get("fd")),
        convexity_opts=convexity_opts,
        grid_n=_number(raw, "grid_n", "", default=1001, lo=16, integer=True),
        seed=_number(raw, "seed", "", default=0, integer=True),
        config_dir=config_dir,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw, config_dir=path.parent)


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _analysis_dict(cfg: ExperimentConfig) -> dict:
    rep = check_assumptions(cfg.mobility, cfg.grid_n)
    decay = cfg.mobility.decay_class
    return {
        "g1_ok": rep.g1_ok,
        "g3_ok": rep.g3_ok,
        "c_g": rep.c_g,
        "g3_min": rep.g3_min,
        "grid_n": rep.grid_n,
        "g_at_zero": rep.g_at_zero,
        "edge_values": list(rep.edge_values),
        "decay": {
            "kind": decay.kind,
            "half_width": None if not decay.is_slow else decay.half_width,
        },
    }


def _convexity_dict(rep: ConvexityReport) -> dict:
    return {
        "lambda_best": rep.lambda_best,
        "lambda_formula": rep.lambda_formula,
        "regime": rep.regime,
        "m": rep.m,
        "conditions": [
            {"name": c.name, "passed": c.passed, "detail": c.detail} for c in rep.conditions
        ],
        "all_conditions_pass": rep.all_conditions_pass,
        "psd_true_fraction": float(np.mean(rep.psd_grid)),
        "grid_meta": rep.grid_meta,
    }


# ---------------------------------------------------------------------------
# artifact emission
# ---------------------------------------------------------------------------

def emit_plots(traj, out: Path, quiet: bool = False) -> list[Path]:
    """Write SVG snapshot overlays and diagnostic series for a trajectory."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if isinstance(traj, FlowTrajectory):
        if len(traj.profiles) == 0:
            if not quiet:
                print("warning: empty trajectory, no plots written", file=sys.stderr)
            return written
        idx = sorted(set(np.linspace(0, len(traj.profiles) - 1, 8).astype(int)))
        dens = [
            (quantiles_to_density(traj.profiles[i]), traj.times[i]) for i in idx
        ]
        series = [(d.grid, d.values, f"t={t:.4g}") for d, t in dens]
        p = out / "profiles.svg"
        line_plot(p, series, title="density snapshots", xlabel="y", ylabel="rho")
        written.append(p)
        diag = traj.diagnostics
        for name, arr in (("energy", diag.energy), ("entropy", diag.entropy), ("m2", diag.m2)):
            p = out / f"{name}.svg"
            line_plot(p, [(traj.times, arr, name)], title=f"{name} vs time", xlabel="t", ylabel=name)
            written.append(p)
        return written

    if isinstance(traj, FdTrajectory):
        if len(traj.densities) == 0:
            if not quiet:
                print("warning: empty trajectory, no plots written", file=sys.stderr)
            return written
        idx = sorted(set(np.linspace(0, len(traj.densities) - 1, 8).astype(int)))
        series = [
            (traj.densities[i].grid, traj.densities[i].values, f"t={traj.times[i]:.4g}")
            for i in idx
        ]
        p = out / "profiles.svg"
        xlab = "x" if traj.domain == "x" else "y"
        line_plot(p, series, title="density snapshots", xlabel=xlab, ylabel="density")
        written.append(p)
        diag = traj.diagnostics
        for name, arr in (
            ("energy", diag.energy),
            ("entropy", diag.entropy),
            ("m2", diag.m2),
            ("mass", diag.mass),
        ):
            p = out / f"{name}.svg"
            line_plot(p, [(diag.times, arr, name)], title=f"{name} vs time", xlabel="t", ylabel=name)
            written.append(p)
        return written

    raise TypeError(f"cannot plot object of type {type(traj).__name__}")


def _write_jko_outputs(traj: FlowTrajectory, out: Path, save_every: int, quiet: bool) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    n_steps = len(traj.profiles) - 1
    saved = []
    for k in range(0, n_steps + 1, save_every):
        fname = out / f"profile_{k:06d}.csv"
        traj.profiles[k].to_csv(fname)
        saved.append({"step": k, "time": float(traj.times[k]), "file": fname.name})
    if saved[-1]["step"] != n_steps:
        fname = out / f"profile_{n_steps:06d}.csv"
        traj.profiles[-1].to_csv(fname)
        saved.append({"step": n_steps, "time": float(traj.times[-1]), "file": fname.name})

    diag = traj.diagnostics
    w2_col = np.concatenate([[0.0], diag.w2_steps])
    table = np.column_stack(
        [np.arange(n_steps + 1), traj.times, diag.energy, diag.entropy, w2_col, diag.m2, diag.weighted_lm]
    )
    np.savetxt(
        out / "diagnostics.csv",
        table,
        delimiter=",",
        header="step,time,energy,entropy,w2_step,m2,weighted_lm",
        comments="",
        fmt=_FMT,
    )
    emit_plots(traj, out, quiet=quiet)
    return {"n_steps": n_steps, "saved_profiles": saved, "tau": traj.tau}


def _write_fd_outputs(traj: FdTrajectory, out: Path, quiet: bool) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    saved = []
    for k, rho in enumerate(traj.densities):
        fname = out / f"density_{k:04d}.csv"
        rho.to_csv(fname)
        saved.append({"index": k, "time": float(traj.times[k]), "file": fname.name})
    diag = traj.diagnostics
    table = np.column_stack(
        [diag.times, diag.mass, diag.energy, diag.entropy, diag.lm_norm, diag.m2, diag.min_value]
    )
    np.savetxt(
        out / "diagnostics.csv",
        table,
        delimiter=",",
        header="time,mass,energy,entropy,lm_norm,m2,min_value",
        comments="",
        fmt=_FMT,
    )
    emit_plots(traj, out, quiet=quiet)
    return {
        "scheme": "explicit upwind finite volume, zero-flux/degenerate edges",
        "domain": traj.domain,
        "cells": traj.config.cells,
        "cfl": traj.config.cfl,
        "n_steps": traj.diagnostics.n_steps,
        "dt_min": traj.diagnostics.dt_min,
        "dt_max": traj.diagnostics.dt_max,
        "mass_drift": float(abs(diag.mass[-1] - diag.mass[0])),
        "saved_densities": saved,
    }


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    """Full pipeline: analyze, transform, certify convexity, solve, compare.

    Returns the report dictionary (also written to <out>/report.json).
    Deterministic given the parsed config and seed.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report: dict = {"config": cfg.raw, "seed": cfg.seed}
    report["mobility"] = _analysis_dict(cfg)

    conv = convexity_report(
        cfg.mobility, cfg.potential, cfg.energy,
        n_p=cfg.convexity_opts["n_p"], n_q=cfg.convexity_opts["n_q"],
        q_range=cfg.convexity_opts["q_range"],
    )
    report["convexity"] = _convexity_dict(conv)

    solver = cfg.solver or ("jko" if cfg.jko is not None else "fd")
    need_transform = solver in ("jko", "both") or (cfg.fd is not None and cfg.fd.domain == "y")
    coeff = None
    if need_transform:
        cmap = build_map(cfg.mobility)
        coeff = build_coefficients(cmap, cfg.potential, grid_n=cfg.grid_n)

    traj_jko = None
    traj_fd = None
    if solver in ("jko", "both"):
        if cfg.jko is None:
            raise ConfigError("solver requires a 'jko' section")
        if cfg.initial is None:
            raise ConfigError("solver requires an 'initial' section")
        rho0 = build_initial_density(cfg.initial, "y", cfg.config_dir)
        traj_jko = run_flow(rho0, coeff, cfg.energy, cfg.jko)
        info = _write_jko_outputs(traj_jko, out / "jko", cfg.jko_save_every, quiet)
        est = check_estimates(traj_jko, coeff, cfg.energy, seed=cfg.seed)
        info["estimates"] = asdict(est)
        report["jko"] = info
        _write_json(out / "jko" / "report.json", info)

    if solver in ("fd", "both"):
        if cfg.fd is None:
            raise ConfigError("solver requires an 'fd' section")
        if cfg.initial is None:
            raise ConfigError("solver requires an 'initial' section")
        if cfg.fd.domain == "y":
            rho0 = build_initial_density(cfg.initial, "y", cfg.config_dir)
            traj_fd = solve_rescaled(rho0, coeff, cfg.energy, cfg.fd)
        else:
            u0 = build_initial_density(cfg.initial, "x", cfg.config_dir)
            traj_fd = solve_original(u0, cfg.mobility, cfg.potential, cfg.energy, cfg.fd)
        info = _write_fd_outputs(traj_fd, out / "fd", quiet)
        report["fd"] = info
        _write_json(out / "fd" / "report.json", info)

    if solver == "both":
        if cfg.fd.domain != "y":
            raise ConfigError("comparison requires the finite-volume run in the transformed domain ('fd.domain' = 'y')")
        t_max = min(traj_jko.horizon, float(traj_fd.times[-1]))
        times = cfg.raw.get("compare_times")
        if times is None:
            times = [float(t) for t in traj_fd.times if t <= t_max + 1e-12]
        comp = compare_jko_fd(traj_jko, traj_fd, times)
        report["comparison"] = comp.to_dict()
        _write_json(out / "comparison.json", comp.to_dict())

    _write_json(out / "report.json", report)
    if not quiet:
        print(f"report written to {out / 'report.json'}")
    return report


def _set_by_path(d: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    cur = d
    for k in keys[:-1]:
        if k not in cur or not isinstance(cur[k], dict):
            cur[k] = {}
        cur = cur[k]
    cur[keys[-1]] = value


def run_sweep(cfg: ExperimentConfig, out: Path, quiet: bool = False) -> dict:
    """Run the base experiment once per sweep value, in parallel subdirectories."""
    sweep = cfg.raw.get("sweep")
    if not sweep:
        raise ConfigError("sweep command requires a 'sweep' section")
    param = sweep.get("parameter")
    values = sweep.get("values")
    if not isinstance(param, str) or not isinstance(values, list) or not values:
        raise ConfigError("'sweep' needs a string 'parameter' and a nonempty 'values' list")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)

    def one(value):
        raw = copy.deepcopy(cfg.raw)
        raw.pop("sweep", None)
        _set_by_path(raw, param, value)
        sub = out / f"{param.replace('.', '_')}={value:g}"
        child = parse_config(raw, config_dir=cfg.config_dir)
        run_experiment(child, sub, quiet=True)
        return {"value": value, "out": str(sub)}

    max_workers = int(os.environ.get("DEGFLOW_THREADS", "0")) or min(4, len(values))
    results = []
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        for res in pool.map(one, values):
            results.append(res)
    summary = {"parameter": param, "runs": results}
    _write_json(out / "sweep_report.json", summary)
    if not quiet:
        print(f"sweep report written to {out / 'sweep_report.json'}")
    return summary


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    res = _analysis_dict(cfg)
    _write_json(out / "analysis.json", res)
    if not quiet:
        print(json.dumps(res, indent=2, sort_keys=True))
    return 0


def cmd_transform(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    cmap = build_map(cfg.mobility)
    coeff = build_coefficients(cmap, cfg.potential, grid_n=cfg.grid_n)
    x = interior_grid(min(cfg.grid_n, 2001))
    y = np.asarray(cmap.alpha(x), dtype=float)
    a, r1, r2 = coeff.a_bundle(y)
    V, V1, V2 = coeff.v_bundle(y)
    table = np.column_stack([x, y, a, r1, r2, V, V1, V2])
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        out / "transform_table.csv",
        table,
        delimiter=",",
        header="x,y,a,a_ratio1,a_ratio2,V,V_d1,V_d2",
        comments="",
        fmt=_FMT,
    )
    _write_json(
        out / "transform_meta.json",
        {"L_bound": coeff.L_bound, "lambda_gw1": coeff.lambda_gw1, "grid_n": int(x.size)},
    )
    if not quiet:
        print(f"transform table written to {out / 'transform_table.csv'}")
    return 0


def cmd_convexity(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    rep = convexity_report(
        cfg.mobility, cfg.potential, cfg.energy,
        n_p=cfg.convexity_opts["n_p"], n_q=cfg.convexity_opts["n_q"],
        q_range=cfg.convexity_opts["q_range"],
    )
    res = _convexity_dict(rep)
    _write_json(out / "convexity.json", res)
    if not quiet:
        print(json.dumps(res, indent=2, sort_keys=True))
    return 0


def _forced_solver(cfg: ExperimentConfig, solver: str) -> ExperimentConfig:
    return ExperimentConfig(**{**cfg.__dict__, "solver": solver})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="degflow",
        description="1D degenerate-mobility diffusion: transform, convexity, flows, cross-checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "transform", "convexity", "solve-jko", "solve-fd", "compare", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to the JSON experiment config")
        sp.add_argument("--out", default="degflow_out", help="output directory")
        sp.add_argument("--quiet", action="store_true", help="suppress non-error output")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        if args.command == "analyze":
            return cmd_analyze(cfg, out, args.quiet)
        if args.command == "transform":
            return cmd_transform(cfg, out, args.quiet)
        if args.command == "convexity":
            return cmd_convexity(cfg, out, args.quiet)
        if args.command == "solve-jko":
            run_experiment(_forced_solver(cfg, "jko"), out, args.quiet)
            return 0
        if args.command == "solve-fd":
            run_experiment(_forced_solver(cfg, "fd"), out, args.quiet)
            return 0
        if args.command == "compare":
            run_experiment(_forced_solver(cfg, "both"), out, args.quiet)
            return 0
        if args.command == "sweep":
            run_sweep(cfg, out, args.quiet)
            return 0
        raise ConfigError(f"unknown command {args.command}")
    except DegflowError as exc:
        payload = {"status": "error", "error_type": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload, sort_keys=True))
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
