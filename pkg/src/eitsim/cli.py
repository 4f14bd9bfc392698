"""Command-line front end: delimited data files plus a run manifest.

Exit codes: 0 success, 1 invalid input or configuration, 2 a physics or
convergence failure (no transparency window found, quadrature budget
exhausted, singular systems).
"""

import argparse
import concurrent.futures
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (PRESET_COMMANDS, PRESETS, RunConfig, build_physics,
                     default_config, gradient_settings, parse_config, preset,
                     quadrature_settings, search_settings, sweep_values, validate)
from .constants import TWO_PI
from .errors import ConfigError, DomainError, EitsimError
from .gradient import channel_performance, gradient_chi_fn, gradient_resonance
from .pulse import auto_grid, gaussian_pulse, measure_pulse, propagate
from .spectral import (analytic_estimates, characterize_resonance,
                       optical_density, pulse_figures, susceptibility_curve)

FLOAT_FMT = "%.17g"
COMMANDS = ("chi", "resonance", "pulse", "gradient", "channel", "sweep")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def _slug(value: float) -> str:
    return (f"{value:g}").replace(".", "p").replace("-", "m")


def write_csv(path: Path, header, rows):
    """Delimited text with a header line and full-precision floats."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row) + "\n")


def write_json(path: Path, payload: dict):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def resonance_payload(res) -> dict:
    return {
        "center_rad_s": res.center,
        "center_mhz": res.center / TWO_PI / 1e6,
        "phase_offset": res.phase_offset,
        "min_absorption": res.min_absorption,
        "dispersion_slope_s": res.dispersion_slope,
        "curvature_width_rad_s": res.curvature_width,
        "curvature_width_mhz": res.curvature_width / TWO_PI / 1e6,
        "transparency_ratio": res.transparency_ratio,
    }


def _resolve_config(args) -> RunConfig:
    cfg = preset(args.preset) if args.preset else default_config()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}")
        file_cfg = parse_config(text)
        merged = dict(cfg.values)
        merged.update({k: v for k, v in file_cfg.values.items()
                       if v != default_config().values[k]})
        cfg = RunConfig(merged)
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        overrides[key.strip()] = raw.strip()
    if overrides:
        cfg = cfg.with_overrides(overrides)
    validate(cfg)
    return cfg


def _point_config(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    """Per-point config for one sweep value; the density axis is handled later."""
    if axis == "optical_density":
        return cfg
    return cfg.with_overrides({axis: value})


def _resonance_at(cfg: RunConfig):
    scheme, env, fields = build_physics(cfg)
    search = search_settings(cfg)
    if fields.gradient > 0:
        return gradient_resonance(scheme, env, fields, fields.gradient, search,
                                  gradient_settings(cfg))
    return characterize_resonance(scheme, env, fields, search)


# ---------------------------------------------------------------- commands

def run_chi(cfg: RunConfig, out: Path, plot: bool, threads: int):
    detunings = TWO_PI * 1e6 * np.linspace(cfg.get("chi.min_mhz"),
                                           cfg.get("chi.max_mhz"),
                                           cfg.get("chi.points"))
    axis = cfg.get("sweep.axis")
    points = (sweep_values(cfg) if axis and axis != "optical_density" else [None])

    def one(value):
        point_cfg = cfg if value is None else _point_config(cfg, axis, value)
        scheme, env, fields = build_physics(point_cfg)
        return susceptibility_curve(scheme, env, fields, detunings,
                                    quadrature_settings(point_cfg))

    curves = _parallel_map(one, points, threads)
    artifacts = []
    for value, curve in zip(points, curves):
        name = "chi.csv" if value is None else f"chi_{axis}_{_slug(value)}.csv"
        mhz = curve.detunings / TWO_PI / 1e6
        write_csv(out / name,
                  ["detuning_mhz", "detuning_rad_s", "chi_real", "chi_imag"],
                  zip(mhz, curve.detunings, curve.values.real, curve.values.imag))
        artifacts.append(name)
        if plot:
            from .plotting import plot_curve
            png = name.replace(".csv", ".png")
            plot_curve(mhz, curve.values, out / png,
                       title="" if value is None else f"{axis} = {value:g}")
            artifacts.append(png)
    return artifacts


def run_gradient(cfg: RunConfig, out: Path, plot: bool, threads: int):
    detunings = TWO_PI * 1e6 * np.linspace(cfg.get("chi.min_mhz"),
                                           cfg.get("chi.max_mhz"),
                                           cfg.get("chi.points"))
    axis = cfg.get("sweep.axis")
    if axis == "gradient_gauss_per_mm":
        points = sweep_values(cfg)
    else:
        points = [cfg.get("gradient_gauss_per_mm")]

    def one(value):
        point_cfg = cfg.with_overrides({"gradient_gauss_per_mm": value})
        scheme, env, fields = build_physics(point_cfg)
        chi_fn = gradient_chi_fn(scheme, env, fields, fields.gradient,
                                 gradient_settings(point_cfg),
                                 quadrature_settings(point_cfg))
        return chi_fn(detunings)

    values = _parallel_map(one, points, threads)
    artifacts = []
    for s_b, vals in zip(points, values):
        name = f"gradient_chi_sb_{_slug(s_b)}.csv"
        mhz = detunings / TWO_PI / 1e6
        write_csv(out / name,
                  ["detuning_mhz", "detuning_rad_s", "chi_real", "chi_imag"],
                  zip(mhz, detunings, np.real(vals), np.imag(vals)))
        artifacts.append(name)
        if plot:
            from .plotting import plot_curve
            png = name.replace(".csv", ".png")
            plot_curve(mhz, np.asarray(vals), out / png,
                       title=f"gradient = {s_b:g} G/mm")
            artifacts.append(png)
    return artifacts


def run_resonance(cfg: RunConfig, out: Path, plot: bool, threads: int):
    scheme, env, fields = build_physics(cfg)
    res = _resonance_at(cfg)
    payload = resonance_payload(res)
    payload["analytic_estimates"] = analytic_estimates(scheme, env, fields)
    payload["cell_optical_density"] = optical_density(env, scheme)
    write_json(out / "resonance.json", payload)
    return ["resonance.json"]


def run_pulse(cfg: RunConfig, out: Path, plot: bool, threads: int):
    scheme, env, fields = build_physics(cfg)
    res = _resonance_at(cfg)
    density = cfg.get("pulse.optical_density")
    if density < 0:
        density = optical_density(env, scheme)
    figs = pulse_figures(res, density)

    tau = cfg.get("pulse.half_width_us") * 1e-6
    if tau <= 0:
        if not math.isfinite(figs.bandwidth):
            raise DomainError("pulse.optical_density",
                              "zero density gives no bandwidth scale; set pulse.half_width_us")
        tau = 10.0 / figs.bandwidth
    grid = auto_grid(tau, expected_delay=figs.delay)
    pulse_in = gaussian_pulse(tau, grid)

    span = 8.0 / tau
    curve_grid = res.center + np.linspace(-span, span, 1025)
    if fields.gradient > 0:
        chi_fn = gradient_chi_fn(scheme, env, fields, fields.gradient,
                                 gradient_settings(cfg), quadrature_settings(cfg))
        curve_vals = chi_fn(curve_grid)
    else:
        from .spectral import doppler_averaged_chi
        curve_vals = doppler_averaged_chi(scheme, env, fields, curve_grid,
                                          quadrature_settings(cfg))
    from .spectral import SusceptibilityCurve
    curve = SusceptibilityCurve(curve_grid, curve_vals)

    pulse_out = propagate(pulse_in, density, curve, carrier=res.center)
    metrics = measure_pulse(pulse_in, pulse_out)

    t_us = pulse_in.times / 1e-6
    for name, series in (("pulse_input.csv", pulse_in), ("pulse_output.csv", pulse_out)):
        write_csv(out / name,
                  ["time_us", "envelope_real", "envelope_imag", "intensity"],
                  zip(t_us, series.values.real, series.values.imag,
                      np.abs(series.values) ** 2))
    payload = {
        "optical_density": density,
        "input_half_width_s": tau,
        "delay_s": metrics.delay,
        "centroid_delay_s": metrics.centroid_delay,
        "transmission": metrics.transmission,
        "loss": 1.0 - metrics.transmission,
        "output_half_width_s": metrics.width_out,
        "broadening_ratio": metrics.broadening_ratio,
        "closed_form": {
            "delay_s": figs.delay,
            "loss": figs.loss,
            "bandwidth_rad_s": figs.bandwidth,
            "delay_bandwidth": figs.delay_bandwidth,
            "max_density": figs.max_density,
        },
        "resonance": resonance_payload(res),
    }
    write_json(out / "pulse_metrics.json", payload)
    artifacts = ["pulse_input.csv", "pulse_output.csv", "pulse_metrics.json"]
    if plot:
        from .plotting import plot_pulse
        plot_pulse(t_us, np.abs(pulse_in.values) ** 2, np.abs(pulse_out.values) ** 2,
                   out / "pulse.png")
        artifacts.append("pulse.png")
    return artifacts


def run_channel(cfg: RunConfig, out: Path, plot: bool, threads: int):
    scheme, env, fields = build_physics(cfg)
    perf = channel_performance(scheme, env, fields, fields.gradient,
                               search_settings(cfg), gradient_settings(cfg))
    payload = channel_payload(perf)
    write_json(out / "channel.json", payload)
    return ["channel.json"]


def channel_payload(perf) -> dict:
    return {
        "bandwidth_rad_s": perf.bandwidth,
        "bandwidth_mhz": perf.bandwidth / TWO_PI / 1e6,
        "max_mismatch_rad_s": perf.max_mismatch,
        "effective_slope_s": perf.effective_slope,
        "max_density": perf.max_density,
        "max_delay_s": perf.max_delay,
        "delay_bandwidth": perf.delay_bandwidth,
        "dispersion_slope_setting_rad_s_per_m": perf.dispersion_slope_setting,
        "diagnostics": perf.diagnostics,
        "resonance": resonance_payload(perf.resonance),
    }


_SWEEP_COLUMNS = {
    "resonance": ["center_rad_s", "center_mhz", "phase_offset", "min_absorption",
                  "dispersion_slope_s", "curvature_width_rad_s",
                  "curvature_width_mhz", "transparency_ratio"],
    "channel": ["bandwidth_rad_s", "bandwidth_mhz", "max_mismatch_rad_s",
                "effective_slope_s", "max_density", "max_delay_s",
                "delay_bandwidth"],
    "pulse_figures": ["delay_s", "loss", "bandwidth_rad_s", "delay_bandwidth"],
}


def _default_quantity(cfg: RunConfig, axis: str) -> str:
    if axis == "optical_density":
        return "pulse_figures"
    if axis == "gradient_gauss_per_mm":
        return "channel"
    if axis == "pressure_torr" and cfg.get("gradient_gauss_per_mm") > 0:
        return "channel"
    return "resonance"


def run_sweep(cfg: RunConfig, out: Path, plot: bool, threads: int):
    axis = cfg.get("sweep.axis")
    if not axis:
        raise ConfigError("sweep command requires sweep.axis")
    values = sweep_values(cfg)
    quantity = cfg.get("sweep.quantity") or _default_quantity(cfg, axis)
    columns = _SWEEP_COLUMNS[quantity]

    base_res = None
    if quantity == "pulse_figures":
        if axis != "optical_density":
            raise ConfigError("pulse_figures sweeps require sweep.axis = optical_density")
        base_res = _resonance_at(cfg)

    def one(value):
        if quantity == "pulse_figures":
            figs = pulse_figures(base_res, value)
            return [figs.delay, figs.loss, figs.bandwidth, figs.delay_bandwidth]
        point_cfg = _point_config(cfg, axis, value)
        scheme, env, fields = build_physics(point_cfg)
        search = search_settings(point_cfg)
        if quantity == "channel":
            perf = channel_performance(scheme, env, fields, fields.gradient, search,
                                       gradient_settings(point_cfg))
            return [perf.bandwidth, perf.bandwidth / TWO_PI / 1e6, perf.max_mismatch,
                    perf.effective_slope, perf.max_density, perf.max_delay,
                    perf.delay_bandwidth]
        if fields.gradient > 0:
            res = gradient_resonance(scheme, env, fields, fields.gradient, search,
                                     gradient_settings(point_cfg))
        else:
            res = characterize_resonance(scheme, env, fields, search)
        return [res.center, res.center / TWO_PI / 1e6, res.phase_offset,
                res.min_absorption, res.dispersion_slope, res.curvature_width,
                res.curvature_width / TWO_PI / 1e6, res.transparency_ratio]

    def guarded(value):
        try:
            return one(value), "ok"
        except EitsimError as exc:
            return [math.nan] * len(columns), f"error: {type(exc).__name__}: {exc}"

    results = _parallel_map(guarded, values, threads)
    rows = []
    for value, (cells, status) in zip(values, results):
        quoted = '"' + status.replace('"', "'") + '"' if status != "ok" else "ok"
        rows.append([value] + list(cells) + [quoted])
    write_csv(out / "sweep.csv", [axis] + columns + ["status"], rows)
    artifacts = ["sweep.csv"]
    if plot:
        from .plotting import plot_sweep
        data = {col: [row[1 + i] for row in rows] for i, col in enumerate(columns)}
        plot_sweep(values, data, out / "sweep.png", xlabel=axis,
                   title=f"{quantity} vs {axis}")
        artifacts.append("sweep.png")
    return artifacts


def _parallel_map(fn, items, threads: int):
    """Order-preserving map; results are identical for any thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


RUNNERS = {
    "chi": run_chi,
    "resonance": run_resonance,
    "pulse": run_pulse,
    "gradient": run_gradient,
    "channel": run_channel,
    "sweep": run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eitsim",
                     description="Slow-light transparency simulator for warm vapor cells.")
    parser.add_argument("--version", action="version", version=f"eitsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="named parameter set (overridden by --config/--set)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key")
        p.add_argument("--out", default="eitsim_out", help="output directory")
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("EITSIM_THREADS", "1")),
                       help="worker threads for sweeps (default: EITSIM_THREADS or 1)")
        p.add_argument("--plot", action="store_true",
                       help="also render PNG figures next to the data files")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        cfg = _resolve_config(args)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        artifacts = RUNNERS[args.command](cfg, out, args.plot, args.threads)
        manifest = {
            "version": __version__,
            "command": args.command,
            "preset": args.preset or "",
            "config": {k: (v if v is not None else "") for k, v in cfg.values.items()},
            "threads": args.threads,
            "artifacts": artifacts,
            "wall_clock_s": time.monotonic() - started,
        }
        write_json(out / "manifest.json", manifest)
    except (ConfigError, DomainError) as exc:
        print(f"eitsim: invalid input: {exc}", file=sys.stderr)
        return 1
    except EitsimError as exc:
        print(f"eitsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
