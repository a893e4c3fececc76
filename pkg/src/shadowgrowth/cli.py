"""Command-line driver.

Subcommands::

    shadowgrowth run       --mode {discrete,pure_shadow,nonlinear} ...
    shadowgrowth disperse  --R 1 --nu 1 --alpha 0.7 --omega-bar 3.14159265
    shadowgrowth analyze   snapshot_t100.csv [--series series.csv --fit 10:100]

Settings may also come from a ``key = value`` config file (``--config``);
flags given on the command line win. Every invocation writes
``manifest.json`` with the fully resolved settings.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_BINS,
    FitError,
    fit_exponent,
    height_histogram,
    mode_wavenumber,
    peak_statistics,
    roughness,
)
from .continuum import (
    DispersionParams,
    StabilityError,
    critical_wavenumber,
    linear_growth_rate,
    run_continuum,
    seeded_mode_growth,
)
from .core import ContinuumParams, DiscreteParams, HeightField, ParameterError
from .discrete import run_discrete

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
OUT_ENV = "SHADOWGROWTH_OUT_DIR"
RUN_MODES = ("discrete", "pure_shadow", "nonlinear")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _time_tag(t: float) -> str:
    return format(t, ".10g")


def write_table(path: Path, columns: List[str], rows, comment: Optional[str] = None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_table(path: Path) -> Dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ConfigError(f"{path}: empty table")
    header = lines[0].split(",")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    data = data.reshape(-1, len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


def read_config_file(path: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    A ``manifest.json`` written by ``run`` is accepted too, so a run can be
    repeated from its own record.
    """
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)["config"]
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"{path}: not a run manifest") from exc
        return {
            k: ",".join(fmt(x) for x in v) if isinstance(v, list) else str(v)
            for k, v in cfg.items()
            if v is not None
        }
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


# key -> (converter, default); keys mirror the parameter names
_RUN_KEYS = {
    "mode": (str, None),
    "L": (int, 256),
    "theta_max_deg": (float, 60.0),
    "side_rule": (str, "fall_down"),
    "t_end": (float, None),
    "dt": (float, None),
    "dx": (float, 1.0),
    "R": (float, 1.0),
    "nu": (float, None),
    "D": (float, 1.0),
    "g_exponent": (float, 2.0),
    "exposure_window": (int, None),
    "snapshot_times": (lambda s: [float(v) for v in str(s).split(",") if v.strip()], []),
    "histogram_bins": (int, DEFAULT_BINS),
    "samples_per_decade": (int, 20),
    "seed": (int, 0),
    "seeds": (str, None),
    "out_dir": (str, None),
}


def resolve_run_config(args: argparse.Namespace) -> dict:
    file_cfg = read_config_file(args.config) if args.config else {}
    unknown = set(file_cfg) - set(_RUN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = {}
    for key, (conv, default) in _RUN_KEYS.items():
        flag = getattr(args, key, None)
        raw = flag if flag is not None else file_cfg.get(key)
        if raw is None:
            cfg[key] = default
            continue
        try:
            cfg[key] = conv(raw) if not isinstance(raw, list) else raw
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    if cfg["mode"] not in RUN_MODES:
        raise ConfigError(f"mode must be one of {', '.join(RUN_MODES)}")
    if cfg["t_end"] is None:
        raise ConfigError("t_end is required")
    if cfg["dt"] is None:
        cfg["dt"] = 0.05 if cfg["mode"] == "pure_shadow" else 0.01
    if cfg["nu"] is None:
        cfg["nu"] = 0.0 if cfg["mode"] == "pure_shadow" else 1.0
    if cfg["out_dir"] is None:
        cfg["out_dir"] = os.environ.get(OUT_ENV, "shadowgrowth_out")
    return cfg


def build_params(cfg: dict, seed: int):
    if cfg["mode"] == "discrete":
        return DiscreteParams(
            L=cfg["L"],
            theta_max=math.radians(cfg["theta_max_deg"]),
            side_rule=cfg["side_rule"],
            t_end=cfg["t_end"],
            snapshot_times=cfg["snapshot_times"],
            seed=seed,
            samples_per_decade=cfg["samples_per_decade"],
        ).validate()
    return ContinuumParams(
        L=cfg["L"],
        dx=cfg["dx"],
        dt=cfg["dt"],
        R=cfg["R"],
        nu=cfg["nu"],
        D=cfg["D"],
        model=cfg["mode"],
        g_exponent=cfg["g_exponent"],
        t_end=cfg["t_end"],
        snapshot_times=cfg["snapshot_times"],
        seed=seed,
        exposure_window=cfg["exposure_window"],
        samples_per_decade=cfg["samples_per_decade"],
    ).validate()


def parse_seeds(spec: str) -> List[int]:
    try:
        if ".." in spec:
            a, b = spec.split("..", 1)
            seeds = list(range(int(a), int(b) + 1))
        else:
            seeds = [int(s) for s in spec.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --seeds value {spec!r}; expected a..b") from exc
    if not seeds:
        raise ConfigError("empty seed range")
    return seeds


def write_histogram(path: Path, field: HeightField, n_bins: int):
    hist = height_histogram(field, n_bins)
    comment = "height distribution; bin_center in height units"
    if hist.degenerate:
        comment += "; degenerate (constant field)"
    write_table(path, ["bin_center", "count", "frequency"], zip(hist.bin_centers, hist.counts, hist.frequencies), comment)


def write_snapshot(path: Path, field: HeightField):
    x = np.arange(field.L) * field.dx
    write_table(path, ["x", "h"], zip(x, field.heights), "interface snapshot; x and h in length units")


def simulate_one(cfg: dict, seed: int, out_dir: str) -> dict:
    """Run one simulation and write its files; returns the manifest dict."""
    params = build_params(cfg, seed)
    n_bins = cfg["histogram_bins"]
    if cfg["mode"] == "discrete":
        rec = run_discrete(params, n_bins)
    else:
        rec = run_continuum(params, n_bins=n_bins)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = ["series.csv"]
    write_table(
        out / "series.csv",
        ["t", "W", "mean_h"],
        rec.samples,
        "t in time units (monolayers), W and mean_h in height units",
    )
    for t, field in rec.snapshots:
        tag = _time_tag(t)
        write_snapshot(out / f"snapshot_t{tag}.csv", field)
        write_histogram(out / f"histogram_t{tag}.csv", field, n_bins)
        files += [f"snapshot_t{tag}.csv", f"histogram_t{tag}.csv"]
    tag = _time_tag(rec.t[-1]) if len(rec.t) else "final"
    if f"histogram_t{tag}.csv" not in files:
        write_histogram(out / f"histogram_t{tag}.csv", rec.final, n_bins)
        files.append(f"histogram_t{tag}.csv")
    resolved = {k: v for k, v in cfg.items() if k not in ("seeds",)}
    resolved.update(seed=seed, out_dir=str(out))
    manifest = {
        "version": __version__,
        "command": "run",
        "config": resolved,
        "params": rec.params_echo,
        "seed": seed,
        "files": sorted(files),
        "extras": rec.extras,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return manifest


def cmd_run(args) -> int:
    cfg = resolve_run_config(args)
    if cfg["seeds"]:
        seeds = parse_seeds(cfg["seeds"])
        for s in seeds:
            build_params(cfg, s)
        jobs = [(cfg, s, os.path.join(cfg["out_dir"], f"seed_{s}")) for s in seeds]
        workers = min(len(jobs), os.cpu_count() or 1)
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                futures = [pool.submit(simulate_one, *job) for job in jobs]
                for fut in futures:
                    fut.result()
        else:
            for job in jobs:
                simulate_one(*job)
        print(f"wrote {len(seeds)} runs under {cfg['out_dir']}")
    else:
        build_params(cfg, cfg["seed"])
        simulate_one(cfg, cfg["seed"], cfg["out_dir"])
        print(f"wrote {cfg['out_dir']}")
    return EXIT_OK


def cmd_disperse(args) -> int:
    p = DispersionParams(R=args.R, nu=args.nu, omega_bar=args.omega_bar, alpha=args.alpha)
    for name in ("R", "omega_bar"):
        if not getattr(p, name) > 0:
            raise ConfigError(f"{name} must be positive")
    k_star = critical_wavenumber(p)
    out = Path(args.out_dir or os.environ.get(OUT_ENV, "shadowgrowth_out"))
    out.mkdir(parents=True, exist_ok=True)
    columns = ["k", "sigma"]
    if args.measure_L:
        # lattice modes of a seeded run, so the measured rate is comparable
        L = args.measure_L
        m_max = max(1, int(args.k_max_factor * k_star * L / (2 * math.pi)))
        ks = [mode_wavenumber(m, L) for m in range(1, min(m_max, L // 2) + 1)]
        cp = ContinuumParams.nonlinear(L=L, R=p.R, nu=p.nu, D=0.0, dt=args.dt, t_end=1.0)
        measured = [seeded_mode_growth(cp, m, n_steps=args.measure_steps)[0] for m in range(1, len(ks) + 1)]
        rows = [(k, linear_growth_rate(k, p), s) for k, s in zip(ks, measured)]
        columns.append("sigma_measured")
    else:
        ks = np.linspace(0.0, args.k_max_factor * k_star, args.n_k)
        rows = [(k, linear_growth_rate(k, p)) for k in ks]
    write_table(out / "dispersion.csv", columns, rows, f"k in 1/length, sigma in 1/time; k_star = {fmt(k_star)}")
    manifest = {
        "version": __version__,
        "command": "disperse",
        "config": {k: v for k, v in vars(args).items() if k != "func"},
        "k_star": k_star,
        "files": ["dispersion.csv"],
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    print(f"k_star = {k_star:.6g}")
    for row in rows:
        print("  ".join(f"{v:.6g}" for v in row))
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = Path(args.out_dir or os.environ.get(OUT_ENV, "shadowgrowth_out"))
    out.mkdir(parents=True, exist_ok=True)
    files = []
    diagnostics = []
    if args.snapshot:
        table = read_table(Path(args.snapshot))
        if "h" not in table or "x" not in table:
            raise ConfigError("snapshot file needs x and h columns")
        h = table["h"]
        x = table["x"]
        dx = float(x[1] - x[0]) if x.size > 1 else 1.0
        heights = h.astype(np.int64) if np.all(h == np.round(h)) and h.min() >= 0 and args.integer else h
        field = HeightField(heights, dx)
        try:
            n_peaks, ratio = peak_statistics(field, args.rel_threshold)
        except ValueError:
            n_peaks, ratio = 0, float("nan")
        hist = height_histogram(field, args.histogram_bins)
        diagnostics += [
            ("L", field.L),
            ("W", roughness(field)),
            ("mean_h", float(field.heights.mean())),
            ("h_min", float(field.heights.min())),
            ("h_max", float(field.heights.max())),
            ("histogram_mode", hist.mode),
            ("n_peaks", n_peaks),
            ("max_over_mean", ratio),
        ]
        write_histogram(out / "histogram.csv", field, args.histogram_bins)
        files.append("histogram.csv")
    if args.series:
        table = read_table(Path(args.series))
        samples = np.column_stack([table["t"], table["W"]])
        for window in args.fit or []:
            try:
                lo, hi = (float(v) for v in window.split(":"))
            except ValueError as exc:
                raise ConfigError(f"bad --fit window {window!r}; expected lo:hi") from exc
            try:
                beta, err = fit_exponent(samples, lo, hi)
            except FitError as exc:
                raise ConfigError(str(exc)) from exc
            diagnostics += [(f"beta[{window}]", beta), (f"beta_stderr[{window}]", err)]
    if not diagnostics:
        raise ConfigError("analyze needs a snapshot file and/or --series")
    with open(out / "diagnostics.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# recomputed diagnostics; heights in length units\n")
        fh.write("quantity,value\n")
        for name, value in diagnostics:
            fh.write(f"{name},{fmt(value)}\n")
    files.append("diagnostics.csv")
    manifest = {
        "version": __version__,
        "command": "analyze",
        "config": {k: v for k, v in vars(args).items() if k != "func"},
        "files": files,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    for name, value in diagnostics:
        print(f"{name} = {fmt(value)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shadowgrowth", description="Shadowed thin-film growth simulations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one model")
    run.add_argument("--config", help="key = value settings file")
    run.add_argument("--mode", choices=RUN_MODES)
    run.add_argument("--L", type=int)
    run.add_argument("--theta-max-deg", dest="theta_max_deg", type=float)
    run.add_argument("--side-rule", dest="side_rule", choices=("fall_down", "remove"))
    run.add_argument("--t-end", dest="t_end", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--dx", type=float)
    run.add_argument("--R", type=float)
    run.add_argument("--nu", type=float)
    run.add_argument("--D", type=float)
    run.add_argument("--g-exponent", dest="g_exponent", type=float)
    run.add_argument("--exposure-window", dest="exposure_window", type=int)
    run.add_argument("--snapshot-times", dest="snapshot_times", help="comma-separated times")
    run.add_argument("--histogram-bins", dest="histogram_bins", type=int)
    run.add_argument("--samples-per-decade", dest="samples_per_decade", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--seeds", help="seed range a..b, one subdirectory per seed")
    run.add_argument("--out-dir", dest="out_dir")
    run.set_defaults(func=cmd_run)

    dis = sub.add_parser("disperse", help="tabulate the linear growth rate")
    dis.add_argument("--R", type=float, default=1.0)
    dis.add_argument("--nu", type=float, default=1.0)
    dis.add_argument("--alpha", type=float, default=0.7)
    dis.add_argument("--omega-bar", dest="omega_bar", type=float, default=math.pi)
    dis.add_argument("--n-k", dest="n_k", type=int, default=41)
    dis.add_argument("--k-max-factor", dest="k_max_factor", type=float, default=2.0, help="k range in units of k_star")
    dis.add_argument("--measure-L", dest="measure_L", type=int, help="also measure rates on lattice modes of this size")
    dis.add_argument("--measure-steps", dest="measure_steps", type=int, default=100)
    dis.add_argument("--dt", type=float, default=0.01)
    dis.add_argument("--out-dir", dest="out_dir")
    dis.set_defaults(func=cmd_disperse)

    ana = sub.add_parser("analyze", help="recompute diagnostics from output files")
    ana.add_argument("snapshot", nargs="?", help="snapshot CSV with x,h columns")
    ana.add_argument("--series", help="series CSV with t,W columns")
    ana.add_argument("--fit", action="append", help="exponent fit window lo:hi (repeatable)")
    ana.add_argument("--histogram-bins", dest="histogram_bins", type=int, default=DEFAULT_BINS)
    ana.add_argument("--rel-threshold", dest="rel_threshold", type=float, default=0.5)
    ana.add_argument("--integer", action="store_true", help="treat heights as lattice integers")
    ana.add_argument("--out-dir", dest="out_dir")
    ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise ConfigError("missing subcommand (run, disperse, analyze)")
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StabilityError, ArithmeticError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
