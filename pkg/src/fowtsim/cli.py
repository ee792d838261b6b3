"""Command-line front end: open-loop runs, controller batches and reports."""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .config import config_hash, dump_config, load_config
from .control import ActuatorLimits, GspiController, RiseController
from .dynamics import Plant, Scenario, simulate, solve_equilibrium, trim
from .environment import WaveSpec, WindSource
from .errors import ConfigError, FowtError, InvalidParameters, SimulationDiverged
from .io import read_trajectory, write_manifest, write_text, write_trajectory
from .params import RPM, load_params
from .rigid_body import b_coefficients, system_matrices

log = logging.getLogger("fowtsim")


# ---------------------------------------------------------------- building

def build_plant(cfg):
    return Plant(load_params(cfg.resolve(cfg.params_path())))


def build_limits(cfg):
    lim = cfg.limits
    return ActuatorLimits(np.deg2rad(lim.beta_min_deg), np.deg2rad(lim.beta_max_deg),
                          np.deg2rad(lim.rate_max_deg))


def build_wind(cfg):
    w = cfg.wind
    if w.mode == "constant":
        return WindSource.constant(w.mean)
    if w.mode == "spectral":
        return WindSource(mode="spectral", mean_speed=w.mean, turbulence_intensity=w.ti,
                          seed=cfg.seed, duration=cfg.duration, dt=w.sample_dt,
                          length_scale=w.length_scale)
    return WindSource.from_file(cfg.resolve(w.file))


def build_wave(cfg, params):
    w = cfg.wave
    return WaveSpec(w.H_s, w.T_p, np.deg2rad(w.direction_deg), w.phase, w.water_depth,
                    params.body.g, params.rho_w)


def initial_condition(cfg, plant, wind):
    """Initial state and pitch; ``trim`` mode solves the steady operating point."""
    ini = cfg.initial
    if ini.mode == "trim":
        u = wind.mean_speed if wind.mode != "file-series" else float(np.mean(wind.speeds))
        state, beta = trim(plant, u, Omega_r=ini.Omega_rpm * RPM)
        return state.to_array(), float(beta)
    x = np.zeros(13)
    x[0:3] = ini.r
    x[3:6] = np.deg2rad(ini.theta_deg)
    x[6:9] = ini.v
    x[9:12] = ini.omega
    x[12] = ini.Omega_rpm * RPM
    return x, float(np.deg2rad(cfg.beta0_deg))


def build_controller(spec, limits):
    c = spec.build()
    if spec.type == "gspi":
        return GspiController(c, limits)
    if spec.type == "rise":
        return RiseController(c)
    return None


def run_one(cfg, ctrl_index=None):
    """Simulate one controller of the config (``None`` = fixed pitch)."""
    plant = build_plant(cfg)
    wind = build_wind(cfg)
    x0, beta0 = initial_condition(cfg, plant, wind)
    limits = build_limits(cfg)
    spec = cfg.controllers[ctrl_index] if ctrl_index is not None else None
    ctrl = build_controller(spec, limits) if spec is not None else None
    sc = Scenario(wind=wind, wave=build_wave(cfg, plant.params), initial_state=x0,
                  duration=cfg.duration, dt=cfg.dt, beta0=beta0,
                  record_every=cfg.output.record_every, name=cfg.name)
    try:
        tr = simulate(sc, plant, ctrl, limits)
    except SimulationDiverged as exc:
        who = spec.type if spec is not None else "open-loop"
        raise SimulationDiverged(f"scenario {cfg.name!r} ({who}): {exc}") from exc
    tr.meta.update(seed=cfg.seed, duration=cfg.duration,
                   controller=spec.type.upper() if spec is not None else "open-loop")
    return tr


def _run_indexed(args):
    cfg, idx = args
    return run_one(cfg, idx)


# ---------------------------------------------------------------- runners

def _out_dir(cfg, out=None):
    d = Path(out or cfg.output.dir) / cfg.name
    d.mkdir(parents=True, exist_ok=True)
    return d


def _save_config(cfg, d, h):
    p = d / "config.yaml"
    write_text(p, dump_config(cfg), h, cfg.seed)
    return p


def format_openloop(rows):
    return "".join(f"{label:<14}[{unit}]{'':<3}{value:12.4f}\n" for label, unit, value in rows)


def run_openloop(cfg, out=None):
    """Fixed-pitch run; writes the trajectory, statistics and a manifest."""
    h = config_hash(cfg)
    d = _out_dir(cfg, out)
    tr = run_one(cfg, None)
    files = [_save_config(cfg, d, h)]
    tp = d / "trajectory.txt"
    write_trajectory(tr, tp, h, cfg.seed, cfg.output.channels)
    stats = format_openloop(analysis.openloop_statistics(tr, cfg.trim_seconds))
    sp = d / "stats.txt"
    write_text(sp, stats, h, cfg.seed)
    files += [tp, sp]
    write_manifest(d, h, cfg.seed, files, {"command": "openloop"})
    return tr, stats


def run_closedloop(cfg, out=None, jobs=1):
    """All configured controllers on the shared seed, then the comparison report."""
    h = config_hash(cfg)
    d = _out_dir(cfg, out)
    idx = list(range(len(cfg.controllers)))
    if jobs > 1 and len(idx) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trajs = list(pool.map(_run_indexed, [(cfg, i) for i in idx]))
    else:
        trajs = [run_one(cfg, i) for i in idx]
    files = [_save_config(cfg, d, h)]
    named = {}
    for spec, tr in zip(cfg.controllers, trajs):
        sub = d / spec.type
        sub.mkdir(exist_ok=True)
        p = sub / "trajectory.txt"
        write_trajectory(tr, p, h, cfg.seed, cfg.output.channels)
        files.append(p)
        named[spec.type.upper()] = tr
    report = ""
    if len(named) > 1:
        report, rfiles = write_report(named, d, h, cfg)
        files += rfiles
    write_manifest(d, h, cfg.seed, files, {"command": "closedloop"})
    return named, report


def write_report(named, d, h, cfg):
    Om0 = cfg.initial.Omega_rpm * RPM
    rows = analysis.compare_report(named, Omega_r0=Om0, t_trim=cfg.trim_seconds)
    text = analysis.format_report(rows)
    tsv = analysis.format_report(rows, delimited=True)
    p1, p2 = d / "report.txt", d / "report.tsv"
    write_text(p1, text, h, cfg.seed)
    write_text(p2, tsv, h, cfg.seed)
    return text, [p1, p2]


def run_compare(paths, out_dir, Omega_rpm=12.1, t_trim=analysis.TRIM_SECONDS):
    """Report from previously written trajectory files."""
    named = {}
    for p in paths:
        tr = read_trajectory(p)
        named[str(tr.meta.get("controller", Path(p).parent.name)).upper()] = tr
    rows = analysis.compare_report(named, Omega_r0=Omega_rpm * RPM, t_trim=t_trim)
    text = analysis.format_report(rows)
    first = next(iter(named.values()))
    h, seed = first.meta.get("config_hash", ""), first.meta.get("seed")
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        write_text(d / "report.txt", text, h, seed)
        write_text(d / "report.tsv", analysis.format_report(rows, delimited=True), h, seed)
    return text


def validate_params(path):
    """Consistency checks of a parameter file; returns (ok, lines)."""
    p = load_params(path)
    mats = system_matrices(p)
    b1, b2 = b_coefficients(mats)
    ev = np.linalg.eigvalsh(mats.M_s_bar)
    rot = p.rotor
    power_err = abs(rot.tau_g_rated * rot.Omega_rated - rot.rated_power) / rot.rated_power
    checks = [
        ("M_s_bar positive definite", ev.min() > 0, f"eig in [{ev.min():.4g}, {ev.max():.4g}]"),
        ("b2 > 0", b2 > 0, f"b1 = {b1:.4g}, b2 = {b2:.4g}"),
        ("rated torque x speed = rated power (0.1%)", power_err < 1e-3, f"rel. error {power_err:.2e}"),
    ]
    try:
        eq = solve_equilibrium(Plant(p), beta=np.pi / 2, wind=0.0, Omega_r=0.0)
        x = eq.to_array()
        checks.append(("calm-water equilibrium", True,
                       f"r = ({x[0]:.3g}, {x[1]:.3g}, {x[2]:.3g}) m, pitch {np.rad2deg(x[4]):.3g} deg"))
    except FowtError as exc:
        checks.append(("calm-water equilibrium", False, str(exc)))
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}: {info}" for name, ok, info in checks]
    return all(c[1] for c in checks), lines


# ---------------------------------------------------------------- main

def _parser():
    ap = argparse.ArgumentParser(prog="fowtsim", description="Floating wind turbine pitch-control simulator.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log applied defaults and progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, need_config=True):
        p.add_argument("--config", required=need_config, help="run configuration (YAML)")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="wind seed override")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for controller batches")
        p.add_argument("--dt", type=float, help="integration step override [s]")

    common(sub.add_parser("openloop", help="fixed-pitch run with AV/RMS statistics"))
    common(sub.add_parser("closedloop", help="run every configured controller and compare"))
    p = sub.add_parser("compare", help="report from existing trajectory files")
    p.add_argument("trajectories", nargs="+", help="trajectory files; the first is the baseline")
    p.add_argument("--out", help="directory for report files")
    p.add_argument("--omega-rpm", type=float, default=12.1, help="reference rotor speed [rpm]")
    p.add_argument("--trim", type=float, default=analysis.TRIM_SECONDS,
                   help="initial transient excluded from statistics [s]")
    p = sub.add_parser("validate-params", help="check a parameter file")
    p.add_argument("--config", help="run configuration whose parameter file is checked")
    p.add_argument("params", nargs="?", help="parameter file (default: packaged reference)")
    return ap


def _load(args):
    cfg = load_config(args.config)
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.dt is not None:
        kw["dt"] = args.dt
    return cfg.with_(**kw).validate() if kw else cfg


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "openloop":
            cfg = _load(args)
            _, stats = run_openloop(cfg, args.out)
            sys.stdout.write(stats)
        elif args.command == "closedloop":
            cfg = _load(args)
            _, report = run_closedloop(cfg, args.out, max(1, args.jobs))
            sys.stdout.write(report)
        elif args.command == "compare":
            sys.stdout.write(run_compare(args.trajectories, args.out, args.omega_rpm, args.trim))
        elif args.command == "validate-params":
            if args.params:
                path = args.params
            elif args.config:
                cfg = load_config(args.config)
                path = cfg.resolve(cfg.params_path())
            else:
                from .params import reference_params_path
                path = reference_params_path()
            ok, lines = validate_params(path)
            sys.stdout.write("\n".join(lines) + "\n")
            return 0 if ok else 1
    except (ConfigError, InvalidParameters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationDiverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 3
    except FowtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
