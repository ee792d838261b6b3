"""Statistics, rainflow counting, damage-equivalent loads and comparison reports."""

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptySeries, ScenarioMismatch, ZeroBaseline
from .params import RPM

TRIM_SECONDS = 100.0


def _values(series):
    x = np.asarray(series, dtype=float).ravel()
    if x.size == 0:
        raise EmptySeries("series is empty")
    return x


def av(series):
    return float(np.mean(_values(series)))


def rms(series):
    x = _values(series)
    return float(np.sqrt(np.mean(x * x)))


def normalized_rms(series, baseline):
    b = rms(baseline)
    if b == 0.0:
        raise ZeroBaseline("baseline RMS is zero")
    return rms(series) / b


# ------------------------------------------------------------- rainflow

def turning_points(series):
    """Local extrema of a series, keeping both end points."""
    x = _values(series)
    # drop repeated samples so plateaus count once
    keep = np.concatenate([[True], np.diff(x) != 0])
    x = x[keep]
    if x.size < 3:
        return x
    d = np.diff(x)
    sd = np.sign(d)
    inner = np.flatnonzero(sd[:-1] != sd[1:]) + 1
    return np.concatenate([[x[0]], x[inner], [x[-1]]])


def rainflow_count(series):
    """Four-point rainflow; returns ``[(range, count)]`` with counts 1.0 or 0.5.

    Closed cycles come out in the order they are extracted, followed by the
    residue as half cycles.
    """
    tp = turning_points(series)
    if tp.size < 2:
        return []
    out = []
    stack = []
    for p in tp:
        stack.append(float(p))
        while len(stack) >= 4:
            a, b, c, d = stack[-4:]
            inner = abs(c - b)
            if inner <= abs(b - a) and inner <= abs(d - c):
                out.append((inner, 1.0))
                del stack[-3:-1]
            else:
                break
    for a, b in zip(stack[:-1], stack[1:]):
        if a != b:
            out.append((abs(b - a), 0.5))
    return out


def cycle_histogram(cycles):
    """Aggregate ``(range, count)`` pairs into a dict keyed by range."""
    h = Counter()
    for r, n in cycles:
        h[r] += n
    return dict(sorted(h.items()))


@dataclass(frozen=True)
class DelConfig:
    m: float = 4.0
    N_ref: Optional[float] = None
    f_ref: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("Woehler exponent must be >= 1")
        if self.N_ref is not None and not self.N_ref > 0:
            raise ValueError("N_ref must be positive")
        if not self.f_ref > 0:
            raise ValueError("f_ref must be positive")

    def reference_cycles(self, duration):
        return self.N_ref if self.N_ref is not None else self.f_ref * duration


def del_compute(series, cfg=None, dt=None):
    """Damage-equivalent load (sum n R^m / N_ref)^(1/m).

    When ``cfg.N_ref`` is unset the reference count is ``f_ref`` times the
    series duration, which needs ``dt``.
    """
    cfg = cfg or DelConfig()
    x = _values(series)
    if cfg.N_ref is None:
        if dt is None:
            raise ValueError("dt is required when N_ref is derived from the duration")
        N = cfg.reference_cycles(dt * (x.size - 1) if x.size > 1 else dt)
    else:
        N = cfg.N_ref
    cycles = rainflow_count(x)
    if not cycles:
        return 0.0
    r = np.array([c[0] for c in cycles])
    n = np.array([c[1] for c in cycles])
    # factor out the largest range so high exponents stay finite
    rmax = r.max()
    if rmax == 0.0:
        return 0.0
    return float(rmax * (np.sum(n * (r / rmax) ** cfg.m) / N) ** (1.0 / cfg.m))


# ------------------------------------------------------------- channels

def euler_rates(traj):
    """Platform Euler-angle rates (roll, pitch, yaw) per sample."""
    tx, ty = traj["theta_x"], traj["theta_y"]
    wx, wy, wz = traj["omega_x"], traj["omega_y"], traj["omega_z"]
    cx, sx, cy = np.cos(tx), np.sin(tx), np.cos(ty)
    ty_ = np.tan(ty)
    roll = wx + sx * ty_ * wy + cx * ty_ * wz
    pitch = cx * wy - sx * wz
    yaw = (sx * wy + cx * wz) / cy
    return roll, pitch, yaw


def tower_base_proxy(traj):
    """Platform pitching moment of buoyancy, hydrodynamics and mooring."""
    return traj["buoy_My"] + traj["hydro_My"] + traj["moor_My"]


def blade_root_proxy(traj):
    """Aerodynamic hub pitching moment (thrust times hub height)."""
    return traj["aero_My"]


def openloop_statistics(traj, t_trim=TRIM_SECONDS):
    """Table-style AV/RMS rows in m, deg and rpm."""
    tr = traj.trimmed(t_trim)
    rx, thy, om = tr["r_x"], np.rad2deg(tr["theta_y"]), tr["Omega_r"] / RPM
    return [
        ("AV(r_x)", "m", av(rx)), ("RMS(r_x)", "m", rms(rx)),
        ("AV(theta_y)", "deg", av(thy)), ("RMS(theta_y)", "deg", rms(thy)),
        ("AV(Omega_r)", "rpm", av(om)), ("RMS(Omega_r)", "rpm", rms(om)),
    ]


RMS_CHANNELS = ("dOmega_r", "roll_rate", "pitch_rate", "yaw_rate")
DEL_CHANNELS = ("TB_proxy", "FF1", "FF2", "FF3", "AF1", "AF2", "AF3")


def report_channels(traj, Omega_r0):
    roll, pitch, yaw = euler_rates(traj)
    rms_ch = {"dOmega_r": traj["Omega_r"] - Omega_r0, "roll_rate": roll,
              "pitch_rate": pitch, "yaw_rate": yaw}
    del_ch = {"TB_proxy": tower_base_proxy(traj)}
    for k in ("FF1", "FF2", "FF3", "AF1", "AF2", "AF3"):
        del_ch[k] = traj[k]
    return rms_ch, del_ch


@dataclass
class ReportRow:
    metric: str
    channel: str
    values: dict      # controller -> absolute value
    normalized: dict  # controller -> ratio to baseline


def _check_same_scenario(trajs):
    keys = ("scenario", "seed", "dt", "duration")
    ref = None
    for name, tr in trajs.items():
        sig = tuple(tr.meta.get(k) for k in keys) + (len(tr),)
        if ref is None:
            ref = sig
        elif sig != ref:
            raise ScenarioMismatch(f"trajectory {name!r} does not share the scenario of the others")


def compare_report(trajs, baseline=None, Omega_r0=12.1 * RPM, t_trim=TRIM_SECONDS,
                   del_tower=DelConfig(m=4.0), del_mooring=DelConfig(m=4.0)):
    """Normalised RMS and DEL rows for several controllers on one scenario."""
    if not trajs:
        raise EmptySeries("no trajectories to compare")
    _check_same_scenario(trajs)
    names = list(trajs)
    baseline = baseline or names[0]
    chans = {}
    for name in names:
        tr = trajs[name].trimmed(t_trim)
        if len(tr) < 2:
            raise EmptySeries(f"trajectory {name!r} has no samples after the first {t_trim:g} s")
        chans[name] = (report_channels(tr, Omega_r0), tr.dt)
    rows = []
    for ch in RMS_CHANNELS:
        vals = {n: rms(chans[n][0][0][ch]) for n in names}
        rows.append(_row("RMS", ch, vals, baseline))
    for ch in DEL_CHANNELS:
        cfg = del_tower if ch == "TB_proxy" else del_mooring
        vals = {n: del_compute(chans[n][0][1][ch], cfg, dt=chans[n][1]) for n in names}
        rows.append(_row("DEL", ch, vals, baseline))
    return rows


def _row(metric, ch, vals, baseline):
    b = vals[baseline]
    if b == 0.0:
        raise ZeroBaseline(f"baseline {metric} of {ch} is zero")
    return ReportRow(metric, ch, vals, {n: v / b for n, v in vals.items()})


def format_report(rows, delimited=False):
    """Aligned text table (or tab-separated text) of normalised values."""
    if not rows:
        return ""
    names = list(rows[0].values)
    if delimited:
        head = "\t".join(["metric", "channel"] + [f"{n}_norm" for n in names] + [f"{n}_abs" for n in names])
        lines = [head]
        for r in rows:
            lines.append("\t".join([r.metric, r.channel] + [f"{r.normalized[n]:.6f}" for n in names]
                                   + [f"{r.values[n]:.6e}" for n in names]))
        return "\n".join(lines) + "\n"
    w = max(10, *(len(n) for n in names))
    head = f"{'metric':<7}{'channel':<12}" + "".join(f"{n:>{w + 2}}" for n in names)
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.metric:<7}{r.channel:<12}" + "".join(f"{r.normalized[n]:>{w + 2}.4f}" for n in names))
    return "\n".join(lines) + "\n"
