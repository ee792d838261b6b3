"""Rotor thrust and shaft torque from tabulated Cp/Ct surfaces."""

from dataclasses import dataclass
from math import pi
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameters, MissingFile
from .frames import rotation_matrix
from .state import LoadWrench, as_array

U_FLOOR = 0.1
BETZ = 16.0 / 27.0


@dataclass(frozen=True)
class RotorAeroTable:
    """Rectangular Cp/Ct grids indexed ``[lambda, beta]`` (beta in radians)."""

    lambda_grid: np.ndarray
    beta_grid: np.ndarray
    cp_values: np.ndarray
    ct_values: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambda_grid, dtype=float)
        bet = np.asarray(self.beta_grid, dtype=float)
        cp = np.asarray(self.cp_values, dtype=float)
        ct = np.asarray(self.ct_values, dtype=float)
        if lam.ndim != 1 or bet.ndim != 1 or lam.size < 2 or bet.size < 2:
            raise InvalidParameters("aero grids need at least two breakpoints per axis")
        if np.any(np.diff(lam) <= 0) or np.any(np.diff(bet) <= 0):
            raise InvalidParameters("aero breakpoints must be strictly ascending")
        if cp.shape != (lam.size, bet.size) or ct.shape != cp.shape:
            raise InvalidParameters("Cp/Ct blocks must be len(lambda) x len(beta)")
        if not (np.all(np.isfinite(cp)) and np.all(np.isfinite(ct))):
            raise InvalidParameters("aero table holds non-finite entries")
        if cp.min() < 0 or cp.max() > BETZ + 1e-9 or ct.min() < 0:
            raise InvalidParameters("Cp must lie in [0, Betz] and Ct must be non-negative")
        for name, arr in (("lambda_grid", lam), ("beta_grid", bet), ("cp_values", cp), ("ct_values", ct)):
            object.__setattr__(self, name, arr)


def _cell(grid, q):
    q = min(max(q, grid[0]), grid[-1])
    i = int(np.searchsorted(grid, q, side="right")) - 1
    i = min(max(i, 0), grid.size - 2)
    return i, (q - grid[i]) / (grid[i + 1] - grid[i])


def coefficient_lookup(table, lam, beta):
    """Bilinear (Cp, Ct) at (lambda, beta); queries outside the grid are clamped."""
    i, u = _cell(table.lambda_grid, lam)
    j, w = _cell(table.beta_grid, beta)
    out = []
    for Z in (table.cp_values, table.ct_values):
        out.append((1 - u) * (1 - w) * Z[i, j] + u * (1 - w) * Z[i + 1, j]
                   + (1 - u) * w * Z[i, j + 1] + u * w * Z[i + 1, j + 1])
    return out[0], out[1]


# ------------------------------------------------------------ surrogate

# Exponential-family power curve with a fine-pitch offset (degrees).  The
# offset places the zero-pitch operating point of the reference rotor at
# 18 m/s near 14.6 rpm under constant rated generator torque.
HEIER = (0.5176, 116.0, 0.4, 5.0, 21.0, 0.0068, 0.08, 0.035)
BETA_OFFSET_DEG = 18.79085750392119


def surrogate_cp(lam, beta_deg, beta_offset=BETA_OFFSET_DEG):
    c1, c2, c3, c4, c5, c6, c7, c8 = HEIER
    lam = np.asarray(lam, dtype=float)
    b = np.asarray(beta_deg, dtype=float) + beta_offset
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / (lam + c7 * b) - c8 / (b ** 3 + 1.0)
        cp = c1 * (c2 * inv - c3 * b - c4) * np.exp(-c5 * inv) + c6 * lam
    return np.clip(np.nan_to_num(cp, nan=0.0), 0.0, 0.59)


def ct_from_cp(cp):
    """Thrust coefficient from axial momentum theory on the light-loading branch."""
    cp = np.clip(np.asarray(cp, dtype=float), 0.0, BETZ)
    out = np.empty_like(cp)
    for idx, c in np.ndenumerate(cp):
        if c <= 0.0:
            a = 0.0
        elif c >= BETZ:
            a = 1.0 / 3.0
        else:
            a = brentq(lambda a: 4 * a * (1 - a) ** 2 - c, 0.0, 1.0 / 3.0, xtol=1e-14)
        out[idx] = 4.0 * a * (1.0 - a)
    return out


def surrogate_table(lam_max=15.0, dlam=0.1, beta_max_deg=90.0, dbeta_deg=0.5,
                    beta_offset=BETA_OFFSET_DEG):
    """Default analytic Cp/Ct surface sampled on a uniform grid."""
    lam = np.round(np.arange(0.0, lam_max + 0.5 * dlam, dlam), 10)
    bdeg = np.round(np.arange(0.0, beta_max_deg + 0.5 * dbeta_deg, dbeta_deg), 10)
    L, B = np.meshgrid(lam, bdeg, indexing="ij")
    cp = surrogate_cp(L, B, beta_offset)
    return RotorAeroTable(lam, np.deg2rad(bdeg), cp, ct_from_cp(cp))


def load_aero_table(path):
    """Read a Cp/Ct table file.

    Layout: first row holds the beta breakpoints in degrees (leading cell
    ignored), then one row per lambda breakpoint giving lambda followed by
    the Cp values; a blank line or a line starting with ``#`` separates the
    Cp block from the Ct block, which repeats the same lambda column.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"aero table not found: {path}")
    blocks, cur = [], []
    for line in path.read_text().splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            if cur:
                blocks.append(cur)
                cur = []
            continue
        cells = s.replace(",", " ").split()
        if not cur:
            cells[0] = "nan"    # header row: leading cell is a label
        try:
            cur.append([float(v) for v in cells])
        except ValueError as exc:
            raise InvalidParameters(f"{path}: non-numeric entry in {line!r}") from exc
    if cur:
        blocks.append(cur)
    if len(blocks) != 2:
        raise InvalidParameters(f"{path}: expected a Cp block and a Ct block")
    cp_rows, ct_rows = blocks
    beta_deg = np.array(cp_rows[0][1:])
    cp = np.array(cp_rows[1:])
    ct = np.array(ct_rows[1:] if len(ct_rows) == len(cp_rows) else ct_rows)
    if not np.allclose(cp[:, 0], ct[:, 0]):
        raise InvalidParameters(f"{path}: Cp and Ct blocks use different lambda columns")
    return RotorAeroTable(cp[:, 0], np.deg2rad(beta_deg), cp[:, 1:], ct[:, 1:])


def save_aero_table(table, path):
    header = "lambda " + " ".join(f"{b:.6g}" for b in np.rad2deg(table.beta_grid))
    with open(path, "w") as fh:
        for label, Z in (("Cp", table.cp_values), ("Ct", table.ct_values)):
            fh.write(f"# {label}\n{header}\n")
            for lam, row in zip(table.lambda_grid, Z):
                fh.write(f"{lam:.6g} " + " ".join(f"{v:.10g}" for v in row) + "\n")


# ------------------------------------------------------------- loads

def relative_axial_wind(state, v_w, r_hub):
    """Axial inflow at the hub relative to the moving rotor, clamped at zero."""
    x = as_array(state)
    R = rotation_matrix(x[3:6])
    v_hub = x[6:9] + np.cross(x[9:12], r_hub)
    return max(0.0, float(R[:, 0] @ np.asarray(v_w, dtype=float) - v_hub[0]))


@dataclass
class AeroResult:
    thrust: float
    torque: float
    wrench: LoadWrench
    U: float
    lam: float
    cp: float
    ct: float


def aero_loads(rotor, table, state, v_w, r_hub, beta):
    """Thrust, shaft torque and the body wrench of the rotor."""
    x = as_array(state)
    U = relative_axial_wind(x, v_w, r_hub)
    Om = x[12]
    if U < U_FLOOR:
        return AeroResult(0.0, 0.0, LoadWrench(tag="aero"), U, 0.0, 0.0, 0.0)
    lam = Om * rotor.R_r / U
    cp, ct = coefficient_lookup(table, lam, beta)
    q = 0.5 * rotor.rho_a * pi * rotor.R_r ** 2 * U ** 2
    Fa = q * ct
    tau = q * rotor.R_r * cp / lam if lam > 1e-6 else 0.0
    F = np.array([Fa, 0.0, 0.0])
    M = np.array([tau, 0.0, 0.0]) + np.cross(r_hub, F)
    return AeroResult(Fa, tau, LoadWrench(F, M, "aero"), U, lam, cp, ct)


def torque_schedule(rotor):
    """Breakpoints of the generator law as a flat array.

    ``[mode, Omega_cutin, Omega_15, k_opt, Omega_25, Omega_sync, slope,
    Omega_rated, tau_rated]`` with mode 0 = constant, 1 = schedule.
    """
    Om_r, tau_r = rotor.Omega_rated, rotor.tau_g_rated
    if rotor.torque_law == "constant":
        return np.array([0.0, rotor.Omega_cutin, 0, 0, 0, 0, 0, Om_r, tau_r])
    k = rotor.k_opt
    Om_sync = Om_r / (1.0 + rotor.sync_slip)
    slope = tau_r / (Om_r - Om_sync)
    disc = slope * slope - 4.0 * k * slope * Om_sync
    Om_25 = (slope - np.sqrt(disc)) / (2.0 * k) if disc > 0 else Om_r
    Om_15 = 1.3 * rotor.Omega_cutin
    return np.array([1.0, rotor.Omega_cutin, Om_15, k, Om_25, Om_sync, slope, Om_r, tau_r])


def generator_torque(rotor, Omega_r):
    """Generator reaction torque on the rotor side.

    Constant rated torque at and above rated speed (and, for the
    ``constant`` law, everywhere above cut-in).  The ``schedule`` law adds
    the usual below-rated regions: a linear cut-in ramp, the k*Omega^2
    optimal-tracking curve and a linear transition into rated torque.
    """
    s = torque_schedule(rotor)
    return _torque(Omega_r, s)


def _torque(Om, s):
    mode, cut, om15, k, om25, sync, slope, om_r, tau_r = s
    if Om < cut:
        return 0.0
    if mode == 0.0 or Om >= om_r:
        return tau_r
    if Om < om15:
        return k * om15 * om15 * (Om - cut) / (om15 - cut)
    if Om < om25:
        return k * Om * Om
    return slope * (Om - sync)
