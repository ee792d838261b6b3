"""Plant assembly, RK4 integration, equilibrium and trim."""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernel as kr
from .aero import (aero_loads, generator_torque, load_aero_table, surrogate_table,
                   torque_schedule)
from .environment import WaveSpec, WindSource
from .errors import (DegenerateAttitude, NoConvergence, SimulationDiverged,
                     SingularAttitude)
from .frames import EPS_SING, euler_rate_map, rotation_matrix
from .hydro_loads import (COS_LIMIT, WaveSampler, buoyancy_wrench, line_tensions,
                          member_elevations, mooring_wrench, strip_rule, submerged_lengths,
                          total_hydro)
from .rigid_body import (MassSolver, b_coefficients, coriolis_and_gravity,
                         system_matrices)
from .state import N_STATES, STATE_NAMES, StateVector, as_array

log = logging.getLogger(__name__)

LOAD_SWITCHES = ("gravity", "buoyancy", "hydro", "aero", "mooring")


def _wave_vector(wave, rho_w, g):
    if wave is None or wave.H_s == 0.0:
        return np.zeros(kr.N_WAVE)
    depth = wave.water_depth if wave.water_depth is not None else 0.0
    return np.array([wave.amplitude, wave.omega, wave.k, np.cos(wave.direction),
                     np.sin(wave.direction), wave.phase, depth, rho_w * g])


class Plant:
    """The 7-DOF floating turbine with its load models.

    Parameters
    ----------
    params : PlantParams
    table : RotorAeroTable, optional
        Defaults to the file named in ``params`` or the analytic surrogate.
    loads : dict, optional
        On/off switches for ``gravity``, ``buoyancy``, ``hydro``, ``aero``
        and ``mooring``.
    overrides : dict, optional
        Coefficient overrides applied to every member (``C_d``, ``C_dz``) or
        the mooring (``damping_scale``); used to build reduced subsystems.
    """

    def __init__(self, params, table=None, loads=None, overrides=None):
        self.params = params
        if table is None:
            table = load_aero_table(params.aero_table_path) if params.aero_table_path else surrogate_table()
        self.table = table
        self.switches = {k: True for k in LOAD_SWITCHES}
        if loads:
            unknown = set(loads) - set(LOAD_SWITCHES)
            if unknown:
                raise ValueError(f"unknown load switches {sorted(unknown)}")
            self.switches.update(loads)
        overrides = overrides or {}
        self.mats = system_matrices(params)
        self.solver = MassSolver(self.mats.M_s_bar)
        self.b1, self.b2 = b_coefficients(self.mats)
        body, rot = params.body, params.rotor
        self.r_hub = body.r_rotor
        self.rho_w = params.rho_w
        self.g = body.g

        cyls = params.cylinders
        geo = np.zeros((len(cyls), kr.N_GEO))
        for i, c in enumerate(cyls):
            A = c.area
            Cd = overrides.get("C_d", c.C_d)
            Cdz = overrides.get("C_dz", c.C_dz)
            geo[i, 0:3] = c.r_b
            geo[i, kr.G_LEN] = c.column_length
            geo[i, kr.G_AREA] = A
            geo[i, kr.G_CDT] = 0.5 * Cd * params.rho_w * c.d
            geo[i, kr.G_CAT] = c.C_a * params.rho_w * A + params.rho_w * A
            if c.submerged:
                geo[i, kr.G_SUB] = 1.0
                geo[i, kr.G_CDZ] = 0.5 * Cdz * params.rho_w * A
                geo[i, kr.G_CAZ] = c.C_az * params.rho_w * (2.0 / 3.0) * np.pi * (c.d / 2.0) ** 3
                geo[i, kr.G_AUP] = cyls[i - 3].area
        self.geo = geo
        self.cylinders = cyls
        moor = params.mooring
        self.K = np.ascontiguousarray(moor.stiffness, dtype=float)
        self.B = np.ascontiguousarray(moor.damping, dtype=float) * overrides.get("damping_scale", 1.0)
        self.pre = np.ascontiguousarray(moor.pretension, dtype=float)
        self.Minv = np.ascontiguousarray(self.solver.inverse)
        self.Ms1 = np.ascontiguousarray(self.mats.M_s[:6, :6])
        nq = params.quadrature_points
        sc = np.zeros(kr.N_SC + 2 * nq)
        sc[kr.N_SC:] = np.concatenate(strip_rule(nq))
        a = self.mats.a
        sc[kr.S_G] = self.g
        sc[kr.S_A1], sc[kr.S_A2], sc[kr.S_A3], sc[kr.S_IRX] = a.a1, a.a2, a.a3, a.I_rx
        sc[kr.S_RHOW], sc[kr.S_ZSWL] = params.rho_w, params.z_swl
        sc[kr.S_RR], sc[kr.S_RHOA] = rot.R_r, rot.rho_a
        sc[kr.S_HUBX], sc[kr.S_HUBZ] = self.r_hub[0], self.r_hub[2]
        sc[kr.S_NQ] = params.quadrature_points
        sc[kr.S_EPS], sc[kr.S_COSLIM] = EPS_SING, COS_LIMIT
        self.sc = sc
        self.flags = np.array([int(bool(self.switches[k])) for k in LOAD_SWITCHES], dtype=np.int64)
        self._tab = (np.ascontiguousarray(table.lambda_grid), np.ascontiguousarray(table.beta_grid),
                     np.ascontiguousarray(table.cp_values), np.ascontiguousarray(table.ct_values))
        self._xdot = np.empty(N_STATES)
        self._loads = np.empty(kr.N_LOADS)

    # ------------------------------------------------------------------
    @property
    def rotor(self):
        return self.params.rotor

    def with_switches(self, **switches):
        sw = dict(self.switches)
        sw.update(switches)
        return Plant(self.params, self.table, sw)

    def wave_vector(self, wave):
        return _wave_vector(wave, self.rho_w, self.g)

    def _raise(self, status, x):
        if status == kr.SINGULAR:
            raise SingularAttitude(f"platform pitch {x[4]:.6g} rad at gimbal guard")
        if status == kr.DEGENERATE:
            raise DegenerateAttitude("platform tilt too large for wetted-length model")
        if status == kr.NONFINITE:
            raise SimulationDiverged("non-finite state or derivative")

    def derivative(self, state, t=0.0, wave=None, wind=0.0, beta=0.0, tau_g=None,
                   return_loads=False):
        """Time derivative of the 13-state at wave time ``t``.

        ``wind`` is the inertial longitudinal hub wind speed (m/s) or a
        3-vector whose x component is used.  ``tau_g=None`` applies the
        configured generator torque law.
        """
        x = np.ascontiguousarray(as_array(state), dtype=float)
        u = float(np.asarray(wind).reshape(-1)[0])
        if tau_g is None:
            tau_g = generator_torque(self.rotor, x[12])
        wv = wave if isinstance(wave, np.ndarray) else self.wave_vector(wave)
        xdot = np.empty(N_STATES)
        loads = np.empty(kr.N_LOADS)
        st = kr.plant_rhs(x, float(t), wv, u, float(beta), float(tau_g), self.geo, self.Minv,
                          self.Ms1, self.K, self.B, self.pre, *self._tab, self.sc, self.flags,
                          xdot, loads)
        if st != kr.OK:
            self._raise(st, x)
        if loads[kr.L_CLAMP]:
            warnings.warn("wetted length clamped to the physical column", RuntimeWarning, stacklevel=2)
        return (xdot, loads) if return_loads else xdot

    def derivative_reference(self, state, t=0.0, wave=None, wind=0.0, beta=0.0, tau_g=None):
        """Same derivative assembled from the per-module numpy functions."""
        x = as_array(state)
        p = self.params
        if tau_g is None:
            tau_g = generator_torque(self.rotor, x[12])
        R = rotation_matrix(x[3:6])
        J = euler_rate_map(x[3:6])
        sampler = WaveSampler(wave if wave is not None else WaveSpec(), p.z_swl)
        s = coriolis_and_gravity(x, self.mats)
        if not self.switches["gravity"]:
            from .rigid_body import gravity_wrench
            s[6:] -= gravity_wrench(x[3:6], self.mats.a, self.g)
        Q = np.zeros(7)
        cyls = self.cylinders
        eta = member_elevations(cyls, x, sampler, t)
        if self.switches["buoyancy"] or self.switches["hydro"]:
            L = submerged_lengths(cyls, x, eta, p.z_swl, warn=False)
        if self.switches["buoyancy"]:
            Q[:6] += buoyancy_wrench(cyls, x, eta, p.rho_w, self.g, p.z_swl, lengths=L).as_vector()
        if self.switches["hydro"]:
            Q[:6] += total_hydro(cyls, x, sampler, t, L, p.rho_w, p.quadrature_points).as_vector()
        tau_a = 0.0
        if self.switches["aero"]:
            res = aero_loads(self.rotor, self.table, x, [float(np.asarray(wind).reshape(-1)[0]), 0, 0],
                             self.r_hub, beta)
            Q[:6] += res.wrench.as_vector()
            tau_a = res.torque
        if self.switches["mooring"]:
            moor = self.params.mooring
            if self.B is not moor.damping:
                moor = type(moor)(moor.stiffness, self.B, moor.pretension, moor.lines)
            Q[:6] += mooring_wrench(moor, x).as_vector()
        Q[6] = tau_a - tau_g
        xdot = np.empty(N_STATES)
        xdot[0:3] = R @ x[6:9]
        xdot[3:6] = J @ x[9:12]
        xdot[6:] = self.solver.solve7(s[6:] + Q)
        return xdot

    # ------------------------------------------------------------------
    def energy(self, state):
        """Kinetic plus potential energy of the conservative subsystem.

        Valid in calm water while every floating member keeps a wetted
        length inside its column.  Includes gravity, buoyancy and the
        mooring spring (pretension as a constant generalised force).
        """
        x = as_array(state)
        vel = x[6:13]
        ke = 0.5 * vel @ self.mats.M_s_bar @ vel
        R = rotation_matrix(x[3:6])
        a = self.mats.a
        pe = self.g * (a.a1 * x[2] + R[2] @ np.array([a.a3, 0.0, a.a2]))
        rg = self.rho_w * self.g
        for c in self.cylinders:
            z_b = x[2] + R[2] @ c.r_b - self.params.z_swl
            if c.submerged:
                z_mid = z_b + 0.5 * c.column_length * R[2, 2]
                pe -= rg * c.area * c.column_length * z_mid
            else:
                pe += rg * c.area * z_b ** 2 / (2.0 * R[2, 2])
        q = x[:6]
        pe += 0.5 * q @ self.K @ q - self.pre @ q
        return ke + pe


def step_rk4(f, x, t, dt):
    """Classical fourth-order Runge-Kutta step for x' = f(x, t)."""
    k1 = f(x, t)
    k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(x + dt * k3, t + dt)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ----------------------------------------------------------------------
# scenarios and trajectories

@dataclass
class Scenario:
    wind: WindSource = field(default_factory=lambda: WindSource.constant(0.0))
    wave: WaveSpec = field(default_factory=WaveSpec)
    initial_state: Optional[np.ndarray] = None
    duration: float = 100.0
    dt: float = 0.0125
    beta0: float = 0.0
    controller: object = None
    record_every: int = 4
    r_max: float = 500.0
    omega_factor: float = 3.0
    name: str = ""

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self):
        # a trailing partial step is dropped
        return int(np.floor(self.duration / self.dt + 1e-9))


CHANNELS = (
    ("t", "s"),
    *((n, u) for n, u in zip(STATE_NAMES, ("m",) * 3 + ("rad",) * 3 + ("m/s",) * 3 + ("rad/s",) * 4)),
    ("beta", "rad"), ("beta_rate", "rad/s"), ("beta_rate_cmd", "rad/s"),
    ("tau_g", "N m"), ("tau_a", "N m"), ("thrust", "N"),
    ("xi", "rad/s"), ("gamma", "-"), ("W_norm", "-"),
    *((f"{src}_{c}", u) for src in ("buoy", "hydro", "aero", "moor")
      for c, u in zip(("Fx", "Fy", "Fz", "Mx", "My", "Mz"), ("N",) * 3 + ("N m",) * 3)),
    ("FF1", "N"), ("FF2", "N"), ("FF3", "N"), ("AF1", "N"), ("AF2", "N"), ("AF3", "N"),
    ("wind", "m/s"), ("eta", "m"),
)
CHANNEL_NAMES = tuple(c[0] for c in CHANNELS)
CHANNEL_UNITS = dict(CHANNELS)
_IDX = {n: i for i, n in enumerate(CHANNEL_NAMES)}


@dataclass
class Trajectory:
    """Uniformly sampled simulation record; one row per recorded step."""

    data: np.ndarray
    dt: float
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.data[:, _IDX[name]]

    @property
    def t(self):
        return self["t"]

    @property
    def states(self):
        return self.data[:, 1:14]

    def __len__(self):
        return self.data.shape[0]

    def trimmed(self, t_min):
        return Trajectory(self.data[self.t >= t_min - 1e-9], self.dt, dict(self.meta))


def _record_row(plant, x, loads, t, beta, rate, rate_cmd, tau_g, u, eta, ctrl):
    row = np.empty(len(CHANNEL_NAMES))
    row[0] = t
    row[1:14] = x
    row[14:17] = beta, rate, rate_cmd
    row[17:20] = tau_g, loads[kr.L_TAUA], loads[kr.L_THRUST]
    row[20:23] = ctrl
    row[23:47] = loads[:24]
    R = rotation_matrix(x[3:6])
    T, A = line_tensions(plant.params.mooring, R @ loads[kr.L_MOOR:kr.L_MOOR + 3])
    row[47:50] = T if T.size else 0.0
    row[50:53] = A if A.size else 0.0
    row[53] = u
    row[54] = eta
    return row


def simulate(scenario, plant, controller=None, limits=None):
    """Integrate a scenario with fixed-step RK4.

    Parameters
    ----------
    scenario : Scenario
    plant : Plant
    controller : object, optional
        Anything with ``reset(plant, x0, beta0, t0)``, ``command(x, t, dt,
        wind, beta) -> beta_rate`` and ``channels() -> (xi, gamma, W_norm)``.
        ``None`` holds pitch fixed.
    limits : ActuatorLimits, optional
    """
    from .control import ActuatorLimits, apply_rate_limits

    limits = limits or ActuatorLimits()
    controller = controller if controller is not None else scenario.controller
    dt = scenario.dt
    n = scenario.n_steps
    k = scenario.record_every
    x = np.array(scenario.initial_state if scenario.initial_state is not None
                 else np.zeros(N_STATES), dtype=float)
    if x.shape != (N_STATES,):
        raise ValueError("initial state must have 13 entries")
    beta = float(scenario.beta0)
    wv = plant.wave_vector(scenario.wave)
    wave = scenario.wave
    rot = plant.rotor
    om_max = scenario.omega_factor * rot.Omega_rated
    if controller is not None:
        controller.reset(plant, x.copy(), beta, 0.0)
    rows = []
    loads = np.empty(kr.N_LOADS)
    x_new = np.empty(N_STATES)
    clamp_warned = False
    tab = plant._tab
    tq = torque_schedule(rot)
    for i in range(n + 1):
        t = i * dt
        u = scenario.wind.speed(t)
        if controller is not None and i < n:
            rate_cmd = controller.command(x, t, dt, u, beta)
            rate = apply_rate_limits(beta, rate_cmd, dt, limits)
            ctrl = controller.channels()
        else:
            rate_cmd = rate = 0.0
            ctrl = controller.channels() if controller is not None else (np.nan, np.nan, np.nan)
        tau_g = generator_torque(rot, x[12])
        if i < n:
            st = kr.rk4_step(x, dt, t, wv, u, beta, rate, tq,
                             plant.geo, plant.Minv, plant.Ms1, plant.K, plant.B, plant.pre,
                             tab[0], tab[1], tab[2], tab[3], plant.sc, plant.flags, x_new, loads)
        else:
            _, loads = plant.derivative(x, t, wv, u, beta, tau_g, return_loads=True)
            st = kr.OK
        if i % k == 0:
            eta = 0.0
            if wave is not None and wave.H_s:
                eta = wave.amplitude * np.cos(wave.k * (x[0] * np.cos(wave.direction)
                                                        + x[1] * np.sin(wave.direction))
                                              - wave.omega * t + wave.phase)
            rows.append(_record_row(plant, x, loads, t, beta, rate, rate_cmd, tau_g, u, eta, ctrl))
        if i == n:
            break
        if st != kr.OK:
            raise SimulationDiverged(f"integration failed at t = {t:.4f} s "
                                     f"({['ok', 'gimbal guard', 'degenerate attitude', 'non-finite'][st]})")
        if loads[kr.L_CLAMP] and not clamp_warned:
            warnings.warn(f"wetted length clamped at t = {t:.3f} s", RuntimeWarning, stacklevel=2)
            clamp_warned = True
        x, x_new = x_new, x
        beta = beta + rate * dt
        beta = min(max(beta, limits.beta_min), limits.beta_max)
        if abs(x[0]) > scenario.r_max or abs(x[1]) > scenario.r_max or abs(x[2]) > scenario.r_max \
                or np.linalg.norm(x[:3]) > scenario.r_max:
            raise SimulationDiverged(f"platform excursion beyond {scenario.r_max} m at t = {t + dt:.4f} s")
        if x[12] > om_max:
            raise SimulationDiverged(f"rotor overspeed at t = {t + dt:.4f} s")
        if not abs(x[4]) < np.pi / 2 - EPS_SING:
            raise SimulationDiverged(f"platform pitch at gimbal guard at t = {t + dt:.4f} s")
    meta = {"scenario": scenario.name, "dt": dt, "record_every": k,
            "controller": getattr(controller, "name", "open-loop")}
    return Trajectory(np.array(rows), dt * k, meta)


# ----------------------------------------------------------------------
# equilibrium

def solve_equilibrium(plant, beta=np.pi / 2, wind=0.0, Omega_r=0.0, free="platform",
                      x_guess=None, tol=1e-10, max_iter=60):
    """Static state with zero rates balancing the acceleration rows.

    ``free`` selects the unknowns beyond the six platform coordinates:
    ``"platform"`` (rotor speed held at ``Omega_r``), ``"omega"`` (rotor
    speed solved) or ``"beta"`` (pitch solved at the given rotor speed).
    Raises NoConvergence naming the residual rows that stay above 1e-8.
    """
    if free not in ("platform", "omega", "beta"):
        raise ValueError("free must be 'platform', 'omega' or 'beta'")
    x = np.zeros(N_STATES) if x_guess is None else np.array(as_array(x_guess), dtype=float)
    x[6:12] = 0.0
    x[12] = Omega_r if free != "omega" or x_guess is None else x[12]
    if free == "omega" and x[12] <= 0:
        x[12] = plant.rotor.Omega_rated
    extra = free != "platform"
    bet = float(beta)

    def unpack(z):
        xx = x.copy()
        xx[:6] = z[:6]
        b = bet
        if free == "omega":
            xx[12] = z[6]
        elif free == "beta":
            b = z[6]
        return xx, b

    def resid(z):
        xx, b = unpack(z)
        d = plant.derivative(xx, 0.0, None, wind, b)
        return d[6:13] if extra else d[6:12]

    z = np.concatenate([x[:6], [x[12]] if free == "omega" else ([bet] if free == "beta" else [])])
    scale = np.array([1.0, 1.0, 1.0, 0.1, 0.1, 0.1] + ([1.0] if extra else []))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        r = resid(z)
        for it in range(max_iter):
            if np.max(np.abs(r)) < tol:
                break
            Jm = np.empty((r.size, z.size))
            for j in range(z.size):
                h = 1e-6 * scale[j]
                zp = z.copy()
                zp[j] += h
                zm = z.copy()
                zm[j] -= h
                Jm[:, j] = (resid(zp) - resid(zm)) / (2 * h)
            dz = np.linalg.lstsq(Jm, -r, rcond=None)[0]
            lam = 1.0
            n0 = np.linalg.norm(r)
            while lam > 1e-4:
                zt = z + lam * dz
                try:
                    rt = resid(zt)
                except (SingularAttitude, DegenerateAttitude, SimulationDiverged):
                    lam *= 0.5
                    continue
                if np.linalg.norm(rt) < n0 or lam <= 1e-4:
                    break
                lam *= 0.5
            z, r = zt, rt
    xx, b = unpack(z)
    full = plant.derivative(xx, 0.0, None, wind, b)[6:13]
    bad = tuple(int(6 + i) for i in np.flatnonzero(np.abs(full) >= 1e-8))
    if bad:
        raise NoConvergence(f"static residual above 1e-8 in state rows {bad}", residual=full,
                            failing_rows=bad)
    if free == "beta":
        return StateVector.from_array(xx), b
    return StateVector.from_array(xx)


def trim(plant, wind_speed, Omega_r=None, beta_guess=np.deg2rad(5.0)):
    """Steady operating point at rated (or given) rotor speed: (state, beta)."""
    Om = plant.rotor.Omega_rated if Omega_r is None else Omega_r
    guess = np.zeros(N_STATES)
    guess[12] = Om
    guess[6:12] = 0.0
    # start from the calm equilibrium to keep the Newton iteration local
    try:
        base = solve_equilibrium(plant, beta=np.pi / 2, wind=0.0, Omega_r=0.0)
        guess[:6] = base.to_array()[:6]
    except NoConvergence:
        pass
    z0 = guess.copy()
    return solve_equilibrium(plant, beta=beta_guess, wind=wind_speed, Omega_r=Om, free="beta",
                             x_guess=z0)
