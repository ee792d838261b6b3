"""Buoyancy, Morison strip loads, heave plates and linearised mooring.

These are the reference (numpy) implementations.  Every wrench is a force
and moment about the platform CG in body components.  Vertical positions
passed to the wave model are measured from the still-water line, which sits
at inertial ``z = params.z_swl``.
"""

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .environment import WaveSpec, water_particle_kinematics
from .errors import DegenerateAttitude, RoleMismatch
from .frames import euler_rate_map, rotation_matrix
from .state import LoadWrench, as_array

COS_LIMIT = 0.2  # about 78 deg of tilt


@dataclass(frozen=True)
class WaveSampler:
    """Adapter turning a WaveSpec into kinematics at inertial points."""

    spec: WaveSpec
    z_swl: float = 0.0

    def kinematics(self, points, t):
        p = np.asarray(points, dtype=float)
        return water_particle_kinematics(self.spec, p[..., 0], p[..., 1], p[..., 2] - self.z_swl, t)

    def elevation(self, x, y, t):
        return water_particle_kinematics(self.spec, x, y, 0.0 * np.asarray(x), t).eta


def calm_sampler(z_swl=0.0):
    return WaveSampler(WaveSpec(H_s=0.0), z_swl)


def _pose(state):
    x = as_array(state)
    return x, rotation_matrix(x[3:6])


def base_heights(cyls, state):
    """Inertial z of each member's base centre."""
    x, R = _pose(state)
    return np.array([x[2] + R[2] @ c.r_b for c in cyls])


def submerged_length(cyl, state, eta_i, z_swl=0.0, warn=True):
    """Wetted length along the member axis, clamped to the physical column."""
    x, R = _pose(state)
    if cyl.submerged:
        return cyl.column_length
    den = R[2, 2]
    if den < COS_LIMIT:
        raise DegenerateAttitude(f"axis vertical component {den:.3g} below {COS_LIMIT}")
    z_b = x[2] + R[2] @ cyl.r_b
    L = (z_swl + eta_i - z_b) / den
    hi = cyl.column_length
    if (L < 0.0 or L > hi) and warn:
        warnings.warn(f"member {cyl.name!r} wetted length {L:.3f} m clamped to [0, {hi}]",
                      RuntimeWarning, stacklevel=2)
    return min(max(L, 0.0), hi)


def member_elevations(cyls, state, sampler, t):
    """Surface elevation sampled at each member's base-centre plan position."""
    x, R = _pose(state)
    pts = np.array([x[:3] + R @ c.r_b for c in cyls])
    return np.asarray(sampler.elevation(pts[:, 0], pts[:, 1], t), dtype=float)


def submerged_lengths(cyls, state, eta, z_swl=0.0, warn=True):
    return np.array([submerged_length(c, state, e, z_swl, warn) for c, e in zip(cyls, eta)])


def buoyancy_wrench(cyls, state, eta, rho_w=1025.0, g=9.80665, z_swl=0.0, lengths=None):
    """Hydrostatic buoyancy of the displaced volume, applied at its centroid."""
    x, R = _pose(state)
    L = submerged_lengths(cyls, state, eta, z_swl) if lengths is None else np.asarray(lengths)
    V = np.array([c.area for c in cyls]) * L
    Vd = V.sum()
    F = rho_w * g * Vd * R[2]          # R^T e3
    if Vd <= 0.0:
        return LoadWrench(F, np.zeros(3), "buoyancy")
    mids = np.array([c.r_b + np.array([0.0, 0.0, 0.5 * l]) for c, l in zip(cyls, L)])
    r_B = (V[:, None] * mids).sum(axis=0) / Vd
    return LoadWrench(F, np.cross(r_B, F), "buoyancy")


def _relative_flow(state, R, r_a, kin):
    """Fluid velocity relative to body points and fluid acceleration, body frame."""
    x = as_array(state)
    v, w = x[6:9], x[9:12]
    vw = kin.vel @ R        # rows of R^T v
    aw = kin.acc @ R
    va = v + np.cross(w, r_a)
    return vw - va, aw


@lru_cache(maxsize=None)
def strip_rule(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _strip_points(cyl, L, n):
    s, w = strip_rule(n)
    pts = np.tile(np.asarray(cyl.r_b, dtype=float), (n, 1))
    pts[:, 2] += s * L
    return pts, w * L


def morison_transverse(cyl, state, sampler, t, length, rho_w=1025.0, n=32):
    """Transverse drag and fluid-inertia load on one member by Gauss-Legendre strips.

    The structure-acceleration part of the inertia term is carried by the
    added-mass matrix and is not included.
    """
    if length <= 0.0:
        return LoadWrench(tag="hydrodynamic")
    x, R = _pose(state)
    r_a, ds = _strip_points(cyl, length, n)
    kin = sampler.kinematics(x[:3] + r_a @ R.T, t)
    vrel, aw = _relative_flow(x, R, r_a, kin)
    vrel[:, 2] = 0.0
    aw = aw.copy()
    aw[:, 2] = 0.0
    A = cyl.area
    CD = 0.5 * cyl.C_d * rho_w * cyl.d
    CA = cyl.C_a * rho_w * A
    speed = np.sqrt((vrel ** 2).sum(axis=1))
    dF = (CD * speed)[:, None] * vrel + (CA + rho_w * A) * aw
    F = ds @ dF
    M = ds @ np.cross(r_a, dF)
    return LoadWrench(F, M, "hydrodynamic")


def heave_plate_loads(cyl, upper, state, sampler, t, rho_w=1025.0):
    """Axial drag, Froude-Krylov inertia and face pressures on a base column.

    ``upper`` is the column standing on the plate; its section is removed
    from the top-face pressure area.
    """
    if not cyl.submerged:
        raise RoleMismatch(f"member {cyl.name!r} is not a base column")
    x, R = _pose(state)
    L = cyl.column_length
    r_b = np.asarray(cyl.r_b, dtype=float)
    r_c = r_b + np.array([0.0, 0.0, 0.5 * L])
    r_t = r_b + np.array([0.0, 0.0, L])
    pts = x[:3] + np.array([r_c, r_b, r_t]) @ R.T
    kin = sampler.kinematics(pts, t)
    vrel, aw = _relative_flow(x, R, r_c[None, :], kin)
    A = cyl.area
    CDz = 0.5 * cyl.C_dz * rho_w * A
    CAz = cyl.C_az * rho_w * (2.0 / 3.0) * np.pi * (cyl.d / 2.0) ** 3
    vz, az = vrel[0, 2], aw[0, 2]
    p_b, p_t = kin.p_dyn[1], kin.p_dyn[2]
    Fz = CDz * abs(vz) * vz + CAz * az + A * p_b - (A - upper.area) * p_t
    F = np.array([0.0, 0.0, Fz])
    return LoadWrench(F, np.cross(r_c, F), "hydrodynamic")


def member_hydro(cyls, state, sampler, t, lengths, rho_w=1025.0, n=32):
    """Per-member hydrodynamic wrenches in fixed member order."""
    out = []
    for i, c in enumerate(cyls):
        w = morison_transverse(c, state, sampler, t, lengths[i], rho_w, n)
        if c.submerged:
            w = w + heave_plate_loads(c, cyls[i - 3], state, sampler, t, rho_w)
        out.append(w)
    return out


def total_hydro(cyls, state, sampler, t, lengths, rho_w=1025.0, n=32):
    total = LoadWrench(tag="hydrodynamic")
    for w in member_hydro(cyls, state, sampler, t, lengths, rho_w, n):
        total = total + w
    return total


@dataclass
class MooringResult:
    wrench: LoadWrench
    fairlead: np.ndarray
    anchor: np.ndarray


def mooring_generalized(cfg, state):
    """Generalised load pretension - K q - B qdot on q = [r, theta]."""
    x = as_array(state)
    R = rotation_matrix(x[3:6])
    J = euler_rate_map(x[3:6])
    q = x[:6]
    qd = np.concatenate([R @ x[6:9], J @ x[9:12]])
    return cfg.pretension - cfg.stiffness @ q - cfg.damping @ qd, R, J


def line_tensions(cfg, Q_force):
    """Split the inertial force change over the three lines."""
    if not cfg.lines:
        return np.zeros(0), np.zeros(0)
    U = np.column_stack([ln.direction for ln in cfg.lines])
    dT = np.linalg.solve(U, Q_force - cfg.pretension[:3])
    T = np.array([ln.pretension for ln in cfg.lines]) + dT
    anchor = T * np.cos([ln.declination for ln in cfg.lines])
    return T, anchor


def mooring_wrench(cfg, state, with_tensions=False):
    """Body-frame mooring wrench; moments map through the Euler-rate matrix."""
    Q, R, J = mooring_generalized(cfg, state)
    w = LoadWrench(R.T @ Q[:3], J.T @ Q[3:], "mooring")
    if not with_tensions:
        return w
    T, anchor = line_tensions(cfg, Q[:3])
    return MooringResult(w, T, anchor)
