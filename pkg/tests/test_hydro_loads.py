import warnings
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq

from fowtsim.dynamics import solve_equilibrium
from fowtsim.environment import WaterKinematics, WaveSpec
from fowtsim.errors import DegenerateAttitude, RoleMismatch
from fowtsim.frames import rotation_matrix
from fowtsim.hydro_loads import (WaveSampler, buoyancy_wrench, calm_sampler, heave_plate_loads,
                                 line_tensions, member_hydro, mooring_wrench, morison_transverse,
                                 submerged_length, submerged_lengths, total_hydro)
from fowtsim.rigid_body import gravity_wrench


class UniformFlow:
    """Sampler with spatially uniform fluid velocity, acceleration and pressure."""

    def __init__(self, vel=(0, 0, 0), acc=(0, 0, 0), p=0.0):
        self.vel, self.acc, self.p = np.asarray(vel, float), np.asarray(acc, float), p

    def kinematics(self, points, t):
        shape = np.asarray(points).shape[:-1]
        return WaterKinematics(np.zeros(shape), np.broadcast_to(self.vel, shape + (3,)).copy(),
                               np.broadcast_to(self.acc, shape + (3,)).copy(), np.full(shape, self.p))

    def elevation(self, x, y, t):
        return np.zeros(np.shape(x))


def state(r=(0, 0, 0), theta=(0, 0, 0), v=(0, 0, 0), w=(0, 0, 0), Om=0.0):
    return np.concatenate([r, theta, v, w, [Om]]).astype(float)


# ---------------------------------------------------------------- lengths

def test_upright_wetted_length_is_initial(params):
    for c in params.cylinders:
        assert submerged_length(c, state(), 0.0, params.z_swl) == pytest.approx(c.L_0, abs=1e-12)


def test_elevation_shifts_wetted_length(params):
    c = params.cylinders[0]
    assert submerged_length(c, state(), 1.0, params.z_swl) == pytest.approx(c.L_0 + 1.0, abs=1e-12)


def test_pitched_wetted_length_matches_geometric_intersection(params):
    x = state(theta=(0.0, np.deg2rad(10.0), 0.0))
    R = rotation_matrix(x[3:6])
    for c in params.cylinders[:4]:
        # point on the axis at distance s, inertial height relative to the SWL
        height = lambda s: (R @ (c.r_b + [0.0, 0.0, s]))[2] - params.z_swl
        s_star = brentq(height, 0.0, 100.0, xtol=1e-14)
        assert submerged_length(c, x, 0.0, params.z_swl) == pytest.approx(s_star, abs=1e-9)


def test_base_columns_keep_full_length(params):
    x = state(r=(0, 0, 3.0), theta=(0.05, 0.1, 0.0))
    for c in params.cylinders[4:]:
        assert submerged_length(c, x, 2.0, params.z_swl) == c.length


def test_clamping_warns(params):
    c = params.cylinders[0]
    with pytest.warns(RuntimeWarning):
        L = submerged_length(c, state(r=(0, 0, -50.0)), 0.0, params.z_swl)
    assert L == c.column_length


def test_degenerate_attitude(params):
    with pytest.raises(DegenerateAttitude):
        submerged_length(params.cylinders[0], state(theta=(0.0, 1.4, 0.0)), 0.0, params.z_swl)


def test_displaced_volume_monotone_in_elevation(params):
    vols = []
    for eta in np.linspace(-3, 3, 13):
        L = submerged_lengths(params.cylinders, state(), [eta] * 7, params.z_swl)
        vols.append(sum(c.area * l for c, l in zip(params.cylinders, L)))
    assert np.all(np.diff(vols) >= 0)


# ---------------------------------------------------------------- buoyancy

def test_upright_buoyancy(params):
    w = buoyancy_wrench(params.cylinders, state(), np.zeros(7), params.rho_w, 9.80665, params.z_swl)
    Vd = sum(np.pi * c.d ** 2 / 4 * c.L_0 for c in params.cylinders)
    assert np.allclose(w.force, [0, 0, params.rho_w * 9.80665 * Vd], rtol=1e-14, atol=1e-6)
    assert abs(w.moment[0]) < 1e-6 * w.force[2] and abs(w.moment[1]) < 1e-6 * w.force[2]


def test_pitched_buoyancy_matches_strip_oracle(params):
    x = state(r=(0.5, 0.0, -0.3), theta=(0.0, np.deg2rad(5.0), 0.0))
    R = rotation_matrix(x[3:6])
    rho, g = params.rho_w, 9.80665
    w = buoyancy_wrench(params.cylinders, x, np.zeros(7), rho, g, params.z_swl)
    L = submerged_lengths(params.cylinders, x, np.zeros(7), params.z_swl)
    n = 400
    F = np.zeros(3)
    M = np.zeros(3)
    up = R.T @ [0, 0, 1.0]
    for c, l in zip(params.cylinders, L):
        s = (np.arange(n) + 0.5) * l / n
        pts = c.r_b + np.outer(s, [0, 0, 1.0])
        dF = rho * g * c.area * (l / n) * up
        F += n * dF
        M += np.cross(pts, dF).sum(axis=0)
    assert np.allclose(w.force, F, rtol=1e-10, atol=0)
    assert np.abs(w.moment - M).max() <= 1e-8 * np.linalg.norm(F)


# ---------------------------------------------------------------- Morison

def test_still_water_stationary_is_zero(params):
    sampler = calm_sampler(params.z_swl)
    L = submerged_lengths(params.cylinders, state(), np.zeros(7), params.z_swl)
    w = total_hydro(params.cylinders, state(), sampler, 0.0, L, params.rho_w)
    assert np.array_equal(w.as_vector(), np.zeros(6))


def test_uniform_cross_flow_drag(params):
    c = params.cylinders[0]
    U = 1.7
    w = morison_transverse(c, state(), UniformFlow(vel=(U, 0, 0)), 0.0, c.L_0, params.rho_w)
    expected = 0.5 * c.C_d * params.rho_w * c.d * c.L_0 * U ** 2
    assert w.force[0] == pytest.approx(expected, rel=1e-13)
    assert w.force[1] == 0.0 and w.force[2] == 0.0


def test_drag_antisymmetry(params):
    c = params.cylinders[1]
    a = morison_transverse(c, state(), UniformFlow(vel=(0.8, -0.3, 0.2)), 0.0, c.L_0, params.rho_w)
    b = morison_transverse(c, state(), UniformFlow(vel=(-0.8, 0.3, -0.2)), 0.0, c.L_0, params.rho_w)
    assert np.array_equal(a.as_vector(), -b.as_vector())


def test_morison_quadrature_converged(params):
    sampler = WaveSampler(WaveSpec(3.0, 10.0), params.z_swl)
    x = state(r=(1.0, 0.0, 0.2), theta=(0.01, 0.05, 0.0), v=(0.3, 0.0, 0.1), w=(0.0, 0.02, 0.0))
    L = submerged_lengths(params.cylinders, x, np.zeros(7), params.z_swl)
    for t in (0.0, 2.5, 6.1):
        a = total_hydro(params.cylinders, x, sampler, t, L, params.rho_w, n=32).as_vector()
        b = total_hydro(params.cylinders, x, sampler, t, L, params.rho_w, n=64).as_vector()
        assert np.linalg.norm(a[:3] - b[:3]) < 1e-3 * np.linalg.norm(b[:3])
        assert np.linalg.norm(a[3:] - b[3:]) < 1e-3 * np.linalg.norm(b[3:])


def test_total_is_sum_of_members_and_frame_consistent(params):
    sampler = WaveSampler(WaveSpec(3.0, 10.0), params.z_swl)
    x = state(theta=(0.02, 0.04, 0.1), v=(0.2, 0.1, 0.0))
    L = submerged_lengths(params.cylinders, x, np.zeros(7), params.z_swl)
    parts = member_hydro(params.cylinders, x, sampler, 1.0, L, params.rho_w)
    total = total_hydro(params.cylinders, x, sampler, 1.0, L, params.rho_w)
    assert np.array_equal(sum(p.as_vector() for p in parts), total.as_vector())
    R = rotation_matrix(x[3:6])
    inertial_each = sum(R @ p.force for p in parts)
    assert np.allclose(inertial_each, R @ total.force, rtol=1e-12, atol=1e-9)


def test_wave_drift_force_non_negative(params):
    sampler = WaveSampler(WaveSpec(3.0, 10.0), params.z_swl)
    L = submerged_lengths(params.cylinders, state(), np.zeros(7), params.z_swl)
    ts = np.linspace(0.0, 10.0, 400, endpoint=False)
    fx = [total_hydro(params.cylinders, state(), sampler, t, L, params.rho_w).force[0] for t in ts]
    assert np.mean(fx) >= 0.0


# ---------------------------------------------------------------- heave plates

def test_heave_plate_role_check(params):
    with pytest.raises(RoleMismatch):
        heave_plate_loads(params.cylinders[1], params.cylinders[0], state(), calm_sampler(), 0.0)


def test_heave_plate_still_water_zero(params):
    c, up = params.cylinders[4], params.cylinders[1]
    w = heave_plate_loads(c, up, state(), calm_sampler(params.z_swl), 0.0, params.rho_w)
    assert np.array_equal(w.as_vector(), np.zeros(6))


def test_heave_plate_axial_inertia(params):
    c, up = params.cylinders[4], params.cylinders[1]
    az = 0.4
    w = heave_plate_loads(c, up, state(), UniformFlow(acc=(0, 0, az)), 0.0, params.rho_w)
    mz = c.C_az * params.rho_w * (2 / 3) * np.pi * (c.d / 2) ** 3
    assert w.force[2] == pytest.approx(mz * az, rel=1e-14)
    r_c = c.r_b + [0, 0, c.length / 2]
    assert np.allclose(w.moment, np.cross(r_c, w.force), rtol=1e-14)


def test_heave_plate_pressure_term(params):
    c, up = params.cylinders[5], params.cylinders[2]
    p = 2500.0
    w = heave_plate_loads(c, up, state(), UniformFlow(p=p), 0.0, params.rho_w)
    assert w.force[2] == pytest.approx(up.area * p, rel=1e-12)


# ---------------------------------------------------------------- mooring

def test_mooring_pretension_at_rest(params):
    w = mooring_wrench(params.mooring, state())
    assert np.array_equal(w.as_vector(), params.mooring.pretension)


def test_mooring_surge(params):
    K, pre = params.mooring.stiffness, params.mooring.pretension
    w = mooring_wrench(params.mooring, state(r=(2.0, 0, 0)))
    assert w.force[0] == pytest.approx(pre[0] - K[0, 0] * 2.0, rel=1e-14)


def test_mooring_odd_restoring(params):
    a = mooring_wrench(params.mooring, state(r=(1.5, 0, 0))).as_vector()
    b = mooring_wrench(params.mooring, state(r=(-1.5, 0, 0))).as_vector()
    assert np.allclose(0.5 * (a + b), params.mooring.pretension, rtol=0, atol=1e-9)


def test_line_tensions_at_rest_and_surge(params):
    m = params.mooring
    T, A = line_tensions(m, m.pretension[:3])
    assert np.allclose(T, [ln.pretension for ln in m.lines], rtol=1e-12)
    assert np.allclose(A, T * np.cos(np.deg2rad(30.0)), rtol=1e-12)
    # downwind surge loads the upwind line (azimuth 180 deg) harder
    res = mooring_wrench(m, state(r=(3.0, 0, 0)), with_tensions=True)
    assert res.fairlead[1] > res.fairlead[0]
    assert res.fairlead[0] == pytest.approx(res.fairlead[2], rel=1e-12)


def test_static_closure_at_equilibrium(plant, params):
    eq = solve_equilibrium(plant, beta=np.pi / 2, wind=0.0, Omega_r=0.0).to_array()
    B = buoyancy_wrench(params.cylinders, eq, np.zeros(7), params.rho_w, 9.80665, params.z_swl)
    G = gravity_wrench(eq[3:6], plant.mats.a, 9.80665)[:6]
    M = mooring_wrench(params.mooring, eq)
    total = B.as_vector() + G + M.as_vector()
    assert np.abs(total[:3]).max() < 1e-6 * B.force[2]
    assert np.abs(total[3:]).max() < 1e-6 * B.force[2]
