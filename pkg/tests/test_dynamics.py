import warnings

import numpy as np
import pytest

from fowtsim.dynamics import (CHANNEL_NAMES, Plant, Scenario, simulate, solve_equilibrium,
                              step_rk4, trim)
from fowtsim.environment import WaveSpec, WindSource
from fowtsim.errors import NoConvergence, SimulationDiverged
from fowtsim.frames import euler_rate_map, rotation_matrix
from fowtsim.params import RPM
from scenarios import energy_drift, rk4_order_ratio


@pytest.fixture(scope="module")
def calm_eq(plant):
    return solve_equilibrium(plant).to_array()


@pytest.fixture(scope="module")
def conservative(params):
    """Calm-water subsystem without dissipation or rotor forcing."""
    return Plant(params, loads={"aero": False},
                 overrides={"C_d": 0.0, "C_dz": 0.0, "damping_scale": 0.0})


def random_state(rng, Om=1.2):
    x = np.zeros(13)
    x[:6] = rng.normal(0, [1.0, 1.0, 0.3, 0.02, 0.04, 0.02])
    x[6:12] = rng.normal(0, 0.1, 6)
    x[12] = Om
    return x


# ---------------------------------------------------------------- derivative

@pytest.mark.parametrize("wave", [None, WaveSpec(3.0, 10.0), WaveSpec(2.0, 8.0, direction=0.4)])
def test_kernel_matches_numpy_assembly(plant, rng, wave):
    for _ in range(5):
        x = random_state(rng)
        t, u, b = rng.uniform(0, 50), rng.uniform(5, 25), rng.uniform(0, 0.3)
        a = plant.derivative(x, t, wave, u, b)
        ref = plant.derivative_reference(x, t, wave, u, b)
        assert np.allclose(a, ref, rtol=1e-10, atol=1e-12)


def test_kinematic_rows(plant, rng):
    x = random_state(rng)
    d = plant.derivative(x, 0.0, None, 12.0, 0.1)
    assert np.allclose(d[0:3], rotation_matrix(x[3:6]) @ x[6:9], rtol=1e-14)
    assert np.allclose(d[3:6], euler_rate_map(x[3:6]) @ x[9:12], rtol=1e-14)


def test_gyroscopic_coupling_sign(params, calm_eq):
    """A spinning rotor (+x) under a yaw rate pitches the platform nose-up/down
    consistently with d(h)/dt = -omega x h."""
    pl = Plant(params, loads={"aero": False, "hydro": False, "mooring": False,
                              "buoyancy": False, "gravity": False})
    x = np.zeros(13)
    x[11] = 0.01            # yaw rate
    x[12] = 1.2
    d_spin = pl.derivative(x, tau_g=0.0)
    x[12] = 0.0
    d_still = pl.derivative(x, tau_g=0.0)
    # -omega x (I_rx Omega e1) = -I_rx Omega (0, w_z, 0)
    torque = -pl.mats.a.I_rx * 1.2 * 0.01
    expect = pl.solver.solve7(np.r_[0, 0, 0, 0, torque, 0, 0])
    assert np.allclose(d_spin[6:] - d_still[6:], expect, rtol=1e-9, atol=1e-15)
    assert torque < 0


# ---------------------------------------------------------------- integrator

def test_rk4_scalar_decay():
    x = np.array([1.0])
    for i in range(10):
        x = step_rk4(lambda y, t: -y, x, 0.01 * i, 0.01)
    assert x[0] == pytest.approx(np.exp(-0.1), rel=1e-10)
    x1 = step_rk4(lambda y, t: -y, np.array([1.0]), 0.0, 0.1)
    assert x1[0] == pytest.approx(0.9048375, abs=1e-7)


def _final_states(plant, x0, dts, duration=20.0):
    out = []
    for dt in dts:
        sc = Scenario(wind=WindSource.constant(15.0), initial_state=x0, duration=duration,
                      dt=dt, record_every=1, beta0=0.05)
        out.append(simulate(sc, plant).states[-1])
    return out


def test_rk4_fourth_order_on_smooth_subsystem():
    assert 12.0 <= rk4_order_ratio() <= 20.0


def test_full_plant_converges_under_refinement(plant, calm_eq):
    x0 = calm_eq.copy()
    x0[0] += 3.0
    x0[4] += 0.03
    x0[12] = 1.2
    a, b, c, d = _final_states(plant, x0, (0.05, 0.025, 0.0125, 0.00625))
    e = [np.linalg.norm(a - b), np.linalg.norm(b - c), np.linalg.norm(c - d)]
    assert e[0] > e[1] > e[2]
    assert e[2] < 1e-5 * np.linalg.norm(d)


def test_energy_conserved_without_dissipation():
    assert energy_drift() < 1e-3


def test_energy_is_stationary_at_equilibrium(conservative):
    eq = solve_equilibrium(conservative).to_array()
    for j in range(6):
        h = 1e-4
        xp, xm = eq.copy(), eq.copy()
        xp[j] += h
        xm[j] -= h
        grad = (conservative.energy(xp) - conservative.energy(xm)) / (2 * h)
        assert abs(grad) < 1e-3 * conservative.mats.a.a1 * conservative.g * 1e-3


# ---------------------------------------------------------------- equilibrium

def test_calm_equilibrium(plant, calm_eq):
    d = plant.derivative(calm_eq, beta=np.pi / 2)
    assert np.max(np.abs(d[6:13])) < 1e-8
    assert calm_eq[3] == pytest.approx(0.0, abs=1e-9)
    assert calm_eq[5] == pytest.approx(0.0, abs=1e-9)


def test_equilibrium_is_held(plant, calm_eq):
    sc = Scenario(initial_state=calm_eq, duration=100.0, beta0=np.pi / 2)
    tr = simulate(sc, plant)
    assert np.max(np.abs(tr.states - calm_eq)) < 1e-4


def test_trim_balances_rotor(plant):
    st, beta = trim(plant, 18.0)
    x = st.to_array()
    assert x[12] == pytest.approx(plant.rotor.Omega_rated, rel=1e-12)
    assert np.max(np.abs(plant.derivative(x, wind=18.0, beta=beta)[6:13])) < 1e-8
    assert 0.0 < beta < np.deg2rad(10.0)


def test_free_rotor_speed_without_static_point(plant):
    with pytest.raises(NoConvergence) as exc:
        solve_equilibrium(plant, beta=0.0, wind=25.0, Omega_r=1.2, free="omega")
    assert 12 in exc.value.failing_rows


def test_free_rotor_speed_equilibrium(plant):
    st = solve_equilibrium(plant, beta=0.0, wind=10.0, Omega_r=1.0, free="omega")
    assert np.max(np.abs(plant.derivative(st, wind=10.0, beta=0.0)[6:13])) < 1e-8


# ---------------------------------------------------------------- simulate

def short_scenario(seed=3):
    x0 = np.zeros(13)
    x0[12] = 12.1 * RPM
    return Scenario(wind=WindSource.spectral(18.0, 0.1, seed=seed, duration=30.0),
                    wave=WaveSpec(3.0, 10.0), initial_state=x0, duration=30.0, beta0=0.05)


def test_simulation_is_deterministic(plant):
    a = simulate(short_scenario(), plant)
    b = simulate(short_scenario(), plant)
    assert np.array_equal(a.data, b.data, equal_nan=True)


def test_trajectory_layout(plant):
    tr = simulate(short_scenario(), plant)
    assert tr.data.shape[1] == len(CHANNEL_NAMES)
    assert np.all(np.diff(tr.t) > 0)
    assert tr.t[-1] == pytest.approx(30.0)
    assert np.allclose(np.diff(tr.t), tr.dt)
    assert tr.trimmed(10.0).t[0] == pytest.approx(10.0)


def test_divergence_is_reported(plant):
    x0 = np.zeros(13)
    x0[12] = 12.1 * RPM
    # pitch held at zero in 25 m/s drives the rotor past twice rated speed
    sc = Scenario(wind=WindSource.constant(25.0), initial_state=x0, duration=300.0, beta0=0.0,
                  omega_factor=2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(SimulationDiverged):
            simulate(sc, plant)
    x0[0] = 600.0
    with pytest.raises(SimulationDiverged, match="excursion"):
        simulate(Scenario(initial_state=x0, duration=1.0), plant)
