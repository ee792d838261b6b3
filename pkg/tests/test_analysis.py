import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fowtsim.analysis import (DEL_CHANNELS, RMS_CHANNELS, DelConfig, av, compare_report,
                              cycle_histogram, del_compute, euler_rates, format_report,
                              normalized_rms, openloop_statistics, rainflow_count, rms,
                              turning_points)
from fowtsim.dynamics import CHANNEL_NAMES, Trajectory
from fowtsim.errors import EmptySeries, ScenarioMismatch, ZeroBaseline
from fowtsim.frames import euler_rate_map

# magnitudes whose squares stay normal doubles
finite = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda v: v == 0 or abs(v) > 1e-100)
scale = st.floats(-50, 50, allow_nan=False).filter(lambda v: abs(v) > 1e-6)
series = st.lists(finite, min_size=2, max_size=200).map(np.array)


def sine(A=2.0, periods=10, fs=80.0, f=0.5):
    t = np.arange(int(round(periods / f * fs)) + 1) / fs
    return A * np.sin(2 * np.pi * f * t)


# ---------------------------------------------------------------- statistics

def test_constant_series():
    x = np.full(100, 5.0)
    assert av(x) == 5.0 and rms(x) == 5.0


def test_sine_statistics():
    x = sine()[:-1]
    assert abs(av(x)) < 1e-3
    assert rms(x) == pytest.approx(2.0 / np.sqrt(2), rel=1e-3)


def test_empty_series():
    with pytest.raises(EmptySeries):
        av([])
    with pytest.raises(EmptySeries):
        rms(np.array([]))


@given(series, scale)
def test_rms_homogeneity_and_mean_shift(x, a):
    assert rms(a * x) == pytest.approx(abs(a) * rms(x), rel=1e-12, abs=1e-300)
    assert av(x + a) == pytest.approx(av(x) + a, rel=1e-12, abs=1e-9)


def test_normalized_rms():
    x = sine()
    assert normalized_rms(x, x) == 1.0
    assert normalized_rms(0.5 * x, x) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ZeroBaseline):
        normalized_rms(x, np.zeros(10))


# ---------------------------------------------------------------- rainflow

def test_rainflow_constant():
    assert rainflow_count(np.full(50, 3.0)) == []


def test_rainflow_textbook_sequence():
    # standard nine-point example with its known decomposition
    x = [-2, 1, -3, 5, -1, 3, -4, 4, -2]
    assert cycle_histogram(rainflow_count(x)) == {3: 0.5, 4: 1.5, 6: 0.5, 8: 1.0, 9: 0.5}


def test_rainflow_sinusoid():
    n, A = 12, 1.5
    cyc = rainflow_count(sine(A, n))
    full = [r for r, c in cyc if c == 1.0]
    half = [r for r, c in cyc if c == 0.5]
    assert all(r == pytest.approx(2 * A, rel=1e-3) for r in full)
    total = len(full) + 0.5 * sum(r > 1.9 * A for r in half)
    assert abs(total - n) <= 0.5 + 1e-12


@given(series)
@settings(max_examples=200)
def test_rainflow_consumes_every_interval(x):
    tp = turning_points(x)
    cyc = rainflow_count(x)
    used = sum(2 if c == 1.0 else 1 for _, c in cyc)
    assert used == max(len(tp) - 1, 0)


def test_turning_points_keep_ends_and_collapse_plateaus():
    assert list(turning_points([0, 1, 1, 1, 0, 2, 3])) == [0, 1, 0, 3]


# ---------------------------------------------------------------- DEL

def test_del_zero_variance():
    assert del_compute(np.full(20, 7.0), DelConfig(N_ref=1.0)) == 0.0


def test_del_sinusoid_closed_form():
    n, A, m = 10, 3.0, 4.0
    t = np.arange(160 * n + 1) / 80.0
    x = A * np.cos(np.pi * t)       # starts and ends on a crest: every range is 2A
    cfg = DelConfig(m=m, N_ref=100.0)
    assert del_compute(x, cfg) == pytest.approx((n * (2 * A) ** m / 100.0) ** (1 / m), rel=1e-12)


@given(series, scale)
def test_del_homogeneity(x, a):
    cfg = DelConfig(m=4.0, N_ref=10.0)
    assert del_compute(a * x, cfg) == pytest.approx(abs(a) * del_compute(x, cfg), rel=1e-12, abs=1e-300)


def test_del_reference_count_from_duration():
    x = sine(1.0, 10)
    dt = 1 / 80.0
    T = dt * (len(x) - 1)
    assert del_compute(x, DelConfig(f_ref=1.0), dt=dt) == pytest.approx(
        del_compute(x, DelConfig(N_ref=T)), rel=1e-14)
    with pytest.raises(ValueError):
        del_compute(x, DelConfig())


def test_del_config_validation():
    with pytest.raises(ValueError):
        DelConfig(m=0.5)
    with pytest.raises(ValueError):
        DelConfig(N_ref=0.0)


# ---------------------------------------------------------------- reports

def synthetic(noise=0, scale=1.0, n=2001, dt=0.1, **meta):
    rng = np.random.default_rng(noise)
    data = np.zeros((n, len(CHANNEL_NAMES)))
    data[:, 0] = np.arange(n) * dt
    data[:, 1:] = scale * rng.normal(size=(n, len(CHANNEL_NAMES) - 1))
    data[:, 4:7] *= 0.01     # small angles
    m = {"scenario": "s", "seed": 1, "dt": 0.0125, "duration": 200.0}
    m.update(meta)
    return Trajectory(data, dt, m)


def test_report_schema_and_self_comparison():
    tr = synthetic()
    rows = compare_report({"GSPI": tr, "COPY": tr})
    assert len(rows) == len(RMS_CHANNELS) + len(DEL_CHANNELS) == 11
    for r in rows:
        assert r.normalized["GSPI"] == 1.0 and r.normalized["COPY"] == 1.0


def test_report_ratio_direction():
    a, b = synthetic(1), synthetic(1, scale=0.5)
    rows = compare_report({"GSPI": a, "HALF": b}, Omega_r0=0.0)
    # Euler rates depend on the angles nonlinearly; the other channels are linear
    linear = [r for r in rows if not r.channel.endswith("_rate")]
    assert len(linear) == 8
    assert all(r.normalized["HALF"] == pytest.approx(0.5, rel=1e-9) for r in linear)


def test_report_rejects_mismatched_scenarios():
    with pytest.raises(ScenarioMismatch):
        compare_report({"A": synthetic(), "B": synthetic(seed=2)})
    with pytest.raises(ScenarioMismatch):
        compare_report({"A": synthetic(), "B": synthetic(scenario="other")})
    with pytest.raises(ScenarioMismatch):
        compare_report({"A": synthetic(), "B": synthetic(n=1999)})


def test_report_zero_baseline():
    z = synthetic(scale=0.0)
    with pytest.raises(ZeroBaseline):
        compare_report({"A": z, "B": synthetic()}, Omega_r0=0.0)


def test_report_text_is_deterministic():
    trs = {"GSPI": synthetic(3), "RISE": synthetic(4)}
    a = format_report(compare_report(trs))
    b = format_report(compare_report(trs))
    assert a == b and "TB_proxy" in a
    tsv = format_report(compare_report(trs), delimited=True).splitlines()
    assert tsv[0].split("\t")[:2] == ["metric", "channel"]
    assert len(tsv) == 12 and all(len(l.split("\t")) == 6 for l in tsv)


def test_euler_rates_match_rate_map(rng):
    tr = synthetic(5)
    roll, pitch, yaw = euler_rates(tr)
    for i in rng.integers(0, len(tr), 20):
        th = [tr["theta_x"][i], tr["theta_y"][i], tr["theta_z"][i]]
        w = [tr["omega_x"][i], tr["omega_y"][i], tr["omega_z"][i]]
        assert np.allclose([roll[i], pitch[i], yaw[i]], euler_rate_map(th) @ w, rtol=1e-12)


def test_openloop_statistics_rows():
    rows = openloop_statistics(synthetic(), 100.0)
    assert [r[0] for r in rows] == ["AV(r_x)", "RMS(r_x)", "AV(theta_y)", "RMS(theta_y)",
                                    "AV(Omega_r)", "RMS(Omega_r)"]
    assert [r[1] for r in rows] == ["m", "m", "deg", "deg", "rpm", "rpm"]
