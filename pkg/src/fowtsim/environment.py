"""Regular Airy waves and hub-height wind sources."""

from dataclasses import dataclass, field
from math import cos, pi, sin
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import EmptySeries, InvalidParameters, MissingFile, OutOfRange

G = 9.80665


def wavenumber(omega, g=G, depth=None):
    """Solve the linear dispersion relation omega^2 = g k tanh(k h).

    ``depth=None`` selects deep water (k = omega^2 / g).
    """
    if omega <= 0:
        return 0.0
    k_deep = omega ** 2 / g
    if depth is None or not np.isfinite(depth):
        return k_deep
    if depth <= 0:
        raise InvalidParameters("water depth must be positive")
    f = lambda k: g * k * np.tanh(k * depth) - omega ** 2
    hi = max(k_deep, omega / np.sqrt(g * depth)) * 2.0
    k = brentq(f, 1e-12, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # polish with Newton steps
    for _ in range(3):
        th = np.tanh(k * depth)
        df = g * th + g * k * depth * (1.0 - th ** 2)
        k -= f(k) / df
    return float(k)


@dataclass(frozen=True)
class WaveSpec:
    """Single harmonic wave; amplitude is ``H_s / 2``."""

    H_s: float = 0.0
    T_p: float = 10.0
    direction: float = 0.0
    phase: float = 0.0
    water_depth: Optional[float] = None
    g: float = G
    rho_w: float = 1025.0

    def __post_init__(self):
        if self.H_s < 0 or not self.T_p > 0:
            raise InvalidParameters("wave needs H_s >= 0 and T_p > 0")

    @property
    def amplitude(self):
        return self.H_s / 2.0

    @property
    def omega(self):
        return 2.0 * pi / self.T_p

    @property
    def k(self):
        return wavenumber(self.omega, self.g, self.water_depth)

    def calm(self):
        return self.H_s == 0.0


@dataclass
class WaterKinematics:
    eta: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    p_dyn: np.ndarray


def _phase(spec, k, x, y, t):
    return k * (x * cos(spec.direction) + y * sin(spec.direction)) - spec.omega * t + spec.phase


def wave_elevation(spec, x, y, t):
    if spec.H_s == 0.0:
        return np.zeros(np.broadcast(x, y).shape) if np.ndim(x) or np.ndim(y) else 0.0
    k = spec.k
    return spec.amplitude * np.cos(_phase(spec, k, x, y, t))


def _depth_factors(spec, k, z):
    """Horizontal and vertical decay factors (and pressure factor) at depth z."""
    if spec.water_depth is None:
        e = np.exp(k * z)
        return e, e, e
    h = spec.water_depth
    s = np.sinh(k * h)
    return np.cosh(k * (z + h)) / s, np.sinh(k * (z + h)) / s, np.cosh(k * (z + h)) / np.cosh(k * h)


def water_particle_kinematics(spec, x, y, z, t):
    """Linear Airy velocity, acceleration and dynamic pressure.

    ``z`` is measured upward from the mean free surface.  Inputs may be
    arrays of equal shape; vectors come back with a trailing axis of 3.
    """
    x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
    shape = x.shape
    if spec.H_s == 0.0:
        zero = np.zeros(shape)
        return WaterKinematics(zero, np.zeros(shape + (3,)), np.zeros(shape + (3,)), zero.copy())
    a, w, k = spec.amplitude, spec.omega, spec.k
    ph = _phase(spec, k, x, y, t)
    c, s = np.cos(ph), np.sin(ph)
    fh, fv, fp = _depth_factors(spec, k, z)
    cd, sd = cos(spec.direction), sin(spec.direction)
    uh = a * w * fh * c
    ah = a * w * w * fh * s          # d/dt of cos(kx - wt) is +w sin
    vel = np.stack([uh * cd, uh * sd, a * w * fv * s], axis=-1)
    acc = np.stack([ah * cd, ah * sd, -a * w * w * fv * c], axis=-1)
    return WaterKinematics(a * c, vel, acc, spec.rho_w * spec.g * a * fp * c)


# ---------------------------------------------------------------- wind

KAIMAL_LENGTH = 340.2


def kaimal_psd(f, mean_speed, sigma, length_scale=KAIMAL_LENGTH):
    """One-sided Kaimal spectrum for the longitudinal component (m^2/s^2/Hz)."""
    f = np.asarray(f, dtype=float)
    lu = length_scale / mean_speed
    return sigma ** 2 * 4.0 * lu / (1.0 + 6.0 * f * lu) ** (5.0 / 3.0)


def synthesize_kaimal(mean_speed, intensity, duration, dt, seed, length_scale=KAIMAL_LENGTH):
    """Periodic hub-height series with exact sample mean and standard deviation."""
    n = int(round(duration / dt))
    if n < 4:
        raise InvalidParameters("spectral wind needs at least four samples")
    sigma = intensity * mean_speed
    if sigma == 0.0:
        return np.full(n, float(mean_speed))
    f = np.fft.rfftfreq(n, dt)
    df = f[1] - f[0]
    amp = np.sqrt(2.0 * kaimal_psd(f, mean_speed, sigma, length_scale) * df)
    amp[0] = 0.0
    if n % 2 == 0:
        amp[-1] = 0.0
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * pi, f.size)
    coeffs = amp * np.exp(1j * phases) * n / 2.0
    u = np.fft.irfft(coeffs, n)
    u = (u - u.mean()) / u.std() * sigma
    return mean_speed + u


@dataclass
class WindSource:
    """Hub-height wind along inertial x.

    Modes: ``constant`` (mean_speed), ``file-series`` (times/speeds, linear
    interpolation) and ``spectral`` (seeded Kaimal synthesis, periodic).
    """

    mode: str = "constant"
    mean_speed: float = 0.0
    turbulence_intensity: float = 0.0
    seed: int = 0
    times: Optional[np.ndarray] = None
    speeds: Optional[np.ndarray] = None
    duration: float = 1200.0
    dt: float = 0.05
    length_scale: float = KAIMAL_LENGTH
    _t0: float = field(default=0.0, init=False, repr=False)
    _step: float = field(default=0.0, init=False, repr=False)

    def __post_init__(self):
        if self.mode == "constant":
            return
        if self.mode == "spectral":
            if not self.mean_speed > 0:
                raise InvalidParameters("spectral wind needs a positive mean speed")
            self.speeds = synthesize_kaimal(self.mean_speed, self.turbulence_intensity,
                                            self.duration, self.dt, self.seed, self.length_scale)
            self.times = np.arange(self.speeds.size) * self.dt
            self._step = self.dt
        elif self.mode == "file-series":
            t = np.asarray(self.times, dtype=float)
            u = np.asarray(self.speeds, dtype=float)
            if t.size == 0:
                raise EmptySeries("wind series is empty")
            if t.shape != u.shape or t.ndim != 1:
                raise InvalidParameters("wind times and speeds must be equal-length vectors")
            if np.any(np.diff(t) <= 0):
                raise InvalidParameters("wind series times must be strictly increasing")
            self.times, self.speeds = t, u
        else:
            raise InvalidParameters(f"unknown wind mode {self.mode!r}")

    @classmethod
    def constant(cls, speed):
        return cls(mode="constant", mean_speed=float(speed))

    @classmethod
    def spectral(cls, mean_speed, intensity, seed, duration=1200.0, dt=0.05):
        return cls(mode="spectral", mean_speed=mean_speed, turbulence_intensity=intensity,
                   seed=seed, duration=duration, dt=dt)

    @classmethod
    def from_file(cls, path):
        return cls(mode="file-series", **dict(zip(("times", "speeds"), load_wind_series(path))))

    def speed(self, t):
        """Scalar longitudinal speed at time t."""
        if self.mode == "constant":
            return self.mean_speed
        if self.mode == "spectral":
            n = self.speeds.size
            s = (t / self._step) % n
            i = int(s)
            fr = s - i
            return self.speeds[i] * (1.0 - fr) + self.speeds[(i + 1) % n] * fr
        t0, t1 = self.times[0], self.times[-1]
        if t < t0 - 1e-12 or t > t1 + 1e-12:
            raise OutOfRange(f"t = {t} outside wind series [{t0}, {t1}]")
        return float(np.interp(t, self.times, self.speeds))

    def wind_at(self, t):
        return np.array([self.speed(t), 0.0, 0.0])

    def sample(self, times):
        return np.array([self.speed(t) for t in np.asarray(times, dtype=float)])


def wind_at(src, t):
    return src.wind_at(t)


def load_wind_series(path):
    """Read a two-column (time_s, speed_mps) delimited text file."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"wind file not found: {path}")
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").replace(";", " ").split()
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if rows:
                    raise InvalidParameters(f"bad wind row: {line!r}") from None
                continue  # header
    if not rows:
        raise EmptySeries(f"no samples in {path}")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise InvalidParameters("wind series times must be strictly increasing")
    return arr[:, 0], arr[:, 1]
