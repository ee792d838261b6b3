"""Blade-pitch controllers: adaptive RISE with RBF approximator and GSPI baseline."""

from dataclasses import dataclass, field
from math import cos, sin

import numpy as np
from scipy.stats import qmc

from .errors import InvalidParameters
from .params import RPM


@dataclass(frozen=True)
class ActuatorLimits:
    beta_min: float = 0.0
    beta_max: float = np.deg2rad(90.0)
    rate_max: float = np.deg2rad(8.0)

    def __post_init__(self):
        if not self.beta_min < self.beta_max or not self.rate_max > 0:
            raise InvalidParameters("actuator limits need beta_min < beta_max and rate_max > 0")


def apply_rate_limits(beta, rate_cmd, dt, limits):
    """Pitch rate actually applied over one step (rate and range saturation)."""
    rate = min(max(rate_cmd, -limits.rate_max), limits.rate_max)
    lo = (limits.beta_min - beta) / dt
    hi = (limits.beta_max - beta) / dt
    return min(max(rate, lo), hi)


def sgn(x):
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


def tracking_error(state, Omega_r0, k):
    """xi = (Omega_r - Omega_r0) + k * theta_y_dot."""
    x = np.asarray(state, dtype=float)
    tx = x[3]
    return (x[12] - Omega_r0) + k * (cos(tx) * x[10] - sin(tx) * x[11])


def tracking_vector(state, Omega_r0, k):
    """The linear form m^T X - Omega_r0 of the tracking error."""
    x = np.asarray(state, dtype=float)
    m = np.zeros(13)
    m[10] = k * cos(x[3])
    m[11] = -k * sin(x[3])
    m[12] = 1.0
    return m @ x - Omega_r0


class DerivativeFilter:
    """Backward difference passed through a first-order low-pass."""

    def __init__(self, cutoff_hz=5.0):
        if not cutoff_hz > 0:
            raise InvalidParameters("filter cutoff must be positive")
        self.tau = 1.0 / (2.0 * np.pi * cutoff_hz)
        self.reset()

    def reset(self, x0=None):
        self.prev = x0
        self.value = 0.0

    def update(self, x, dt):
        if self.prev is None:
            self.prev = x
            return self.value
        raw = (x - self.prev) / dt
        alpha = dt / (self.tau + dt)
        self.value += alpha * (raw - self.value)
        self.prev = x
        return self.value


def filtered_error(xi, filt, dt, c):
    """xi_bar = xi_dot_est + c * xi (updates the filter)."""
    return filt.update(xi, dt) + c * xi


# ---------------------------------------------------------------- RBF

@dataclass(frozen=True)
class FeatureScaling:
    """Affine map of Z = [X (13), beta, |v_w|] onto the unit cube."""

    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def default(cls, Omega_rated):
        lo = np.array([-5, -5, -3, -0.1, -0.15, -0.1, -1.5, -1.5, -1, -0.05, -0.05, -0.05,
                       0.6 * Omega_rated, 0.0, 10.0])
        hi = np.array([15, 5, 3, 0.1, 0.25, 0.1, 1.5, 1.5, 1, 0.05, 0.05, 0.05,
                       1.4 * Omega_rated, np.deg2rad(25.0), 26.0])
        return cls(lo, hi)

    def __call__(self, Z):
        return (np.asarray(Z, dtype=float) - self.lower) / (self.upper - self.lower)


class RBFNetwork:
    """Gaussian radial basis functions on seeded low-discrepancy centres."""

    def __init__(self, n_centers, dim, seed=0, width=None):
        if n_centers < 1:
            raise InvalidParameters("need at least one basis function")
        sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
        self.centers = sampler.random(n_centers)
        if width is None:
            if n_centers > 1:
                d = np.linalg.norm(self.centers[:, None, :] - self.centers[None, :, :], axis=-1)
                np.fill_diagonal(d, np.inf)
                width = float(d.min(axis=1).mean())
            else:
                width = 1.0
        self.width = width
        self._inv2w2 = 1.0 / (2.0 * width * width)

    @property
    def n(self):
        return self.centers.shape[0]

    def __call__(self, z):
        d2 = ((self.centers - z) ** 2).sum(axis=1)
        return np.exp(-d2 * self._inv2w2)


def rbf_features(Z, net, scaling):
    return net(scaling(Z))


# ---------------------------------------------------------------- RISE

@dataclass(frozen=True)
class RiseConfig:
    k: float = 4.5
    c: float = 2.0
    k_c: float = 10.0
    N: int = 50
    l_w: float = 1e-3
    k_w: float = 1e-3
    Omega_r0: float = 12.1 * RPM
    filter_hz: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if min(self.k, self.c, self.k_c, self.l_w, self.k_w) <= 0 or self.N < 1:
            raise InvalidParameters("RISE gains must be positive and N >= 1")


def _abs_integral(x0, x1, dt):
    """Exact integral of |x| for x linear from x0 to x1 over dt."""
    if x0 * x1 >= 0:
        return 0.5 * (abs(x0) + abs(x1)) * dt
    # split at the zero crossing
    return 0.5 * (x0 * x0 + x1 * x1) / (abs(x0) + abs(x1)) * dt


@dataclass
class ControllerState:
    W_hat: np.ndarray
    gamma: float = 0.0
    beta: float = 0.0
    xi: float = 0.0
    xi_bar: float = 0.0
    xi0: float = 0.0
    abs_integral: float = 0.0
    gamma_closed: float = 0.0


class RiseController:
    """Robust integral of the sign of the error with an online RBF term.

    Pitch rate command:
    ``beta_dot = (k_c + 1) xi_bar + W_hat . phi(Z) + gamma sgn(xi)``.
    ``W_hat`` follows a sigma-modified gradient law; ``gamma`` integrates
    ``xi_bar sgn(xi)`` exactly along the piecewise-linear sampled error.
    """

    name = "RISE"

    def __init__(self, cfg=None, scaling=None):
        self.cfg = cfg or RiseConfig()
        self.scaling = scaling or FeatureScaling.default(self.cfg.Omega_r0)
        self.net = RBFNetwork(self.cfg.N, self.scaling.lower.size, seed=self.cfg.seed)
        self.filter = DerivativeFilter(self.cfg.filter_hz)
        self.state = ControllerState(np.zeros(self.cfg.N))
        self._started = False

    def reset(self, plant, x0, beta0, t0=0.0):
        cfg = self.cfg
        xi0 = tracking_error(x0, cfg.Omega_r0, cfg.k)
        self.state = ControllerState(np.zeros(cfg.N), 0.0, beta0, xi0, 0.0, xi0, 0.0, 0.0)
        self.filter.reset(xi0)
        self._started = False
        self._phi = np.zeros(cfg.N)

    def features(self, x, beta, wind):
        Z = np.concatenate([x, [beta, abs(wind)]])
        return self.net(self.scaling(Z))

    def command(self, x, t, dt, wind, beta):
        cfg, s = self.cfg, self.state
        s.beta = beta
        xi = tracking_error(x, cfg.Omega_r0, cfg.k)
        if self._started:
            # gamma over the elapsed interval with xi linear between samples
            xi_prev = s.xi
            dint = _abs_integral(xi_prev, xi, dt)
            s.gamma += (abs(xi) - abs(xi_prev)) + cfg.c * dint
            s.abs_integral += dint
            s.gamma_closed = abs(xi) - abs(s.xi0) + cfg.c * s.abs_integral
            # weight update uses the previous step's error and features
            s.W_hat = s.W_hat + dt * cfg.l_w * (cfg.c * self._phi * xi_prev - cfg.k_w * abs(xi_prev) * s.W_hat)
        else:
            # the closed form is anchored on the first sampled error
            s.xi0 = xi
        self._started = True
        s.xi = xi
        s.xi_bar = filtered_error(xi, self.filter, dt, cfg.c)
        self._phi = self.features(x, s.beta, wind)
        self._rate_cmd = (cfg.k_c + 1.0) * s.xi_bar + float(s.W_hat @ self._phi) + s.gamma * sgn(xi)
        return self._rate_cmd

    def channels(self):
        s = self.state
        return s.xi, s.gamma, float(np.linalg.norm(s.W_hat))

    def weight_bound(self):
        return self.cfg.c * np.sqrt(self.cfg.N) / self.cfg.k_w


def rise_step(ctrl, x, t, dt, wind, beta, limits):
    """One controller update; returns the new pitch and the controller state."""
    rate = apply_rate_limits(beta, ctrl.command(x, t, dt, wind, beta), dt, limits)
    new_beta = min(max(beta + rate * dt, limits.beta_min), limits.beta_max)
    ctrl.state.beta = new_beta
    return new_beta, ctrl.state


# ---------------------------------------------------------------- GSPI

@dataclass(frozen=True)
class GspiConfig:
    """Gain-scheduled PI on rotor speed (gains referred to the rotor shaft)."""

    Kp: float = 0.01882681 * 97.0
    Ki: float = 0.008068634 * 97.0
    beta_k: float = np.deg2rad(6.302336)
    Omega_r0: float = 12.1 * RPM
    filter_hz: float = 0.25

    def __post_init__(self):
        if self.Kp < 0 or self.Ki < 0 or not self.beta_k > 0:
            raise InvalidParameters("GSPI gains must be non-negative and beta_k positive")


class GspiController:
    """PI pitch control with the 1/(1 + beta/beta_k) schedule and anti-windup.

    The controller computes a pitch target and returns the rate that reaches
    it within one step; actuator limits then apply.
    """

    name = "GSPI"

    def __init__(self, cfg=None, limits=None):
        self.cfg = cfg or GspiConfig()
        self.limits = limits or ActuatorLimits()
        self.integ = 0.0
        self.speed = None
        self.beta = 0.0
        self.target = 0.0
        self._err = 0.0

    def schedule(self, beta):
        return 1.0 / (1.0 + beta / self.cfg.beta_k)

    def reset(self, plant, x0, beta0, t0=0.0):
        self.speed = float(x0[12])
        self.beta = beta0
        self._err = self.speed - self.cfg.Omega_r0
        gk = self.schedule(beta0)
        # initialise the integrator so the first command holds beta0
        self.integ = (beta0 / gk - self.cfg.Kp * self._err) / self.cfg.Ki if self.cfg.Ki > 0 else 0.0

    def target_pitch(self, Omega_r, dt):
        cfg, lim = self.cfg, self.limits
        if cfg.filter_hz > 0:
            a = np.exp(-2.0 * np.pi * cfg.filter_hz * dt)
            self.speed = a * self.speed + (1.0 - a) * Omega_r
        else:
            self.speed = Omega_r
        err = self.speed - cfg.Omega_r0
        self._err = err
        gk = self.schedule(self.beta)
        integ = self.integ + err * dt
        # anti-windup: keep the integral inside the range that saturates the output
        if cfg.Ki > 0:
            lo = (lim.beta_min / gk - cfg.Kp * err) / cfg.Ki
            hi = (lim.beta_max / gk - cfg.Kp * err) / cfg.Ki
            integ = min(max(integ, lo), hi)
        self.integ = integ
        target = gk * (cfg.Kp * err + cfg.Ki * integ)
        self.target = min(max(target, lim.beta_min), lim.beta_max)
        return self.target

    def command(self, x, t, dt, wind, beta):
        self.beta = beta
        return (self.target_pitch(float(x[12]), dt) - beta) / dt

    def channels(self):
        return self._err, np.nan, np.nan


def gspi_step(ctrl, Omega_r, dt, beta, limits):
    """One GSPI update; returns the rate-limited pitch."""
    ctrl.beta = beta
    target = ctrl.target_pitch(Omega_r, dt)
    rate = apply_rate_limits(beta, (target - beta) / dt, dt, limits)
    return min(max(beta + rate * dt, limits.beta_min), limits.beta_max)


# ---------------------------------------------------------------- monitor

def lyapunov_monitor(xi, W_norm, l_w):
    """Computable energy terms per sample: (0.5 xi^2, |W|^2 / (2 l_w))."""
    xi = np.asarray(xi, dtype=float)
    W = np.asarray(W_norm, dtype=float)
    return 0.5 * xi ** 2, W ** 2 / (2.0 * l_w)
