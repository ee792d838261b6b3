"""Plant state container and load wrench type."""

from dataclasses import dataclass, field

import numpy as np

N_STATES = 13
R_SLICE = slice(0, 3)
THETA_SLICE = slice(3, 6)
V_SLICE = slice(6, 9)
W_SLICE = slice(9, 12)
OMEGA_INDEX = 12

STATE_NAMES = ("r_x", "r_y", "r_z", "theta_x", "theta_y", "theta_z",
               "v_x", "v_y", "v_z", "omega_x", "omega_y", "omega_z", "Omega_r")


@dataclass
class StateVector:
    """Inertial position, Euler angles, body velocities and rotor speed."""

    r: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Omega_r: float = 0.0

    def __post_init__(self):
        for name in ("r", "theta", "v", "omega"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        self.Omega_r = float(self.Omega_r)

    def to_array(self):
        return np.concatenate([self.r, self.theta, self.v, self.omega, [self.Omega_r]])

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (N_STATES,):
            raise ValueError(f"state array must have shape (13,), got {x.shape}")
        return cls(x[0:3], x[3:6], x[6:9], x[9:12], x[12])

    def copy(self):
        return StateVector.from_array(self.to_array())


def as_array(state):
    if isinstance(state, StateVector):
        return state.to_array()
    return np.asarray(state, dtype=float)


@dataclass
class LoadWrench:
    """Force and moment about the platform CG, both in body components."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    moment: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tag: str = ""

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=float).reshape(3)
        self.moment = np.asarray(self.moment, dtype=float).reshape(3)

    def __add__(self, other):
        tag = self.tag if self.tag == other.tag else "+".join(t for t in (self.tag, other.tag) if t)
        return LoadWrench(self.force + other.force, self.moment + other.moment, tag)

    def as_vector(self):
        return np.concatenate([self.force, self.moment])
