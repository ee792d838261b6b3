"""Frames and rotation helpers for the 3-2-1 Euler sequence.

Body frame ``p`` is fixed to the platform centre of gravity; inertial frame
``I`` has e3 pointing up.  ``R`` maps body components to inertial ones.
"""

from math import cos, sin, pi

import numpy as np

from .errors import SingularAttitude

EPS_SING = 1e-3


def rotation_matrix(theta):
    """Body-to-inertial rotation for Euler angles (roll, pitch, yaw)."""
    tx, ty, tz = theta
    cx, sx = cos(tx), sin(tx)
    cy, sy = cos(ty), sin(ty)
    cz, sz = cos(tz), sin(tz)
    return np.array([
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sx * sz],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
        [-sy, cy * sx, cy * cx],
    ])


def euler_rate_map(theta, eps_sing=EPS_SING):
    """Matrix J with theta_dot = J @ omega_body.

    Raises SingularAttitude when |pitch| >= pi/2 - eps_sing.
    """
    tx, ty, _ = theta
    if not abs(ty) < pi / 2 - eps_sing:
        raise SingularAttitude(f"platform pitch {ty:.6g} rad at gimbal guard")
    cx, sx = cos(tx), sin(tx)
    cy, ty_ = cos(ty), sin(ty) / cos(ty)
    return np.array([
        [1.0, sx * ty_, cx * ty_],
        [0.0, cx, -sx],
        [0.0, sx / cy, cx / cy],
    ])


def skew(v):
    """Cross-product matrix: skew(v) @ w == np.cross(v, w)."""
    x, y, z = v
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def body_to_inertial(theta, x):
    return rotation_matrix(theta) @ np.asarray(x, dtype=float)


def inertial_to_body(theta, x):
    return rotation_matrix(theta).T @ np.asarray(x, dtype=float)


def euler_from_matrix(R):
    """Recover (roll, pitch, yaw) from a 3-2-1 rotation matrix."""
    ty = -np.arcsin(np.clip(R[2, 0], -1.0, 1.0))
    tx = np.arctan2(R[2, 1], R[2, 2])
    tz = np.arctan2(R[1, 0], R[0, 0])
    return np.array([tx, ty, tz])
