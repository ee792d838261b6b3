"""Mass, added-mass, gyroscopic and gravity terms of the 7-DOF plant.

Generalised velocity ordering is ``x = [v (3), omega (3), Omega_r]`` with
``v`` and ``omega`` in the body frame.  The full left-hand matrix acts on the
13-state ``[r, theta, v, omega, Omega_r]`` whose first six rows are pure
kinematics.
"""

from dataclasses import dataclass
from math import cos, sin

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import InvalidParameters, NotPositiveDefinite


@dataclass(frozen=True)
class StructuralCoefficients:
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    a6: float
    a7: float
    I_rx: float

    def as_tuple(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a5, self.a6, self.a7)


def structural_coefficients(props):
    """Closed-form scalars a1..a7 of the structural mass matrix."""
    props.validate()
    m_p, m_t, m_nc, m_r = props.m_p, props.m_t, props.m_nc, props.m_r
    H_t, H_r, h_nc, h_r = props.H_t, props.H_r, props.h_nc, props.h_r
    Ix = props.I_p[0] + props.I_t[0] + props.I_nc[0] + props.I_r[0]
    Iy = props.I_p[1] + props.I_t[1] + props.I_nc[1] + props.I_r[1]
    Iz = props.I_p[2] + props.I_t[2] + props.I_nc[2] + props.I_r[2]
    return StructuralCoefficients(
        a1=m_p + m_t + m_nc + m_r,
        a2=H_r * (m_r + m_nc) + m_t * H_t,
        a3=h_nc * m_nc - h_r * m_r,
        a4=Ix + H_r ** 2 * (m_r + m_nc) + H_t ** 2 * m_t,
        a5=Iy + m_r * (H_r ** 2 + h_r ** 2) + m_nc * (H_r ** 2 + h_nc ** 2) + H_t ** 2 * m_t,
        a6=H_r * h_r * m_r - H_r * h_nc * m_nc,
        a7=Iz + m_r * h_r ** 2 + m_nc * h_nc ** 2,
        I_rx=float(props.I_r[0]),
    )


def structural_mass_matrix(props):
    """Return the 7x7 structural matrix and its coefficients."""
    c = structural_coefficients(props)
    M1 = np.diag([c.a1, c.a1, c.a1, c.a4, c.a5, c.a7])
    M1[0, 4] = M1[4, 0] = c.a2
    M1[1, 3] = M1[3, 1] = -c.a2
    M1[1, 5] = M1[5, 1] = c.a3
    M1[2, 4] = M1[4, 2] = -c.a3
    M1[3, 5] = M1[5, 3] = c.a6
    M = np.zeros((7, 7))
    M[:6, :6] = M1
    M[3, 6] = M[6, 3] = c.I_rx
    M[6, 6] = c.I_rx
    return M, c


@dataclass(frozen=True)
class AddedMassCoefficients:
    b11: float
    b15: float
    b33: float
    b44: float
    b55: float
    b66: float


def added_mass_coefficients(cylinders, rho_w):
    """Constant-length added-mass scalars evaluated at the initial wetted lengths."""
    b11 = b15 = b33 = b44 = b55 = b66 = 0.0
    for cyl in cylinders:
        if min(cyl.C_a, cyl.C_az) < 0:
            raise InvalidParameters(f"cylinder {cyl.name!r}: negative added-mass coefficient")
        L = cyl.L_0
        x, y, z = (float(v) for v in cyl.r_b)
        CA = cyl.C_a * rho_w * cyl.area
        b11 += CA * L
        b15 += CA * L * (L + 2.0 * z) / 2.0
        sz = CA * (L ** 3 / 3.0 + L ** 2 * z + L * z ** 2)
        b44 += sz
        b55 += sz
        b66 += CA * L * (x ** 2 + y ** 2)
        if cyl.submerged:
            CAz = cyl.C_az * rho_w * (2.0 / 3.0) * np.pi * (cyl.d / 2.0) ** 3
            b33 += CAz
            b44 += CAz * y ** 2
            b55 += CAz * x ** 2
    return AddedMassCoefficients(b11, b15, b33, b44, b55, b66)


def added_mass_matrix(cylinders, rho_w):
    """6x6 added-mass matrix with frozen member lengths.

    The pattern assumes the platform is laterally symmetric so that the
    first-moment cross terms vanish; off-pattern terms are not assembled.
    """
    b = added_mass_coefficients(cylinders, rho_w)
    Ma = np.diag([b.b11, b.b11, b.b33, b.b44, b.b55, b.b66])
    Ma[0, 4] = Ma[4, 0] = b.b15
    Ma[1, 3] = Ma[3, 1] = -b.b15
    return Ma


@dataclass(frozen=True)
class SystemMatrices:
    M_s: np.ndarray
    M_a: np.ndarray
    M_s_bar: np.ndarray
    a: StructuralCoefficients
    b: AddedMassCoefficients
    g: float
    H_r: float = 0.0

    @property
    def m_d(self):
        """Signed first mass moment along body x of nacelle and rotor (kg m)."""
        return self.a.a3

    @property
    def M_bar(self):
        M = np.eye(13)
        M[6:, 6:] = self.M_s_bar
        return M


def system_matrices(params):
    M_s, a = structural_mass_matrix(params.body)
    M_a = added_mass_matrix(params.cylinders, params.rho_w)
    b = added_mass_coefficients(params.cylinders, params.rho_w)
    Msb = M_s.copy()
    Msb[:6, :6] += M_a
    return SystemMatrices(M_s=M_s, M_a=M_a, M_s_bar=Msb, a=a, b=b, g=params.body.g,
                          H_r=params.body.H_r)


class MassSolver:
    """Cholesky factorisation of the 7x7 inertia block, reused every step."""

    def __init__(self, M_s_bar):
        try:
            self._cho = cho_factor(M_s_bar, lower=True)
        except LinAlgError as exc:
            raise NotPositiveDefinite(f"inertia matrix is not positive definite: {exc}") from None
        if not np.all(np.diag(self._cho[0]) > 0):
            raise NotPositiveDefinite("non-positive Cholesky pivot")
        # dense inverse for the hot path (7x7, well conditioned once scaled)
        self.inverse = cho_solve(self._cho, np.eye(M_s_bar.shape[0]))

    def solve7(self, rhs):
        return cho_solve(self._cho, rhs)

    def solve(self, rhs):
        """Solve the full 13x13 system (identity on the kinematic rows)."""
        rhs = np.asarray(rhs, dtype=float)
        out = rhs.copy()
        out[6:] = cho_solve(self._cho, rhs[6:])
        return out


def assemble_M_bar(mats):
    """Return the 13x13 left-hand matrix together with a reusable solver."""
    return mats.M_bar, MassSolver(mats.M_s_bar)


def gravity_wrench(theta, a, g):
    """Generalised gravity load on rows v, omega, Omega (7-vector)."""
    tx, ty = theta[0], theta[1]
    cx, sx, cy, sy = cos(tx), sin(tx), cos(ty), sin(ty)
    return g * np.array([
        a.a1 * sy,
        -a.a1 * cy * sx,
        -a.a1 * cx * cy,
        cy * sx * a.a2,
        sy * a.a2 + cx * cy * a.a3,
        -sx * cy * a.a3,
        0.0,
    ])


def coriolis_vector(v, w, Omega, M_s1, I_rx):
    """C_s(x) x for the quasi-coordinate equations (7-vector)."""
    x6 = np.concatenate([v, w])
    p = M_s1 @ x6
    P, H = p[:3], p[3:]
    out = np.empty(7)
    out[:3] = np.cross(w, P)
    out[3:6] = np.cross(v, P) + np.cross(w, H)
    # spinning rotor about body x
    out[4] += I_rx * Omega * w[2]
    out[5] += -I_rx * Omega * w[1]
    out[6] = 0.0
    return out


def coriolis_and_gravity(state, mats):
    """Right-hand term s of the 13-row equations (zeros on kinematic rows)."""
    state = np.asarray(state, dtype=float)
    theta, v, w, Om = state[3:6], state[6:9], state[9:12], state[12]
    s = np.zeros(13)
    s[6:] = -coriolis_vector(v, w, Om, mats.M_s[:6, :6], mats.a.I_rx) + gravity_wrench(theta, mats.a, mats.g)
    return s


def b_coefficients(mats):
    """Input-gain scalars (b1, b2) of the reduced rotor-speed dynamics."""
    a, b = mats.a, mats.b
    h1 = a.a1 + b.b33
    h2 = a.a2 + b.b15
    h3 = a.a1 + b.b11
    h4 = a.a3
    h5 = a.a5 + b.b55
    H_r = mats.H_r
    b1 = 1.0 / a.I_rx
    b2 = h1 * (h2 - H_r * h3) / (h1 * h2 ** 2 + h3 * h4 ** 2 - h5 * h3 * h1)
    return b1, b2
