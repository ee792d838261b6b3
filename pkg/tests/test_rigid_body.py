from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fowtsim.errors import InvalidParameters, NotPositiveDefinite
from fowtsim.params import CylinderSpec
from fowtsim.rigid_body import (MassSolver, added_mass_matrix, assemble_M_bar, b_coefficients,
                                coriolis_and_gravity, coriolis_vector, structural_mass_matrix)


def test_a1_is_total_mass(params):
    b = params.body
    _, c = structural_mass_matrix(b)
    assert c.a1 == b.m_p + b.m_t + b.m_nc + b.m_r


def test_zero_offsets_decouple(params):
    b = replace(params.body, H_t=0.0, H_r=0.0, h_nc=0.0, h_r=0.0)
    M, c = structural_mass_matrix(b)
    assert c.a2 == c.a3 == c.a6 == 0.0
    assert np.array_equal(M[:3, 3:6], np.zeros((3, 3)))


def test_a4_a5_hand_evaluation(params):
    b = params.body
    _, c = structural_mass_matrix(b)
    # second evaluation path: parallel-axis sums component by component
    comps = [(b.m_p, b.I_p, np.zeros(3)), (b.m_t, b.I_t, b.r_tower),
             (b.m_nc, b.I_nc, b.r_nacelle), (b.m_r, b.I_r, b.r_rotor)]
    Ixx = sum(I[0] + m * (r[1] ** 2 + r[2] ** 2) for m, I, r in comps)
    Iyy = sum(I[1] + m * (r[0] ** 2 + r[2] ** 2) for m, I, r in comps)
    assert c.a4 == pytest.approx(Ixx, rel=1e-9)
    assert c.a5 == pytest.approx(Iyy, rel=1e-9)


def test_rotor_blocks(params):
    M, c = structural_mass_matrix(params.body)
    assert np.array_equal(M[6, :6], [0, 0, 0, c.I_rx, 0, 0])
    assert np.array_equal(M[:6, 6], [0, 0, 0, c.I_rx, 0, 0])
    assert M[6, 6] == c.I_rx


def test_structural_matrix_rejects_bad_mass(params):
    with pytest.raises(InvalidParameters):
        structural_mass_matrix(replace(params.body, m_t=-1.0))


masses = st.floats(1e3, 1e8)
offsets = st.floats(0.1, 20.0)


@settings(max_examples=100)
@given(masses, masses, masses, masses, st.floats(10.0, 80.0), st.floats(1.0, 30.0), offsets, offsets)
def test_a2_positive_and_a3_sign(params, m_p, m_t, m_nc, m_r, H_t, dH, h_nc, h_r):
    b = replace(params.body, m_p=m_p, m_t=m_t, m_nc=m_nc, m_r=m_r, H_t=H_t, H_r=H_t + dH,
                h_nc=h_nc, h_r=h_r)
    _, c = structural_mass_matrix(b)
    assert c.a2 > 0
    assert np.sign(c.a3) == np.sign(h_nc * m_nc - h_r * m_r)


# ------------------------------------------------------------ added mass

def _cyl(r_b, L, d=6.5, C_a=0.63, C_az=0.0, role="main-column"):
    return CylinderSpec(np.asarray(r_b, float), L, d, 0.56, C_a, role, C_az=C_az)


def test_zero_coefficients_give_zero_added_mass(params):
    cyls = [replace(c, C_a=0.0, C_az=0.0) for c in params.cylinders]
    assert np.array_equal(added_mass_matrix(cyls, 1025.0), np.zeros((6, 6)))


def test_single_cylinder_strip_integrals():
    L, rho = 20.0, 1025.0
    cyl = _cyl([0, 0, 0], L)
    Ma = added_mass_matrix([cyl], rho)
    CA = cyl.C_a * rho * cyl.area
    assert Ma[0, 0] == pytest.approx(CA * L, rel=1e-14)
    assert Ma[0, 4] == pytest.approx(CA * L ** 2 / 2, rel=1e-14)
    assert Ma[3, 3] == pytest.approx(CA * L ** 3 / 3, rel=1e-14)


def _quadrature_added_mass(cyls, rho):
    """General strip assembly at zero attitude with exact Gauss-Legendre nodes."""
    xg, wg = np.polynomial.legendre.leggauss(6)
    P = np.diag([1.0, 1.0, 0.0])
    M = np.zeros((6, 6))

    def point(m, r, Pm):
        rx = np.array([[0, -r[2], r[1]], [r[2], 0, -r[0]], [-r[1], r[0], 0]])
        G = np.hstack([Pm, -Pm @ rx])       # velocity of the point is v - r x omega
        return m * G.T @ G

    for c in cyls:
        L = c.L_0
        for xi, wi in zip(xg, wg):
            s = 0.5 * L * (xi + 1.0)
            r = np.asarray(c.r_b, float) + [0.0, 0.0, s]
            M += point(c.C_a * rho * c.area * 0.5 * L * wi, r, P)
        if c.submerged:
            mz = c.C_az * rho * (2.0 / 3.0) * np.pi * (c.d / 2.0) ** 3
            M += point(mz, np.asarray(c.r_b, float), np.diag([0.0, 0.0, 1.0]))
    return M


def test_reference_added_mass_matches_quadrature(params):
    Ma = added_mass_matrix(params.cylinders, params.rho_w)
    Mq = _quadrature_added_mass(params.cylinders, params.rho_w)
    assert np.abs(Ma - Mq).max() <= 1e-9 * np.abs(Mq).max()


def test_added_mass_symmetric_and_state_independent(params):
    a = added_mass_matrix(params.cylinders, params.rho_w)
    b = added_mass_matrix(params.cylinders, params.rho_w)
    assert np.array_equal(a, a.T)
    assert np.array_equal(a, b)


def test_negative_added_mass_rejected(params):
    cyls = list(params.cylinders)
    cyls[0] = replace(cyls[0], C_a=-0.1)
    with pytest.raises(InvalidParameters):
        added_mass_matrix(cyls, params.rho_w)


# ------------------------------------------------------------ system matrices

def test_symmetry_and_definiteness(mats):
    M1 = mats.M_s[:6, :6]
    assert np.array_equal(M1, M1.T)
    assert np.array_equal(mats.M_a, mats.M_a.T)
    Msb = mats.M_s_bar
    assert np.abs(Msb - Msb.T).max() <= 1e-10 * np.abs(Msb).max()
    assert np.linalg.eigvalsh(Msb).min() > 0
    np.linalg.cholesky(Msb)


def test_b2_positive(mats):
    b1, b2 = b_coefficients(mats)
    assert b1 > 0 and b2 > 0


def test_M_bar_blocks_and_solver(mats, rng):
    M, solver = assemble_M_bar(mats)
    assert np.array_equal(M[:6, :6], np.eye(6))
    assert np.array_equal(M[:6, 6:], np.zeros((6, 7)))
    x = rng.normal(size=13)
    assert np.allclose(solver.solve(M @ x), x, rtol=1e-10, atol=0)


def test_not_positive_definite_detected():
    with pytest.raises(NotPositiveDefinite):
        MassSolver(np.diag([1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0]))


def test_gravity_only_at_rest(mats):
    s = coriolis_and_gravity(np.zeros(13), mats)
    g, a = mats.g, mats.a
    assert np.array_equal(s[:6], np.zeros(6))
    assert np.allclose(s[6:], g * np.array([0, 0, -a.a1, 0, mats.m_d, 0, 0]), rtol=1e-15, atol=0)


def test_gyroscopic_term_is_minus_omega_cross_rotor_momentum(mats):
    x = np.zeros(13)
    x[11] = 0.03     # omega_z
    x[10] = -0.02    # omega_y
    x[12] = 1.2
    with_spin = coriolis_and_gravity(x, mats)
    x0 = x.copy()
    x0[12] = 0.0
    no_spin = coriolis_and_gravity(x0, mats)
    h = np.array([mats.a.I_rx * x[12], 0.0, 0.0])
    expected = -np.cross(x[9:12], h)
    assert np.allclose((with_spin - no_spin)[9:12], expected, rtol=1e-12, atol=0)
    assert (with_spin - no_spin)[10] != 0.0


def test_pure_translation_has_no_coriolis(mats):
    v = np.array([1.0, 0.0, 0.0])
    out = coriolis_vector(v, np.zeros(3), 0.0, mats.M_s[:6, :6], mats.a.I_rx)
    assert np.array_equal(out[:3], np.zeros(3))


def test_coriolis_does_no_work(mats, rng):
    for _ in range(20):
        v, w, Om = rng.normal(size=3), rng.normal(size=3) * 0.1, rng.uniform(0, 2)
        out = coriolis_vector(v, w, Om, mats.M_s[:6, :6], mats.a.I_rx)
        x = np.concatenate([v, w, [Om]])
        scale = np.abs(out).max() * np.abs(x).max()
        assert abs(x @ out) <= 1e-12 * scale
