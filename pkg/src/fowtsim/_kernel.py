"""Compiled plant right-hand side.

A fused, allocation-light version of the load and mass-matrix pipeline used
by the time integrator.  It mirrors the reference functions in
``rigid_body``, ``hydro_loads`` and ``aero`` term by term; the test suite
checks both paths against each other.
"""

from math import cos, cosh, exp, pi, sin, sinh, sqrt

import numpy as np
from numba import njit

# status codes
OK, SINGULAR, DEGENERATE, NONFINITE = 0, 1, 2, 3

# geometry columns
G_RB, G_LEN, G_AREA, G_CDT, G_CAT, G_SUB, G_CDZ, G_CAZ, G_AUP = 0, 3, 4, 5, 6, 7, 8, 9, 10
N_GEO = 11

# scalar slots
S_G, S_A1, S_A2, S_A3, S_IRX, S_RHOW, S_ZSWL, S_RR, S_RHOA, S_HUBX, S_HUBZ, S_NQ, S_EPS, S_COSLIM = range(14)
N_SC = 14
# Gauss-Legendre strip nodes on [0, 1] follow the scalars, then their weights

# flag slots
F_GRAV, F_BUOY, F_HYDRO, F_AERO, F_MOOR = range(5)

# wave slots: amplitude, omega, k, cos(dir), sin(dir), phase, depth (<= 0: deep), rho*g
N_WAVE = 8

# diagnostic slots in the loads vector (after four 6-vector wrenches)
L_BUOY, L_HYDRO, L_AERO, L_MOOR = 0, 6, 12, 18
L_THRUST, L_TAUA, L_U, L_LAM, L_CP, L_CT, L_CLAMP, L_VD = 24, 25, 26, 27, 28, 29, 30, 31
N_LOADS = 32


@njit(cache=True)
def _rotation(tx, ty, tz, R):
    cx, sx = cos(tx), sin(tx)
    cy, sy = cos(ty), sin(ty)
    cz, sz = cos(tz), sin(tz)
    R[0, 0] = cz * cy
    R[0, 1] = cz * sy * sx - sz * cx
    R[0, 2] = cz * sy * cx + sx * sz
    R[1, 0] = sz * cy
    R[1, 1] = sz * sy * sx + cz * cx
    R[1, 2] = sz * sy * cx - cz * sx
    R[2, 0] = -sy
    R[2, 1] = cy * sx
    R[2, 2] = cy * cx


@njit(cache=True)
def _wave_point(wave, px, py, z, t, out):
    """Airy kinematics at inertial (px, py) and height z above the SWL.

    out = [u, v, w, ax, ay, az, p_dyn]
    """
    a = wave[0]
    if a == 0.0:
        for i in range(7):
            out[i] = 0.0
        return
    w, k, cd, sd, ph, h = wave[1], wave[2], wave[3], wave[4], wave[5], wave[6]
    phi = k * (px * cd + py * sd) - w * t + ph
    c, s = cos(phi), sin(phi)
    if h <= 0.0:
        fh = exp(k * z)
        fv = fh
        fp = fh
    else:
        sh = sinh(k * h)
        fh = cosh(k * (z + h)) / sh
        fv = sinh(k * (z + h)) / sh
        fp = cosh(k * (z + h)) / cosh(k * h)
    uh = a * w * fh * c
    ah = a * w * w * fh * s
    out[0] = uh * cd
    out[1] = uh * sd
    out[2] = a * w * fv * s
    out[3] = ah * cd
    out[4] = ah * sd
    out[5] = -a * w * w * fv * c
    out[6] = wave[7] * a * fp * c


@njit(cache=True)
def _lookup(lam_grid, beta_grid, Z, lam, beta):
    nl, nb = lam_grid.size, beta_grid.size
    q = min(max(lam, lam_grid[0]), lam_grid[nl - 1])
    i = np.searchsorted(lam_grid, q, side="right") - 1
    i = min(max(i, 0), nl - 2)
    u = (q - lam_grid[i]) / (lam_grid[i + 1] - lam_grid[i])
    q = min(max(beta, beta_grid[0]), beta_grid[nb - 1])
    j = np.searchsorted(beta_grid, q, side="right") - 1
    j = min(max(j, 0), nb - 2)
    v = (q - beta_grid[j]) / (beta_grid[j + 1] - beta_grid[j])
    return ((1 - u) * (1 - v) * Z[i, j] + u * (1 - v) * Z[i + 1, j]
            + (1 - u) * v * Z[i, j + 1] + u * v * Z[i + 1, j + 1])


@njit(cache=True)
def plant_rhs(x, t_wave, wave, u_wind, beta, tau_g, geo, Minv, Ms1, K, B, pre,
              lam_grid, beta_grid, cp_tab, ct_tab, sc, flags, xdot, loads):
    """Fill ``xdot`` (13) and ``loads`` (N_LOADS); return a status code."""
    for i in range(13):
        xdot[i] = 0.0
    for i in range(N_LOADS):
        loads[i] = 0.0
    for i in range(13):
        if not np.isfinite(x[i]):
            return NONFINITE

    tx, ty, tz = x[3], x[4], x[5]
    if not abs(ty) < pi / 2 - sc[S_EPS]:
        return SINGULAR
    R = np.empty((3, 3))
    _rotation(tx, ty, tz, R)
    cx, sx, cy, sy = cos(tx), sin(tx), cos(ty), sin(ty)
    tny = sy / cy
    J = np.empty((3, 3))
    J[0, 0] = 1.0
    J[0, 1] = sx * tny
    J[0, 2] = cx * tny
    J[1, 0] = 0.0
    J[1, 1] = cx
    J[1, 2] = -sx
    J[2, 0] = 0.0
    J[2, 1] = sx / cy
    J[2, 2] = cx / cy

    v0, v1, v2 = x[6], x[7], x[8]
    w0, w1, w2 = x[9], x[10], x[11]
    Om = x[12]

    # kinematic rows
    for i in range(3):
        xdot[i] = R[i, 0] * v0 + R[i, 1] * v1 + R[i, 2] * v2
        xdot[3 + i] = J[i, 0] * w0 + J[i, 1] * w1 + J[i, 2] * w2

    rhs = np.zeros(7)
    g = sc[S_G]

    if flags[F_GRAV]:
        a1, a2, a3 = sc[S_A1], sc[S_A2], sc[S_A3]
        rhs[0] += g * a1 * sy
        rhs[1] += -g * a1 * cy * sx
        rhs[2] += -g * a1 * cx * cy
        rhs[3] += g * cy * sx * a2
        rhs[4] += g * (sy * a2 + cx * cy * a3)
        rhs[5] += -g * sx * cy * a3

    # quasi-coordinate inertial terms
    P = np.zeros(6)
    xv = np.empty(6)
    xv[0], xv[1], xv[2], xv[3], xv[4], xv[5] = v0, v1, v2, w0, w1, w2
    for i in range(6):
        acc = 0.0
        for j in range(6):
            acc += Ms1[i, j] * xv[j]
        P[i] = acc
    rhs[0] -= w1 * P[2] - w2 * P[1]
    rhs[1] -= w2 * P[0] - w0 * P[2]
    rhs[2] -= w0 * P[1] - w1 * P[0]
    rhs[3] -= (v1 * P[2] - v2 * P[1]) + (w1 * P[5] - w2 * P[4])
    rhs[4] -= (v2 * P[0] - v0 * P[2]) + (w2 * P[3] - w0 * P[5])
    rhs[5] -= (v0 * P[1] - v1 * P[0]) + (w0 * P[4] - w1 * P[3])
    Irx = sc[S_IRX]
    rhs[4] -= Irx * Om * w2
    rhs[5] += Irx * Om * w1

    ncyl = geo.shape[0]
    rho_w = sc[S_RHOW]
    z_swl = sc[S_ZSWL]
    r0, r1, r2 = x[0], x[1], x[2]
    kin = np.empty(7)

    lengths = np.empty(ncyl)
    if flags[F_BUOY] or flags[F_HYDRO]:
        if R[2, 2] < sc[S_COSLIM]:
            return DEGENERATE
        for m in range(ncyl):
            if geo[m, G_SUB] > 0.5:
                lengths[m] = geo[m, G_LEN]
                continue
            bx, by, bz = geo[m, 0], geo[m, 1], geo[m, 2]
            px = r0 + R[0, 0] * bx + R[0, 1] * by + R[0, 2] * bz
            py = r1 + R[1, 0] * bx + R[1, 1] * by + R[1, 2] * bz
            pz = r2 + R[2, 0] * bx + R[2, 1] * by + R[2, 2] * bz
            eta = 0.0
            if wave[0] != 0.0:
                eta = wave[0] * cos(wave[2] * (px * wave[3] + py * wave[4]) - wave[1] * t_wave + wave[5])
            L = (z_swl + eta - pz) / R[2, 2]
            if L < 0.0:
                L = 0.0
                loads[L_CLAMP] = 1.0
            elif L > geo[m, G_LEN]:
                L = geo[m, G_LEN]
                loads[L_CLAMP] = 1.0
            lengths[m] = L

    if flags[F_BUOY]:
        Vd = 0.0
        cbx = 0.0
        cby = 0.0
        cbz = 0.0
        for m in range(ncyl):
            V = geo[m, G_AREA] * lengths[m]
            Vd += V
            cbx += V * geo[m, 0]
            cby += V * geo[m, 1]
            cbz += V * (geo[m, 2] + 0.5 * lengths[m])
        loads[L_VD] = Vd
        fb = rho_w * g * Vd
        F0, F1, F2 = fb * R[2, 0], fb * R[2, 1], fb * R[2, 2]
        loads[L_BUOY + 0] = F0
        loads[L_BUOY + 1] = F1
        loads[L_BUOY + 2] = F2
        if Vd > 0.0:
            cbx /= Vd
            cby /= Vd
            cbz /= Vd
            loads[L_BUOY + 3] = cby * F2 - cbz * F1
            loads[L_BUOY + 4] = cbz * F0 - cbx * F2
            loads[L_BUOY + 5] = cbx * F1 - cby * F0

    if flags[F_HYDRO]:
        nq = int(sc[S_NQ])
        Fx = 0.0
        Fy = 0.0
        Fz = 0.0
        Mx = 0.0
        My = 0.0
        Mz = 0.0
        for m in range(ncyl):
            L = lengths[m]
            bx, by, bz = geo[m, 0], geo[m, 1], geo[m, 2]
            if L > 0.0:
                CDt, CAt = geo[m, G_CDT], geo[m, G_CAT]
                for q in range(nq):
                    az_ = bz + sc[N_SC + q] * L
                    ds = sc[N_SC + nq + q] * L
                    px = r0 + R[0, 0] * bx + R[0, 1] * by + R[0, 2] * az_
                    py = r1 + R[1, 0] * bx + R[1, 1] * by + R[1, 2] * az_
                    pz = r2 + R[2, 0] * bx + R[2, 1] * by + R[2, 2] * az_
                    _wave_point(wave, px, py, pz - z_swl, t_wave, kin)
                    # body-frame fluid velocity/acceleration (R^T applied)
                    ubx = R[0, 0] * kin[0] + R[1, 0] * kin[1] + R[2, 0] * kin[2]
                    uby = R[0, 1] * kin[0] + R[1, 1] * kin[1] + R[2, 1] * kin[2]
                    abx = R[0, 0] * kin[3] + R[1, 0] * kin[4] + R[2, 0] * kin[5]
                    aby = R[0, 1] * kin[3] + R[1, 1] * kin[4] + R[2, 1] * kin[5]
                    # point velocity v + w x r_a (transverse components)
                    vax = v0 + w1 * az_ - w2 * by
                    vay = v1 + w2 * bx - w0 * az_
                    rx_ = ubx - vax
                    ry_ = uby - vay
                    sp = sqrt(rx_ * rx_ + ry_ * ry_)
                    dfx = (CDt * sp * rx_ + CAt * abx) * ds
                    dfy = (CDt * sp * ry_ + CAt * aby) * ds
                    Fx += dfx
                    Fy += dfy
                    Mx += -az_ * dfy
                    My += az_ * dfx
                    Mz += bx * dfy - by * dfx
            if geo[m, G_SUB] > 0.5:
                Lp = geo[m, G_LEN]
                A = geo[m, G_AREA]
                czc = bz + 0.5 * Lp
                # plate centre
                px = r0 + R[0, 0] * bx + R[0, 1] * by + R[0, 2] * czc
                py = r1 + R[1, 0] * bx + R[1, 1] * by + R[1, 2] * czc
                pz = r2 + R[2, 0] * bx + R[2, 1] * by + R[2, 2] * czc
                _wave_point(wave, px, py, pz - z_swl, t_wave, kin)
                ubz = R[0, 2] * kin[0] + R[1, 2] * kin[1] + R[2, 2] * kin[2]
                abz = R[0, 2] * kin[3] + R[1, 2] * kin[4] + R[2, 2] * kin[5]
                vaz = v2 + w0 * by - w1 * bx
                vz = ubz - vaz
                fz = geo[m, G_CDZ] * abs(vz) * vz + geo[m, G_CAZ] * abz
                # bottom and top faces
                px = r0 + R[0, 0] * bx + R[0, 1] * by + R[0, 2] * bz
                py = r1 + R[1, 0] * bx + R[1, 1] * by + R[1, 2] * bz
                pz = r2 + R[2, 0] * bx + R[2, 1] * by + R[2, 2] * bz
                _wave_point(wave, px, py, pz - z_swl, t_wave, kin)
                pb = kin[6]
                tz_ = bz + Lp
                px = r0 + R[0, 0] * bx + R[0, 1] * by + R[0, 2] * tz_
                py = r1 + R[1, 0] * bx + R[1, 1] * by + R[1, 2] * tz_
                pz = r2 + R[2, 0] * bx + R[2, 1] * by + R[2, 2] * tz_
                _wave_point(wave, px, py, pz - z_swl, t_wave, kin)
                pt = kin[6]
                fz += A * pb - (A - geo[m, G_AUP]) * pt
                Fz += fz
                Mx += by * fz
                My += -bx * fz
        loads[L_HYDRO + 0] = Fx
        loads[L_HYDRO + 1] = Fy
        loads[L_HYDRO + 2] = Fz
        loads[L_HYDRO + 3] = Mx
        loads[L_HYDRO + 4] = My
        loads[L_HYDRO + 5] = Mz

    tau_a = 0.0
    if flags[F_AERO]:
        hx, hz = sc[S_HUBX], sc[S_HUBZ]
        U = R[0, 0] * u_wind - (v0 + w1 * hz)
        if U < 0.0:
            U = 0.0
        loads[L_U] = U
        if U >= 0.1:
            Rr = sc[S_RR]
            lam = Om * Rr / U
            cp = _lookup(lam_grid, beta_grid, cp_tab, lam, beta)
            ct = _lookup(lam_grid, beta_grid, ct_tab, lam, beta)
            qd = 0.5 * sc[S_RHOA] * pi * Rr * Rr * U * U
            Fa = qd * ct
            if lam > 1e-6:
                tau_a = qd * Rr * cp / lam
            loads[L_LAM] = lam
            loads[L_CP] = cp
            loads[L_CT] = ct
            loads[L_THRUST] = Fa
            loads[L_TAUA] = tau_a
            loads[L_AERO + 0] = Fa
            loads[L_AERO + 3] = tau_a
            loads[L_AERO + 4] = hz * Fa

    if flags[F_MOOR]:
        qd6 = np.empty(6)
        q6 = np.empty(6)
        for i in range(3):
            q6[i] = x[i]
            q6[3 + i] = x[3 + i]
            qd6[i] = xdot[i]
            qd6[3 + i] = xdot[3 + i]
        Q = np.empty(6)
        for i in range(6):
            acc = pre[i]
            for j in range(6):
                acc -= K[i, j] * q6[j] + B[i, j] * qd6[j]
            Q[i] = acc
        for i in range(3):
            loads[L_MOOR + i] = R[0, i] * Q[0] + R[1, i] * Q[1] + R[2, i] * Q[2]
            loads[L_MOOR + 3 + i] = J[0, i] * Q[3] + J[1, i] * Q[4] + J[2, i] * Q[5]

    for i in range(6):
        rhs[i] += loads[L_BUOY + i] + loads[L_HYDRO + i] + loads[L_AERO + i] + loads[L_MOOR + i]
    rhs[6] += tau_a - tau_g

    for i in range(7):
        acc = 0.0
        for j in range(7):
            acc += Minv[i, j] * rhs[j]
        xdot[6 + i] = acc
    for i in range(13):
        if not np.isfinite(xdot[i]):
            return NONFINITE
    return OK


@njit(cache=True)
def gen_torque(Om, s):
    """Generator law; ``s`` as produced by ``aero.torque_schedule``."""
    cut, om15, k, om25, sync, slope, om_r, tau_r = s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8]
    if Om < cut:
        return 0.0
    if s[0] == 0.0 or Om >= om_r:
        return tau_r
    if Om < om15:
        return k * om15 * om15 * (Om - cut) / (om15 - cut)
    if Om < om25:
        return k * Om * Om
    return slope * (Om - sync)


@njit(cache=True)
def rk4_step(x, dt, t_wave, wave, u_wind, beta0, beta_rate, tq,
             geo, Minv, Ms1, K, B, pre, lam_grid, beta_grid, cp_tab, ct_tab, sc, flags,
             x_out, loads0):
    """One classical RK4 step with the environment held at the step start.

    Pitch follows ``beta0 + beta_rate * tau`` inside the step; generator
    torque is re-evaluated from each stage's rotor speed.  ``loads0``
    receives the loads at the step start.
    """
    n = 13
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    xs = np.empty(n)
    scratch = np.empty(N_LOADS)
    tg = gen_torque(x[12], tq)
    st = plant_rhs(x, t_wave, wave, u_wind, beta0, tg, geo, Minv, Ms1, K, B, pre,
                   lam_grid, beta_grid, cp_tab, ct_tab, sc, flags, k1, loads0)
    if st != OK:
        return st
    for i in range(n):
        xs[i] = x[i] + 0.5 * dt * k1[i]
    tg = gen_torque(xs[12], tq)
    st = plant_rhs(xs, t_wave, wave, u_wind, beta0 + 0.5 * dt * beta_rate, tg, geo, Minv, Ms1,
                   K, B, pre, lam_grid, beta_grid, cp_tab, ct_tab, sc, flags, k2, scratch)
    if st != OK:
        return st
    for i in range(n):
        xs[i] = x[i] + 0.5 * dt * k2[i]
    tg = gen_torque(xs[12], tq)
    st = plant_rhs(xs, t_wave, wave, u_wind, beta0 + 0.5 * dt * beta_rate, tg, geo, Minv, Ms1,
                   K, B, pre, lam_grid, beta_grid, cp_tab, ct_tab, sc, flags, k3, scratch)
    if st != OK:
        return st
    for i in range(n):
        xs[i] = x[i] + dt * k3[i]
    tg = gen_torque(xs[12], tq)
    st = plant_rhs(xs, t_wave, wave, u_wind, beta0 + dt * beta_rate, tg, geo, Minv, Ms1,
                   K, B, pre, lam_grid, beta_grid, cp_tab, ct_tab, sc, flags, k4, scratch)
    if st != OK:
        return st
    for i in range(n):
        x_out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return OK
