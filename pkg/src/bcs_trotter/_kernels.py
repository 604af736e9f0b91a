"""Jitted stepping kernels for long runs.

These mirror the reference flows in `propagators` with the loops fused and the
stage trigonometry of the free part precomputed (its angles 2 eps_j c tau are
constant along a run).  The reference implementation stays the behavioural
oracle; the kernel is tested against it step by step.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

FREE = 0
INT = 1

STATUS_OK = 0
STATUS_NONFINITE = 1

_TWO_PI = 2.0 * math.pi
_TWO_PI_LO = 2.4492935982947064e-16
_INV_TWO_PI = 1.0 / _TWO_PI
_REDUCE_THRESHOLD = float(2 ** 30)
_SPLITTER = 134217729.0


@njit(cache=True, inline="always")
def _reduce_angle(x):
    if abs(x) <= _REDUCE_THRESHOLD:
        return x
    k = round(x * _INV_TWO_PI)
    p = k * _TWO_PI
    c = _SPLITTER * k
    a_hi = c - (c - k)
    a_lo = k - a_hi
    c = _SPLITTER * _TWO_PI
    b_hi = c - (c - _TWO_PI)
    b_lo = _TWO_PI - b_hi
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return (x - p) - (err + k * _TWO_PI_LO)


@njit(cache=True)
def _orthonormalize(dev2, log_accum):
    """Modified Gram-Schmidt in place; per-vector log stretches accumulate.

    Returns the smallest norm seen (0 or non-finite signals failure).
    """
    p, m = dev2.shape
    worst = np.inf
    for i in range(p):
        for k in range(i):
            dot = 0.0
            for a in range(m):
                dot += dev2[k, a] * dev2[i, a]
            for a in range(m):
                dev2[i, a] -= dot * dev2[k, a]
        nrm2 = 0.0
        for a in range(m):
            nrm2 += dev2[i, a] * dev2[i, a]
        nrm = math.sqrt(nrm2)
        if nrm < worst:
            worst = nrm
        if nrm > 0.0 and math.isfinite(nrm):
            log_accum[i] += math.log(nrm)
            inv = 1.0 / nrm
            for a in range(m):
                dev2[i, a] *= inv
    return worst


@njit(cache=True)
def run_composed(spins, devs, kinds, coeffs, row_of_stage, free_cos, free_sin,
                 g, tau, n_steps, renorm_every, deg_thresh,
                 log_accum, sample_steps, sample_logs,
                 diag_every, diag_out):
    """Evolve a tangent bundle for n_steps composed splitting steps, in place.

    sample_steps are ascending step indices at which the deviations are
    orthonormalized and log_accum snapshotted into sample_logs.  diag_out
    receives [max |J^z - J^z(0)|, max relative |S_j| drift] sampled every
    diag_every steps.  Returns (status, failing_step).
    """
    n = spins.shape[0]
    p = devs.shape[0]
    n_stages = kinds.shape[0]

    jz0 = 0.0
    for j in range(n):
        jz0 += spins[j, 2]

    r_n = np.empty((3, 3))
    r_z = np.empty((3, 3))
    r = np.empty((3, 3))
    k_n = np.zeros((3, 3))
    k_n2 = np.empty((3, 3))
    d_k = np.zeros((3, 3))
    d_r_n = np.empty((3, 3))
    mm = np.empty((3, 3))

    dev2 = devs.reshape(p, 3 * n)
    ptr = 0
    n_samples = sample_steps.shape[0]

    for istep in range(1, n_steps + 1):
        for s in range(n_stages):
            if kinds[s] == FREE:
                row = row_of_stage[s]
                for j in range(n):
                    c = free_cos[row, j]
                    sn = free_sin[row, j]
                    x = spins[j, 0]
                    y = spins[j, 1]
                    spins[j, 0] = c * x - sn * y
                    spins[j, 1] = sn * x + c * y
                for k in range(p):
                    for j in range(n):
                        c = free_cos[row, j]
                        sn = free_sin[row, j]
                        x = devs[k, j, 0]
                        y = devs[k, j, 1]
                        devs[k, j, 0] = c * x - sn * y
                        devs[k, j, 1] = sn * x + c * y
            else:
                t = coeffs[s] * tau
                jx = 0.0
                jy = 0.0
                jz = 0.0
                for j in range(n):
                    jx += spins[j, 0]
                    jy += spins[j, 1]
                    jz += spins[j, 2]
                dx = g * jx
                dy = g * jy
                dz = g * jz
                norm = math.sqrt(dx * dx + dy * dy + dz * dz)
                if norm < deg_thresh:
                    continue
                inv_norm = 1.0 / norm
                nx = dx * inv_norm
                ny = dy * inv_norm
                nz = dz * inv_norm
                theta_n = _reduce_angle(-2.0 * norm * t)
                theta_z = _reduce_angle(2.0 * g * jz * t)
                cn = math.cos(theta_n)
                sn_ = math.sin(theta_n)
                cz = math.cos(theta_z)
                sz = math.sin(theta_z)

                k_n[0, 1] = -nz
                k_n[0, 2] = ny
                k_n[1, 0] = nz
                k_n[1, 2] = -nx
                k_n[2, 0] = -ny
                k_n[2, 1] = nx
                k_n2[0, 0] = -(ny * ny + nz * nz)
                k_n2[0, 1] = nx * ny
                k_n2[0, 2] = nx * nz
                k_n2[1, 0] = nx * ny
                k_n2[1, 1] = -(nx * nx + nz * nz)
                k_n2[1, 2] = ny * nz
                k_n2[2, 0] = nx * nz
                k_n2[2, 1] = ny * nz
                k_n2[2, 2] = -(nx * nx + ny * ny)
                for a in range(3):
                    for b in range(3):
                        r_n[a, b] = sn_ * k_n[a, b] + (1.0 - cn) * k_n2[a, b]
                    r_n[a, a] += 1.0
                r_z[0, 0] = cz
                r_z[0, 1] = -sz
                r_z[0, 2] = 0.0
                r_z[1, 0] = sz
                r_z[1, 1] = cz
                r_z[1, 2] = 0.0
                r_z[2, 0] = 0.0
                r_z[2, 1] = 0.0
                r_z[2, 2] = 1.0
                for a in range(3):
                    for b in range(3):
                        r[a, b] = r_z[a, 0] * r_n[0, b] + r_z[a, 1] * r_n[1, b] + r_z[a, 2] * r_n[2, b]

                # deviations first: they need the entry configuration
                for k in range(p):
                    ddx = 0.0
                    ddy = 0.0
                    djz = 0.0
                    for j in range(n):
                        ddx += devs[k, j, 0]
                        ddy += devs[k, j, 1]
                        djz += devs[k, j, 2]
                    ddx *= g
                    ddy *= g
                    dnorm = (dx * ddx + dy * ddy + g * dz * djz) * inv_norm
                    dtheta_n = -2.0 * t * dnorm
                    dtheta_z = 2.0 * g * t * djz
                    dnx = (ddx - nx * dnorm) * inv_norm
                    dny = (ddy - ny * dnorm) * inv_norm
                    dnz = (g * djz - nz * dnorm) * inv_norm
                    d_k[0, 1] = -dnz
                    d_k[0, 2] = dny
                    d_k[1, 0] = dnz
                    d_k[1, 2] = -dnx
                    d_k[2, 0] = -dny
                    d_k[2, 1] = dnx
                    one_m_cn = 1.0 - cn
                    for a in range(3):
                        for b in range(3):
                            anti = 0.0
                            for q in range(3):
                                anti += k_n[a, q] * d_k[q, b] + d_k[a, q] * k_n[q, b]
                            d_r_n[a, b] = (
                                dtheta_n * cn * k_n[a, b]
                                + sn_ * d_k[a, b]
                                + dtheta_n * sn_ * k_n2[a, b]
                                + one_m_cn * anti
                            )
                    # mm = dR_z R_n + R_z dR_n, using the sparse structure of R_z
                    for b in range(3):
                        mm[0, b] = dtheta_z * (-sz * r_n[0, b] - cz * r_n[1, b]) \
                            + cz * d_r_n[0, b] - sz * d_r_n[1, b]
                        mm[1, b] = dtheta_z * (cz * r_n[0, b] - sz * r_n[1, b]) \
                            + sz * d_r_n[0, b] + cz * d_r_n[1, b]
                        mm[2, b] = d_r_n[2, b]
                    for j in range(n):
                        sx = spins[j, 0]
                        sy = spins[j, 1]
                        szp = spins[j, 2]
                        wx = devs[k, j, 0]
                        wy = devs[k, j, 1]
                        wz = devs[k, j, 2]
                        devs[k, j, 0] = mm[0, 0] * sx + mm[0, 1] * sy + mm[0, 2] * szp \
                            + r[0, 0] * wx + r[0, 1] * wy + r[0, 2] * wz
                        devs[k, j, 1] = mm[1, 0] * sx + mm[1, 1] * sy + mm[1, 2] * szp \
                            + r[1, 0] * wx + r[1, 1] * wy + r[1, 2] * wz
                        devs[k, j, 2] = mm[2, 0] * sx + mm[2, 1] * sy + mm[2, 2] * szp \
                            + r[2, 0] * wx + r[2, 1] * wy + r[2, 2] * wz

                for j in range(n):
                    sx = spins[j, 0]
                    sy = spins[j, 1]
                    szp = spins[j, 2]
                    spins[j, 0] = r[0, 0] * sx + r[0, 1] * sy + r[0, 2] * szp
                    spins[j, 1] = r[1, 0] * sx + r[1, 1] * sy + r[1, 2] * szp
                    spins[j, 2] = r[2, 0] * sx + r[2, 1] * sy + r[2, 2] * szp

        due_sample = ptr < n_samples and istep == sample_steps[ptr]
        if p > 0 and (istep % renorm_every == 0 or due_sample):
            worst = _orthonormalize(dev2, log_accum)
            if worst <= 0.0 or not math.isfinite(worst):
                return STATUS_NONFINITE, istep
        if due_sample:
            for k in range(p):
                sample_logs[ptr, k] = log_accum[k]
            ptr += 1
        if diag_every > 0 and istep % diag_every == 0:
            jz = 0.0
            for j in range(n):
                jz += spins[j, 2]
            dj = abs(jz - jz0)
            if dj > diag_out[0]:
                diag_out[0] = dj
            for j in range(n):
                nrm = math.sqrt(
                    spins[j, 0] ** 2 + spins[j, 1] ** 2 + spins[j, 2] ** 2
                )
                dn = abs(nrm * 2.0 - 1.0)
                if dn > diag_out[1]:
                    diag_out[1] = dn
            if not math.isfinite(jz):
                return STATUS_NONFINITE, istep

    return STATUS_OK, n_steps
