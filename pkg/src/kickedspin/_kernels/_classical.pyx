# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the classical stroboscopic map (hot inner loops)."""

from libc.math cimport sqrt, fabs, cos, sin

import numpy as np
cimport numpy as cnp

cnp.import_array()

IMPL = "cython"


cdef inline double _rk4_steps(double* mx, double* my, double* mz,
                              double k, double dt, long n_steps) nogil:
    cdef double x = mx[0], y = my[0], z = mz[0]
    cdef double ax1, ay1, az1, ax2, ay2, az2, ax3, ay3, az3, ax4, ay4, az4
    cdef double bx, by, bz, norm, drift, max_drift = 0.0
    cdef long i
    for i in range(n_steps):
        ax1 = -k * y * z
        ay1 = -2.0 * z + k * x * z
        az1 = 2.0 * y

        bx = x + 0.5 * dt * ax1
        by = y + 0.5 * dt * ay1
        bz = z + 0.5 * dt * az1
        ax2 = -k * by * bz
        ay2 = -2.0 * bz + k * bx * bz
        az2 = 2.0 * by

        bx = x + 0.5 * dt * ax2
        by = y + 0.5 * dt * ay2
        bz = z + 0.5 * dt * az2
        ax3 = -k * by * bz
        ay3 = -2.0 * bz + k * bx * bz
        az3 = 2.0 * by

        bx = x + dt * ax3
        by = y + dt * ay3
        bz = z + dt * az3
        ax4 = -k * by * bz
        ay4 = -2.0 * bz + k * bx * bz
        az4 = 2.0 * by

        x += dt * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4) / 6.0
        y += dt * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4) / 6.0
        z += dt * (az1 + 2.0 * az2 + 2.0 * az3 + az4) / 6.0

        norm = sqrt(x * x + y * y + z * z)
        drift = fabs(norm - 1.0)
        if drift > max_drift:
            max_drift = drift
        x /= norm
        y /= norm
        z /= norm
    mx[0] = x
    my[0] = y
    mz[0] = z
    return max_drift


def rk4_flow(m, double k, double tau, double dt, long n_steps):
    cdef double mx = m[0], my = m[1], mz = m[2]
    cdef double drift
    with nogil:
        drift = _rk4_steps(&mx, &my, &mz, k, dt, n_steps)
    return np.array([mx, my, mz]), drift


def stroboscopic_run(m, double k, double mu, double tau, double dt,
                     long n_steps, long n_kicks):
    cdef double mx = m[0], my = m[1], mz = m[2]
    cdef double cmu = cos(mu), smu = sin(mu)
    cdef double drift, max_drift = 0.0, x
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n_kicks, 3))
    cdef double[:, ::1] o = out
    cdef long t
    with nogil:
        for t in range(n_kicks):
            drift = _rk4_steps(&mx, &my, &mz, k, dt, n_steps)
            if drift > max_drift:
                max_drift = drift
            x = cmu * mx - smu * my
            my = smu * mx + cmu * my
            mx = x
            o[t, 0] = mx
            o[t, 1] = my
            o[t, 2] = mz
    return out, max_drift


def stroboscopic_batch(m0s, double k, double mu, double tau, double dt,
                       long n_steps, long n_kicks):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m0 = np.ascontiguousarray(m0s, dtype=np.float64)
    cdef long n = m0.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((n, n_kicks, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] drifts = np.zeros(n)
    cdef double[:, ::1] mv = m0
    cdef double[:, :, ::1] o = out
    cdef double[::1] dv = drifts
    cdef double cmu = cos(mu), smu = sin(mu)
    cdef double mx, my, mz, x, drift, max_drift
    cdef long i, t
    with nogil:
        for i in range(n):
            mx = mv[i, 0]
            my = mv[i, 1]
            mz = mv[i, 2]
            max_drift = 0.0
            for t in range(n_kicks):
                drift = _rk4_steps(&mx, &my, &mz, k, dt, n_steps)
                if drift > max_drift:
                    max_drift = drift
                x = cmu * mx - smu * my
                my = smu * mx + cmu * my
                mx = x
                o[i, t, 0] = mx
                o[i, t, 1] = my
                o[i, t, 2] = mz
            dv[i] = max_drift
    return out, drifts
