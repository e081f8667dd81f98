"""Pure-Python/NumPy kernels for the classical stroboscopic map.

Same call signatures as the compiled module `_classical`; selected at import
time by :mod:`kickedspin._kernels` when the extension is unavailable or
explicitly disabled.  Formulas are kept textually identical to the compiled
version so the two paths agree to roundoff.
"""

from __future__ import annotations

import math

import numpy as np

IMPL = "python"


def _rk4_flow_scalar(mx, my, mz, k, dt, n_steps):
    """Integrate the free equations of motion; returns (mx,my,mz,max_drift)."""
    max_drift = 0.0
    for _ in range(n_steps):
        ax1 = -k * my * mz
        ay1 = -2.0 * mz + k * mx * mz
        az1 = 2.0 * my

        bx = mx + 0.5 * dt * ax1
        by = my + 0.5 * dt * ay1
        bz = mz + 0.5 * dt * az1
        ax2 = -k * by * bz
        ay2 = -2.0 * bz + k * bx * bz
        az2 = 2.0 * by

        bx = mx + 0.5 * dt * ax2
        by = my + 0.5 * dt * ay2
        bz = mz + 0.5 * dt * az2
        ax3 = -k * by * bz
        ay3 = -2.0 * bz + k * bx * bz
        az3 = 2.0 * by

        bx = mx + dt * ax3
        by = my + dt * ay3
        bz = mz + dt * az3
        ax4 = -k * by * bz
        ay4 = -2.0 * bz + k * bx * bz
        az4 = 2.0 * by

        mx += dt * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4) / 6.0
        my += dt * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4) / 6.0
        mz += dt * (az1 + 2.0 * az2 + 2.0 * az3 + az4) / 6.0

        norm = math.sqrt(mx * mx + my * my + mz * mz)
        drift = abs(norm - 1.0)
        if drift > max_drift:
            max_drift = drift
        mx /= norm
        my /= norm
        mz /= norm
    return mx, my, mz, max_drift


def rk4_flow(m, k, tau, dt, n_steps):
    mx, my, mz, drift = _rk4_flow_scalar(float(m[0]), float(m[1]), float(m[2]),
                                         float(k), float(dt), int(n_steps))
    return np.array([mx, my, mz]), drift


def stroboscopic_run(m, k, mu, tau, dt, n_steps, n_kicks):
    """Flow-then-kick n_kicks times, recording the state after each kick."""
    mx, my, mz = float(m[0]), float(m[1]), float(m[2])
    cmu, smu = math.cos(mu), math.sin(mu)
    out = np.empty((n_kicks, 3))
    max_drift = 0.0
    for t in range(n_kicks):
        mx, my, mz, drift = _rk4_flow_scalar(mx, my, mz, float(k), float(dt), int(n_steps))
        if drift > max_drift:
            max_drift = drift
        mx, my = cmu * mx - smu * my, smu * mx + cmu * my
        out[t, 0] = mx
        out[t, 1] = my
        out[t, 2] = mz
    return out, max_drift


def stroboscopic_batch(m0s, k, mu, tau, dt, n_steps, n_kicks):
    """Vectorized flow-then-kick over a batch of initial conditions."""
    m = np.array(m0s, dtype=float)
    n = m.shape[0]
    k = float(k)
    dt = float(dt)
    cmu, smu = math.cos(float(mu)), math.sin(float(mu))
    out = np.empty((n, n_kicks, 3))
    drifts = np.zeros(n)

    def deriv(arr):
        d = np.empty_like(arr)
        d[:, 0] = -k * arr[:, 1] * arr[:, 2]
        d[:, 1] = -2.0 * arr[:, 2] + k * arr[:, 0] * arr[:, 2]
        d[:, 2] = 2.0 * arr[:, 1]
        return d

    for t in range(n_kicks):
        for _ in range(n_steps):
            k1 = deriv(m)
            k2 = deriv(m + 0.5 * dt * k1)
            k3 = deriv(m + 0.5 * dt * k2)
            k4 = deriv(m + dt * k3)
            m = m + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            norm = np.sqrt((m * m).sum(axis=1))
            np.maximum(drifts, np.abs(norm - 1.0), out=drifts)
            m /= norm[:, None]
        x = cmu * m[:, 0] - smu * m[:, 1]
        y = smu * m[:, 0] + cmu * m[:, 1]
        m[:, 0] = x
        m[:, 1] = y
        out[:, t, :] = m
    return out, drifts
