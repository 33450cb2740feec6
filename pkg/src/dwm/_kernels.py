"""Compiled RK4 loop for the tridiagonal amplitude equations."""
import numpy as np
from numba import njit

TABULATED = 0
POSCHL_TELLER = 1
HARMONIC = 2


@njit(cache=True)
def _potential(out, x, kind, p0, p1, p2, tab):
    n = x.size
    if kind == TABULATED:
        for i in range(n):
            out[i] = tab[i]
    elif kind == POSCHL_TELLER:
        for i in range(n):
            ch = np.cosh((x[i] - p2) / p1)
            out[i] = -p0 / (ch * ch)
    else:
        for i in range(n):
            d = x[i] - p1
            out[i] = 0.5 * p0 * d * d


@njit(cache=True)
def _deriv(out, c, V, gam, shift):
    # dc/dt = -i[(V - shift) c - (c_{n+1} + c_{n-1})] - gam c
    n = c.size
    for i in range(n):
        hop = 0j
        if i > 0:
            hop += c[i - 1]
        if i < n - 1:
            hop += c[i + 1]
        h = (V[i] - shift) * c[i] - hop
        out[i] = complex(h.imag, -h.real) - gam[i] * c[i]


@njit(cache=True)
def rk4_block(c, t0, dt, nsteps, x, v, kind, p0, p1, p2, tab, gam, shift):
    """Advance `c` by `nsteps` RK4 steps; step k starts at t0 + k*dt."""
    n = c.size
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    V0 = np.empty(n)
    Vh = np.empty(n)
    V1 = np.empty(n)
    xs = np.empty(n)
    y = c.copy()
    static = kind == TABULATED or v == 0.0
    if static:
        _potential(V0, x, kind, p0, p1, p2, tab)
    for s in range(nsteps):
        t = t0 + s * dt
        if static:
            Vs, Vm, Ve = V0, V0, V0
        else:
            for i in range(n):
                xs[i] = x[i] + v * t
            _potential(V0, xs, kind, p0, p1, p2, tab)
            for i in range(n):
                xs[i] = x[i] + v * (t + 0.5 * dt)
            _potential(Vh, xs, kind, p0, p1, p2, tab)
            for i in range(n):
                xs[i] = x[i] + v * (t + dt)
            _potential(V1, xs, kind, p0, p1, p2, tab)
            Vs, Vm, Ve = V0, Vh, V1
        _deriv(k1, y, Vs, gam, shift)
        for i in range(n):
            tmp[i] = y[i] + 0.5 * dt * k1[i]
        _deriv(k2, tmp, Vm, gam, shift)
        for i in range(n):
            tmp[i] = y[i] + 0.5 * dt * k2[i]
        _deriv(k3, tmp, Vm, gam, shift)
        for i in range(n):
            tmp[i] = y[i] + dt * k3[i]
        _deriv(k4, tmp, Ve, gam, shift)
        for i in range(n):
            y[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return y
