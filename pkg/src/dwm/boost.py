"""Closed-form quantities for a well drifting across the lattice.

In lattice units (m = 1/2) the boost phase solves sin(qa) = v/2, so drifts
faster than the maximal group velocity 2 have no real boost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import WaveState

CRITICAL_VELOCITY = 2.0


class BeyondCriticalVelocity(ValueError):
    pass


@dataclass(frozen=True)
class BoostParameters:
    v: float
    qa: float
    gamma: float
    mass_ratio: float

    @property
    def sin_qa(self) -> float:
        return 0.5 * self.v

    @property
    def q(self) -> float:
        return self.qa

    def as_dict(self) -> dict:
        return {
            "v": self.v,
            "qa": self.qa,
            "sin_qa": self.sin_qa,
            "gamma": self.gamma,
            "mass_ratio": self.mass_ratio,
        }


def solve_boost(v: float) -> BoostParameters:
    """Boost phase, gauge frequency and renormalized mass for drift speed v."""
    v = float(v)
    if abs(v) > CRITICAL_VELOCITY:
        raise BeyondCriticalVelocity(
            f"|v| = {abs(v)} exceeds the critical velocity {CRITICAL_VELOCITY} (no real boost phase)"
        )
    s = 0.5 * v
    qa = math.asin(s)
    cos_qa = math.sqrt((1.0 - s) * (1.0 + s))
    mass_ratio = 1.0 / cos_qa if cos_qa > 0 else math.inf
    gamma = -v * qa + 2.0 * (1.0 - cos_qa)
    return BoostParameters(v=v, qa=qa, gamma=gamma, mass_ratio=mass_ratio)


def comoving_boost(v: float) -> BoostParameters:
    """Boost for states riding along with a well V(x + v t).

    That well's centre moves at -v on the lattice, so the carrier phase
    that co-moves with it belongs to velocity -v.
    """
    return solve_boost(-v)


def effective_depth(nu: float, mass_ratio: float) -> float:
    """Positive root of nu*(nu*+1) = mass_ratio * nu(nu+1)."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if mass_ratio < 1:
        raise ValueError("mass_ratio must be >= 1")
    prod = mass_ratio * nu * (nu + 1.0)
    return 2.0 * prod / (1.0 + math.sqrt(1.0 + 4.0 * prod))


def dispersion(k, bp: BoostParameters):
    """Plane-wave energy E(k) in the frame moving with the well."""
    k = np.asarray(k, dtype=float)
    e = 4.0 * np.sin(0.5 * (k + 2.0 * bp.qa)) * np.sin(0.5 * k) - bp.v * k
    return e if e.ndim else float(e)


def momentum_potential(k, v: float):
    k = np.asarray(k, dtype=float)
    w = 2.0 * (1.0 - np.cos(k)) - v * k
    return w if w.ndim else float(w)


@dataclass(frozen=True)
class Extremum:
    k: float
    w: float
    kind: str  # "min", "max" or "inflection"


def _bisect(f, a, b, tol):
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def momentum_potential_extrema(v: float, tol: float = 1e-12) -> list[Extremum]:
    """Stationary points of W(k) on [-2pi, 2pi], found by bisection on W'."""
    if abs(v) > CRITICAL_VELOCITY:
        return []

    def dw(k):
        return 2.0 * math.sin(k) - v

    # W' is monotone between consecutive zeros of W''
    nodes = [-2 * math.pi, -1.5 * math.pi, -0.5 * math.pi, 0.5 * math.pi, 1.5 * math.pi, 2 * math.pi]
    zero_tol = 1e-12
    roots: list[float] = []
    for a, b in zip(nodes[:-1], nodes[1:]):
        fa, fb = dw(a), dw(b)
        if abs(fa) <= zero_tol:
            roots.append(a)
        if abs(fb) <= zero_tol:
            roots.append(b)
        if abs(fa) > zero_tol and abs(fb) > zero_tol and (fa > 0) != (fb > 0):
            roots.append(_bisect(dw, a, b, tol))
    roots.sort()
    unique: list[float] = []
    for r in roots:
        if not unique or r - unique[-1] > 1e-9:
            unique.append(r)

    out = []
    for k in unique:
        curv = 2.0 * math.cos(k)
        if curv > 1e-9:
            kind = "min"
        elif curv < -1e-9:
            kind = "max"
        else:
            kind = "inflection"
        out.append(Extremum(k, momentum_potential(k, v), kind))
    return out


def boosted_initial_state(phi: WaveState, bp: BoostParameters) -> WaveState:
    """Imprint the carrier exp(i q n a) on phi."""
    return WaveState(phi.amplitudes * np.exp(1j * bp.qa * phi.n), phi.t)
