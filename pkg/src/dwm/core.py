"""Lattice grid, potential wells and scalar observables on amplitude fields.

Units: hbar = a = kappa = 1 throughout, so the particle mass is m = 1/2,
velocities are in kappa*a, energies in kappa and times in 1/kappa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np


class LatticeError(ValueError):
    """Invalid lattice, potential or state construction."""


@dataclass(frozen=True)
class Open:
    pass


@dataclass(frozen=True)
class Absorbing:
    """Linear-ramp negative-imaginary potential on the outer `width` sites."""

    width: int
    strength: float

    def __post_init__(self):
        if self.width < 1:
            raise LatticeError("absorbing width must be >= 1")
        if self.strength < 0:
            raise LatticeError("absorbing strength must be >= 0")


Boundary = Union[Open, Absorbing]


@dataclass(frozen=True)
class LatticeModel:
    """Sites n = -M..M (2M+1 of them)."""

    half_width: int
    boundary: Boundary = field(default_factory=Open)

    def __post_init__(self):
        if self.half_width < 1:
            raise LatticeError(f"half_width must be >= 1, got {self.half_width}")
        if isinstance(self.boundary, Absorbing) and self.boundary.width >= self.half_width:
            raise LatticeError("absorbing width must be smaller than half_width")

    @classmethod
    def from_sites(cls, sites: int, boundary: Boundary | None = None) -> "LatticeModel":
        if sites < 3 or sites % 2 == 0:
            raise LatticeError(f"site count must be odd and >= 3, got {sites}")
        return cls((sites - 1) // 2, boundary if boundary is not None else Open())

    @property
    def sites(self) -> int:
        return 2 * self.half_width + 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1, dtype=float)

    def absorption_profile(self) -> np.ndarray:
        """Gamma_n >= 0; zero in the interior and for open boundaries."""
        gam = np.zeros(self.sites)
        if isinstance(self.boundary, Absorbing):
            w = self.boundary.width
            ramp = self.boundary.strength * np.arange(1, w + 1) / w
            gam[:w] = ramp[::-1]
            gam[-w:] = ramp
        return gam


@dataclass(frozen=True)
class PoschlTeller:
    nu: float
    l: float
    center0: float = 0.0

    def __post_init__(self):
        if not self.nu > 0 or not self.l > 0:
            raise LatticeError(f"Poschl-Teller needs nu > 0 and l > 0, got nu={self.nu}, l={self.l}")

    def __call__(self, x):
        depth = self.nu * (self.nu + 1.0) / self.l**2
        return -depth / np.cosh((x - self.center0) / self.l) ** 2


@dataclass(frozen=True)
class Harmonic:
    omega: float
    center0: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise LatticeError(f"harmonic well needs omega > 0, got {self.omega}")

    def __call__(self, x):
        return 0.5 * self.omega * (x - self.center0) ** 2


@dataclass(frozen=True, eq=False)
class Tabulated:
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def center0(self) -> float:
        return 0.0


Shape = Union[PoschlTeller, Harmonic, Tabulated]


@dataclass(frozen=True)
class PotentialSpec:
    """A well V(x + v t); its centre sits at center0 - v t."""

    shape: Shape
    drift_v: float = 0.0

    def center(self, t: float) -> float:
        return self.shape.center0 - self.drift_v * t

    def with_velocity(self, v: float) -> "PotentialSpec":
        return PotentialSpec(self.shape, v)


@dataclass(frozen=True, eq=False)
class WaveState:
    amplitudes: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex)
        if arr.ndim != 1:
            raise LatticeError("amplitudes must be one-dimensional")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    def __len__(self):
        return self.amplitudes.size

    @property
    def half_width(self) -> int:
        return (self.amplitudes.size - 1) // 2

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1, dtype=float)

    def normalized(self) -> "WaveState":
        nrm = norm_sq(self)
        if nrm == 0:
            raise LatticeError("cannot normalize the zero state")
        return WaveState(self.amplitudes / math.sqrt(nrm), self.t)

    def at_time(self, t: float) -> "WaveState":
        return WaveState(self.amplitudes, t)


def delta_state(model: LatticeModel, site: int = 0) -> WaveState:
    c = np.zeros(model.sites, dtype=complex)
    c[site + model.half_width] = 1.0
    return WaveState(c)


def uniform_state(model: LatticeModel) -> WaveState:
    return WaveState(np.full(model.sites, 1.0 / math.sqrt(model.sites), dtype=complex))


def gaussian_state(model: LatticeModel, center: float, sigma: float, k: float = 0.0) -> WaveState:
    x = model.n
    c = np.exp(-((x - center) ** 2) / (2 * sigma**2) + 1j * k * x)
    return WaveState(c).normalized()


def _check_bound(state: WaveState, model: LatticeModel):
    if len(state) != model.sites:
        raise LatticeError(f"state has {len(state)} sites, lattice has {model.sites}")


def sample_potential(spec: PotentialSpec, model: LatticeModel, t: float = 0.0) -> np.ndarray:
    """Potential values V(n + v t) on every site at time t."""
    if t < 0:
        raise LatticeError("time must be non-negative")
    shape = spec.shape
    if isinstance(shape, Tabulated):
        if spec.drift_v * t != 0:
            raise LatticeError("tabulated wells do not drift")
        if shape.samples.size != model.sites:
            raise LatticeError(
                f"tabulated potential has {shape.samples.size} samples, lattice has {model.sites} sites"
            )
        return shape.samples.copy()
    return np.asarray(shape(model.n + spec.drift_v * t), dtype=float)


def norm_sq(state: WaveState) -> float:
    c = state.amplitudes
    return float(np.vdot(c, c).real)


def inner_product(a: WaveState, b: WaveState) -> complex:
    """<a|b>, conjugating the first argument."""
    if len(a) != len(b):
        raise LatticeError(f"length mismatch: {len(a)} vs {len(b)}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def participation_ratio(state: WaveState) -> float:
    p = np.abs(state.amplitudes) ** 2
    s2 = p.sum()
    if s2 == 0:
        raise LatticeError("participation ratio of the zero vector is undefined")
    return float(s2**2 / np.sum(p**2))


def reflect(state: WaveState, center: float = 0.0) -> WaveState:
    """Mirror the amplitudes about `center`; sites mapped off the lattice are dropped."""
    twice = 2.0 * center
    if abs(twice - round(twice)) > 1e-9:
        raise LatticeError(f"reflection centre {center} does not map sites onto sites")
    s = int(round(twice))
    c = state.amplitudes
    out = np.zeros_like(c)
    # site n -> s - n, i.e. index i -> s + 2M - i
    M = state.half_width
    i = np.arange(c.size)
    j = s + 2 * M - i
    ok = (j >= 0) & (j < c.size)
    out[j[ok]] = c[i[ok]]
    return WaveState(out, state.t)


def parity_score(state: WaveState, center: float = 0.0) -> float:
    nrm = norm_sq(state)
    if nrm == 0:
        raise LatticeError("parity of the zero vector is undefined")
    return inner_product(state, reflect(state, center)).real / nrm


def localized_fraction(state: WaveState, center: float, half_window: float) -> float:
    p = np.abs(state.amplitudes) ** 2
    total = p.sum()
    if total == 0:
        raise LatticeError("localized fraction of the zero vector is undefined")
    inside = np.abs(state.n - center) <= half_window
    return float(p[inside].sum() / total)


def center_of_mass(state: WaveState) -> float:
    p = np.abs(state.amplitudes) ** 2
    return float(np.dot(state.n, p) / p.sum())


def translate(state: WaveState, shift: float) -> WaveState:
    """Shift amplitudes by `shift` sites: out(n) = in(n - shift).

    Integer shifts move samples directly (zero fill). Fractional shifts use
    band-limited interpolation on a zero-padded grid, so the state should be
    well localized away from the edges.
    """
    c = state.amplitudes
    if abs(shift - round(shift)) < 1e-12:
        s = int(round(shift))
        out = np.zeros_like(c)
        if s >= 0:
            out[s:] = c[: c.size - s] if s < c.size else []
        else:
            out[:s] = c[-s:]
        return WaveState(out, state.t)
    pad = c.size
    buf = np.concatenate([np.zeros(pad, complex), c, np.zeros(pad, complex)])
    k = 2 * np.pi * np.fft.fftfreq(buf.size)
    shifted = np.fft.ifft(np.fft.fft(buf) * np.exp(-1j * k * shift))
    return WaveState(shifted[pad : pad + c.size], state.t)


# ---------------------------------------------------------------- csv i/o

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_state_csv(state: WaveState, path) -> Path:
    path = Path(path)
    lines = [f"# t={_fmt(state.t)}", "n,re,im"]
    for n, c in zip(state.n.astype(int), state.amplitudes):
        lines.append(f"{n},{_fmt(c.real)},{_fmt(c.imag)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_state_csv(path) -> WaveState:
    t = 0.0
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "t":
                t = float(val)
            continue
        if line[0].isalpha():
            continue
        n, re, im = line.split(",")
        rows.append((int(n), float(re) + 1j * float(im)))
    rows.sort()
    ns = [r[0] for r in rows]
    M = (len(ns) - 1) // 2
    if ns != list(range(-M, M + 1)):
        raise LatticeError(f"{path}: sites must run contiguously over -M..M")
    return WaveState(np.array([r[1] for r in rows]), t)


def write_potential_csv(values: np.ndarray, path) -> Path:
    path = Path(path)
    M = (len(values) - 1) // 2
    lines = ["n,V"] + [f"{n},{_fmt(v)}" for n, v in zip(range(-M, M + 1), values)]
    path.write_text("\n".join(lines) + "\n")
    return path
