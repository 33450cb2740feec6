"""Time evolution of the lattice amplitudes under a drifting well.

The integrator is classical RK4 on i dc/dt = -(c_{n+1} + c_{n-1}) + V(n + v t) c_n.
Internally the amplitudes may be carried in a rotating gauge c * exp(i E0 t),
which leaves every observable unchanged but keeps the per-step phase small
for states near the band bottom; recorded snapshots are always the plain c_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .core import (
    Absorbing,
    Harmonic,
    LatticeModel,
    PoschlTeller,
    PotentialSpec,
    Tabulated,
    WaveState,
    center_of_mass,
    localized_fraction,
    norm_sq,
    sample_potential,
    translate,
)

MAX_FIXED_DT = 0.05
NORM_DRIFT_LIMIT = 1e-6
EDGE_SITES = 10
EDGE_LIMIT = 1e-4
LIFETIME_CAP = 1e9


class EvolutionError(RuntimeError):
    pass


class NormDriftError(EvolutionError):
    pass


class StepUnderflowError(EvolutionError):
    pass


class LifetimeFitError(ValueError):
    pass


@dataclass(frozen=True)
class Fixed:
    pass


@dataclass(frozen=True)
class Adaptive:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_min: float = 1e-6

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("adaptive tolerances must be positive")


@dataclass(frozen=True)
class EvolutionConfig:
    t_max: float
    dt: float = 0.01
    mode: Union[Fixed, Adaptive] = field(default_factory=Fixed)
    record_stride: int = 100
    window: float = 30.0
    gauge_energy: Union[float, str, None] = "auto"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if isinstance(self.mode, Fixed) and self.dt > MAX_FIXED_DT:
            raise ValueError(f"fixed-step dt must be <= {MAX_FIXED_DT}, got {self.dt}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")

    @property
    def record_interval(self) -> float:
        return self.record_stride * self.dt


@dataclass(eq=False)
class TrajectoryRecord:
    times: np.ndarray
    snapshots: list
    series: dict
    centers: np.ndarray
    window: float
    gauge_energy: float
    steps: int
    rejected: int = 0

    @property
    def final(self) -> WaveState:
        return self.snapshots[-1]

    @property
    def max_edge_norm(self) -> float:
        return float(np.max(self.series["edge"]))

    @property
    def valid(self) -> bool:
        """False when radiation reached the outer sites (open-boundary reflections)."""
        return self.max_edge_norm <= EDGE_LIMIT

    def magnitudes(self) -> np.ndarray:
        return np.abs(np.array([s.amplitudes for s in self.snapshots]))


# ----------------------------------------------------------------- rhs / step

def _hamiltonian_action(c: np.ndarray, V: np.ndarray) -> np.ndarray:
    h = V * c
    h[1:] -= c[:-1]
    h[:-1] -= c[1:]
    return h


def rhs(state: WaveState, spec: PotentialSpec, model: LatticeModel, energy_shift: float = 0.0) -> np.ndarray:
    """dc/dt at the state's time; sites beyond the lattice are zero."""
    c = state.amplitudes
    V = sample_potential(spec, model, state.t)
    out = -1j * _hamiltonian_action(c, V - energy_shift)
    if isinstance(model.boundary, Absorbing):
        out -= model.absorption_profile() * c
    return out


def rk4_step(state: WaveState, spec: PotentialSpec, model: LatticeModel, dt: float,
             energy_shift: float = 0.0) -> WaveState:
    if dt == 0:
        raise ValueError("dt must be non-zero")
    t = state.t
    c = state.amplitudes

    def f(tt, y):
        return rhs(WaveState(y, tt), spec, model, energy_shift)

    k1 = f(t, c)
    k2 = f(t + dt / 2, c + dt / 2 * k1)
    k3 = f(t + dt / 2, c + dt / 2 * k2)
    k4 = f(t + dt, c + dt * k3)
    return WaveState(c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), t + dt)


def _kernel_args(spec: PotentialSpec, model: LatticeModel):
    shape = spec.shape
    tab = np.zeros(model.sites)
    if isinstance(shape, PoschlTeller):
        kind, p = _kernels.POSCHL_TELLER, (shape.nu * (shape.nu + 1) / shape.l**2, shape.l, shape.center0)
    elif isinstance(shape, Harmonic):
        kind, p = _kernels.HARMONIC, (shape.omega, shape.center0, 0.0)
    elif isinstance(shape, Tabulated):
        if spec.drift_v != 0:
            raise ValueError("tabulated wells do not drift")
        kind, p = _kernels.TABULATED, (0.0, 0.0, 0.0)
        tab = sample_potential(spec, model, 0.0)
    else:
        raise TypeError(f"unsupported potential shape {shape!r}")
    return kind, p, tab


class _Stepper:
    def __init__(self, spec, model, shift):
        self.kind, self.p, self.tab = _kernel_args(spec, model)
        self.x = model.n
        self.v = float(spec.drift_v)
        self.gam = model.absorption_profile()
        self.shift = float(shift)

    def __call__(self, c, t0, dt, nsteps):
        return _kernels.rk4_block(c, t0, dt, nsteps, self.x, self.v, self.kind,
                                  self.p[0], self.p[1], self.p[2], self.tab, self.gam, self.shift)


def propagate_static(c, diag, dt: float, nsteps: int, energy_shift: float = 0.0) -> np.ndarray:
    """RK4 on an arbitrary-length open chain with a fixed on-site potential."""
    c = np.asarray(c, dtype=complex)
    diag = np.asarray(diag, dtype=float)
    x = np.zeros(c.size)
    return _kernels.rk4_block(c, 0.0, float(dt), int(nsteps), x, 0.0, _kernels.TABULATED,
                              0.0, 0.0, 0.0, diag, np.zeros(c.size), float(energy_shift))


# ------------------------------------------------------------------ evolve

def _resolve_gauge(cfg: EvolutionConfig, state0: WaveState, spec, model) -> float:
    if cfg.gauge_energy is None:
        return 0.0
    if cfg.gauge_energy == "auto":
        c = state0.amplitudes
        V = sample_potential(spec, model, state0.t)
        return float(np.vdot(c, _hamiltonian_action(c, V)).real / norm_sq(state0))
    return float(cfg.gauge_energy)


def evolve(state0: WaveState, spec: PotentialSpec, model: LatticeModel, cfg: EvolutionConfig,
           reference: WaveState | None = None) -> TrajectoryRecord:
    """Integrate from state0.t to cfg.t_max, recording every cfg.record_stride steps.

    `reference` (default: state0) is the localized profile whose overlap with
    the evolving state is tracked after translating it along with the well.
    """
    if len(state0) != model.sites:
        raise ValueError(f"state has {len(state0)} sites, lattice has {model.sites}")
    if abs(norm_sq(state0) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    ref0 = (reference if reference is not None else state0).normalized()
    shift = _resolve_gauge(cfg, state0, spec, model)
    step = _Stepper(spec, model, shift)
    open_bc = not isinstance(model.boundary, Absorbing)
    t0 = state0.t
    xc0 = spec.center(t0)

    n_records = int(math.floor((cfg.t_max - t0) / cfg.record_interval + 1e-9))
    times = t0 + cfg.record_interval * np.arange(n_records + 1)
    if times[-1] < cfg.t_max - 1e-12:
        times = np.append(times, cfg.t_max)

    obs = {k: np.empty(times.size) for k in ("norm", "locfrac", "overlap", "com", "tail", "edge")}
    centers = np.array([spec.center(t) for t in times])
    snapshots = []

    def record(i, c_gauge, t):
        c = c_gauge * np.exp(-1j * shift * (t - t0))
        st = WaveState(c, t)
        snapshots.append(st)
        p = np.abs(c) ** 2
        nrm = p.sum()
        xc = centers[i]
        lf = localized_fraction(st, xc, cfg.window)
        ref = translate(ref0, xc - xc0)
        obs["norm"][i] = nrm
        obs["locfrac"][i] = lf
        obs["tail"][i] = 1.0 - lf
        obs["overlap"][i] = abs(np.vdot(ref.amplitudes, c)) ** 2
        obs["com"][i] = center_of_mass(st)
        obs["edge"][i] = (p[:EDGE_SITES].sum() + p[-EDGE_SITES:].sum()) / nrm
        if open_bc and abs(nrm - 1.0) > NORM_DRIFT_LIMIT:
            raise NormDriftError(f"norm drifted to {nrm:.12f} at t={t:.4f}; reduce dt")

    c = state0.amplitudes.copy()
    record(0, c, t0)
    steps = rejected = 0
    if isinstance(cfg.mode, Fixed):
        for i in range(1, times.size):
            span = times[i] - times[i - 1]
            nsteps = max(1, int(round(span / cfg.dt)))
            dt = span / nsteps
            c = step(c, times[i - 1], dt, nsteps)
            steps += nsteps
            record(i, c, times[i])
    else:
        ctrl = cfg.mode
        dt = cfg.dt
        t = t0
        for i in range(1, times.size):
            while t < times[i] - 1e-13:
                h = min(dt, times[i] - t)
                full = step(c, t, h, 1)
                half = step(step(c, t, h / 2, 1), t + h / 2, h / 2, 1)
                scale = ctrl.abs_tol + ctrl.rel_tol * np.max(np.abs(half))
                err = np.max(np.abs(half - full)) / 15.0
                if err <= scale:
                    c, t = half, t + h
                    steps += 1
                    grow = 2.0 if err == 0 else min(2.0, 0.9 * (scale / err) ** 0.2)
                    if h == dt:
                        dt = dt * max(1.0, grow)
                else:
                    rejected += 1
                    dt = h * max(0.2, 0.9 * (scale / err) ** 0.2)
                    if dt < ctrl.dt_min:
                        raise StepUnderflowError(f"step size {dt:.3e} below {ctrl.dt_min} at t={t:.4f}")
            t = times[i]
            record(i, c, t)

    return TrajectoryRecord(times, snapshots, obs, centers, cfg.window, shift, steps, rejected)


# ------------------------------------------------------------ initial states

def harmonic_ground_state(model: LatticeModel, omega: float, mass_ratio: float = 1.0,
                          center: float = 0.0) -> WaveState:
    """Discrete Gaussian ground state of 0.5*omega*x^2 for a particle of mass m*.

    With m = 1/2 the trap frequency is sqrt(2*omega); the oscillator length is
    sigma^2 = hbar / sqrt(m* k) = sqrt(m/m*) * sqrt(2/omega).
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if mass_ratio < 1:
        raise ValueError("mass_ratio must be >= 1")
    sigma2 = math.sqrt(2.0 / omega) / math.sqrt(mass_ratio)
    if sigma2 < 1.0:
        raise ValueError(f"oscillator width sigma={math.sqrt(sigma2):.3f} is below one lattice site")
    x = model.n
    return WaveState(np.exp(-((x - center) ** 2) / (2.0 * sigma2))).normalized()


# --------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class LifetimeFit:
    tau: float
    r_squared: float
    slope: float
    points: int


def estimate_lifetime(traj: TrajectoryRecord, fit_window=None, observable: str = "overlap",
                      min_points: int = 20, rise_tol: float = 1e-8, cap: float = LIFETIME_CAP) -> LifetimeFit:
    """Fit log(survival) against t; tau = -1/slope.

    The default window skips the first tenth of the run. A series that rises
    by more than `rise_tol` (relative) anywhere in the window is rejected.
    """
    t = traj.times
    y = traj.series[observable]
    if fit_window is None:
        fit_window = (t[0] + 0.1 * (t[-1] - t[0]), t[-1])
    t1, t2 = fit_window
    sel = (t >= t1 - 1e-12) & (t <= t2 + 1e-12)
    ts, ys = t[sel], y[sel]
    if ts.size < min_points:
        raise LifetimeFitError(f"only {ts.size} samples in fit window, need {min_points}")
    if np.any(ys <= 0):
        raise LifetimeFitError("non-positive survival values in fit window")
    if np.any(np.diff(ys) > rise_tol * ys.max()):
        raise LifetimeFitError(f"{observable} is not monotonically decaying on [{t1}, {t2}]")
    logy = np.log(ys)
    slope, intercept = np.polyfit(ts, logy, 1)
    resid = logy - (slope * ts + intercept)
    ss_tot = np.sum((logy - logy.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else float("nan")
    tau = -1.0 / slope if slope < 0 else math.inf
    if tau > cap:
        tau = math.inf
    return LifetimeFit(tau, float(r2), float(slope), int(ts.size))


def radiation_tail_norm(state: WaveState, center: float, half_window: float) -> float:
    return 1.0 - localized_fraction(state, center, half_window)
