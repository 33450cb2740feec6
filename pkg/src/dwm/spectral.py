"""Static-frame spectra of the tight-binding Hamiltonian.

H = -(hopping between neighbours) + diag(V_n), with unit hopping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .boost import effective_depth, solve_boost
from .core import LatticeModel, PotentialSpec, WaveState, participation_ratio, parity_score, sample_potential

BAND_BOTTOM = -2.0
# extended open-chain states have R ~ (2/3) N; weakly bound modes reach ~0.12 N
BOUND_PR_FRACTION = 0.25
RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10


class EigensolverError(RuntimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ClassificationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    diag: np.ndarray
    hopping: float = 1.0

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    @property
    def size(self) -> int:
        return self.diag.size

    @property
    def offdiag(self) -> np.ndarray:
        return np.full(self.size - 1, -self.hopping)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag[:, None] * x if x.ndim == 2 else self.diag * x
        y[1:] -= self.hopping * x[:-1]
        y[:-1] -= self.hopping * x[1:]
        return y

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def gershgorin(self) -> tuple[float, float]:
        return float(self.diag.min() - 2 * self.hopping), float(self.diag.max() + 2 * self.hopping)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    participation: np.ndarray
    bound: np.ndarray
    parity: np.ndarray

    @property
    def bound_count(self) -> int:
        return int(np.count_nonzero(self.bound))

    def state(self, j: int) -> WaveState:
        return WaveState(self.eigenvectors[:, j])

    def bound_indices(self) -> np.ndarray:
        return np.flatnonzero(self.bound)


def assemble_hamiltonian(model: LatticeModel, spec: PotentialSpec, t: float = 0.0) -> TridiagonalHamiltonian:
    return TridiagonalHamiltonian(sample_potential(spec, model, t))


def eigendecompose(H: TridiagonalHamiltonian) -> SpectrumReport:
    """Full spectrum of a real symmetric tridiagonal matrix."""
    if H.size == 1:
        w, vecs = H.diag.copy(), np.ones((1, 1))
    else:
        try:
            w, vecs = eigh_tridiagonal(H.diag, H.offdiag, lapack_driver="stemr")
        except LinAlgError as exc:
            raise EigensolverError(f"tridiagonal eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        bad = int(np.flatnonzero(~np.isfinite(w))[0])
        raise EigensolverError(f"eigenvalue {bad} did not converge", index=bad)

    scale = float(np.max(np.abs(H.diag))) + 2 * H.hopping
    resid = np.linalg.norm(H.matvec(vecs) - vecs * w, axis=0)
    if np.any(resid > RESIDUAL_TOL * scale):
        bad = int(np.argmax(resid))
        raise EigensolverError(f"residual {resid[bad]:.3e} too large for eigenpair {bad}", index=bad)

    pr = np.array([participation_ratio(WaveState(vecs[:, j])) for j in range(H.size)])
    if H.size % 2:
        par = np.array([parity_score(WaveState(vecs[:, j]), 0.0) for j in range(H.size)])
    else:
        par = np.full(H.size, np.nan)
    return SpectrumReport(w, vecs, pr, np.zeros(H.size, dtype=bool), par)


def sturm_count_below(H: TridiagonalHamiltonian, threshold: float) -> int:
    """Number of eigenvalues strictly below `threshold` (LDL^T inertia)."""
    d = H.diag
    e2 = H.hopping**2
    tiny = np.finfo(float).tiny
    count = 0
    q = d[0] - threshold
    for i in range(d.size):
        if i:
            q = d[i] - threshold - e2 / q
        if q == 0.0:
            q = tiny  # eigenvalue exactly at threshold is not strictly below
        if q < 0:
            count += 1
    return count


def band_tolerance(model: LatticeModel) -> float:
    """Finite-size level spacing scale near the open-chain band edge."""
    return 10.0 / model.sites**2


def classify_bound_states(report: SpectrumReport, model: LatticeModel) -> SpectrumReport:
    """Mark levels below the band bottom; participation ratio must agree."""
    eps = band_tolerance(model)
    by_energy = report.eigenvalues < BAND_BOTTOM - eps
    by_pr = report.participation < BOUND_PR_FRACTION * model.sites
    disagree = np.flatnonzero(by_energy != by_pr)
    # states above the band top are never counted as bound
    disagree = disagree[report.eigenvalues[disagree] < 0]
    if disagree.size:
        j = int(disagree[0])
        raise ClassificationError(
            f"state {j}: energy {report.eigenvalues[j]:.6f} and participation ratio "
            f"{report.participation[j]:.1f} disagree on boundedness (lattice too small or state too shallow)"
        )
    return replace(report, bound=by_energy)


def spectrum(model: LatticeModel, spec: PotentialSpec, t: float = 0.0, classify: bool = True) -> SpectrumReport:
    rep = eigendecompose(assemble_hamiltonian(model, spec, t))
    return classify_bound_states(rep, model) if classify else rep


def pt_analytic_levels(nu: float, l: float) -> list[float]:
    """Continuum Poschl-Teller levels offset to the band bottom.

    For integer nu the zero-binding level is a threshold (unbound) state and
    is left out; see `pt_has_threshold_state`.
    """
    if nu <= 0 or l <= 0:
        raise ValueError("nu and l must be positive")
    top = math.floor(nu)
    if pt_has_threshold_state(nu):
        top -= 1
    return [BAND_BOTTOM - (nu - n) ** 2 / l**2 for n in range(top + 1)]


def pt_has_threshold_state(nu: float) -> bool:
    return float(nu).is_integer()


def predicted_bound_count(nu: float, v: float) -> int:
    """1 + floor(nu*) with the depth renormalized by the drift-dependent mass."""
    bp = solve_boost(v)
    if math.isinf(bp.mass_ratio):
        raise ValueError("mass ratio diverges at the critical velocity")
    return 1 + math.floor(effective_depth(nu, bp.mass_ratio))


def onset_velocity(nu: float) -> float:
    """Smallest drift speed at which the effective depth reaches floor(nu) + 1."""
    target = math.floor(nu) + 1
    ratio = target * (target + 1) / (nu * (nu + 1))
    return 2.0 * math.sqrt(1.0 - 1.0 / ratio**2)
