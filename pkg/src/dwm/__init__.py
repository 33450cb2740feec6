"""Bound states and resonances of drifting potential wells on a tight-binding lattice."""
from .boost import (
    BeyondCriticalVelocity,
    BoostParameters,
    boosted_initial_state,
    comoving_boost,
    dispersion,
    effective_depth,
    momentum_potential,
    momentum_potential_extrema,
    solve_boost,
)
from .core import (
    Absorbing,
    Harmonic,
    LatticeModel,
    Open,
    PoschlTeller,
    PotentialSpec,
    Tabulated,
    WaveState,
    inner_product,
    localized_fraction,
    norm_sq,
    parity_score,
    participation_ratio,
    sample_potential,
)
from .dynamics import (
    Adaptive,
    EvolutionConfig,
    Fixed,
    TrajectoryRecord,
    estimate_lifetime,
    evolve,
    harmonic_ground_state,
    radiation_tail_norm,
    rhs,
    rk4_step,
)
from .spectral import (
    SpectrumReport,
    TridiagonalHamiltonian,
    assemble_hamiltonian,
    classify_bound_states,
    eigendecompose,
    predicted_bound_count,
    pt_analytic_levels,
    sturm_count_below,
)

__version__ = "0.1.0"
