"""Renormalized-energy toolkit for the truncated cubic wave flow on T^3.

Spectral fields and measures live in `spectral` and `gaussian`, the
truncated Hamiltonian flow in `dynamics`, norms in `besov`, the
renormalized energy and its derivative in `energy`, Monte Carlo
estimators for the weighted measures in `measure`, the mean-shift
variational bound in `variational`, and the experiment runner in `cli`.
"""

from .besov import (
    CANONICAL,
    LEMMAS,
    BesovParams,
    besov_norm,
    estimate_ratio,
    holder,
    ratio_survey,
    sobolev_norm,
    sobolev_pair_norm,
)
# the flow energy function stays module-qualified (wrlb.dynamics.energy)
# so the name does not shadow the wrlb.energy submodule
from .dynamics import (
    FlowParams,
    PhasePoint,
    approximation_gap,
    evolve,
    linear_propagator,
    sobolev_pair_gap,
    step,
)
from .energy import (
    DerivativeReport,
    EnergyReport,
    audit_ratio,
    energy_derivative,
    estimate_functional,
    full_energy,
    interaction,
)
from .errors import (
    BadOrder,
    BadShape,
    DegenerateSet,
    Diverged,
    GridTooSmall,
    InsufficientSamples,
    WrlbError,
)
from .gaussian import (
    DecayFit,
    MeasureSpec,
    RenormContext,
    kakutani_partial_sum,
    mixed_product,
    sample,
    sample_batch,
    sample_u_batch,
    sigma_n,
    spectral_decay_fit,
    wick_square,
)
from .measure import (
    BallSet,
    EnsembleStats,
    density_moments,
    interaction_convergence,
    merge_all,
    partition_function,
    pushforward_mass,
)
from .spectral import (
    SpectralField,
    constant,
    cosine,
    cubic_truncated,
    from_grid,
    l2_norm_sq,
    load_snapshot,
    multiply,
    pairing,
    partial_derivative,
    project,
    riesz,
    save_snapshot,
    sine,
    to_grid,
    zeros,
)
from .variational import (
    ShiftField,
    interaction_gradient,
    minimize_shift,
    shift_gradient,
    shift_objective,
)

__version__ = "0.1.0"

__all__ = [
    "BadOrder",
    "BadShape",
    "BallSet",
    "BesovParams",
    "CANONICAL",
    "DecayFit",
    "DegenerateSet",
    "DerivativeReport",
    "Diverged",
    "EnergyReport",
    "EnsembleStats",
    "FlowParams",
    "GridTooSmall",
    "InsufficientSamples",
    "LEMMAS",
    "MeasureSpec",
    "PhasePoint",
    "RenormContext",
    "ShiftField",
    "SpectralField",
    "WrlbError",
    "approximation_gap",
    "audit_ratio",
    "besov_norm",
    "constant",
    "cosine",
    "cubic_truncated",
    "density_moments",
    "energy_derivative",
    "estimate_functional",
    "estimate_ratio",
    "evolve",
    "from_grid",
    "full_energy",
    "holder",
    "interaction",
    "interaction_convergence",
    "interaction_gradient",
    "kakutani_partial_sum",
    "l2_norm_sq",
    "linear_propagator",
    "load_snapshot",
    "merge_all",
    "minimize_shift",
    "mixed_product",
    "multiply",
    "pairing",
    "partial_derivative",
    "partition_function",
    "project",
    "pushforward_mass",
    "ratio_survey",
    "riesz",
    "sample",
    "sample_batch",
    "sample_u_batch",
    "save_snapshot",
    "shift_gradient",
    "shift_objective",
    "sigma_n",
    "sine",
    "sobolev_norm",
    "sobolev_pair_gap",
    "sobolev_pair_norm",
    "spectral_decay_fit",
    "step",
    "to_grid",
    "wick_square",
    "zeros",
]
