"""Entanglement degradation under one-sided dissipative Landau-Zener noise.

Simulation library plus the ``lz-dissipate`` command line runner: builds the
rotated-frame generator of the driven, damped qubit, propagates the bipartite
state by two independent routes (Bloch components and full 4x4 master
equation), evaluates negativity, and emits sweep experiments as CSV/JSON.
"""

from .bath import BathParams, QuadratureWarning, kossakowski_rate, lamb_shift_coefficient, mean_occupation, spectral_density
from .dynamics import (
    PauliState,
    SlowRegimeWarning,
    SolverError,
    SolverStats,
    Trajectory,
    evolve_full_master,
    evolve_numeric,
    evolve_slow_analytic,
    schmidt_initial,
)
from .entanglement import (
    NegativityResult,
    SlowDecayT0,
    assemble_density,
    negativity,
    negativity_slow_T0,
    pauli_project,
    state_negativity,
    survival_time,
    xstate_pt_eigenvalues,
)
from .generator import (
    GeneratorCoefficients,
    TimescaleReport,
    apply_generator,
    bloch_matrix,
    coefficients,
    slow_limit_coefficients,
    timescales,
)
from .linalg import hermitian_eigenvalues, kron, partial_transpose_second
from .lz_model import (
    LZParams,
    gap,
    hamiltonian_lab,
    mixing_angle,
    mixing_angle_rate,
    rotation,
    transition_frequencies,
)

__version__ = "0.1.0"
