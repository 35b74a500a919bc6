"""Equilibration of coarse-grained initial states in a chaotic XYZ spin chain."""

from .analysis import (
    BoundReport,
    DosHistogram,
    EquilibrationReport,
    FluctuationSignal,
    LdosHistogram,
    PowerLawFit,
    analyze_state,
    check_fluctuation_bound,
    dos_histogram,
    effective_dimension,
    equilibration_time,
    evolve_state,
    first_decay_time,
    fit_power_law,
    ldos,
    time_signal,
)
from .errors import (
    DomainError,
    EigensolverError,
    InsufficientDataError,
    NeverCrossedError,
    NoDynamicsError,
    ResourceLimitError,
)
from .hamiltonian import (
    DEFAULT_DIM_CAP,
    DEFAULT_PARAMS,
    HamiltonianSpec,
    Spectrum,
    build_hamiltonian,
    diagonalize,
    scan_degenerate_gaps,
)
from .observables import Observable, build_magnetization, expand_in_energy_basis, to_energy_basis
from .states import (
    Case,
    CoarseGrainedSpec,
    Direction,
    build_initial_state,
    build_z_basis_state,
    rotate_to_direction,
)

__version__ = "0.1.0"
