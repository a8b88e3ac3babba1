"""Resonant-cavity preparation and analysis of multi-component coherent superpositions."""

from .errors import (
    ConfigError,
    ConstraintError,
    GridTooLargeError,
    NumericalGuardError,
    StepSizeError,
    TruncationError,
    ZeroProjectionError,
)
from .fock import (
    CoherentSuperposition,
    DensityMatrix,
    FieldState,
    coherent_state,
    displacement_element,
    overlap,
    superposition_to_density,
    to_density,
)
from .jc import AtomPassage, approximate_superposition, multi_atom_sequence, project_atom
from .phase_space import GridSpec, evaluate_grid, q_function, wigner, wigner_superposition

__version__ = "0.1.0"
