"""Quasispin pairing workbench: invariants, Bethe equations and exact checks."""

from .hilbert import (
    Level,
    LevelScheme,
    LinearOperator,
    Mode,
    QuasispinBasis,
    SchemeError,
    StateVector,
    build_basis,
    full_shell_state,
    pair_number_operator,
    quasispin_generators,
    vacuum_state,
)

__version__ = "0.1.0"
