"""Dissipative cavity implementation: rates, trajectories and a small-N master-equation oracle."""

from .rates import DissipationParams, JumpOperator, dicke_multiplicity, jump_operators, photons_lost
from .hybrid import HybridState
from .trajectories import (
    DissipativeResult,
    EnsembleEstimate,
    NormUnderflowError,
    Trajectory,
    dissipative_correlators,
    read_trajectory_log,
    run_trajectory,
    trajectory_rng,
    write_trajectory_log,
)
from .lindblad import master_equation_oracle
