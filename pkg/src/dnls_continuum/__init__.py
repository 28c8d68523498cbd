"""Continuum limits of long-range discrete NLS lattices: symbols, lattice operators,
interpolation, split-step dynamics, verification checks and an experiment harness."""

from .kernel import (
    Exponential,
    NearestNeighbor,
    PurePower,
    Table,
    beta,
    build_kernel,
    extrapolate_limit,
    lattice_symbol,
    limit_constant_c,
    omega,
    scaling_class,
)
from .lattice import LatticeField, PeriodicLattice, apply_LJ, dft, discrete_energy, discrete_mass, discrete_norm, idft
from .interpolation import ContinuumFunction, continuum_norm, discretize, p_linear, q_constant
from .dynamics import BlowUpError, EvolutionConfig, Trajectory, evolve_continuum, evolve_discrete
from .harness import ExperimentConfig, ReportRow, emit_config, emit_report, parse_config, run_check_suite, run_continuum_limit

__version__ = "0.1.0"
