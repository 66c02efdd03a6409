"""Deterministic particle / finite-element solver for dilute polymeric fluids.

A macroscopic incompressible flow (P1 velocity on a refined triangle
mesh, P1 pressure on the coarse mesh) is coupled to per-node ensembles of
dumbbell configuration vectors evolved by an energy-stable implicit
particle scheme.  Hot kernels run in a compiled extension when available,
with a NumPy fallback selected at import (see ``polyblob.backend``).
"""

from .backend import backend_name
from .coupling import ParticleField, SimConfig, full_time_step
from .energy import discrete_free_energy, free_energy_gradient, step_objective
from .fem import MacroState, MeshPair, build_mesh_pair, streamfunction
from .microstep import (
    MicroStepConfig,
    StepResult,
    deformation_update,
    implicit_gradient_step,
    sde_oracle_step,
)
from .potentials import BandwidthPolicy, Kernel, Potential, select_bandwidth
from .stress import StressField, node_stress, project_stress

__version__ = "0.1.0"

__all__ = [
    "BandwidthPolicy",
    "Kernel",
    "MacroState",
    "MeshPair",
    "MicroStepConfig",
    "ParticleField",
    "Potential",
    "SimConfig",
    "StepResult",
    "StressField",
    "backend_name",
    "build_mesh_pair",
    "deformation_update",
    "discrete_free_energy",
    "free_energy_gradient",
    "full_time_step",
    "implicit_gradient_step",
    "node_stress",
    "project_stress",
    "sde_oracle_step",
    "select_bandwidth",
    "step_objective",
    "streamfunction",
]
