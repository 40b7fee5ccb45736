from fermi_trap.theory.couplings import (
    EffectiveCouplings,
    InteractionModel,
    ModeCouplings,
    TrapSpec,
)
from fermi_trap.theory.dipole import PhysicalParams
from fermi_trap.theory.fermi_edge import EdgeModel
from fermi_trap.theory.matrix_elements import MatrixElementTable, build_table
from fermi_trap.theory.observables import DensityProfile, FriedelStats

__all__ = [
    # couplings
    "TrapSpec",
    "InteractionModel",
    "ModeCouplings",
    "EffectiveCouplings",
    # matrix elements
    "MatrixElementTable",
    "build_table",
    # observables
    "DensityProfile",
    "FriedelStats",
    # edge and dipole
    "EdgeModel",
    "PhysicalParams",
]
