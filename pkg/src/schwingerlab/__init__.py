"""Momentum-space lattice laboratory for the massive Schwinger model.

Builds gauge-invariant sector bases and Hamiltonians, locates the theta=pi
critical point by finite-size scaling, and reruns the computation through a
small simulated quantum pipeline (three-qubit ansaetze, shot noise, a
synthetic device noise model, readout mitigation, and zero-noise
extrapolation).
"""

from .params import InvalidSector, LatticeParams, sector_index, sector_values
from .fock import FermionConfig, apply_lgt, apply_parity, translation_eigenvalue
from .basis import (
    EmptyBasis,
    GaugeInvariantState,
    OrbitFamily,
    SectorBasis,
    SectorState,
    build_sector_basis,
    default_rep_configs,
    enumerate_families,
    orbit_state,
)
from .hamiltonian import (
    BasisMismatch,
    DimTooLarge,
    HamiltonianMatrix,
    TruncatedHamiltonian,
    build_hamiltonian,
    hamiltonian_for,
    matrix_element_h0,
    matrix_element_h1,
    truncate,
    write_matrix_csv,
)

__version__ = "0.1.0"
