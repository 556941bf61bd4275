"""Geminal density matrices on one-dimensional lattice models."""

from .basis import Configuration, GeminalBasis, SpinOrbitalBasis, pair_from_index, pair_index, reduced_configuration
from .continuation import adiabatic_energy, ground_state_search, scan_curves
from .dynamics import Schedule, propagate_coupled, propagate_gdm, sudden_density
from .gdm import GDM, CIVector, check_nrep, expectation, gdm_from_ci
from .model import LatticeModel, build_model, default_model, geminal_hamiltonian, load_model
from .oracle import fci_propagate, fci_solve

__version__ = "0.1.0"

__all__ = [
    "CIVector",
    "Configuration",
    "GDM",
    "GeminalBasis",
    "LatticeModel",
    "Schedule",
    "SpinOrbitalBasis",
    "adiabatic_energy",
    "build_model",
    "check_nrep",
    "default_model",
    "expectation",
    "fci_propagate",
    "fci_solve",
    "gdm_from_ci",
    "geminal_hamiltonian",
    "ground_state_search",
    "load_model",
    "pair_from_index",
    "pair_index",
    "propagate_coupled",
    "propagate_gdm",
    "reduced_configuration",
    "scan_curves",
    "sudden_density",
]
