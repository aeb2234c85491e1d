"""Photon transport through an atom chain coupled to a photonic-crystal waveguide.

Two independent models of the same system live side by side and are used to
cross-validate each other:

* a spin model, where the guided field is eliminated in favour of an effective
  non-Hermitian Hamiltonian on a two-excitation truncated atomic Hilbert space
  (:mod:`wqed.hamiltonian`, :mod:`wqed.dynamics`), with output fields rebuilt
  from the atomic coherences (:mod:`wqed.observables`);
* a linear-optics transfer-matrix model where each atom is a frequency
  dependent point scatterer (:mod:`wqed.transfer_matrix`).

Closed-form perturbative predictions (:mod:`wqed.effective`), subradiant gate
state construction (:mod:`wqed.subradiant`) and a config-driven experiment
runner with CLI (:mod:`wqed.scenarios`, :mod:`wqed.cli`) complete the package.

All rates are expressed in units of the free-space decay rate of a single
atom, all times in the inverse of that rate, and all lengths in units of the
lattice constant.
"""

__version__ = "0.1.0"

from wqed.params import PhysicalParams, DriveSpec, validate_params
from wqed.basis import TwoExcitationBasis, build_basis

__all__ = [
    "PhysicalParams",
    "DriveSpec",
    "validate_params",
    "TwoExcitationBasis",
    "build_basis",
    "__version__",
]
