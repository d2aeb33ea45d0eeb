"""Exact Foldy-Wouthuysen transformation and the Dirac/FW wave-function connection."""

__version__ = "0.1.0"

from .landau import (
    BispinorState,
    EigenRecord,
    ModelParams,
    RadialFunction,
    analytic_spectrum,
    build_dirac_hamiltonian,
    connect_to_fw,
    dirac_eigenstate,
    fw_hamiltonian_closed_form,
    fw_wavefunction,
    renormalized_fw,
)
from .operators import (
    SplitHamiltonian,
    dirac_matrix,
    epsilon_of,
    fw_hamiltonian,
    fw_unitary,
)
from .verification import ResidualReport, compare_spectra, run_suite
