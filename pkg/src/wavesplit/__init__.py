"""Engineered chains that split a localized wave packet into two mirror copies."""

from .engineer import (
    SolverConfig,
    SolverResult,
    TargetSpectrum,
    engineer_splitting,
    newton_solve,
    spectral_jacobian,
    target_spectrum,
    verify_splitting,
)
from .lattice import (
    ChainSpec,
    CouplingPattern,
    SpectralDecomposition,
    build_hopping_matrix,
    check_mirror_symmetry,
    eigendecompose,
    eigenvector_parity,
    pst_couplings,
)
from .walk import ObservableSeries, propagator, transfer_fidelity

__version__ = "0.1.0"
