"""Haar unitary sampling and the sampling biases of eigenangle neighbor spacings."""

from .experiments import (
    Cell,
    ExperimentReport,
    iter_spectra,
    run_lazy_scan,
    run_naive_qr_demo,
    run_point_bias_demo,
    run_spacing_histogram,
    run_table1,
    run_table2,
    run_wrap_constant,
)
from .haar import (
    DegenerateFactorizationError,
    PhaseCorrection,
    phase_correction,
    sample_haar_unitary,
    sample_naive_unitary,
)
from .linalg import (
    ConvergenceError,
    EigenvalueSet,
    NonFiniteMatrixError,
    NotUnitaryError,
    QRFactors,
    householder_qr,
    sample_ginibre,
    unitary_eigenvalues,
)
from .rng import RandomStream
from .spacings import (
    eigenangles,
    lazy_mean,
    normalized_spacings,
    select_gap_containing_point,
    select_gap_uniform_index,
    size_biased_mean,
)
from .stats import StatAccumulator

__version__ = "0.1.0"
