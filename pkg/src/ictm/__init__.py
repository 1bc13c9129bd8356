"""Iterative convolution-thresholding for n-phase variational image segmentation.

The segmentation energy is a fidelity term (one of four pluggable models)
plus a heat-kernel approximation of the total interface length.  The solver
alternates closed-form parameter updates, spectral heat-kernel convolution
of the phase indicators, and pointwise argmin thresholding; the total
energy is guaranteed not to increase, which the solver can verify at run
time.
"""

from .fields import (
    GridSpec,
    LabelField,
    ScalarField,
    changed_pixels,
    indicator,
    normalize_image,
)
from .kernels import (
    ConvOperator,
    DiskKernel,
    GaussianFilter,
    HeatKernel,
    KernelSpec,
    build_operator,
    convolve,
)
from .metrics import SegScore, jaccard, perimeter_estimate, total_energy
from .models import (
    ChanVese,
    FidelityModel,
    LocalGlobalFitting,
    LocalIntensityFitting,
    LocallyStatistical,
)
from .solver import (
    EnergyDecayViolation,
    IterationRecord,
    PhiField,
    SolverParams,
    SolverTrace,
    compute_phi,
    regularizer_energy,
    solve,
    threshold,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "ScalarField",
    "LabelField",
    "indicator",
    "normalize_image",
    "changed_pixels",
    "HeatKernel",
    "GaussianFilter",
    "DiskKernel",
    "KernelSpec",
    "ConvOperator",
    "build_operator",
    "convolve",
    "FidelityModel",
    "ChanVese",
    "LocalIntensityFitting",
    "LocalGlobalFitting",
    "LocallyStatistical",
    "SolverParams",
    "SolverTrace",
    "IterationRecord",
    "PhiField",
    "compute_phi",
    "threshold",
    "regularizer_energy",
    "solve",
    "EnergyDecayViolation",
    "SegScore",
    "jaccard",
    "perimeter_estimate",
    "total_energy",
    "__version__",
]
