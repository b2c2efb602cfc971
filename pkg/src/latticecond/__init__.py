"""Band structure and quantized transverse conductivity of a spin-orbit
coupled electron on a square lattice in an in-plane electric field."""

__version__ = "0.1.0"

from .bands import BandData, SolveError, compute_bands, compute_bands_many, k_grid, px_mean
from .conductivity import (
    ConductivityCurve,
    estimate_sigma0,
    find_plateaus,
    quantize,
    sigma_xy,
    sweep,
)
from .eigensolve import ConvergenceError, DegeneracyWarning, EigenResult, lowest_eigenpairs
from .hamiltonian import (
    BasisIndex,
    HamiltonianMatrix,
    build,
    f_kernel,
    g_kernel,
    matrix_element,
    quadrature_element,
    quadrature_matrix,
)
from .model import InvalidParameterError, ModelParams, derive_geometry, validate
from .scattering import ScatteringInput, reflection_probability, reflection_ratio, theta_sweep
from .verification import VerificationReport, run_verification

__all__ = [
    "BandData",
    "BasisIndex",
    "ConductivityCurve",
    "ConvergenceError",
    "DegeneracyWarning",
    "EigenResult",
    "HamiltonianMatrix",
    "InvalidParameterError",
    "ModelParams",
    "ScatteringInput",
    "SolveError",
    "VerificationReport",
    "build",
    "compute_bands",
    "compute_bands_many",
    "derive_geometry",
    "estimate_sigma0",
    "f_kernel",
    "find_plateaus",
    "g_kernel",
    "k_grid",
    "lowest_eigenpairs",
    "matrix_element",
    "px_mean",
    "quadrature_element",
    "quadrature_matrix",
    "quantize",
    "reflection_probability",
    "reflection_ratio",
    "run_verification",
    "sigma_xy",
    "sweep",
    "theta_sweep",
    "validate",
]
