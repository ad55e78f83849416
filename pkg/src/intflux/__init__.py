"""Integer-flux vector fields on the unit ball.

Generators and flux quadrature for fields whose flux through every admissible
cube boundary is an integer multiple of a fixed unit; translated cubic
decompositions separating quantized singularities into small bad cubes; a
flux-preserving regularization that is smooth on good cubes and exactly
radial on bad ones; mass-minimal integer connections of the singularities
with primal-dual optimality certificates; and the logarithmic-pairing
asymptotics that detect the quantization order.
"""

from .asymptotics import (LogTestFunction, grad_norm_ln, hoelder_bound_check,
                          lp_norm, pairing_growth)
from .connection import (Current1, CurrentSegment, DualCertificate,
                         boundary_residual, certify, dual_value,
                         greedy_connection, nearest_boundary,
                         optimal_connection)
from .decomposition import (CubeDecomposition, CubeLattice, SweepResult,
                            TranslationChoice, bad_volume_sweep, build_lattice,
                            classify, decompose, select_translation)
from .errors import (CertificateInvalid, FieldDomainError, GridRangeError,
                     IntFluxError, InvalidInput, NonZeroTotalFlux,
                     NormEstimateDiverged, NoValidTranslation,
                     QuadratureIllConditioned, SolverFailure)
from .fields import (ConstantBackground, ConstantMap, CoulombField, DField,
                     Field, FieldConvention, HedgehogMap, LinearField,
                     MollifiedCoulombField, SampledField, Singularity,
                     SwirlBackground, coulomb_superposition, d_field,
                     eval_field, sample_field)
from .flux import (Cube, FluxProfile, ScanReport, admissible_radius, cube_flux,
                   divergence_free_check, flux_profile, integer_flux_scan,
                   mollified_divergence)
from .quadrature import QuadratureSpec
from .regularize import (Boundary1Form, CubeExtension, RadialExtension,
                         RegularizedField, approximation_error, assemble,
                         gauge_fix, harmonic_extend, radial_extend,
                         restrict_to_skeleton, smooth_skeleton)
from .serialization import (load_current, load_field, load_singularities,
                            save_certificate, save_current, save_current_csv,
                            save_decomposition, save_field, save_json,
                            save_scan, save_singularities, save_sweep,
                            save_table)

__version__ = "0.1.0"

__all__ = [
    "LogTestFunction", "grad_norm_ln", "hoelder_bound_check", "lp_norm",
    "pairing_growth",
    "Current1", "CurrentSegment", "DualCertificate", "boundary_residual",
    "certify", "dual_value", "greedy_connection", "nearest_boundary",
    "optimal_connection",
    "CubeDecomposition", "CubeLattice", "SweepResult", "TranslationChoice",
    "bad_volume_sweep", "build_lattice", "classify", "decompose",
    "select_translation",
    "CertificateInvalid", "FieldDomainError", "GridRangeError", "IntFluxError",
    "InvalidInput", "NonZeroTotalFlux", "NormEstimateDiverged",
    "NoValidTranslation", "QuadratureIllConditioned", "SolverFailure",
    "ConstantBackground", "ConstantMap", "CoulombField", "DField", "Field",
    "FieldConvention", "HedgehogMap", "LinearField", "MollifiedCoulombField",
    "SampledField", "Singularity", "SwirlBackground", "coulomb_superposition",
    "d_field", "eval_field", "sample_field",
    "Cube", "FluxProfile", "ScanReport", "admissible_radius", "cube_flux",
    "divergence_free_check", "flux_profile", "integer_flux_scan",
    "mollified_divergence",
    "QuadratureSpec",
    "Boundary1Form", "CubeExtension", "RadialExtension", "RegularizedField",
    "approximation_error", "assemble", "gauge_fix", "harmonic_extend",
    "radial_extend", "restrict_to_skeleton", "smooth_skeleton",
    "load_current", "load_field", "load_singularities", "save_certificate",
    "save_current", "save_current_csv", "save_decomposition", "save_field",
    "save_json", "save_scan", "save_singularities", "save_sweep", "save_table",
    "__version__",
]
