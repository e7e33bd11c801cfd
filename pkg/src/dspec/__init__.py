"""dspec: distorted-Fourier spectral toolkit for radial Schrodinger operators.

Capabilities: continuum eigenfunctions of -Delta + V by partial waves, the
distorted Fourier transform they diagonalize, singular spectral measures of
the nonlinear pairing (principal-value / Dirac extraction), dyadic bilinear
operator benchmarks, and quadratic NLS evolution in the distorted frame.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import GuardError, ToolkitWarning
from .grids import KGrid, RadialGrid, composite_weights, gauss_legendre
from .cutoffs import DyadicCutoffFamily, bump, smooth_step
from .potential import (DecayReport, RadialPotential, SpectralDiagnostic,
                        decay_moments, detect_bound_states, eval_potential)
from .radialwave import (EigenfunctionTable, PartialWaveSolution,
                         assemble_eigenfunction, build_eigenfunction_table,
                         extract_g0, extract_psi1, g0_partial_wave,
                         lippmann_schwinger_residual, psi1_field,
                         solve_partial_wave, suggest_l_max)
from .dft import (DecayScanResult, ProfileGrid, SpectralProfile, apply_H,
                  decay_scan, flat_forward, flat_inverse, forward_dft,
                  inverse_dft, linear_propagate, wave_operator_apply)
from .nsd import (CollinearConfig, NsdSample, SingularFit, building_block,
                  building_block_closed_form, building_block_expansion,
                  fit_singular_structure, mu2_sample, mu3_sample,
                  nu1_regularized, product_route_identity, radial_convolution)
from .bilinear import (AnnulusOperatorSpec, OperatorNormEstimate, PhasePoint,
                       apply_annulus_operator, estimate_operator_scaling,
                       lp_project, phase_algebra, phase_identity_residuals,
                       sample_near_diagonal, spectral_norm)
from .evolve import (BootstrapReport, EvolveConfig, NormTrace, Trajectory,
                     bootstrap_report, gaussian_data, integrate_profile,
                     profile_norms, split_step, window_data)
from .cache import file_hash, load_table, save_table, table_header
from .acceptance import CriterionResult, run_all

__all__ = [
    "__version__",
    "GuardError", "ToolkitWarning",
    "KGrid", "RadialGrid", "composite_weights", "gauss_legendre",
    "DyadicCutoffFamily", "bump", "smooth_step",
    "DecayReport", "RadialPotential", "SpectralDiagnostic", "decay_moments",
    "detect_bound_states", "eval_potential",
    "EigenfunctionTable", "PartialWaveSolution", "assemble_eigenfunction",
    "build_eigenfunction_table", "extract_g0", "extract_psi1",
    "g0_partial_wave", "lippmann_schwinger_residual", "psi1_field",
    "solve_partial_wave", "suggest_l_max",
    "DecayScanResult", "ProfileGrid", "SpectralProfile", "apply_H",
    "decay_scan", "flat_forward", "flat_inverse", "forward_dft",
    "inverse_dft", "linear_propagate", "wave_operator_apply",
    "CollinearConfig", "NsdSample", "SingularFit", "building_block",
    "building_block_closed_form", "building_block_expansion",
    "fit_singular_structure", "mu2_sample", "mu3_sample", "nu1_regularized",
    "product_route_identity", "radial_convolution",
    "AnnulusOperatorSpec", "OperatorNormEstimate", "PhasePoint",
    "apply_annulus_operator", "estimate_operator_scaling", "lp_project",
    "phase_algebra", "phase_identity_residuals", "sample_near_diagonal",
    "spectral_norm",
    "BootstrapReport", "EvolveConfig", "NormTrace", "Trajectory",
    "bootstrap_report", "gaussian_data", "integrate_profile",
    "profile_norms", "split_step", "window_data",
    "file_hash", "load_table", "save_table", "table_header",
    "CriterionResult", "run_all",
]
