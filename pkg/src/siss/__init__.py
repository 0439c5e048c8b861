"""Reconstruction of shift-invariant signals from random Radon samples."""

__version__ = "0.1.0"

from .generator import (Direction, Generator, RadonProfile, b2_eval, b2_tensor_generator,
                        phi_eval, radon_profile_closed_form, radon_quadrature_oracle)
from .lattice import (LatticeGrid, Signal, StabilityConstants, build_lattice, eval_signal,
                      gram_matrix, l2_norm_on_domain, reference_signal, stability_constants)
from .radon import ProjectedSignal, project_signal, radon_sample
from .reconstruction import (RankDeficientError, ReconstructionResult, SamplingMatrix,
                             build_sampling_matrix, reconstruct, reconstruction_functions,
                             solve_coefficients, stability_check)
from .sampling import (BoundedDensity, SamplingSet, TruncatedGaussianDensity, UniformDensity,
                       draw_samples)
from .stability import (BoundConstants, StabilityReport, bernstein_epsilon, bound_constants,
                        c_phi, frame_constants, monte_carlo_stability)

__all__ = [
    "BoundConstants",
    "BoundedDensity",
    "Direction",
    "Generator",
    "LatticeGrid",
    "ProjectedSignal",
    "RadonProfile",
    "RankDeficientError",
    "ReconstructionResult",
    "SamplingMatrix",
    "SamplingSet",
    "Signal",
    "StabilityConstants",
    "StabilityReport",
    "TruncatedGaussianDensity",
    "UniformDensity",
    "b2_eval",
    "b2_tensor_generator",
    "bernstein_epsilon",
    "bound_constants",
    "build_lattice",
    "build_sampling_matrix",
    "c_phi",
    "draw_samples",
    "eval_signal",
    "frame_constants",
    "gram_matrix",
    "l2_norm_on_domain",
    "monte_carlo_stability",
    "phi_eval",
    "project_signal",
    "radon_profile_closed_form",
    "radon_quadrature_oracle",
    "radon_sample",
    "reconstruct",
    "reconstruction_functions",
    "reference_signal",
    "solve_coefficients",
    "stability_check",
    "stability_constants",
]
