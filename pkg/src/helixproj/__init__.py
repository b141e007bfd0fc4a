"""Finite configurations in projective Hilbert space that keep their
isometry type under spherical projections, and the matching Gaussian
processes (the sech helix and the exceptional quadruples)."""

from .classify import (ClassificationReport, HelixComponent, QuadrupleComponent, Singleton,
                       Tolerances, admissible_region, classify, classify_covariance,
                       collapse_duplicates, gram_to_metric, helix_gram, is_admissible,
                       orthogonal_components, quadruple_eigenvalues, quadruple_gram,
                       recover_signs)
from .correlation import CorrelationMatrix, spectral_factor, standardize
from .errors import *  # noqa: F401,F403
from .geometry import (Configuration, InvarianceReport, ProjectivePoint, embed_gram,
                       geodesic_distance, spherical_project, verify_projection_invariance)
from .gplab import (ProcessSpec, SamplePaths, check_conditioning_identity, check_time_change,
                    condition_residual, conditioning_multipliers, empirical_covariance,
                    kernel_eval, kernel_matrix, residual_covariance, sample, sample_residual,
                    standardized_kernel)
from .metric import (FiniteMetricSpace, LineEmbedding, QuadrupleClass, check_triangle_equality,
                     classify_quadruple, embed_line, exceptional_quadruple)

__version__ = "0.1.0"
