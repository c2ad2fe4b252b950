"""
Complete interpolating sequences in radial Fock-type spaces.

The weight :math:`\\varphi(r) = (\\log^+ r)^\\alpha`, ``1 < alpha <= 2`` (or
a user-supplied radial weight) defines the space of entire functions with
:math:`\\int|f|^p e^{-p\\varphi}dm < \\infty`.  The package builds the
reference sequence of the space, classifies candidate sequences as
complete interpolating, evaluates canonical products and the interpolation
series, computes densities, and checks Riesz-basis behaviour of normalised
reproducing kernels for ``p = 2``.

Submodules
----------
numerics   log-scale arithmetic, Laplace-type quadrature, root finding
weight     radial weights and the derived calculus of psi
reference  reference radii, monomial and evaluation norms
geometry   point sequences, distances, the classifier, densities, constructions
product    canonical products and interpolation
frame      kernels, Gram matrices, transfer matrices, the p = inf reduction
io         CSV and JSON input/output
cli        the ``fockcis`` command
"""

__version__ = "0.1.0"

from .exceptions import (BracketError, ConfigError, EvaluationError, FockError,
                         HorizonError, QuadratureError, SequenceError,
                         SpectralError, WeightError)
from .numerics import LogComplex, LogReal
from .weight import RadialWeight, SpaceParams, audit_regularity, psi_calculus
from .reference import (ReferenceSequence, build_reference, ell,
                        log_evaluation_norm, log_monomial_norm)
from .geometry import (ClassificationReport, ClassifyOptions, LogPoint,
                       PointSequence, classify, complete_to_cis, extract_cis,
                       perturbed_reference, phi_density, reference_points)
from .product import (CanonicalProduct, CoefficientVector, interpolant_norm,
                      interpolate, log_G)
from .frame import (KernelTable, RieszReport, TransferMatrix, classify_infty,
                    gram, gram_trend, kernel, kernel_table, kernel_table_for,
                    riesz_bounds, transfer_matrix)

__all__ = [
    "__version__",
    "FockError", "BracketError", "QuadratureError", "WeightError", "HorizonError",
    "SequenceError", "ConfigError", "EvaluationError", "SpectralError",
    "LogReal", "LogComplex",
    "RadialWeight", "SpaceParams", "psi_calculus", "audit_regularity",
    "ReferenceSequence", "build_reference", "ell", "log_monomial_norm",
    "log_evaluation_norm",
    "LogPoint", "PointSequence", "ClassifyOptions", "ClassificationReport",
    "classify", "phi_density", "complete_to_cis", "extract_cis",
    "reference_points", "perturbed_reference",
    "CanonicalProduct", "CoefficientVector", "log_G", "interpolate", "interpolant_norm",
    "KernelTable", "TransferMatrix", "RieszReport", "kernel_table", "kernel_table_for",
    "kernel", "gram", "gram_trend", "riesz_bounds", "transfer_matrix", "classify_infty",
]
