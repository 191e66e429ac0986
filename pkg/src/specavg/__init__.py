"""Exactly group-invariant regression on compact manifolds.

Spectral estimator: truncated Laplace-Beltrami coefficients projected
eigenspace-by-eigenspace onto the invariant subspace, plus kernel ridge
baselines and an experiment harness.
"""

from .estimator import (
    LabeledDataset,
    SpectralModel,
    cutoff_dimension,
    empirical_coefficients,
    fit,
    model_from_json,
    model_to_json,
    predict,
    sobolev_norm_sq,
)
from .groups import (
    GroupElement,
    GroupKind,
    GroupSpec,
    Permutation,
    RepresentationBlock,
    Rotation,
    SignFlip,
    apply_group_element,
    closure,
    representation_block,
    verify_representation,
)
from .kernels import (
    GroupAveragedKernel,
    KrrModel,
    TruncatedSobolevKernel,
    VonMisesKernel,
    kernel_eval,
    krr_fit,
    krr_predict,
)
from .manifolds import (
    BasisMode,
    EigenIndex,
    ManifoldKind,
    ManifoldSpec,
    TruncatedBasis,
    build_basis,
    canonicalize,
    eigenvalue_of,
    eval_basis,
)
from .projection import (
    ConstraintStack,
    ProjectionResult,
    averaging_projector,
    build_constraints,
    project,
)

__version__ = "0.1.0"

__all__ = [
    "BasisMode", "ConstraintStack", "EigenIndex", "GroupAveragedKernel",
    "GroupElement", "GroupKind", "GroupSpec", "KrrModel", "LabeledDataset",
    "ManifoldKind", "ManifoldSpec", "Permutation", "ProjectionResult",
    "RepresentationBlock", "Rotation", "SignFlip", "SpectralModel",
    "TruncatedBasis", "TruncatedSobolevKernel", "VonMisesKernel",
    "apply_group_element", "averaging_projector", "build_basis",
    "build_constraints", "canonicalize", "closure", "cutoff_dimension",
    "eigenvalue_of", "empirical_coefficients", "eval_basis", "fit",
    "kernel_eval", "krr_fit", "krr_predict", "model_from_json",
    "model_to_json", "predict", "project", "representation_block",
    "sobolev_norm_sq", "verify_representation",
]
