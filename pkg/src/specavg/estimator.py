"""Exactly invariant spectral regression.

Pipeline: truncate the eigenbasis at D = n^(1/(1+alpha)) (whole eigenspaces
only), estimate coefficients by empirical means, then project each eigenspace
onto the group-invariant subspace. The returned model is invariant by
construction, not approximately.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import GroupKind, GroupSpec, representation_block
from .manifolds import (
    BasisMode,
    EigenIndex,
    ManifoldKind,
    ManifoldSpec,
    TruncatedBasis,
    build_basis_within,
    eval_basis,
)
from .projection import build_constraints, project


@dataclass(frozen=True)
class LabeledDataset:
    """n manifold points with real labels; noise_std is metadata about the
    label noise, not used by the fit."""

    points: np.ndarray
    labels: np.ndarray
    noise_std: float = 0.0

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        labs = np.asarray(self.labels, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty (n, d) array")
        if labs.shape != (pts.shape[0],):
            raise ValueError("labels must be a vector matching the number of points")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(labs))):
            raise ValueError("points and labels must be finite")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass
class OracleCounts:
    """Construction-cost accounting: eigenfunction evaluations plus
    representation-block entries computed during the fit."""

    eigenfunction_evals: int = 0
    repblock_entries: int = 0

    @property
    def total(self) -> int:
        return self.eigenfunction_evals + self.repblock_entries


def cutoff_dimension(n: int, alpha: float) -> int:
    """Truncation level D = floor(n^(1/(1+alpha))), clamped at 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not alpha > 1.0:
        raise ValueError(f"alpha must exceed 1 (smoothness above d/2), got {alpha}")
    cutoff = max(1, math.floor(n ** (1.0 / (1.0 + alpha))))
    # float pow can land just below an exact integer root (64^(1/3) -> 3.999...)
    if (cutoff + 1) ** (1.0 + alpha) <= n * (1.0 + 1e-9):
        cutoff += 1
    return cutoff


def empirical_coefficients(dataset: LabeledDataset, basis: TruncatedBasis) -> np.ndarray:
    """Empirical mean estimator (1/n) sum_i y_i phi(x_i), unbiased for the true
    coefficients under uniform sampling."""
    values = eval_basis(basis, dataset.points)
    return values.T @ dataset.labels / dataset.n


@dataclass(frozen=True)
class SpectralModel:
    """A fitted estimator: coefficients over a truncated basis. Coefficients
    beyond the cutoff are implicitly zero. raw_coefficients keeps the
    pre-projection estimate for diagnostics."""

    basis: TruncatedBasis
    coefficients: np.ndarray
    group: GroupSpec
    cutoff_dim: int
    alpha: float | None = None
    raw_coefficients: np.ndarray | None = None
    oracle_counts: OracleCounts = field(default_factory=OracleCounts)
    feasibility_residual: float = 0.0

    @property
    def total_dim(self) -> int:
        return self.basis.total_dim


def fit(dataset: LabeledDataset, manifold: ManifoldSpec, group: GroupSpec,
        alpha: float | None = None, cutoff_override: int | None = None) -> SpectralModel:
    """Fit the invariant spectral estimator.

    alpha > 1 sets the cutoff schedule D = n^(1/(1+alpha)); cutoff_override
    sets D directly for hyperparameter sweeps (alpha then optional). The basis
    keeps whole eigenspaces with cumulative dimension <= D, at least the
    constant one.
    """
    group.require_acts_on(manifold)
    if dataset.points.shape[1] != manifold.dimension:
        raise ValueError("dataset dimension does not match the manifold")
    if cutoff_override is None:
        if alpha is None:
            raise ValueError("either alpha or cutoff_override is required")
        cutoff = cutoff_dimension(dataset.n, alpha)
    else:
        if cutoff_override < 1:
            raise ValueError("cutoff_override must be >= 1")
        cutoff = cutoff_override
    basis = build_basis_within(manifold, cutoff)
    counts = OracleCounts()
    raw = empirical_coefficients(dataset, basis)
    counts.eigenfunction_evals += dataset.n * basis.total_dim

    projected = np.empty_like(raw)
    worst_residual = 0.0
    for k in range(len(basis.eigenspaces)):
        sl = basis.eigenspace_slice(k)
        blocks = [representation_block(group, g, basis, k) for g in group.generators]
        counts.repblock_entries += len(blocks) * basis.eigenspaces[k].dim ** 2
        result = project(raw[sl], build_constraints(blocks))
        projected[sl] = result.projected
        worst_residual = max(worst_residual, result.residual)

    return SpectralModel(
        basis=basis,
        coefficients=projected,
        group=group,
        cutoff_dim=cutoff,
        alpha=alpha,
        raw_coefficients=raw,
        oracle_counts=counts,
        feasibility_residual=worst_residual,
    )


def predict(model: SpectralModel, x) -> float | np.ndarray:
    """Evaluate the fitted function at a point (d,) or batch (n, d); cost is
    linear in the retained basis size."""
    values = eval_basis(model.basis, x)
    return values @ model.coefficients


def sobolev_norm_sq(coefficients, basis: TruncatedBasis, alpha: float) -> float:
    """Squared smoothness norm sum_j D_lambda(j)^alpha * c_j^2 over the basis."""
    coeffs = np.asarray(coefficients, dtype=np.float64)
    if coeffs.shape != (basis.total_dim,):
        raise ValueError(
            f"expected {basis.total_dim} coefficients, got shape {coeffs.shape}"
        )
    weights = basis.column_cumdims ** alpha
    return float(np.sum(weights * coeffs * coeffs))


def spectral_tail_mass(coefficients, basis: TruncatedBasis, cutoff: int) -> float:
    """Coefficient mass in eigenspaces with cumulative dimension above cutoff."""
    coeffs = np.asarray(coefficients, dtype=np.float64)
    mask = basis.column_cumdims > cutoff
    return float(np.sum(coeffs[mask] ** 2))


# ---------------------------------------------------------------------------
# JSON model document
# ---------------------------------------------------------------------------

def manifold_to_dict(manifold: ManifoldSpec) -> dict:
    return {
        "kind": manifold.kind.value,
        "dimension": manifold.dimension,
        "basis_mode": manifold.basis_mode.value,
    }


def manifold_from_dict(data: dict) -> ManifoldSpec:
    return ManifoldSpec(
        ManifoldKind(data["kind"]),
        int(data["dimension"]),
        BasisMode(data.get("basis_mode", "full_fourier")),
    )


def group_to_dict(group: GroupSpec) -> dict:
    return {
        "kind": group.kind.value,
        "parameter": group.parameter,
        "declared_order": group.declared_order,
    }


def group_from_dict(data: dict) -> GroupSpec:
    kind = GroupKind(data["kind"])
    parameter = int(data["parameter"])
    if kind is GroupKind.SIGN_FLIPS:
        built = GroupSpec.sign_flips(parameter)
    elif kind is GroupKind.COORDINATE_PERMUTATIONS:
        built = GroupSpec.coordinate_permutations(parameter)
    else:
        built = GroupSpec.cyclic_rotation(parameter)
    declared = int(data.get("declared_order", built.declared_order))
    if declared == 1 and built.declared_order != 1:
        return GroupSpec.trivial_on_torus(parameter)
    if declared != built.declared_order:
        raise ValueError(f"declared_order {declared} does not match {kind.value}({parameter})")
    return built


def model_to_document(model: SpectralModel) -> dict:
    """Lossless JSON document; floats survive round-trips at full precision
    because Python serializes them with shortest-exact repr."""
    entries = [
        {
            "frequencies": list(member.frequencies),
            "trig_pattern": list(member.pattern_names()),
            "coefficient": float(coeff),
        }
        for member, coeff in zip(model.basis.members, model.coefficients)
    ]
    return {
        "type": "spectral",
        "manifold": manifold_to_dict(model.basis.manifold),
        "group": group_to_dict(model.group),
        "alpha": model.alpha,
        "cutoff_dim": model.cutoff_dim,
        "coefficients": entries,
    }


def model_from_document(data: dict) -> SpectralModel:
    if data.get("type") != "spectral":
        raise ValueError(f"not a spectral model document: type={data.get('type')!r}")
    manifold = manifold_from_dict(data["manifold"])
    group = group_from_dict(data["group"])
    cutoff = int(data["cutoff_dim"])
    basis = build_basis_within(manifold, cutoff)
    index_of = {member: i for i, member in enumerate(basis.members)}
    coeffs = np.zeros(basis.total_dim)
    for entry in data["coefficients"]:
        idx = EigenIndex.from_names(entry["frequencies"], entry["trig_pattern"])
        if idx not in index_of:
            raise ValueError(f"coefficient index {idx} not in the rebuilt basis")
        coeffs[index_of[idx]] = float(entry["coefficient"])
    alpha = data.get("alpha")
    return SpectralModel(
        basis=basis,
        coefficients=coeffs,
        group=group,
        cutoff_dim=cutoff,
        alpha=None if alpha is None else float(alpha),
    )


def model_to_json(model: SpectralModel, *, indent: int | None = 2) -> str:
    return json.dumps(model_to_document(model), indent=indent)


def model_from_json(text: str) -> SpectralModel:
    return model_from_document(json.loads(text))
