"""Kernel ridge regression baselines.

The plain periodic (von Mises) kernel gives the non-invariant baseline; group
averaging the kernel over the full closure gives the invariant-but-expensive
one, costing |G| kernel sweeps per Gram matrix. The truncated smoothness
kernel is the finite approximation of the spectral RKHS kernel
sum D_lambda^(-alpha) phi(x) phi(y).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .estimator import (
    LabeledDataset,
    group_from_dict,
    group_to_dict,
    manifold_from_dict,
    manifold_to_dict,
)
from .groups import DEFAULT_CLOSURE_CAP, GroupSpec, apply_group_element
from .manifolds import ManifoldSpec, TruncatedBasis, _as_points, build_basis, eval_basis


@dataclass(frozen=True)
class VonMisesKernel:
    """Product periodic kernel exp(eta * sum_i cos(scale*(x_i - y_i)));
    positive semidefinite as a product of 1-d periodic kernels."""

    eta: float
    manifold: ManifoldSpec

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError("bandwidth eta must be positive")


@dataclass(frozen=True)
class TruncatedSobolevKernel:
    """Finite section of the spectral smoothness kernel; the dropped tail is
    bounded by sum_{D_lambda > D} D_lambda^(-alpha) times the per-point basis
    bound squared."""

    basis: TruncatedBasis
    alpha: float

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise ValueError("alpha must exceed 1")

    @property
    def manifold(self) -> ManifoldSpec:
        return self.basis.manifold


@dataclass(frozen=True)
class GroupAveragedKernel:
    """K_inv(x, y) = (1/|G|) sum_g K(gx, y), the exact |G|-term average."""

    inner: Union[VonMisesKernel, TruncatedSobolevKernel]
    group: GroupSpec
    closure_cap: int = DEFAULT_CLOSURE_CAP

    def __post_init__(self) -> None:
        self.group.require_acts_on(self.inner.manifold)

    @property
    def manifold(self) -> ManifoldSpec:
        return self.inner.manifold


KernelSpec = Union[VonMisesKernel, TruncatedSobolevKernel, GroupAveragedKernel]


def gram(spec: KernelSpec, x, y=None) -> np.ndarray:
    """Kernel matrix K[i, j] = K(x_i, y_j); y defaults to x."""
    manifold = spec.manifold
    pts_x, _ = _as_points(manifold, np.atleast_2d(np.asarray(x, dtype=np.float64)))
    if y is None:
        pts_y = pts_x
    else:
        pts_y, _ = _as_points(manifold, np.atleast_2d(np.asarray(y, dtype=np.float64)))

    if isinstance(spec, VonMisesKernel):
        scale = manifold.freq_scale
        total = np.zeros((pts_x.shape[0], pts_y.shape[0]))
        for axis in range(manifold.dimension):
            total += np.cos(scale * (pts_x[:, axis, None] - pts_y[None, :, axis]))
        return np.exp(spec.eta * total)

    if isinstance(spec, TruncatedSobolevKernel):
        weights = spec.basis.column_cumdims ** (-spec.alpha)
        feats_x = eval_basis(spec.basis, pts_x)
        feats_y = eval_basis(spec.basis, pts_y)
        return (feats_x * weights) @ feats_y.T

    if isinstance(spec, GroupAveragedKernel):
        elements = spec.group.closure(spec.closure_cap)
        acc = np.zeros((pts_x.shape[0], pts_y.shape[0]))
        for element in sorted(elements, key=repr):
            moved = apply_group_element(spec.group, element, pts_x, manifold)
            acc += gram(spec.inner, moved, pts_y)
        return acc / len(elements)

    raise TypeError(f"unknown kernel spec: {type(spec).__name__}")


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Single kernel value K(x, y)."""
    x_arr = np.asarray(x, dtype=np.float64).reshape(1, -1)
    y_arr = np.asarray(y, dtype=np.float64).reshape(1, -1)
    return float(gram(spec, x_arr, y_arr)[0, 0])


@dataclass(frozen=True)
class KrrModel:
    """Dual-weight solution of (K + n*ridge*I) a = y. At the training points
    the fit satisfies K a = y - n*ridge*a, a direct residual identity."""

    points: np.ndarray
    weights: np.ndarray
    kernel: KernelSpec
    ridge: float
    kernel_evals: int = 0

    @property
    def n(self) -> int:
        return self.points.shape[0]


def krr_fit(dataset: LabeledDataset, kernel: KernelSpec, ridge: float) -> KrrModel:
    """Solve kernel ridge regression by a dense symmetric factorization; one
    jittered retry on factorization failure, then fatal."""
    if ridge <= 0:
        raise ValueError("ridge must be positive")
    n = dataset.n
    kmat = gram(kernel, dataset.points)
    system = kmat + n * ridge * np.eye(n)
    try:
        factor = scipy.linalg.cho_factor(system, lower=True)
    except scipy.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(kmat) / n
        factor = scipy.linalg.cho_factor(system + jitter * np.eye(n), lower=True)
    weights = scipy.linalg.cho_solve(factor, dataset.labels)
    if not np.all(np.isfinite(weights)):
        raise ArithmeticError("kernel ridge solve produced non-finite weights")
    return KrrModel(dataset.points, weights, kernel, ridge, kernel_evals=n * n)


def krr_predict(model: KrrModel, x) -> float | np.ndarray:
    """Representer-form prediction sum_i a_i K(x, x_i)."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    pts = arr[None, :] if single else arr
    values = gram(model.kernel, pts, model.points) @ model.weights
    return float(values[0]) if single else values


def vonmises_signflip_orbit_predict(model: KrrModel, pts, elements) -> np.ndarray:
    """Predictions of a von Mises KRR model at every sign-flipped copy of pts,
    one row per group element.

    cos(scale*(s_i x_i - y_i)) is cos of the coordinate difference for s_i=+1
    and of the coordinate sum for s_i=-1, so the per-axis cosine matrices are
    shared across the whole orbit instead of being recomputed per element.
    """
    kernel = model.kernel
    if not isinstance(kernel, VonMisesKernel):
        raise TypeError("orbit fast path applies to the von Mises kernel only")
    manifold = kernel.manifold
    pts_x, _ = _as_points(manifold, np.atleast_2d(np.asarray(pts, dtype=np.float64)))
    scale = manifold.freq_scale
    dim = manifold.dimension
    train = model.points
    cos_diff = np.empty((dim, pts_x.shape[0], train.shape[0]))
    cos_sum = np.empty_like(cos_diff)
    for axis in range(dim):
        cos_diff[axis] = np.cos(scale * (pts_x[:, axis, None] - train[None, :, axis]))
        cos_sum[axis] = np.cos(scale * (pts_x[:, axis, None] + train[None, :, axis]))
    out = np.empty((len(elements), pts_x.shape[0]))
    for row, element in enumerate(elements):
        total = np.zeros((pts_x.shape[0], train.shape[0]))
        for axis, sign in enumerate(element.signs):
            total += cos_diff[axis] if sign == 1 else cos_sum[axis]
        out[row] = np.exp(kernel.eta * total) @ model.weights
    return out


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

def kernel_to_dict(spec: KernelSpec) -> dict:
    if isinstance(spec, VonMisesKernel):
        return {"kind": "von_mises", "eta": spec.eta,
                "manifold": manifold_to_dict(spec.manifold)}
    if isinstance(spec, TruncatedSobolevKernel):
        return {"kind": "truncated_sobolev", "alpha": spec.alpha,
                "min_total_dim": spec.basis.total_dim,
                "manifold": manifold_to_dict(spec.manifold)}
    if isinstance(spec, GroupAveragedKernel):
        return {"kind": "group_averaged", "inner": kernel_to_dict(spec.inner),
                "group": group_to_dict(spec.group)}
    raise TypeError(f"unknown kernel spec: {type(spec).__name__}")


def kernel_from_dict(data: dict) -> KernelSpec:
    kind = data["kind"]
    if kind == "von_mises":
        return VonMisesKernel(float(data["eta"]), manifold_from_dict(data["manifold"]))
    if kind == "truncated_sobolev":
        manifold = manifold_from_dict(data["manifold"])
        basis = build_basis(manifold, int(data["min_total_dim"]))
        return TruncatedSobolevKernel(basis, float(data["alpha"]))
    if kind == "group_averaged":
        return GroupAveragedKernel(kernel_from_dict(data["inner"]),
                                   group_from_dict(data["group"]))
    raise ValueError(f"unknown kernel kind: {kind!r}")


def krr_to_document(model: KrrModel) -> dict:
    return {
        "type": "krr",
        "points": model.points.tolist(),
        "weights": model.weights.tolist(),
        "kernel": kernel_to_dict(model.kernel),
        "ridge": model.ridge,
    }


def krr_from_document(data: dict) -> KrrModel:
    if data.get("type") != "krr":
        raise ValueError(f"not a krr model document: type={data.get('type')!r}")
    return KrrModel(
        points=np.asarray(data["points"], dtype=np.float64),
        weights=np.asarray(data["weights"], dtype=np.float64),
        kernel=kernel_from_dict(data["kernel"]),
        ridge=float(data["ridge"]),
    )


def krr_to_json(model: KrrModel, *, indent: int | None = 2) -> str:
    return json.dumps(krr_to_document(model), indent=indent)


def krr_from_json(text: str) -> KrrModel:
    return krr_from_document(json.loads(text))
