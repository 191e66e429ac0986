"""Euclidean projection of eigenspace coefficients onto the group-invariant
subspace.

Per eigenspace the constraint "D(g) f = f for every generator g" is encoded as
the stacked linear system B f = 0 with B = [D(g1)-I; D(g2)-I; ...]; the
projection has the closed form f - B^T (B B^T)^+ (B f). A brute-force group
averaging projector over the full closure serves as the exactness oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import (
    DEFAULT_CLOSURE_CAP,
    GroupSpec,
    RepresentationBlock,
    representation_block,
)
from .manifolds import TruncatedBasis

FEASIBILITY_TOL = 1e-8
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class ConstraintStack:
    """Vertical concatenation of (D(g) - I) over the generator set. Its null
    space is exactly the invariant subspace of the eigenspace: constraints on
    generators propagate to the whole group by the group law."""

    eigenvalue: float
    matrix: np.ndarray
    block_size: int

    @property
    def n_generators(self) -> int:
        return self.matrix.shape[0] // self.block_size if self.block_size else 0


def build_constraints(blocks: list[RepresentationBlock]) -> ConstraintStack:
    """Stack (D(g) - I) rows in generator order."""
    if not blocks:
        raise ValueError("need at least one representation block")
    size = blocks[0].dim
    eigenvalue = blocks[0].eigenvalue
    for block in blocks:
        if block.dim != size or block.eigenvalue != eigenvalue:
            raise ValueError("all blocks must share the eigenvalue and dimension")
    eye = np.eye(size)
    stacked = np.vstack([block.matrix - eye for block in blocks])
    return ConstraintStack(eigenvalue, stacked, size)


@dataclass(frozen=True)
class ProjectionResult:
    projected: np.ndarray
    residual: float
    effective_rank: int


def project(f_tilde, constraints: ConstraintStack, *,
            feasibility_tol: float = FEASIBILITY_TOL) -> ProjectionResult:
    """Euclidean projection of f_tilde onto null(B).

    Computed through the SVD of B: with B = U S V^T of rank r, the closed form
    f - B^T (B B^T)^+ (B f) equals f - V_r V_r^T f. Singular values below
    max(dims) * s_max * 1e-12 are treated as zero; effective_rank counts the
    retained ones.
    """
    vec = np.asarray(f_tilde, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != constraints.block_size:
        raise ValueError(
            f"coefficient vector must have length {constraints.block_size}, got shape {vec.shape}"
        )
    if not np.all(np.isfinite(vec)):
        raise ValueError("coefficient vector must be finite")
    mat = constraints.matrix
    _, svals, vt = np.linalg.svd(mat, full_matrices=False)
    if svals.size and svals[0] > 0.0:
        cutoff = max(mat.shape) * svals[0] * _RANK_RTOL
        rank = int(np.sum(svals > cutoff))
    else:
        rank = 0
    row_space = vt[:rank]
    projected = vec - row_space.T @ (row_space @ vec)
    residual = float(np.max(np.abs(mat @ projected))) if mat.size else 0.0
    if residual > feasibility_tol:
        raise ArithmeticError(
            f"projection residual {residual:.3e} exceeds feasibility tolerance {feasibility_tol:.1e}"
        )
    return ProjectionResult(projected, residual, rank)


def averaging_projector(group: GroupSpec, basis: TruncatedBasis, eigenspace_index: int,
                        *, cap: int = DEFAULT_CLOSURE_CAP) -> np.ndarray:
    """(1/|G|) sum of D(g) over the full closure: the symmetric idempotent
    projector onto the invariant subspace. Exists to cross-check `project`,
    and costs Omega(|G|) by construction."""
    elements = group.closure(cap)
    size = basis.eigenspaces[eigenspace_index].dim
    acc = np.zeros((size, size))
    for element in elements:
        acc += representation_block(group, element, basis, eigenspace_index).matrix
    return acc / len(elements)
