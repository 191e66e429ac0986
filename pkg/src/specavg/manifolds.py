"""Laplace-Beltrami eigenbasis oracles for the flat torus [-1,1)^d and the circle.

The basis is orthonormal with respect to the uniform *probability* measure,
so empirical spectral coefficients are unbiased without extra constants.
Truncation always happens at whole-eigenspace boundaries: group actions mix
coordinates within an eigenspace, never across eigenspaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

SQRT2 = math.sqrt(2.0)

# Trig pattern codes. cos sorts before sin, which fixes the member ordering
# inside an eigenspace.
COS = 0
SIN = 1

_PATTERN_NAMES = {COS: "cos", SIN: "sin"}
_PATTERN_CODES = {"cos": COS, "sin": SIN}


class DomainError(ValueError):
    """A point lies outside the manifold's canonical coordinate domain."""


class BasisBudgetError(RuntimeError):
    """The frequency-lattice search exceeded its configured budget."""


class ManifoldKind(str, Enum):
    FLAT_TORUS = "flat_torus"
    CIRCLE = "circle"


class BasisMode(str, Enum):
    FULL_FOURIER = "full_fourier"
    COSINE_ONLY = "cosine_only"


@dataclass(frozen=True)
class ManifoldSpec:
    """A built-in manifold with its eigenbasis mode.

    The flat torus is parametrized by [-1,1)^d, the circle by one angle in
    [-pi, pi). The circle agrees with the d=1 torus under theta = pi*x.
    """

    kind: ManifoldKind
    dimension: int
    basis_mode: BasisMode = BasisMode.FULL_FOURIER

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.kind is ManifoldKind.CIRCLE and self.dimension != 1:
            raise ValueError("the circle is one-dimensional")
        if self.kind is ManifoldKind.CIRCLE and self.basis_mode is BasisMode.COSINE_ONLY:
            raise ValueError("cosine-only mode is defined for the flat torus only")

    @property
    def halfwidth(self) -> float:
        """Half the coordinate period: 1 for the torus, pi for the circle."""
        return 1.0 if self.kind is ManifoldKind.FLAT_TORUS else math.pi

    @property
    def freq_scale(self) -> float:
        """Angular frequency of the fundamental mode per coordinate."""
        return math.pi if self.kind is ManifoldKind.FLAT_TORUS else 1.0


@dataclass(frozen=True)
class EigenIndex:
    """Index of one basis function: integer frequencies plus a cos/sin flag
    per coordinate. A sin factor at a zero frequency is not a function, so it
    is rejected. Two indices share an eigenspace iff their squared-frequency
    sums agree."""

    frequencies: tuple[int, ...]
    trig_pattern: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.frequencies) != len(self.trig_pattern):
            raise ValueError("frequencies and trig_pattern must have equal length")
        for freq, pat in zip(self.frequencies, self.trig_pattern):
            if freq < 0:
                raise ValueError(f"frequencies must be nonnegative, got {freq}")
            if pat not in (COS, SIN):
                raise ValueError(f"trig pattern entries must be COS or SIN, got {pat}")
            if freq == 0 and pat == SIN:
                raise ValueError("sin factor is forbidden at zero frequency")

    @property
    def freq_norm_sq(self) -> int:
        return sum(f * f for f in self.frequencies)

    def pattern_names(self) -> tuple[str, ...]:
        return tuple(_PATTERN_NAMES[p] for p in self.trig_pattern)

    @staticmethod
    def from_names(frequencies, pattern_names) -> "EigenIndex":
        return EigenIndex(tuple(int(f) for f in frequencies),
                          tuple(_PATTERN_CODES[str(p)] for p in pattern_names))


def eigenvalue_of(index: EigenIndex, manifold: ManifoldSpec | None = None) -> float:
    """Laplace-Beltrami eigenvalue of one basis function.

    pi^2 * sum(l_i^2) on the flat torus (the default), k^2 on the circle,
    since the period differs between the two parametrizations. Only the
    induced ordering matters downstream; the ordering is the same.
    """
    scale = math.pi if manifold is None else manifold.freq_scale
    return (scale * scale) * index.freq_norm_sq


@dataclass(frozen=True)
class Eigenspace:
    eigenvalue: float
    members: tuple[EigenIndex, ...]

    @property
    def dim(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class TruncatedBasis:
    """An ordered prefix of whole eigenspaces of the manifold's Laplacian.

    Immutable after construction; evaluation tables are cached lazily and are
    derived purely from the immutable fields.
    """

    manifold: ManifoldSpec
    eigenspaces: tuple[Eigenspace, ...]
    cumulative_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.eigenspaces:
            raise ValueError("basis must contain at least one eigenspace")
        eigs = [space.eigenvalue for space in self.eigenspaces]
        if any(b <= a for a, b in zip(eigs, eigs[1:])):
            raise ValueError("eigenvalues must be strictly increasing")
        running = 0
        for space, cum in zip(self.eigenspaces, self.cumulative_dims):
            running += space.dim
            if cum != running:
                raise ValueError("cumulative_dims inconsistent with eigenspace sizes")

    @property
    def total_dim(self) -> int:
        return self.cumulative_dims[-1]

    @property
    def members(self) -> tuple[EigenIndex, ...]:
        return tuple(m for space in self.eigenspaces for m in space.members)

    def eigenspace_slice(self, index: int) -> slice:
        start = 0 if index == 0 else self.cumulative_dims[index - 1]
        return slice(start, self.cumulative_dims[index])

    @cached_property
    def _freq_table(self) -> np.ndarray:
        return np.array([m.frequencies for m in self.members], dtype=np.int64)

    @cached_property
    def _pattern_table(self) -> np.ndarray:
        return np.array([m.trig_pattern for m in self.members], dtype=np.int64)

    @cached_property
    def column_cumdims(self) -> np.ndarray:
        """D_lambda of each basis function's eigenspace, one entry per column."""
        out = np.empty(self.total_dim, dtype=np.float64)
        for k, space in enumerate(self.eigenspaces):
            out[self.eigenspace_slice(k)] = self.cumulative_dims[k]
        return out


def canonicalize(manifold: ManifoldSpec, x) -> np.ndarray:
    """Wrap arbitrary real coordinates into the canonical domain [-hw, hw)."""
    hw = manifold.halfwidth
    arr = np.asarray(x, dtype=np.float64)
    wrapped = np.mod(arr + hw, 2.0 * hw) - hw
    # float rounding can land exactly on the upper boundary
    return np.where(wrapped >= hw, wrapped - 2.0 * hw, wrapped)


def _check_domain(manifold: ManifoldSpec, pts: np.ndarray) -> None:
    hw = manifold.halfwidth
    if not np.all(np.isfinite(pts)):
        raise DomainError("point coordinates must be finite")
    if np.any(pts < -hw) or np.any(pts >= hw):
        bad = pts[(pts < -hw) | (pts >= hw)][0]
        raise DomainError(
            f"coordinate {bad!r} outside [{-hw}, {hw}); wrap with canonicalize() first"
        )


def _as_points(manifold: ManifoldSpec, x) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != manifold.dimension:
        raise DomainError(
            f"expected points with {manifold.dimension} coordinates, got shape {np.shape(x)}"
        )
    _check_domain(manifold, pts)
    return pts, single


def eval_basis(basis: TruncatedBasis, x) -> np.ndarray:
    """Evaluate every basis function at x.

    x may be a single point of shape (d,) or a batch of shape (n, d); the
    result is (total_dim,) or (n, total_dim) accordingly. Each function is a
    product over coordinates of 1 (zero frequency) or sqrt(2)*cos/sin of
    scale*l_i*x_i; the sqrt(2) factors give unit L2 norm under the uniform
    probability measure.
    """
    manifold = basis.manifold
    pts, single = _as_points(manifold, x)
    freqs = basis._freq_table
    patterns = basis._pattern_table
    scale = manifold.freq_scale
    n, dim = pts.shape
    values = np.ones((n, basis.total_dim))
    for axis in range(dim):
        active = freqs[:, axis] > 0
        if not np.any(active):
            continue
        ang = scale * np.outer(pts[:, axis], freqs[active, axis])
        fac = np.cos(ang)
        sin_cols = patterns[active, axis] == SIN
        if np.any(sin_cols):
            fac[:, sin_cols] = np.sin(ang[:, sin_cols])
        values[:, active] *= SQRT2 * fac
    return values[0] if single else values


def _frequency_levels(dimension: int, max_norm_sq: int, budget: list[int]) -> dict[int, list[tuple[int, ...]]]:
    """All l in Z_{>=0}^dimension with sum l_i^2 <= max_norm_sq, grouped by the
    sum and in lexicographic order. budget is a mutable countdown of lattice
    nodes; exhausting it raises BasisBudgetError."""
    levels: dict[int, list[tuple[int, ...]]] = {}

    def recurse(prefix: tuple[int, ...], remaining: int) -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise BasisBudgetError(
                "frequency lattice search exceeded its budget; "
                "lower min_total_dim or raise lattice_budget"
            )
        if len(prefix) == dimension:
            levels.setdefault(max_norm_sq - remaining, []).append(prefix)
            return
        limit = math.isqrt(remaining)
        for freq in range(limit + 1):
            recurse(prefix + (freq,), remaining - freq * freq)

    recurse((), max_norm_sq)
    return levels


def _patterns_for(freqs: tuple[int, ...], mode: BasisMode) -> list[tuple[int, ...]]:
    if mode is BasisMode.COSINE_ONLY:
        return [tuple(COS for _ in freqs)]
    options = [(COS,) if f == 0 else (COS, SIN) for f in freqs]
    out: list[tuple[int, ...]] = [()]
    for opt in options:
        out = [pat + (choice,) for pat in out for choice in opt]
    return out


def build_basis(manifold: ManifoldSpec, min_total_dim: int, *,
                lattice_budget: int = 2_000_000) -> TruncatedBasis:
    """Smallest prefix of whole eigenspaces with total dimension >= min_total_dim.

    The frequency lattice is enumerated exhaustively below an adaptively grown
    squared-norm threshold; ordering is deterministic (eigenspaces by
    eigenvalue, members lexicographic on (frequencies, pattern) with
    cos < sin).
    """
    if min_total_dim < 1:
        raise ValueError(f"min_total_dim must be >= 1, got {min_total_dim}")
    budget = [lattice_budget]
    max_norm_sq = 4
    while True:
        levels = _frequency_levels(manifold.dimension, max_norm_sq, budget)
        spaces: list[Eigenspace] = []
        cumulative: list[int] = []
        total = 0
        for norm_sq in sorted(levels):
            members: list[EigenIndex] = []
            for freqs in sorted(levels[norm_sq]):
                for pattern in _patterns_for(freqs, manifold.basis_mode):
                    members.append(EigenIndex(freqs, pattern))
            eigenvalue = (manifold.freq_scale ** 2) * norm_sq
            spaces.append(Eigenspace(eigenvalue, tuple(members)))
            total += len(members)
            cumulative.append(total)
            if total >= min_total_dim:
                return TruncatedBasis(manifold, tuple(spaces), tuple(cumulative))
        max_norm_sq *= 2


def build_basis_within(manifold: ManifoldSpec, max_total_dim: int, *,
                       lattice_budget: int = 2_000_000) -> TruncatedBasis:
    """Largest prefix of whole eigenspaces with total dimension <= max_total_dim,
    always keeping at least the constant eigenspace. An eigenspace that would
    straddle the cutoff is dropped entirely."""
    if max_total_dim < 1:
        raise ValueError(f"max_total_dim must be >= 1, got {max_total_dim}")
    basis = build_basis(manifold, max_total_dim, lattice_budget=lattice_budget)
    keep = len(basis.eigenspaces)
    while keep > 1 and basis.cumulative_dims[keep - 1] > max_total_dim:
        keep -= 1
    return TruncatedBasis(manifold, basis.eigenspaces[:keep], basis.cumulative_dims[:keep])


def geodesic_distance(manifold: ManifoldSpec, x, y) -> float:
    """Wrapped Euclidean distance on the torus / arc distance on the circle."""
    pts_x, _ = _as_points(manifold, x)
    pts_y, _ = _as_points(manifold, y)
    period = 2.0 * manifold.halfwidth
    delta = np.abs(pts_x - pts_y)
    delta = np.minimum(delta, period - delta)
    return float(np.sqrt(np.sum(delta * delta)))
