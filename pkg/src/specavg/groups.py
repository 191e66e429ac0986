"""Finite groups acting isometrically on the built-in manifolds.

Groups are given by generators. Composition is fixed so that the product
g1*g2 acts by "g1 first, then g2"; with the transport convention
(T_g f)(x) = f(gx) this makes the eigenspace matrices a genuine
representation, D(g1*g2) = D(g1) D(g2).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

import numpy as np

from .manifolds import (
    COS,
    SIN,
    EigenIndex,
    ManifoldKind,
    ManifoldSpec,
    TruncatedBasis,
)


class GroupTooLargeError(RuntimeError):
    """Closure enumeration exceeded the configured cap."""


class GroupKind(str, Enum):
    SIGN_FLIPS = "sign_flips"
    COORDINATE_PERMUTATIONS = "coordinate_permutations"
    CYCLIC_ROTATION = "cyclic_rotation"


@dataclass(frozen=True)
class SignFlip:
    """Coordinatewise signs in {+-1}^d acting by x_i -> s_i x_i (mod wrap)."""

    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("sign entries must be +-1")


@dataclass(frozen=True)
class Permutation:
    """Permutation pi of coordinates stored in function form, i -> mapping[i];
    the point action is (g x)_i = x_{pi^{-1}(i)}."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f"not a permutation of 0..{len(self.mapping) - 1}: {self.mapping}")

    def inverse_mapping(self) -> tuple[int, ...]:
        inv = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return tuple(inv)

    @staticmethod
    def from_cycle(cycle: Iterable[int], dimension: int) -> "Permutation":
        mapping = list(range(dimension))
        cyc = list(cycle)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            mapping[a] = b
        return Permutation(tuple(mapping))


@dataclass(frozen=True)
class Rotation:
    """Rotation of the circle by 2*pi*step/order."""

    step: int
    order: int

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("rotation order must be >= 1")
        if not 0 <= self.step < self.order:
            raise ValueError(f"step must lie in 0..{self.order - 1}")

    @property
    def angle(self) -> float:
        return 2.0 * math.pi * self.step / self.order


GroupElement = Union[SignFlip, Permutation, Rotation]


def compose(first: GroupElement, second: GroupElement) -> GroupElement:
    """Product acting by `first` then `second`."""
    if isinstance(first, SignFlip) and isinstance(second, SignFlip):
        return SignFlip(tuple(a * b for a, b in zip(first.signs, second.signs)))
    if isinstance(first, Permutation) and isinstance(second, Permutation):
        # combined mapping is second o first
        return Permutation(tuple(second.mapping[j] for j in first.mapping))
    if isinstance(first, Rotation) and isinstance(second, Rotation):
        if first.order != second.order:
            raise ValueError("cannot compose rotations of different orders")
        return Rotation((first.step + second.step) % first.order, first.order)
    raise TypeError(f"cannot compose {type(first).__name__} with {type(second).__name__}")


def inverse(element: GroupElement) -> GroupElement:
    if isinstance(element, SignFlip):
        return element
    if isinstance(element, Permutation):
        return Permutation(element.inverse_mapping())
    if isinstance(element, Rotation):
        return Rotation((-element.step) % element.order, element.order)
    raise TypeError(f"not a group element: {type(element).__name__}")


def identity_like(element: GroupElement) -> GroupElement:
    if isinstance(element, SignFlip):
        return SignFlip((1,) * len(element.signs))
    if isinstance(element, Permutation):
        return Permutation(tuple(range(len(element.mapping))))
    if isinstance(element, Rotation):
        return Rotation(0, element.order)
    raise TypeError(f"not a group element: {type(element).__name__}")


def is_identity(element: GroupElement) -> bool:
    return element == identity_like(element)


DEFAULT_CLOSURE_CAP = 10_000


def closure(generators: Iterable[GroupElement], cap: int = DEFAULT_CLOSURE_CAP) -> set[GroupElement]:
    """Breadth-first closure of the generators under composition and inversion.

    Raises GroupTooLargeError once more than `cap` elements are found; callers
    needing a supremum over the whole group must then fall back to sampling.
    """
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    seeds = []
    for g in gens:
        for h in (g, inverse(g)):
            if h not in seeds:
                seeds.append(h)
    ident = identity_like(gens[0])
    found: set[GroupElement] = {ident}
    frontier: list[GroupElement] = [ident]
    while frontier:
        nxt: list[GroupElement] = []
        for elem in frontier:
            for g in seeds:
                prod = compose(elem, g)
                if prod not in found:
                    found.add(prod)
                    nxt.append(prod)
                    if len(found) > cap:
                        raise GroupTooLargeError(
                            f"group closure exceeds cap of {cap} elements"
                        )
        frontier = nxt
    return found


@dataclass(frozen=True)
class GroupSpec:
    """A finite group given by generators plus the manifold action it uses.

    `parameter` is d for sign flips and coordinate permutations, m for the
    cyclic rotation group. Built-in constructors choose generator sets meeting
    the |S| <= log2|G| bound (d single flips; a transposition plus a d-cycle;
    one rotation step).
    """

    kind: GroupKind
    parameter: int
    generators: tuple[GroupElement, ...]
    declared_order: int

    @staticmethod
    def sign_flips(dimension: int) -> "GroupSpec":
        gens = tuple(
            SignFlip(tuple(-1 if i == j else 1 for j in range(dimension)))
            for i in range(dimension)
        )
        return GroupSpec(GroupKind.SIGN_FLIPS, dimension, gens, 2 ** dimension)

    @staticmethod
    def coordinate_permutations(dimension: int) -> "GroupSpec":
        if dimension < 2:
            gens: tuple[GroupElement, ...] = (Permutation((0,)),)
            order = 1
        elif dimension == 2:
            gens = (Permutation((1, 0)),)
            order = 2
        else:
            swap = Permutation.from_cycle([0, 1], dimension)
            cycle = Permutation.from_cycle(range(dimension), dimension)
            gens = (swap, cycle)
            order = math.factorial(dimension)
        return GroupSpec(GroupKind.COORDINATE_PERMUTATIONS, dimension, gens, order)

    @staticmethod
    def cyclic_rotation(order: int) -> "GroupSpec":
        if order < 1:
            raise ValueError("cyclic group order must be >= 1")
        step = Rotation(1 % order if order > 1 else 0, order)
        return GroupSpec(GroupKind.CYCLIC_ROTATION, order, (step,), order)

    @staticmethod
    def trivial_on_torus(dimension: int) -> "GroupSpec":
        """One-element group, useful as the no-symmetry baseline."""
        return GroupSpec(GroupKind.SIGN_FLIPS, dimension,
                         (SignFlip((1,) * dimension),), 1)

    def acts_on(self, manifold: ManifoldSpec) -> bool:
        if self.kind is GroupKind.CYCLIC_ROTATION:
            return manifold.kind is ManifoldKind.CIRCLE
        return (manifold.kind is ManifoldKind.FLAT_TORUS
                and manifold.dimension == self.parameter)

    def require_acts_on(self, manifold: ManifoldSpec) -> None:
        if not self.acts_on(manifold):
            raise ValueError(
                f"group {self.kind.value}({self.parameter}) does not act on "
                f"{manifold.kind.value} of dimension {manifold.dimension}"
            )

    def closure(self, cap: int = DEFAULT_CLOSURE_CAP) -> set[GroupElement]:
        return closure(self.generators, cap)

    def generates_declared_order(self, cap: int = DEFAULT_CLOSURE_CAP) -> bool:
        return len(self.closure(cap)) == self.declared_order


def apply_group_element(group: GroupSpec, element: GroupElement, x,
                        manifold: ManifoldSpec | None = None) -> np.ndarray:
    """Apply g to a point (d,) or batch (n, d); the action is isometric and the
    result stays in the manifold's canonical domain."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    pts = arr[None, :] if single else arr
    dim = 1 if group.kind is GroupKind.CYCLIC_ROTATION else group.parameter
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {arr.shape}")
    if manifold is None:
        if group.kind is GroupKind.CYCLIC_ROTATION:
            manifold = ManifoldSpec(ManifoldKind.CIRCLE, 1)
        else:
            manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, dim)
    group.require_acts_on(manifold)

    # wrap only coordinates that can actually leave the domain, so unmoved
    # coordinates (and the identity) come back bit-exact
    hw = manifold.halfwidth
    if isinstance(element, SignFlip):
        out = pts * np.asarray(element.signs, dtype=np.float64)
        out[out == hw] = -hw  # -(-hw) lands on the excluded boundary
    elif isinstance(element, Permutation):
        inv = np.asarray(element.inverse_mapping(), dtype=np.intp)
        out = pts[:, inv]
    elif isinstance(element, Rotation):
        out = pts + element.angle if element.step else pts.copy()
        out[out >= hw] -= 2.0 * hw  # angle is in [0, 2hw), one wrap suffices
        out[out >= hw] -= 2.0 * hw  # rounding can land exactly on the boundary
    else:
        raise TypeError(f"not a group element: {type(element).__name__}")
    return out[0] if single else out


@dataclass(frozen=True)
class RepresentationBlock:
    """Orthogonal matrix D(g) of one group element on one eigenspace: the
    coefficient vector of x -> f(gx) is D(g) @ f_lambda."""

    eigenvalue: float
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _signflip_block(element: SignFlip, members: tuple[EigenIndex, ...]) -> np.ndarray:
    diag = [
        float(np.prod([element.signs[i] for i, p in enumerate(m.trig_pattern) if p == SIN]))
        if SIN in m.trig_pattern else 1.0
        for m in members
    ]
    return np.diag(np.asarray(diag))


def _permutation_block(element: Permutation, members: tuple[EigenIndex, ...]) -> np.ndarray:
    index_of = {m: i for i, m in enumerate(members)}
    size = len(members)
    mat = np.zeros((size, size))
    for col, m in enumerate(members):
        moved = EigenIndex(
            tuple(m.frequencies[element.mapping[j]] for j in range(len(m.frequencies))),
            tuple(m.trig_pattern[element.mapping[j]] for j in range(len(m.trig_pattern))),
        )
        mat[index_of[moved], col] = 1.0
    return mat


def _rotation_block(element: Rotation, members: tuple[EigenIndex, ...]) -> np.ndarray:
    if len(members) == 1:
        return np.eye(1)
    k = members[0].frequencies[0]
    # reduce k*step mod order in exact integer arithmetic: multiples of a full
    # turn must give the identity exactly, not up to trig roundoff
    reduced = (k * element.step) % element.order
    if reduced == 0:
        return np.eye(2)
    theta = 2.0 * math.pi * reduced / element.order
    c, s = math.cos(theta), math.sin(theta)
    # members are ordered (cos, sin); cos(k(x+a)) = c*cos(kx) - s*sin(kx) etc.
    return np.array([[c, s], [-s, c]])


def representation_block(group: GroupSpec, element: GroupElement,
                         basis: TruncatedBasis, eigenspace_index: int) -> RepresentationBlock:
    """Analytic D(g) for one eigenspace: entry (l', l) is the L2 inner product
    of the shifted member phi_l(g.) with phi_l'."""
    group.require_acts_on(basis.manifold)
    space = basis.eigenspaces[eigenspace_index]
    if isinstance(element, SignFlip):
        mat = _signflip_block(element, space.members)
    elif isinstance(element, Permutation):
        mat = _permutation_block(element, space.members)
    elif isinstance(element, Rotation):
        mat = _rotation_block(element, space.members)
    else:
        raise TypeError(f"not a group element: {type(element).__name__}")
    return RepresentationBlock(space.eigenvalue, mat)


@dataclass(frozen=True)
class RepresentationReport:
    max_orthogonality_dev: float
    max_law_dev: float
    pairs_checked: int
    exhaustive: bool

    @property
    def max_deviation(self) -> float:
        return max(self.max_orthogonality_dev, self.max_law_dev)


def verify_representation(group: GroupSpec, basis: TruncatedBasis, *,
                          cap: int = DEFAULT_CLOSURE_CAP,
                          sample_pairs: int = 200,
                          seed: int = 0) -> RepresentationReport:
    """Check orthogonality of every D(g) and the representation law
    D(g1 g2) = D(g1) D(g2) on all pairs of the closure, or on a random sample
    of composable pairs when the closure exceeds the cap."""
    try:
        elements: list[GroupElement] = sorted(group.closure(cap), key=repr)
        exhaustive = True
        pairs = [(a, b) for a in elements for b in elements]
    except GroupTooLargeError:
        rng = random.Random(seed)
        elements = list(group.generators)
        words = list(group.generators)
        for _ in range(sample_pairs):
            word = identity_like(group.generators[0])
            for _ in range(rng.randint(1, 8)):
                word = compose(word, rng.choice(list(group.generators)))
            words.append(word)
        exhaustive = False
        pairs = [(rng.choice(words), rng.choice(words)) for _ in range(sample_pairs)]
        elements = list({w for pair in pairs for w in pair})

    blocks_cache: dict[GroupElement, list[np.ndarray]] = {}

    def blocks_of(g: GroupElement) -> list[np.ndarray]:
        if g not in blocks_cache:
            blocks_cache[g] = [
                representation_block(group, g, basis, k).matrix
                for k in range(len(basis.eigenspaces))
            ]
        return blocks_cache[g]

    ortho_dev = 0.0
    for g in elements:
        for mat in blocks_of(g):
            ortho_dev = max(ortho_dev, float(np.max(np.abs(mat.T @ mat - np.eye(mat.shape[0])))))
    law_dev = 0.0
    for a, b in pairs:
        prod_blocks = blocks_of(compose(a, b))
        for mat_a, mat_b, mat_ab in zip(blocks_of(a), blocks_of(b), prod_blocks):
            law_dev = max(law_dev, float(np.max(np.abs(mat_ab - mat_a @ mat_b))))
    return RepresentationReport(ortho_dev, law_dev, len(pairs), exhaustive)
