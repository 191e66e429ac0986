"""Self-check suite behind the `verify` CLI subcommand and /verify endpoint.

Each check exercises one contract of the library against an independent
computation (quadrature, brute-force averaging, direct substitution) and
reports its worst deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import estimator, kernels
from .groups import (
    GroupSpec,
    apply_group_element,
    closure,
    representation_block,
    verify_representation,
)
from .harness import WeightedSquaresTarget, generate_dataset, invariance_discrepancy, sample_test_points
from .manifolds import (
    ManifoldKind,
    ManifoldSpec,
    TruncatedBasis,
    build_basis,
    eval_basis,
)
from .projection import averaging_projector, build_constraints, project


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _quadrature_grid(manifold: ManifoldSpec, points_per_axis: int) -> np.ndarray:
    hw = manifold.halfwidth
    axes = [np.linspace(-hw, hw, points_per_axis, endpoint=False)
            for _ in range(manifold.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _max_freq(basis: TruncatedBasis) -> int:
    return max(max(m.frequencies) for space in basis.eigenspaces for m in space.members)


def check_orthonormality() -> CheckResult:
    worst = 0.0
    for manifold in (ManifoldSpec(ManifoldKind.FLAT_TORUS, 1),
                     ManifoldSpec(ManifoldKind.FLAT_TORUS, 2),
                     ManifoldSpec(ManifoldKind.CIRCLE, 1)):
        basis = build_basis(manifold, 9)
        grid = _quadrature_grid(manifold, 4 * _max_freq(basis) + 1)
        values = eval_basis(basis, grid)
        gram_matrix = values.T @ values / grid.shape[0]
        worst = max(worst, float(np.max(np.abs(gram_matrix - np.eye(basis.total_dim)))))
    return CheckResult("basis_orthonormality", worst <= 1e-10, f"max deviation {worst:.3e}")


def check_eigenfunction_property() -> CheckResult:
    manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 1)
    basis = build_basis(manifold, 7)
    n_grid = 4096
    grid = np.linspace(-1.0, 1.0, n_grid, endpoint=False)[:, None]
    step = 2.0 / n_grid
    values = eval_basis(basis, grid)
    laplacian = (np.roll(values, -1, axis=0) - 2 * values + np.roll(values, 1, axis=0)) / step**2
    worst = 0.0
    for k, space in enumerate(basis.eigenspaces):
        if space.eigenvalue == 0.0:
            continue
        sl = basis.eigenspace_slice(k)
        rel = np.max(np.abs(laplacian[:, sl] + space.eigenvalue * values[:, sl])) / space.eigenvalue
        worst = max(worst, float(rel))
    return CheckResult("basis_eigenfunction", worst <= 1e-3, f"max relative deviation {worst:.3e}")


def check_closure_sizes() -> CheckResult:
    perm4 = GroupSpec.coordinate_permutations(4)
    flips3 = GroupSpec.sign_flips(3)
    rot8 = GroupSpec.cyclic_rotation(8)
    sizes = (len(perm4.closure()), len(flips3.closure()), len(rot8.closure()))
    ok = sizes == (24, 8, 8)
    return CheckResult("closure_sizes", ok, f"S4/flips3/Z8 closure sizes {sizes}")


def check_generator_bound() -> CheckResult:
    ok = True
    details = []
    for group in (GroupSpec.sign_flips(3), GroupSpec.sign_flips(6),
                  GroupSpec.coordinate_permutations(4), GroupSpec.coordinate_permutations(5)):
        bound = math.log2(group.declared_order)
        ok = ok and len(group.generators) <= bound
        details.append(f"{group.kind.value}({group.parameter}): {len(group.generators)} <= {bound:.2f}")
    return CheckResult("generator_bound", ok, "; ".join(details))


def check_representation_laws() -> CheckResult:
    worst = 0.0
    cases = [
        (GroupSpec.sign_flips(3), build_basis(ManifoldSpec(ManifoldKind.FLAT_TORUS, 3), 19)),
        (GroupSpec.coordinate_permutations(4), build_basis(ManifoldSpec(ManifoldKind.FLAT_TORUS, 4), 33)),
        (GroupSpec.cyclic_rotation(8), build_basis(ManifoldSpec(ManifoldKind.CIRCLE, 1), 9)),
    ]
    for group, basis in cases:
        report = verify_representation(group, basis)
        worst = max(worst, report.max_deviation)
    return CheckResult("representation_laws", worst <= 1e-10, f"max deviation {worst:.3e}")


def check_block_quadrature() -> CheckResult:
    worst = 0.0
    cases = [
        (GroupSpec.sign_flips(2), ManifoldSpec(ManifoldKind.FLAT_TORUS, 2), 9),
        (GroupSpec.coordinate_permutations(3), ManifoldSpec(ManifoldKind.FLAT_TORUS, 3), 19),
        (GroupSpec.cyclic_rotation(4), ManifoldSpec(ManifoldKind.CIRCLE, 1), 7),
    ]
    for group, manifold, dim in cases:
        basis = build_basis(manifold, dim)
        grid = _quadrature_grid(manifold, 4 * _max_freq(basis) + 1)
        values = eval_basis(basis, grid)
        for element in group.generators:
            moved = eval_basis(basis, apply_group_element(group, element, grid, manifold))
            for k in range(len(basis.eigenspaces)):
                sl = basis.eigenspace_slice(k)
                numeric = values[:, sl].T @ moved[:, sl] / grid.shape[0]
                analytic = representation_block(group, element, basis, k).matrix
                worst = max(worst, float(np.max(np.abs(numeric - analytic))))
    return CheckResult("block_quadrature", worst <= 1e-8, f"max deviation {worst:.3e}")


def check_projector_equivalence() -> CheckResult:
    rng = np.random.default_rng(7)
    worst = 0.0
    cases = [
        (GroupSpec.cyclic_rotation(8), ManifoldSpec(ManifoldKind.CIRCLE, 1), 17),
        (GroupSpec.sign_flips(3), ManifoldSpec(ManifoldKind.FLAT_TORUS, 3), 27),
        (GroupSpec.coordinate_permutations(4), ManifoldSpec(ManifoldKind.FLAT_TORUS, 4), 33),
    ]
    for group, manifold, dim in cases:
        basis = build_basis(manifold, dim)
        for k in range(len(basis.eigenspaces)):
            blocks = [representation_block(group, g, basis, k) for g in group.generators]
            stack = build_constraints(blocks)
            proj = averaging_projector(group, basis, k)
            for _ in range(20):
                vec = rng.standard_normal(basis.eigenspaces[k].dim)
                closed = project(vec, stack).projected
                worst = max(worst, float(np.max(np.abs(closed - proj @ vec))))
    return CheckResult("projector_equivalence", worst <= 1e-8, f"max deviation {worst:.3e}")


def check_projection_properties() -> CheckResult:
    rng = np.random.default_rng(11)
    group = GroupSpec.sign_flips(2)
    manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 2)
    basis = build_basis(manifold, 13)
    elements = closure(group.generators)
    worst = 0.0
    for k in range(len(basis.eigenspaces)):
        blocks = [representation_block(group, g, basis, k) for g in group.generators]
        stack = build_constraints(blocks)
        for _ in range(10):
            vec = rng.standard_normal(basis.eigenspaces[k].dim)
            first = project(vec, stack)
            second = project(first.projected, stack)
            worst = max(worst, float(np.max(np.abs(second.projected - first.projected))))
            if np.linalg.norm(first.projected) > np.linalg.norm(vec) + 1e-12:
                worst = max(worst, 1.0)
            for element in elements:
                block = representation_block(group, element, basis, k).matrix
                worst = max(worst, float(np.max(np.abs(block @ first.projected - first.projected))))
    return CheckResult("projection_properties", worst <= 1e-8, f"max deviation {worst:.3e}")


def check_estimator_invariance() -> CheckResult:
    manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 3)
    group = GroupSpec.sign_flips(3)
    target = WeightedSquaresTarget(manifold)
    dataset = generate_dataset(manifold, target, 150, seed=1, noise_std=0.1)
    model = estimator.fit(dataset, manifold, group, alpha=None, cutoff_override=27)
    value, sampled = invariance_discrepancy(
        lambda pts: estimator.predict(model, pts),
        sample_test_points(manifold, 50, seed=1), group, manifold=manifold)
    ok = (value <= 1e-9) and not sampled
    return CheckResult("estimator_invariance", ok, f"discrepancy {value:.3e}")


def check_krr_residual_identity() -> CheckResult:
    manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 2)
    target = WeightedSquaresTarget(manifold)
    dataset = generate_dataset(manifold, target, 50, seed=3, noise_std=0.1)
    kernel = kernels.VonMisesKernel(1.0, manifold)
    model = kernels.krr_fit(dataset, kernel, 0.1)
    kmat = kernels.gram(kernel, dataset.points)
    residual = float(np.max(np.abs(
        kmat @ model.weights - (dataset.labels - dataset.n * model.ridge * model.weights))))
    return CheckResult("krr_residual_identity", residual <= 1e-8, f"residual {residual:.3e}")


def check_group_averaged_krr_invariance() -> CheckResult:
    manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 2)
    group = GroupSpec.sign_flips(2)
    target = WeightedSquaresTarget(manifold)
    dataset = generate_dataset(manifold, target, 60, seed=5, noise_std=0.1)
    kernel = kernels.GroupAveragedKernel(kernels.VonMisesKernel(1.0, manifold), group)
    model = kernels.krr_fit(dataset, kernel, 0.01)
    value, _ = invariance_discrepancy(
        lambda pts: kernels.krr_predict(model, pts),
        sample_test_points(manifold, 50, seed=5), group, manifold=manifold)
    return CheckResult("group_averaged_krr_invariance", value <= 1e-10, f"discrepancy {value:.3e}")


def check_sobolev_tail_bound() -> CheckResult:
    rng = np.random.default_rng(13)
    manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 2)
    basis = build_basis(manifold, 40)
    alpha = 2.0
    ok = True
    for _ in range(20):
        coeffs = rng.standard_normal(basis.total_dim)
        norm = estimator.sobolev_norm_sq(coeffs, basis, alpha)
        for cutoff in basis.cumulative_dims:
            tail = estimator.spectral_tail_mass(coeffs, basis, cutoff)
            ok = ok and tail <= cutoff ** (-alpha) * norm
    return CheckResult("sobolev_tail_bound", ok, "algebraic inequality at every boundary")


ALL_CHECKS = [
    check_orthonormality,
    check_eigenfunction_property,
    check_closure_sizes,
    check_generator_bound,
    check_representation_laws,
    check_block_quadrature,
    check_projector_equivalence,
    check_projection_properties,
    check_estimator_invariance,
    check_krr_residual_identity,
    check_group_averaged_krr_invariance,
    check_sobolev_tail_bound,
]


def run_checks() -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            results.append(CheckResult(check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return results
