import numpy as np
import pytest

from specavg.groups import (
    GroupSpec,
    Rotation,
    SignFlip,
    representation_block,
)
from specavg.manifolds import ManifoldKind, ManifoldSpec, build_basis
from specavg.projection import (
    ConstraintStack,
    averaging_projector,
    build_constraints,
    project,
)

TORUS1 = ManifoldSpec(ManifoldKind.FLAT_TORUS, 1)
TORUS2 = ManifoldSpec(ManifoldKind.FLAT_TORUS, 2)
TORUS3 = ManifoldSpec(ManifoldKind.FLAT_TORUS, 3)
TORUS4 = ManifoldSpec(ManifoldKind.FLAT_TORUS, 4)
CIRCLE = ManifoldSpec(ManifoldKind.CIRCLE, 1)


def constraint_cases():
    """(group, basis) pairs covering all built-in group kinds."""
    return [
        (GroupSpec.cyclic_rotation(8), build_basis(CIRCLE, 17)),
        (GroupSpec.cyclic_rotation(4), build_basis(CIRCLE, 9)),
        (GroupSpec.sign_flips(1), build_basis(TORUS1, 3)),
        (GroupSpec.sign_flips(2), build_basis(TORUS2, 13)),
        (GroupSpec.sign_flips(3), build_basis(TORUS3, 27)),
        (GroupSpec.coordinate_permutations(4), build_basis(TORUS4, 33)),
    ]


def stack_for(group, basis, k) -> ConstraintStack:
    blocks = [representation_block(group, g, basis, k) for g in group.generators]
    return build_constraints(blocks)


class TestBuildConstraints:
    def test_identity_block_gives_zero_stack(self):
        basis = build_basis(TORUS2, 5)
        group = GroupSpec.trivial_on_torus(2)
        stack = stack_for(group, basis, 1)
        assert np.all(stack.matrix == 0.0)

    def test_minus_identity_block(self):
        from specavg.groups import RepresentationBlock
        block = RepresentationBlock(1.0, -np.eye(2))
        stack = build_constraints([block])
        np.testing.assert_array_equal(stack.matrix, -2.0 * np.eye(2))

    def test_circle_z4_first_eigenspace(self):
        basis = build_basis(CIRCLE, 3)
        group = GroupSpec.cyclic_rotation(4)
        stack = stack_for(group, basis, 1)
        rotation = representation_block(group, group.generators[0], basis, 1).matrix
        np.testing.assert_allclose(stack.matrix, rotation - np.eye(2), atol=1e-15)

    def test_mismatched_blocks_rejected(self):
        from specavg.groups import RepresentationBlock
        with pytest.raises(ValueError):
            build_constraints([RepresentationBlock(1.0, np.eye(2)),
                               RepresentationBlock(2.0, np.eye(2))])


class TestProject:
    def test_zero_constraints_are_identity(self):
        stack = ConstraintStack(0.0, np.zeros((2, 2)), 2)
        result = project(np.array([1.5, -2.5]), stack)
        np.testing.assert_array_equal(result.projected, [1.5, -2.5])
        assert result.effective_rank == 0
        assert result.residual == 0.0

    def test_full_rank_constraints_project_to_zero(self):
        stack = ConstraintStack(0.0, -2.0 * np.eye(2), 2)
        result = project(np.array([0.7, 0.4]), stack)
        np.testing.assert_array_equal(result.projected, [0.0, 0.0])
        assert result.effective_rank == 2

    def test_z4_circle_kills_first_harmonic(self):
        # oracle: (1/4) sum_j D(g_j) on k=1 is the zero matrix
        basis = build_basis(CIRCLE, 3)
        group = GroupSpec.cyclic_rotation(4)
        oracle = averaging_projector(group, basis, 1)
        np.testing.assert_allclose(oracle, np.zeros((2, 2)), atol=1e-15)
        result = project(np.array([1.0, 0.0]), stack_for(group, basis, 1))
        np.testing.assert_allclose(result.projected, [0.0, 0.0], atol=1e-15)

    def test_degenerate_one_dim_eigenspace(self):
        # scalar constraint (D - 1): projection is identity or zero
        keep = project(np.array([0.9]), ConstraintStack(0.0, np.zeros((1, 1)), 1))
        kill = project(np.array([0.9]), ConstraintStack(0.0, np.array([[-2.0]]), 1))
        assert keep.projected[0] == 0.9
        assert kill.projected[0] == 0.0

    def test_non_finite_input_rejected(self):
        stack = ConstraintStack(0.0, np.zeros((1, 1)), 1)
        with pytest.raises(ValueError):
            project(np.array([np.nan]), stack)

    def test_wrong_length_rejected(self):
        stack = ConstraintStack(0.0, np.zeros((2, 2)), 2)
        with pytest.raises(ValueError):
            project(np.array([1.0]), stack)


class TestAveragingProjector:
    def test_trivial_group_gives_identity(self):
        basis = build_basis(TORUS2, 5)
        proj = averaging_projector(GroupSpec.trivial_on_torus(2), basis, 1)
        np.testing.assert_array_equal(proj, np.eye(4))

    def test_sign_flips_on_cos_sin_pair(self):
        # average of I and diag(1, -1)
        basis = build_basis(TORUS1, 3)
        proj = averaging_projector(GroupSpec.sign_flips(1), basis, 1)
        np.testing.assert_allclose(proj, np.diag([1.0, 0.0]), atol=1e-15)

    def test_z4_on_fourth_harmonic_is_identity(self):
        basis = build_basis(CIRCLE, 9)
        proj = averaging_projector(GroupSpec.cyclic_rotation(4), basis, 4)
        np.testing.assert_allclose(proj, np.eye(2), atol=1e-15)

    def test_symmetric_idempotent(self):
        for group, basis in constraint_cases():
            for k in range(len(basis.eigenspaces)):
                proj = averaging_projector(group, basis, k)
                assert np.max(np.abs(proj - proj.T)) <= 1e-12
                assert np.max(np.abs(proj @ proj - proj)) <= 1e-12


class TestProjectionProperties:
    def test_idempotency(self):
        rng = np.random.default_rng(21)
        for group, basis in constraint_cases():
            for k in range(len(basis.eigenspaces)):
                stack = stack_for(group, basis, k)
                vec = rng.standard_normal(basis.eigenspaces[k].dim)
                once = project(vec, stack).projected
                twice = project(once, stack).projected
                assert np.max(np.abs(twice - once)) <= 1e-10

    def test_feasibility_over_full_closure(self):
        # generator constraints must propagate to every closure element
        rng = np.random.default_rng(22)
        for group, basis in constraint_cases():
            elements = group.closure()
            for k in range(len(basis.eigenspaces)):
                stack = stack_for(group, basis, k)
                vec = rng.standard_normal(basis.eigenspaces[k].dim)
                projected = project(vec, stack).projected
                for element in elements:
                    block = representation_block(group, element, basis, k).matrix
                    assert np.max(np.abs(block @ projected - projected)) <= 1e-8

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(23)
        for group, basis in constraint_cases():
            assert group.declared_order <= 120
            for k in range(len(basis.eigenspaces)):
                dim = basis.eigenspaces[k].dim
                if dim > 16:
                    continue
                stack = stack_for(group, basis, k)
                oracle = averaging_projector(group, basis, k)
                vecs = rng.standard_normal((100, dim))
                for vec in vecs:
                    closed = project(vec, stack).projected
                    assert np.max(np.abs(closed - oracle @ vec)) <= 1e-8

    def test_optimality_against_random_feasible_points(self):
        rng = np.random.default_rng(24)
        group = GroupSpec.sign_flips(2)
        basis = build_basis(TORUS2, 13)
        for k in range(len(basis.eigenspaces)):
            dim = basis.eigenspaces[k].dim
            stack = stack_for(group, basis, k)
            oracle = averaging_projector(group, basis, k)
            vec = rng.standard_normal(dim)
            best = project(vec, stack).projected
            for _ in range(50):
                feasible = oracle @ rng.standard_normal(dim)
                assert (np.linalg.norm(vec - best)
                        <= np.linalg.norm(vec - feasible) + 1e-10)

    def test_norm_contraction(self):
        rng = np.random.default_rng(25)
        for group, basis in constraint_cases():
            for k in range(len(basis.eigenspaces)):
                stack = stack_for(group, basis, k)
                vec = rng.standard_normal(basis.eigenspaces[k].dim)
                projected = project(vec, stack).projected
                assert np.linalg.norm(projected) <= np.linalg.norm(vec) + 1e-14

    def test_residual_within_feasibility_tolerance(self):
        rng = np.random.default_rng(26)
        for group, basis in constraint_cases():
            for k in range(len(basis.eigenspaces)):
                stack = stack_for(group, basis, k)
                result = project(rng.standard_normal(basis.eigenspaces[k].dim), stack)
                assert result.residual <= 1e-8
