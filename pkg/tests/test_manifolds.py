import math

import numpy as np
import pytest

from specavg.manifolds import (
    COS,
    SIN,
    BasisBudgetError,
    BasisMode,
    DomainError,
    EigenIndex,
    ManifoldKind,
    ManifoldSpec,
    build_basis,
    build_basis_within,
    canonicalize,
    eigenvalue_of,
    eval_basis,
    geodesic_distance,
)

from oracles import (
    brute_force_levels,
    fd_laplacian_eigenvalue,
    inner_product,
    quadrature_grid,
    torus_basis_value,
)

TORUS1 = ManifoldSpec(ManifoldKind.FLAT_TORUS, 1)
TORUS2 = ManifoldSpec(ManifoldKind.FLAT_TORUS, 2)
CIRCLE = ManifoldSpec(ManifoldKind.CIRCLE, 1)


class TestManifoldSpec:
    def test_circle_must_be_one_dimensional(self):
        with pytest.raises(ValueError):
            ManifoldSpec(ManifoldKind.CIRCLE, 2)

    def test_cosine_only_is_torus_only(self):
        with pytest.raises(ValueError):
            ManifoldSpec(ManifoldKind.CIRCLE, 1, BasisMode.COSINE_ONLY)

    def test_circle_agrees_with_torus_under_rescaling(self):
        # theta = pi * x maps the d=1 torus onto the circle
        torus_basis = build_basis(TORUS1, 5)
        circle_basis = build_basis(CIRCLE, 5)
        x = np.linspace(-1.0, 1.0, 17, endpoint=False)[:, None]
        np.testing.assert_allclose(
            eval_basis(torus_basis, x), eval_basis(circle_basis, math.pi * x),
            atol=1e-12)


class TestEigenIndex:
    def test_sin_at_zero_frequency_rejected(self):
        with pytest.raises(ValueError):
            EigenIndex((0,), (SIN,))

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValueError):
            EigenIndex((-1,), (COS,))

    def test_same_eigenspace_iff_same_norm(self):
        basis = build_basis(TORUS2, 21)
        for space in basis.eigenspaces:
            norms = {m.freq_norm_sq for m in space.members}
            assert len(norms) == 1
        all_norms = [s.members[0].freq_norm_sq for s in basis.eigenspaces]
        assert len(set(all_norms)) == len(all_norms)


class TestBuildBasis:
    def test_min_dim_one_gives_constant(self):
        basis = build_basis(TORUS1, 1)
        assert basis.total_dim == 1
        assert basis.eigenspaces[0].eigenvalue == 0.0
        assert basis.members[0] == EigenIndex((0,), (COS,))

    def test_first_nontrivial_torus_eigenspace(self):
        # frozen from brute-force enumeration: level 1 has one vector (1,)
        # carrying cos and sin, so dims are 1 then 2
        basis = build_basis(TORUS1, 2)
        assert [s.dim for s in basis.eigenspaces] == [1, 2]
        assert basis.cumulative_dims == (1, 3)
        levels = brute_force_levels(1, 1)
        assert [tuple(levels[s]) for s in sorted(levels)] == [((0,),), ((1,),)]

    def test_circle_eigenspaces_are_sin_cos_pairs(self):
        basis = build_basis(CIRCLE, 3)
        assert [s.dim for s in basis.eigenspaces] == [1, 2]
        space = basis.eigenspaces[1]
        assert space.eigenvalue == 1.0
        assert [m.trig_pattern for m in space.members] == [(COS,), (SIN,)]

    def test_matches_brute_force_enumeration(self):
        basis = build_basis(TORUS2, 21)
        levels = brute_force_levels(2, max(s.members[0].freq_norm_sq
                                           for s in basis.eigenspaces))
        for space in basis.eigenspaces:
            norm_sq = space.members[0].freq_norm_sq
            expected_vectors = sorted(levels[norm_sq])
            got_vectors = sorted({m.frequencies for m in space.members})
            assert got_vectors == expected_vectors
            # full Fourier: 2^(#nonzero coords) patterns per vector
            expected_dim = sum(2 ** sum(1 for f in v if f) for v in expected_vectors)
            assert space.dim == expected_dim

    def test_equal_norm_frequencies_merge_into_one_eigenspace(self):
        # level 25 contains both (0,5)-type and (3,4)-type vectors
        basis = build_basis(TORUS2, 120)
        spaces = [s for s in basis.eigenspaces if s.members[0].freq_norm_sq == 25]
        assert len(spaces) == 1
        vectors = {m.frequencies for m in spaces[0].members}
        assert vectors == {(0, 5), (5, 0), (3, 4), (4, 3)}

    def test_determinism(self):
        first = build_basis(TORUS2, 33)
        second = build_basis(TORUS2, 33)
        assert first.members == second.members
        assert first.cumulative_dims == second.cumulative_dims

    def test_budget_exhaustion_is_an_error(self):
        with pytest.raises(BasisBudgetError):
            build_basis(ManifoldSpec(ManifoldKind.FLAT_TORUS, 3), 100_000,
                        lattice_budget=500)

    def test_min_total_dim_validated(self):
        with pytest.raises(ValueError):
            build_basis(TORUS1, 0)

    def test_cosine_only_mode(self):
        manifold = ManifoldSpec(ManifoldKind.FLAT_TORUS, 10, BasisMode.COSINE_ONLY)
        basis = build_basis(manifold, 176)
        assert basis.cumulative_dims == (1, 11, 56, 176)
        assert all(SIN not in m.trig_pattern for m in basis.members)

    def test_build_within_never_splits_an_eigenspace(self):
        basis = build_basis_within(TORUS2, 4)
        assert basis.total_dim == 1  # next eigenspace would overflow to 5
        basis = build_basis_within(TORUS2, 5)
        assert basis.total_dim == 5


class TestEvalBasis:
    def test_constant_function_is_one(self):
        basis = build_basis(TORUS2, 1)
        assert eval_basis(basis, np.array([0.3, -0.7]))[0] == 1.0

    def test_cos_at_zero_is_sqrt2(self):
        basis = build_basis(TORUS1, 2)
        values = eval_basis(basis, np.array([0.0]))
        np.testing.assert_allclose(values, [1.0, math.sqrt(2.0), 0.0], atol=1e-15)

    def test_product_mode_zero(self):
        basis = build_basis(TORUS2, 9)
        idx = basis.members.index(EigenIndex((1, 1), (COS, COS)))
        value = eval_basis(basis, np.array([0.5, 0.5]))[idx]
        assert abs(value) < 1e-15

    def test_matches_direct_product_form(self):
        basis = build_basis(TORUS2, 21)
        rng = np.random.default_rng(0)
        pts = rng.uniform(-1.0, 1.0, size=(25, 2))
        values = eval_basis(basis, pts)
        for j, member in enumerate(basis.members):
            np.testing.assert_allclose(
                values[:, j],
                torus_basis_value(member.frequencies, member.trig_pattern, pts),
                atol=1e-13)

    def test_out_of_range_is_domain_error(self):
        basis = build_basis(TORUS1, 2)
        with pytest.raises(DomainError):
            eval_basis(basis, np.array([1.0]))
        with pytest.raises(DomainError):
            eval_basis(basis, np.array([-1.0 - 1e-9]))

    def test_canonicalize_then_eval(self):
        basis = build_basis(TORUS1, 3)
        wrapped = canonicalize(TORUS1, np.array([2.3]))
        np.testing.assert_allclose(wrapped, [0.3], atol=1e-12)
        np.testing.assert_allclose(eval_basis(basis, wrapped),
                                   eval_basis(basis, np.array([0.3])), atol=1e-12)

    def test_canonicalize_boundary(self):
        assert canonicalize(TORUS1, np.array([1.0]))[0] == -1.0
        assert canonicalize(TORUS1, np.array([-1.0]))[0] == -1.0

    def test_canonicalize_always_lands_in_domain(self):
        rng = np.random.default_rng(17)
        for manifold in (TORUS1, CIRCLE):
            hw = manifold.halfwidth
            crafted = np.array([hw, -hw, 3 * hw, -3 * hw, 101 * hw,
                                np.nextafter(hw, 10.0), np.nextafter(-hw, -10.0),
                                np.nextafter(hw, 0.0), 0.0, -0.0])
            values = np.concatenate([crafted, rng.uniform(-50.0, 50.0, size=500)])
            wrapped = canonicalize(manifold, values)
            assert np.all(wrapped >= -hw) and np.all(wrapped < hw)


class TestEigenvalues:
    def test_constant_eigenvalue_zero(self):
        assert eigenvalue_of(EigenIndex((0, 0), (COS, COS))) == 0.0

    def test_fundamental_matches_finite_differences(self):
        # frozen oracle value: second derivative of cos(pi x) gives pi^2
        index = EigenIndex((1,), (COS,))
        assert eigenvalue_of(index) == pytest.approx(math.pi**2, rel=1e-12)
        oracle = fd_laplacian_eigenvalue((1,), (0,), 1)
        assert eigenvalue_of(index) == pytest.approx(oracle, rel=1e-5)

    def test_mixed_frequency_matches_finite_differences(self):
        index = EigenIndex((1, 2), (COS, SIN))
        assert eigenvalue_of(index) == pytest.approx(5.0 * math.pi**2, rel=1e-12)
        oracle = fd_laplacian_eigenvalue((1, 2), (0, 1), 2)
        assert eigenvalue_of(index) == pytest.approx(oracle, rel=1e-5)

    def test_circle_eigenvalue_is_k_squared(self):
        index = EigenIndex((3,), (COS,))
        assert eigenvalue_of(index, CIRCLE) == 9.0


class TestOrthonormality:
    @pytest.mark.parametrize("manifold,min_dim", [
        (TORUS1, 9), (TORUS2, 33), (ManifoldSpec(ManifoldKind.FLAT_TORUS, 3), 57),
        (CIRCLE, 9),
    ])
    def test_gram_is_identity_under_quadrature(self, manifold, min_dim):
        basis = build_basis(manifold, min_dim)
        assert basis.total_dim <= 64
        max_freq = max(max(m.frequencies) for m in basis.members)
        nodes, weight = quadrature_grid(manifold.dimension, manifold.halfwidth,
                                        4 * max_freq + 1)
        values = eval_basis(basis, nodes)
        gram = values.T @ values * weight
        assert np.max(np.abs(gram - np.eye(basis.total_dim))) <= 1e-10

    def test_eigenfunction_property_on_fine_grid(self):
        basis = build_basis(TORUS1, 7)
        for member in basis.members:
            expected = eigenvalue_of(member)
            if expected == 0.0:
                continue
            oracle = fd_laplacian_eigenvalue(member.frequencies, member.trig_pattern, 1)
            assert abs(oracle - expected) / expected <= 1e-3


class TestGeodesicDistance:
    def test_wraps_around(self):
        assert geodesic_distance(TORUS1, np.array([-0.9]), np.array([0.9])) == pytest.approx(0.2)

    def test_circle_arc(self):
        d = geodesic_distance(CIRCLE, np.array([-3.0]), np.array([3.0]))
        assert d == pytest.approx(2.0 * math.pi - 6.0)
