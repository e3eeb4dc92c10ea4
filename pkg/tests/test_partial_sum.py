"""Linearized partial-sum rules on dyadic step functions.

Dual routes: the matrix path (truncated matrix times analysis matrix,
dense linear algebra) and the direct path (index-by-index summation from
the Walsh function definition) share no code and are asserted to agree;
norm bounds are cross-checked between the power-iteration route and the
dense SVD of the independently assembled grid map, plus one fully
hand-computed small case.
"""

import numpy as np
import pytest

from walsh_trunc.partial_sum import (
    LinearizedOperator,
    apply,
    export_manifest,
    import_manifest,
    localize_phi,
    operator_norm_bound,
)
from walsh_trunc.spectral import power_norm
from walsh_trunc.truncation import TruncationMap, random_dyadic, standard_lengths
from walsh_trunc.walsh_core import StepFunction, build_wh


def constant_profile(N: int, depth: int) -> TruncationMap:
    return TruncationMap(N=N, lengths=np.full(1 << N, depth, dtype=np.int64))


def random_profile(N: int, rng: np.random.Generator) -> TruncationMap:
    """Arbitrary (not necessarily dyadic) depths in 1 .. 2^N."""
    return TruncationMap(
        N=N, lengths=rng.integers(1, (1 << N) + 1, size=1 << N)
    )


def random_function(N: int, rng: np.random.Generator) -> StepFunction:
    return StepFunction(N=N, coeffs=rng.normal(size=1 << N))


class TestLinearizedOperator:
    def test_level_mismatch_rejected(self):
        with pytest.raises(ValueError):
            LinearizedOperator(N=3, phi=constant_profile(2, 2))

    def test_full_depth_matrix_is_the_orthogonal_matrix(self):
        op = LinearizedOperator(N=3, phi=constant_profile(3, 8))
        assert np.array_equal(op.matrix().dense(), build_wh(3).entries)

    def test_manifest_round_trip(self, rng):
        op = LinearizedOperator(N=4, phi=random_profile(4, rng))
        rebuilt = import_manifest(export_manifest(op))
        assert rebuilt == op

    def test_manifest_import_skips_comments_and_blanks(self):
        text = "# depth profile\n\n0,2\n1,1\n"
        op = import_manifest(text)
        assert op.N == 1
        assert op.phi.lengths.tolist() == [2, 1]


class TestLocalizePhi:
    def test_same_level_is_identity(self, rng):
        phi = random_profile(3, rng)
        assert localize_phi(phi, 3) == phi

    def test_single_split_replicates(self):
        phi = TruncationMap(N=1, lengths=np.array([2, 1]))
        assert localize_phi(phi, 2).lengths.tolist() == [2, 2, 1, 1]

    def test_two_level_refinement(self):
        phi = TruncationMap(N=2, lengths=np.array([4, 4, 2, 1]))
        assert localize_phi(phi, 3).lengths.tolist() == [4, 4, 4, 4, 2, 2, 1, 1]

    def test_rejects_coarser_target(self):
        phi = TruncationMap(N=3, lengths=np.full(8, 3, dtype=np.int64))
        with pytest.raises(ValueError):
            localize_phi(phi, 2)

    def test_each_coarse_value_constant_on_fine_block(self, rng):
        phi = random_profile(3, rng)
        fine = localize_phi(phi, 6)
        blocks = fine.lengths.reshape(8, -1)
        assert np.all(blocks == phi.lengths[:, None])

    def test_refinement_composes(self, rng):
        phi = random_dyadic(3, rng).phi
        assert localize_phi(localize_phi(phi, 5), 7) == localize_phi(phi, 7)


class TestApply:
    def test_full_depth_reconstructs(self, rng):
        op = LinearizedOperator(N=4, phi=constant_profile(4, 16))
        f = random_function(4, rng)
        for method in ("matrix", "direct"):
            out = apply(op, f, method=method)
            assert np.max(np.abs(out.coeffs - f.coeffs)) <= 1e-12

    def test_depth_one_returns_the_average(self, rng):
        op = LinearizedOperator(N=3, phi=constant_profile(3, 1))
        f = random_function(3, rng)
        mean = float(np.mean(f.values()))
        for method in ("matrix", "direct"):
            out = apply(op, f, method=method).values()
            assert np.max(np.abs(out - mean)) <= 1e-13

    def test_hand_computed_small_case(self):
        # level 2, f with values (1, 2, 3, 4), depths (4, 2, 1, 3).
        # Walsh coefficients: 5/2, -1, -1/2, 0; summing them per depth by
        # hand gives output values (1, 3/2, 5/2, 4).
        op = LinearizedOperator(N=2, phi=TruncationMap(N=2, lengths=np.array([4, 2, 1, 3])))
        f = StepFunction(N=2, coeffs=np.array([1.0, 2.0, 3.0, 4.0]) / 2.0)
        assert np.allclose(f.values(), [1.0, 2.0, 3.0, 4.0], atol=0)
        expected = np.array([1.0, 1.5, 2.5, 4.0])
        for method in ("matrix", "direct"):
            out = apply(op, f, method=method).values()
            assert np.max(np.abs(out - expected)) <= 1e-14

    def test_matrix_equals_direct_on_random_dyadic_profiles(self, rng):
        for _ in range(20):
            op = LinearizedOperator(N=4, phi=random_dyadic(4, rng).phi)
            f = random_function(4, rng)
            matrix_out = apply(op, f, method="matrix")
            direct_out = apply(op, f, method="direct")
            assert np.max(np.abs(matrix_out.coeffs - direct_out.coeffs)) <= 1e-12

    def test_matrix_equals_direct_up_to_level_eight(self, rng):
        for N in (5, 6, 7, 8):
            op = LinearizedOperator(N=N, phi=random_profile(N, rng))
            f = random_function(N, rng)
            matrix_out = apply(op, f, method="matrix")
            direct_out = apply(op, f, method="direct")
            assert np.max(np.abs(matrix_out.coeffs - direct_out.coeffs)) <= 1e-12

    def test_level_mismatch_rejected(self, rng):
        op = LinearizedOperator(N=3, phi=constant_profile(3, 4))
        with pytest.raises(ValueError):
            apply(op, random_function(4, rng))

    def test_unknown_method_rejected(self, rng):
        op = LinearizedOperator(N=3, phi=constant_profile(3, 4))
        with pytest.raises(ValueError):
            apply(op, random_function(3, rng), method="fast")


class TestOperatorNormBound:
    def test_full_depth_rule_is_an_isometry(self):
        op = LinearizedOperator(N=4, phi=constant_profile(4, 16))
        result = operator_norm_bound(op)
        assert abs(result.bound - 1.0) <= 1e-12
        assert abs(result.exact - 1.0) <= 1e-12

    def test_standard_profile_level_seven_matches_frozen_norm(self):
        phi = TruncationMap(N=7, lengths=standard_lengths(7))
        result = operator_norm_bound(LinearizedOperator(N=7, phi=phi))
        assert abs(result.bound - 1.4739785994718841) <= 1e-9
        assert abs(result.exact - result.bound) <= 1e-9

    def test_exact_equals_bound_for_random_profiles(self, rng):
        for N in (3, 4, 5, 6):
            for _ in range(3):
                op = LinearizedOperator(N=N, phi=random_dyadic(N, rng).phi)
                result = operator_norm_bound(op)
                assert abs(result.exact - result.bound) <= 1e-9
                assert result.exact <= result.bound + 1e-9

    def test_bound_dominates_sampled_image_norms(self, rng):
        trials_per_case = 2000
        for N in (4, 6, 8):
            for profile in (random_dyadic(N, rng).phi, random_profile(N, rng)):
                op = LinearizedOperator(N=N, phi=profile)
                result = operator_norm_bound(op)
                # independent assembly of the grid map for the batch check
                grid_map = op.matrix().dense().T @ build_wh(N).entries.T
                batch = rng.normal(size=(1 << N, trials_per_case))
                image_norms = np.linalg.norm(grid_map @ batch, axis=0)
                input_norms = np.linalg.norm(batch, axis=0)
                assert np.all(image_norms <= result.bound * input_norms + 1e-9)

    def test_random_profiles_stay_below_standard_profile_norm(self, rng):
        cap = power_norm(
            LinearizedOperator(
                N=5, phi=TruncationMap(N=5, lengths=standard_lengths(5))
            ).matrix()
        ).norm
        worst = 0.0
        for _ in range(300):
            op = LinearizedOperator(N=5, phi=random_dyadic(5, rng).phi)
            worst = max(worst, power_norm(op.matrix()).norm)
        assert worst <= cap + 1e-9

    def test_exceeding_dense_cap_rejected(self):
        op = LinearizedOperator(N=11, phi=constant_profile(11, 2048))
        with pytest.raises(ValueError):
            operator_norm_bound(op)
