"""Tests for Walsh functions and Walsh-Hadamard matrices.

The independent oracle here is the textbook Paley recursion
(``W_0 = 1``, ``W_(2n)(t) = W_n(2t mod 1)``,
``W_(2n+1)(t) = r_1(t) * W_n(2t mod 1)``) evaluated in exact rational
arithmetic, against which the bit-twiddling implementation is checked.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from walsh_trunc.walsh_core import (
    DENSE_CAP_DEFAULT,
    DyadicPoint,
    StepFunction,
    analyze,
    bit_reverse,
    build_wh,
    synthesize,
    walsh_eval,
    wh_sign_block,
    wh_sign_column,
)


def walsh_recursive(n: int, t: Fraction) -> int:
    """Oracle: evaluate the Paley-ordered Walsh function by pure recursion."""
    assert 0 <= t < 1
    if n == 0:
        return 1
    first_digit_sign = 1 if t < Fraction(1, 2) else -1
    t_shifted = (2 * t) % 1
    rest = walsh_recursive(n // 2, t_shifted)
    return rest if n % 2 == 0 else first_digit_sign * rest


def dyadic(numerator: int, scale: int) -> DyadicPoint:
    return DyadicPoint(numerator=numerator, scale=scale)


class TestBitReverse:
    def test_small_cases(self):
        assert bit_reverse(0b110, 3) == 0b011
        assert bit_reverse(0b001, 3) == 0b100
        assert bit_reverse(0, 0) == 0

    def test_involution(self):
        for width in range(1, 9):
            for k in range(1 << width):
                assert bit_reverse(bit_reverse(k, width), width) == k

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            bit_reverse(8, 3)


class TestWalshEval:
    def test_index_zero_is_constant_one(self):
        for num, scale in [(0, 0), (1, 3), (5, 4), (131, 9)]:
            assert walsh_eval(0, dyadic(num, scale)) == 1

    def test_index_one_flips_at_one_half(self):
        assert walsh_eval(1, dyadic(0, 1)) == 1
        assert walsh_eval(1, dyadic(1, 1)) == -1
        assert walsh_eval(1, dyadic(3, 3)) == 1  # 3/8 < 1/2
        assert walsh_eval(1, dyadic(5, 3)) == -1  # 5/8 >= 1/2

    def test_frozen_value_index5_at_three_eighths(self):
        # Hand evaluation through the recursion: W_5(3/8) = W_2(3/4) = W_1(1/2) = -1.
        assert walsh_eval(5, dyadic(3, 3)) == -1
        assert walsh_recursive(5, Fraction(3, 8)) == -1

    def test_matches_recursive_oracle_exhaustively(self):
        scale = 5
        denom = 1 << scale
        for n in range(32):
            for k in range(denom):
                expected = walsh_recursive(n, Fraction(k, denom))
                assert walsh_eval(n, dyadic(k, scale)) == expected, (n, k)

    def test_scale_refinement_is_consistent(self):
        # k/2^s and 2k/2^(s+1) are the same point and must agree.
        for n in range(16):
            for s in range(1, 5):
                for k in range(1 << s):
                    assert walsh_eval(n, dyadic(k, s)) == walsh_eval(
                        n, dyadic(2 * k, s + 1)
                    )

    @given(
        n=st.integers(min_value=0, max_value=1023),
        m=st.integers(min_value=0, max_value=1023),
        k=st.integers(min_value=0, max_value=255),
    )
    def test_character_property(self, n: int, m: int, k: int):
        # Walsh functions are characters of the dyadic group:
        # W_n(t) * W_m(t) = W_(n xor m)(t).
        t = dyadic(k, 8)
        assert walsh_eval(n, t) * walsh_eval(m, t) == walsh_eval(n ^ m, t)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            walsh_eval(-1, dyadic(0, 1))


class TestDyadicPoint:
    def test_value(self):
        assert dyadic(3, 3).value == 0.375

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            dyadic(8, 3)
        with pytest.raises(ValueError):
            dyadic(-1, 3)


class TestBuildWH:
    def test_level_one_is_haar(self):
        wh = build_wh(1)
        expected = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        np.testing.assert_allclose(wh.entries, expected, atol=1e-15)

    @pytest.mark.parametrize("N", range(1, 11))
    def test_gram_is_identity(self, N: int):
        wh = build_wh(N)
        gram = wh.entries.T @ wh.entries
        assert np.max(np.abs(gram - np.eye(1 << N))) <= 1e-12

    @pytest.mark.parametrize("N", range(1, 8))
    def test_entries_match_walsh_eval_exhaustively(self, N: int):
        signs = build_wh(N).signs
        for n in range(1 << N):
            for k in range(1 << N):
                assert signs[n, k] == walsh_eval(n, dyadic(k, N)), (N, n, k)

    @pytest.mark.parametrize("N", [8, 9, 10])
    def test_entries_match_walsh_eval_sampled(self, N: int, rng):
        signs = build_wh(N).signs
        size = 1 << N
        for n, k in zip(rng.integers(0, size, 400), rng.integers(0, size, 400)):
            assert signs[n, k] == walsh_eval(int(n), dyadic(int(k), N))

    @pytest.mark.parametrize("N", range(2, 9))
    def test_recursive_block_identity(self, N: int):
        whole = build_wh(N).entries
        half = build_wh(N - 1).entries
        top = np.kron(half, np.array([[1.0, 1.0]])) / np.sqrt(2.0)
        bottom = np.kron(half, np.array([[1.0, -1.0]])) / np.sqrt(2.0)
        np.testing.assert_allclose(whole[: 1 << (N - 1)], top, atol=1e-14)
        np.testing.assert_allclose(whole[1 << (N - 1) :], bottom, atol=1e-14)

    @pytest.mark.parametrize("N", range(1, 9))
    def test_matrix_is_symmetric(self, N: int):
        # With rows = Walsh index and columns = position the matrix is its
        # own transpose (the defining exponent is symmetric under swapping).
        entries = build_wh(N).entries
        np.testing.assert_array_equal(entries, entries.T)

    def test_dense_cap_enforced(self):
        with pytest.raises(ValueError):
            build_wh(DENSE_CAP_DEFAULT + 1)
        with pytest.raises(ValueError):
            build_wh(15, allow_large=True)

    def test_invalid_level_rejected(self):
        with pytest.raises(ValueError):
            build_wh(0)


class TestSignColumns:
    @pytest.mark.parametrize("N", range(1, 9))
    def test_column_matches_dense_matrix(self, N: int):
        signs = build_wh(N).signs
        for k in range(1 << N):
            np.testing.assert_array_equal(wh_sign_column(N, k), signs[:, k])

    def test_block_matches_columns(self, rng):
        N = 9
        cols = rng.integers(0, 1 << N, size=17)
        block = wh_sign_block(N, cols)
        for j, k in enumerate(cols):
            np.testing.assert_array_equal(block[:, j], wh_sign_column(N, int(k)))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            wh_sign_column(3, 8)


class TestStepFunctions:
    @pytest.mark.parametrize("N", range(1, 11))
    def test_analyze_synthesize_roundtrip(self, N: int, rng):
        coeffs = rng.standard_normal(1 << N)
        f = StepFunction(N=N, coeffs=coeffs)
        rebuilt = synthesize(N, analyze(f))
        np.testing.assert_allclose(rebuilt.coeffs, coeffs, atol=1e-12)

    def test_unit_indicator_coefficients(self):
        N = 4
        e0 = np.zeros(1 << N)
        e0[0] = 1.0
        coeffs = analyze(StepFunction(N=N, coeffs=e0))
        # Column 0 of the matrix is constant +2^(-N/2).
        np.testing.assert_allclose(coeffs, np.full(1 << N, 2.0 ** (-N / 2)))

    def test_sampled_walsh_function_gives_unit_vector(self):
        N = 4
        wh = build_wh(N)
        f = StepFunction(N=N, coeffs=wh.entries[:, 3])
        coeffs = analyze(f)
        expected = np.zeros(1 << N)
        expected[3] = 1.0
        np.testing.assert_allclose(coeffs, expected, atol=1e-12)

    def test_matches_bruteforce_inner_products(self, rng):
        N = 4
        c = rng.standard_normal(1 << N)
        coeffs = analyze(StepFunction(N=N, coeffs=c))
        for n in range(1 << N):
            brute = sum(
                c[k] * walsh_eval(n, dyadic(k, N)) * 2.0 ** (-N / 2)
                for k in range(1 << N)
            )
            assert coeffs[n] == pytest.approx(brute, abs=1e-12)

    def test_analysis_preserves_l2_norm(self, rng):
        N = 6
        c = rng.standard_normal(1 << N)
        coeffs = analyze(StepFunction(N=N, coeffs=c))
        assert np.linalg.norm(coeffs) == pytest.approx(np.linalg.norm(c), rel=1e-12)

    def test_values_scaling(self):
        f = StepFunction(N=2, coeffs=np.array([1.0, 0.0, -1.0, 2.0]))
        np.testing.assert_allclose(f.values(), 2.0 * f.coeffs)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            StepFunction(N=3, coeffs=np.ones(7))
