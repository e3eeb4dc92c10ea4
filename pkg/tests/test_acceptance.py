"""Acceptance gate for the package.

One test per headline guarantee, so ``pytest -v tests/test_acceptance.py``
prints one pass/fail line each for: the reference norm table, the total
correlations, the norm-curve growth law, the symmetry-defect values, the
gated deep level-vector image norms, the six cross-route property checks,
and the randomized evidence sweeps with their exit-code contract.
"""

import math
import time

import numpy as np

from walsh_trunc.cli import main
from walsh_trunc.critical import extract_params, eval_F, find_critical, grad_F
from walsh_trunc.critical import FParams
from walsh_trunc.partial_sum import LinearizedOperator, apply
from walsh_trunc.spectral import (
    build_level_matrix,
    dense_norm,
    ensure_two_branch_reduction_validated,
    left_half_image,
    level_lift,
    level_norm_curve,
    level_vector,
    power_norm,
    total_correlation,
    two_branch_level_blocks,
)
from walsh_trunc.truncation import (
    TruncationMap,
    TWHMatrix,
    random_dyadic,
    standard_truncation,
    trim,
    two_branch,
)
from walsh_trunc.walsh_core import StepFunction, build_wh


def test_norm_table_values():
    """Six reference operator norms, reproduced within their tolerances
    in under a minute."""
    start = time.perf_counter()
    checks = [
        (dense_norm(standard_truncation(4)).norm, 1.366, 0.001),
        (dense_norm(two_branch(4, 3)).norm, 1.31, 0.01),
        (dense_norm(trim(two_branch(4, 3))).norm, 1.361, 0.001),
        (dense_norm(standard_truncation(7)).norm, 1.4739, 0.0001),
        (dense_norm(trim(two_branch(7, 6))).norm, 1.4746, 0.0001),
        (dense_norm(standard_truncation(8)).norm, 1.498, 0.001),
    ]
    elapsed = time.perf_counter() - start
    for computed, expected, tolerance in checks:
        assert abs(computed - expected) <= tolerance, (
            f"norm {computed} not within {tolerance} of {expected}"
        )
    assert elapsed < 60.0, f"norm table took {elapsed:.1f}s (budget 60s)"


def test_total_correlation_values():
    """Reference total correlations at level 7, within 0.01."""
    checks = [
        (total_correlation(standard_truncation(7)), 191.50),
        (total_correlation(two_branch(7, 6)), 191.00),
        (total_correlation(trim(two_branch(7, 6))), 201.67),
    ]
    for computed, expected in checks:
        assert abs(computed - expected) <= 0.01, (
            f"correlation {computed} not within 0.01 of {expected}"
        )


def test_level_norm_curve_growth_and_cap():
    """The norm curve grows strictly through level 1000, stays below
    1 + sqrt(2)/2, and passes 1.70 — inside two minutes."""
    start = time.perf_counter()
    curve = level_norm_curve(1000)
    elapsed = time.perf_counter() - start
    values = curve[1:]
    assert np.all(np.diff(values) > 0.0), "curve not strictly increasing"
    assert np.all(values < 1.70710679), "curve reached the conjectured cap"
    assert curve[1000] > 1.70
    assert elapsed < 120.0, f"curve took {elapsed:.1f}s (budget 120s)"


def test_recursion_symmetry_defect_values():
    """The interior symmetry defect of the top level vector: 0.1479 at
    level 24, 0.0074 at level 1000 (both within 0.0005)."""
    defect_24 = left_half_image(level_vector(24)).defect
    defect_1000 = left_half_image(level_vector(1000)).defect
    assert abs(defect_24 - 0.1479) <= 0.0005
    assert abs(defect_1000 - 0.0074) <= 0.0005


def test_gated_deep_level_vector_image_norms():
    """Image norms of the deep unit primary blocks under the one-level-down
    level matrix, behind the reduced-route validation gate."""
    ensure_two_branch_reduction_validated()
    level_matrix = build_level_matrix(24).entries
    for K, expected in ((0, 1.6464), (24, 1.6468)):
        primary = two_branch_level_blocks(25, K).primary
        unit = primary / np.linalg.norm(primary)
        image_norm = float(np.linalg.norm(level_matrix @ unit))
        assert abs(image_norm - expected) <= 0.0005, (
            f"image norm {image_norm} at depth {K} not within 0.0005 "
            f"of {expected}"
        )


def test_property_suite():
    """Six cross-route properties at their stated tolerances."""
    rng = np.random.default_rng(20260816)

    # (a) Gram dichotomy: every inner product of truncated sign columns is
    # 0 or +-min(length_i, length_j)/2^N.  Exhaustive over all column
    # pairs and dyadic length pairs through level 4 (the inner product
    # depends on the lengths only through their minimum), randomized
    # through level 8.
    for N in range(1, 5):
        signs = np.rint(build_wh(N).entries * 2.0 ** (N / 2))
        for exponent in range(N + 1):
            m = 1 << exponent
            prefix_gram = signs[:m].T @ signs[:m]
            magnitudes = np.abs(prefix_gram)
            assert np.all((magnitudes == 0.0) | (magnitudes == float(m)))
    for N in range(5, 9):
        for _ in range(5):
            matrix = random_dyadic(N, rng)
            gram = matrix.gram()
            lengths = matrix.effective_lengths
            allowed = np.minimum(lengths[:, None], lengths[None, :]) / matrix.size
            ok = np.isclose(gram, 0.0, atol=1e-15) | np.isclose(
                np.abs(gram), allowed, atol=1e-15
            )
            assert ok.all()

    # (b) interior critical points satisfy the value identity to 1e-8
    # over 1000 random parameter draws, and the closed-form gradient
    # matches central differences to 1e-6
    worst_identity = 0.0
    worst_gradient = 0.0
    step = 1e-6
    for _ in range(1000):
        params = FParams(
            A2=float(rng.uniform(0.1, 3.0)),
            B2=float(rng.uniform(0.1, 3.0)),
            C2=float(rng.uniform(0.1, 3.0)),
            x=float(rng.uniform(0.05, 1.5)),
            y=float(rng.uniform(0.05, 1.5)),
        )
        report = find_critical(params)
        assert report.interior
        worst_identity = max(
            worst_identity, abs(report.F_value - report.lhs_identity)
        )
        # a fresh interior point, kept away from the rim where the
        # chart's 1/gamma terms amplify finite-difference noise
        radius = math.sqrt(rng.uniform(0.0, (1.0 - 0.15) ** 2))
        angle = rng.uniform(0.0, math.pi / 2)
        alpha, beta = radius * math.cos(angle), radius * math.sin(angle)
        exact = grad_F(params, alpha, beta)
        numeric = (
            (eval_F(params, alpha + step, beta)
             - eval_F(params, alpha - step, beta)) / (2 * step),
            (eval_F(params, alpha, beta + step)
             - eval_F(params, alpha, beta - step)) / (2 * step),
        )
        worst_gradient = max(
            worst_gradient,
            abs(exact[0] - numeric[0]),
            abs(exact[1] - numeric[1]),
        )
    assert worst_identity <= 1e-8, f"value identity off by {worst_identity}"
    assert worst_gradient <= 1e-6, f"gradient mismatch {worst_gradient}"

    # (c) the in-house power route agrees with the dense SVD oracle to
    # 1e-9 on every matrix family through level 8
    matrices = [standard_truncation(N) for N in range(1, 9)]
    matrices += [
        TWHMatrix(N=3, phi=TruncationMap(N=3, lengths=np.full(8, 8, dtype=np.int64)))
    ]
    for N in range(2, 9):
        for K in range(N):
            matrices.append(two_branch(N, K))
            matrices.append(trim(two_branch(N, K)))
    for matrix in matrices:
        gap = abs(power_norm(matrix).norm - dense_norm(matrix).norm)
        assert gap <= 1e-9, f"route gap {gap} at level {matrix.N}"

    # (d) the block objective at the extracted optimizer equals the dense
    # squared norm to 1e-9 through level 10, every secondary depth
    for N in range(2, 11):
        for K in range(N):
            params, report, details = extract_params(N, K)
            if "dense_check" in details:
                dense = details["dense_check"]["norm"]
            else:
                dense = dense_norm(two_branch(N, K)).norm
            dense_squared = dense**2
            value = eval_F(params, report.alpha, report.beta)
            assert abs(value - dense_squared) <= 1e-9, (
                f"objective vs dense norm off by "
                f"{abs(value - dense_squared)} at ({N},{K})"
            )

    # (e) the lifted level vector's 1-norm identity, relative 1e-9,
    # through level 12
    for N in range(1, 13):
        vector = level_vector(N)
        lifted = level_lift(vector)
        expected = 2.0 ** (N / 2) * vector.lam * vector.c[0]
        assert abs(float(np.abs(lifted).sum()) - expected) <= 1e-9 * expected

    # (f) matrix route equals direct summation to 1e-12 through level 8
    for N in range(1, 9):
        size = 1 << N
        profiles = [
            TruncationMap(N=N, lengths=np.full(size, size, dtype=np.int64)),
            standard_truncation(N).phi,
        ]
        profiles += [random_dyadic(N, rng).phi for _ in range(2)]
        for phi in profiles:
            operator = LinearizedOperator(N=N, phi=phi)
            f = StepFunction(N=N, coeffs=rng.normal(size=size))
            via_matrix = apply(operator, f, method="matrix")
            via_direct = apply(operator, f, method="direct")
            gap = float(np.max(np.abs(via_matrix.coeffs - via_direct.coeffs)))
            assert gap <= 1e-12, f"route gap {gap} at level {N}"


def test_evidence_suites_report_no_violations(tmp_path):
    """The randomized evidence commands find no counterexamples: depth
    sweeps stay monotone through level 10, ten thousand random profiles
    never beat the standard profile, and node reduction never lowers the
    norm (exit code 4 would flag a violation)."""
    for N in range(2, 11):
        code = main(["ksweep", "--n", str(N), "--out", str(tmp_path)])
        assert code == 0, f"depth sweep at level {N} exited {code}"
    trial_plan = {2: 2000, 3: 2000, 4: 2000, 5: 1500, 6: 1200,
                  7: 800, 8: 400, 9: 80, 10: 20}
    assert sum(trial_plan.values()) == 10_000
    for N, trials in trial_plan.items():
        code = main(["hunt", "--n", str(N), "--trials", str(trials),
                     "--seed", "1", "--out", str(tmp_path)])
        assert code == 0, f"hunt at level {N} exited {code}"
    assert not list(tmp_path.glob("hunt_counterexample*"))
