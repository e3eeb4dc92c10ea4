"""Block-parameter objective for two-branch truncations.

Grouping the unit optimizer of a two-branch matrix into its primary,
secondary, and minimal-length column blocks reduces the squared image
norm to a function of the three block magnitudes ``alpha, beta, gamma``
and five scalars: the squared image norms of the unit primary and
secondary directions (``A2``, ``B2``), the relative weight of the
minimal-length block (``C2``), and the scaled coordinate sums of the two
directions (``x``, ``y``).  With ``gamma`` the positive root of
``1 - alpha^2 - beta^2`` and ``C = sqrt(C2)``::

    F(alpha, beta) = alpha^2 A2 + beta^2 B2 + gamma^2 C2
                     + 2 gamma C (alpha x + beta y)

This module evaluates that objective, splits it into its quadratic and
cross parts, locates interior critical points — where the objective
equals both ``A2 + C x gamma / alpha`` and ``B2 + C y gamma / beta`` —
extracts the five scalars from concrete two-branch optimizers, and sweeps
the secondary depth, flagging monotonicity violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    build_level_matrix,
    dense_norm,
    level_vector,
    two_branch_level_blocks,
)
from .truncation import two_branch

__all__ = [
    "FParams",
    "CriticalReport",
    "KSweepRow",
    "KSweepTable",
    "eval_F",
    "split_F",
    "grad_F",
    "f1_maximizer_ratios",
    "find_critical",
    "extract_params",
    "k_sweep",
    "KSWEEP_CSV_HEADER",
]

# deterministic multi-start seeds for the critical-point search, spread
# over the quarter disk (each satisfies alpha^2 + beta^2 < 1)
_STARTS = ((0.9, 0.05), (0.05, 0.9), (0.6, 0.55), (0.7, 0.3), (0.35, 0.35))
_EDGE = 1e-6  # distance from a boundary below which a point is not interior


@dataclass(frozen=True)
class FParams:
    """The five scalars of the block objective.

    ``A2``/``B2`` are the squared image norms of the unit primary and
    secondary directions, ``C2`` the relative weight of the
    minimal-length block, and ``x``/``y`` the coordinate sums of the two
    directions scaled by 2^(-N/2).  A missing secondary branch is
    encoded as ``B2 = y = None`` (both together); the objective then
    treats the secondary direction as absent.
    """

    A2: float
    B2: float | None
    C2: float
    x: float
    y: float | None

    def __post_init__(self) -> None:
        if (self.B2 is None) != (self.y is None):
            raise ValueError("B2 and y must be both set or both None")
        for name in ("A2", "B2", "C2", "x", "y"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ValueError(f"{name} must be a nonnegative real, got {value}")

    @property
    def has_secondary(self) -> bool:
        return self.B2 is not None


def _effective(p: FParams) -> tuple[float, float, float, float, float]:
    return (
        float(p.A2),
        0.0 if p.B2 is None else float(p.B2),
        float(p.C2),
        float(p.x),
        0.0 if p.y is None else float(p.y),
    )


def _gamma_of(alpha: float, beta: float) -> float:
    rest = 1.0 - alpha * alpha - beta * beta
    if rest < -1e-12:
        raise ValueError(
            f"alpha^2 + beta^2 = {alpha * alpha + beta * beta} exceeds 1"
        )
    return math.sqrt(max(rest, 0.0))


def eval_F(p: FParams, alpha: float, beta: float) -> float:
    """The block objective at (alpha, beta), with gamma the positive root
    of 1 - alpha^2 - beta^2.  Raises ``ValueError`` outside the disk."""
    A2, B2, C2, x, y = _effective(p)
    gamma = _gamma_of(alpha, beta)
    C = math.sqrt(C2)
    return (
        alpha * alpha * A2
        + beta * beta * B2
        + gamma * gamma * C2
        + 2.0 * gamma * C * (alpha * x + beta * y)
    )


def split_F(p: FParams, alpha: float, beta: float) -> tuple[float, float]:
    """The objective split into its quadratic part (the three squared-norm
    terms) and its cross part ``2 gamma C (alpha x + beta y)``; the two
    parts sum to ``eval_F`` exactly."""
    A2, B2, C2, x, y = _effective(p)
    gamma = _gamma_of(alpha, beta)
    C = math.sqrt(C2)
    quadratic = alpha * alpha * A2 + beta * beta * B2 + gamma * gamma * C2
    cross = 2.0 * gamma * C * (alpha * x + beta * y)
    return quadratic, cross


def grad_F(p: FParams, alpha: float, beta: float) -> tuple[float, float]:
    """Analytic gradient of the objective in the (alpha, beta) chart:

        dF/dalpha = 2 alpha (A2 - C2) + 2 gamma C x
                    - 2 C (alpha/gamma) (alpha x + beta y)

    and symmetrically for beta.  When ``C2 = 0`` the cross terms vanish
    identically and the rim gamma = 0 poses no problem; otherwise the
    chart gradient is undefined on the rim and ``ValueError`` is raised.
    """
    A2, B2, C2, x, y = _effective(p)
    gamma = _gamma_of(alpha, beta)
    C = math.sqrt(C2)
    if C == 0.0:
        return 2.0 * alpha * A2, 2.0 * beta * B2
    if gamma == 0.0:
        raise ValueError("gradient undefined on the rim alpha^2 + beta^2 = 1")
    mixed = alpha * x + beta * y
    d_alpha = (
        2.0 * alpha * (A2 - C2) + 2.0 * gamma * C * x - 2.0 * C * alpha / gamma * mixed
    )
    d_beta = (
        2.0 * beta * (B2 - C2) + 2.0 * gamma * C * y - 2.0 * C * beta / gamma * mixed
    )
    return d_alpha, d_beta


def f1_maximizer_ratios(p: FParams) -> tuple[float, float]:
    """Small-ratio prediction for where the cross part of the objective,
    taken alone, is maximized: with ``r = y/x < 1``, approximately
    ``beta = alpha r / (1 - r^2)`` and ``gamma = alpha / sqrt(1 - r^2)``.
    Returns the pair (beta/alpha, gamma/alpha).  A first-order predictor,
    meaningful for small ``r`` only."""
    if not p.has_secondary:
        raise ValueError("prediction requires a secondary direction")
    if p.x <= 0:
        raise ValueError("prediction requires x > 0")
    r = p.y / p.x
    if r >= 1:
        raise ValueError(f"prediction requires y < x, got ratio {r}")
    return r / (1.0 - r * r), 1.0 / math.sqrt(1.0 - r * r)


@dataclass(frozen=True)
class CriticalReport:
    """A located critical point of the block objective.

    At an interior critical point both identity sides equal the objective
    value: ``lhs_identity = A2 + C x gamma / alpha`` and ``rhs_identity =
    B2 + C y gamma / beta`` (NaN when there is no secondary direction).
    ``interior`` is False for boundary attractors, where the identities
    are reported but not guaranteed.
    """

    alpha: float
    beta: float
    gamma: float
    F_value: float
    lhs_identity: float
    rhs_identity: float
    gradient_norm: float
    interior: bool


def _identity_sides(
    p: FParams, alpha: float, beta: float, gamma: float
) -> tuple[float, float]:
    A2, B2, C2, x, y = _effective(p)
    C = math.sqrt(C2)
    lhs = A2 + C * x * gamma / alpha if alpha > 0 else math.nan
    if not p.has_secondary:
        rhs = math.nan
    else:
        rhs = B2 + C * y * gamma / beta if beta > 0 else math.nan
    return lhs, rhs


def _make_report(p: FParams, alpha: float, beta: float) -> CriticalReport:
    gamma = _gamma_of(alpha, beta)
    try:
        g_alpha, g_beta = grad_F(p, alpha, beta)
        gradient_norm = math.hypot(g_alpha, g_beta)
    except ValueError:  # rim point with C > 0: chart gradient undefined
        gradient_norm = math.inf
    lhs, rhs = _identity_sides(p, alpha, beta, gamma)
    interior = (
        alpha > _EDGE
        and beta > _EDGE
        and gamma > _EDGE
        and gradient_norm <= 1e-10
    )
    return CriticalReport(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        F_value=eval_F(p, alpha, beta),
        lhs_identity=lhs,
        rhs_identity=rhs,
        gradient_norm=gradient_norm,
        interior=interior,
    )


def _project(alpha: float, beta: float) -> tuple[float, float]:
    """Nearest point of the quarter disk, held a whisker inside the rim so
    the chart gradient stays finite."""
    alpha = max(alpha, 0.0)
    beta = max(beta, 0.0)
    limit = 1.0 - 1e-9
    rr = alpha * alpha + beta * beta
    if rr > limit:
        scale = math.sqrt(limit / rr)
        alpha *= scale
        beta *= scale
    return alpha, beta


def _ascend(
    p: FParams, alpha: float, beta: float, max_iter: int
) -> tuple[float, float]:
    """Projected-gradient ascent with Armijo backtracking, run until the
    gradient is small enough to hand over to the local polish, or until
    no projected step improves the objective (boundary attractor)."""
    A2, B2, C2, x, y = _effective(p)
    step0 = 0.25 / (1.0 + max(A2, B2, C2, math.sqrt(C2) * (x + y)))
    value = eval_F(p, alpha, beta)
    for _ in range(max_iter):
        g_alpha, g_beta = grad_F(p, alpha, beta)
        if math.hypot(g_alpha, g_beta) <= 1e-7:
            break
        step = step0
        improved = False
        while step > 1e-18:
            cand = _project(alpha + step * g_alpha, beta + step * g_beta)
            gain = g_alpha * (cand[0] - alpha) + g_beta * (cand[1] - beta)
            cand_value = eval_F(p, *cand)
            if gain > 0 and cand_value >= value + 1e-4 * gain:
                alpha, beta = cand
                value = cand_value
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return alpha, beta


def _polish(
    p: FParams, alpha: float, beta: float, tol: float
) -> tuple[float, float]:
    """Damped Newton on the gradient in spherical coordinates.

    The planar (alpha, beta) chart degenerates at the rim (its gradient
    carries 1/gamma terms), which starves both the ascent and any polish
    done in that chart when the maximizer sits close to the rim.  The
    spherical chart alpha = sin(t)cos(f), beta = sin(t)sin(f), gamma =
    cos(t) is regular there, and the objective's derivatives in (t, f)
    have short closed forms.  Falls back to the input point when the
    in-plane magnitude is too small for the angle f to be meaningful, and
    returns as soon as the planar-chart gradient meets ``tol``.
    """
    A2, B2, C2, x, y = _effective(p)
    C = math.sqrt(C2)
    if math.hypot(alpha, beta) < 1e-4:
        return alpha, beta
    theta = math.atan2(math.hypot(alpha, beta), _gamma_of(alpha, beta))
    phi = math.atan2(beta, alpha)

    def planar(theta: float, phi: float) -> tuple[float, float]:
        return (
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
        )

    def spherical_gradient(theta: float, phi: float) -> tuple[float, float]:
        s, c = math.sin(theta), math.cos(theta)
        u, v = math.cos(phi), math.sin(phi)
        m = u * x + v * y
        g_t = 2 * s * c * (u * u * A2 + v * v * B2 - C2) + 2 * C * m * (c * c - s * s)
        g_p = 2 * u * v * s * s * (B2 - A2) + 2 * s * c * C * (u * y - v * x)
        return g_t, g_p

    for _ in range(60):
        alpha, beta = planar(theta, phi)
        if C > 0.0 and _gamma_of(alpha, beta) == 0.0:
            break  # numerically on the rim: hand back as a boundary point
        if math.hypot(*grad_F(p, alpha, beta)) <= tol:
            break
        g_t, g_p = spherical_gradient(theta, phi)
        gnorm = math.hypot(g_t, g_p)
        s, c = math.sin(theta), math.cos(theta)
        u, v = math.cos(phi), math.sin(phi)
        m = u * x + v * y
        h_tt = 2 * (c * c - s * s) * (u * u * A2 + v * v * B2 - C2) - 8 * C * m * s * c
        h_tp = 4 * u * v * s * c * (B2 - A2) + 2 * C * (c * c - s * s) * (u * y - v * x)
        h_pp = 2 * s * s * (B2 - A2) * (u * u - v * v) - 2 * s * c * C * m
        det = h_tt * h_pp - h_tp * h_tp
        if det == 0 or not math.isfinite(det):
            break
        d_t = -(h_pp * g_t - h_tp * g_p) / det
        d_p = -(h_tt * g_p - h_tp * g_t) / det
        scale = 1.0
        accepted = False
        for _ in range(25):
            cand_t = min(max(theta + scale * d_t, 1e-9), math.pi / 2 - 1e-12)
            cand_p = min(max(phi + scale * d_p, 0.0), math.pi / 2)
            if math.hypot(*spherical_gradient(cand_t, cand_p)) < gnorm:
                theta, phi = cand_t, cand_p
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            break
    return planar(theta, phi)


def find_critical(
    p: FParams,
    start: tuple[float, float] | None = None,
    *,
    tol: float = 1e-10,
    max_iter: int = 50_000,
) -> CriticalReport:
    """Locate a critical point of the block objective in the open quarter
    disk by projected-gradient ascent with backtracking, then a damped
    Newton polish, driving the gradient norm to ``tol``.

    With an explicit ``start`` (which must be interior), a single run is
    performed from there; otherwise five deterministic starts are tried
    and the best result returned, preferring interior critical points and
    then larger objective values.  Boundary attractors are reported with
    ``interior=False`` and their identities are not guaranteed.
    """
    if start is not None:
        s_alpha, s_beta = start
        if not (s_alpha > 0 and s_beta > 0 and s_alpha**2 + s_beta**2 < 1):
            raise ValueError(f"start {start} is not interior to the quarter disk")
        starts = (tuple(start),)
    else:
        starts = _STARTS
    reports = []
    for s_alpha, s_beta in starts:
        alpha, beta = _ascend(p, s_alpha, s_beta, max_iter)
        alpha, beta = _polish(p, alpha, beta, tol)
        reports.append(_make_report(p, alpha, beta))
    return max(reports, key=lambda r: (r.interior, r.F_value))


# -- extraction from concrete two-branch optimizers ----------------------------


def _level_weights(count: int) -> np.ndarray:
    weights = np.ones(count)
    if count > 1:
        weights[1:] = 2.0 ** ((np.arange(1, count) - 1) / 2.0)
    return weights


def _weighted_sum(c: np.ndarray) -> float:
    """Coordinate sum of the expanded vector whose level coefficients are
    ``c`` (level j >= 1 holds 2^(j-1) coordinates of 2^((1-j)/2) c_j)."""
    return float(_level_weights(len(c)) @ c)


def _flip_to_nonnegative_mass(c: np.ndarray) -> np.ndarray:
    return -c if _weighted_sum(c) < 0 else c


def _image_norm_squared(c_unit: np.ndarray) -> float:
    """Squared image norm of the unit direction with level coefficients
    ``c_unit`` under the standard truncation of the matching level."""
    level = len(c_unit) - 1
    if level == 0:
        return float(c_unit[0] ** 2)
    return float(np.linalg.norm(build_level_matrix(level).entries @ c_unit) ** 2)


def _dense_cross_check(N: int, K: int, alpha: float, beta: float, gamma: float,
                       x: float, y: float) -> dict:
    """Independent dense-SVD route: split the actual 2^N optimizer into its
    three column blocks, require the minimal-length block to be constant,
    and report deviations from the reduced-route scalars."""
    result = dense_norm(two_branch(N, K))
    vector = result.vector
    half = 1 << (N - 1)
    primary = vector[:half]
    secondary = vector[half : half + (1 << K)]
    tail = vector[half + (1 << K) :]
    if primary.sum() < 0:
        primary, secondary, tail = -primary, -secondary, -tail
    if secondary.sum() < 0:
        secondary = -secondary
    if tail.sum() < 0:
        tail = -tail
    tail_spread = float(np.ptp(tail)) if tail.size else 0.0
    if tail_spread > 1e-9:
        raise RuntimeError(
            f"minimal-length block of the dense optimizer is not constant at "
            f"N={N}, K={K}: spread {tail_spread:.3e}"
        )
    alpha_d = float(np.linalg.norm(primary))
    beta_d = float(np.linalg.norm(secondary))
    gamma_d = float(np.linalg.norm(tail))
    scale = 2.0 ** (-N / 2)
    return {
        "norm": result.norm,
        "tail_spread": tail_spread,
        "alpha_deviation": abs(alpha - alpha_d),
        "beta_deviation": abs(beta - beta_d),
        "gamma_deviation": abs(gamma - gamma_d),
        "x_deviation": abs(x - scale * float(primary.sum()) / alpha_d),
        "y_deviation": abs(y - scale * float(secondary.sum()) / beta_d),
        "primary_nonnegative": bool(np.all(primary >= -1e-12)),
        "secondary_nonnegative": bool(np.all(secondary >= -1e-12)),
    }


def extract_params(
    N: int, K: int | None = None
) -> tuple[FParams, CriticalReport, dict]:
    """Bind the block objective to a concrete two-branch optimizer.

    Solves the reduced two-branch system at level ``N`` with secondary
    depth ``K``, splits its norm vector into primary / secondary /
    minimal-length blocks (each flipped to nonnegative coordinate mass),
    and returns the five objective scalars, a critical-point report, and
    a details dict (norm, route, nonnegativity flags, and — for levels
    within the dense cap — an independent dense-SVD cross-check that also
    verifies the minimal-length block is constant to 1e-9).

    ``K=None`` means no secondary branch (the matrix is the standard
    truncation of level ``N``): the secondary scalars are reported as
    None and the critical point sits on the ``beta = 0`` boundary.  At
    ``K = N-1`` the two branches decouple with equal norms; the reported
    point is the symmetric convention ``alpha = beta = 1/sqrt(2)``,
    ``gamma = 0`` (a rim point, ``interior=False``).
    """
    if N < 2:
        raise ValueError("level N must be >= 2")
    scale = 2.0 ** (-N / 2)

    if K is None:
        lv = level_vector(N)
        c = lv.c
        alpha = float(np.linalg.norm(c[:N]))
        gamma = float(c[N])
        unit_primary = _flip_to_nonnegative_mass(c[:N] / alpha)
        params = FParams(
            A2=_image_norm_squared(unit_primary),
            B2=None,
            C2=0.5,
            x=scale * _weighted_sum(unit_primary),
            y=None,
        )
        g_alpha, _ = grad_F(params, alpha, 0.0)
        lhs, rhs = _identity_sides(params, alpha, 0.0, gamma)
        report = CriticalReport(
            alpha=alpha,
            beta=0.0,
            gamma=gamma,
            F_value=eval_F(params, alpha, 0.0),
            lhs_identity=lhs,
            rhs_identity=rhs,
            gradient_norm=abs(g_alpha),
            interior=False,
        )
        details = {
            "norm": lv.lam,
            "route": "level",
            "secondary": None,
            "primary_nonnegative": bool(np.all(unit_primary >= -1e-12)),
        }
        return params, report, details

    if not 0 <= K <= N - 1:
        raise ValueError(f"secondary depth K={K} must satisfy 0 <= K <= N-1")

    if K == N - 1:
        # decoupled case: both branches carry the one-level-down standard
        # truncation with equal norms; use the symmetric convention
        lv = level_vector(N - 1)
        c = _flip_to_nonnegative_mass(lv.c)
        alpha = beta = 1.0 / math.sqrt(2.0)
        mass = scale * _weighted_sum(c)
        params = FParams(A2=lv.lam**2, B2=lv.lam**2, C2=0.0, x=mass, y=mass)
        g_alpha, g_beta = grad_F(params, alpha, beta)
        lhs, rhs = _identity_sides(params, alpha, beta, 0.0)
        report = CriticalReport(
            alpha=alpha,
            beta=beta,
            gamma=0.0,
            F_value=eval_F(params, alpha, beta),
            lhs_identity=lhs,
            rhs_identity=rhs,
            gradient_norm=math.hypot(g_alpha, g_beta),
            interior=False,
        )
        details = {
            "norm": lv.lam,
            "route": "level",
            "decoupled": True,
            "primary_nonnegative": bool(np.all(c >= -1e-12)),
        }
        return params, report, details

    blocks = two_branch_level_blocks(N, K)
    primary = _flip_to_nonnegative_mass(blocks.primary)
    secondary = _flip_to_nonnegative_mass(blocks.secondary)
    alpha = float(np.linalg.norm(primary))
    beta = float(np.linalg.norm(secondary))
    gamma = abs(blocks.tail)
    unit_primary = primary / alpha
    unit_secondary = secondary / beta
    x = scale * _weighted_sum(unit_primary)
    y = scale * _weighted_sum(unit_secondary)
    params = FParams(
        A2=_image_norm_squared(unit_primary),
        B2=_image_norm_squared(unit_secondary),
        C2=0.5 - 2.0 ** (K - N),
        x=x,
        y=y,
    )
    report = find_critical(params, start=(alpha, beta))
    details = {
        "norm": blocks.norm,
        "route": "level",
        "primary_nonnegative": bool(np.all(unit_primary >= -1e-12)),
        "secondary_nonnegative": bool(np.all(unit_secondary >= -1e-12)),
        "tail_nonnegative": blocks.tail >= -1e-12,
    }
    if N <= 10:
        details["route"] = "level+dense"
        details["dense_check"] = _dense_cross_check(N, K, alpha, beta, gamma, x, y)
    return params, report, details


# -- secondary-depth sweep -------------------------------------------------------


KSWEEP_CSV_HEADER = "K,norm,A2,B2,C2,x,y,alpha,beta,gamma,F_lhs"


@dataclass(frozen=True)
class KSweepRow:
    """One sweep row: the matrix norm and the bound objective scalars at a
    given secondary depth (None = no secondary branch)."""

    K: int | None
    norm: float
    A2: float
    B2: float | None
    C2: float
    x: float
    y: float | None
    alpha: float
    beta: float
    gamma: float
    F_lhs: float


@dataclass(frozen=True)
class KSweepTable:
    """Sweep of secondary depths K = None, 0, .., N-1 at level N, with the
    depths at which the norm or the identity value fails to decrease
    strictly from the previous row."""

    N: int
    rows: tuple[KSweepRow, ...]
    norm_violations: tuple[int, ...]
    lhs_violations: tuple[int, ...]

    def to_csv_text(self) -> str:
        def render(value: float | int | None) -> str:
            if value is None:
                return ""
            return repr(value) if isinstance(value, float) else str(value)

        lines = [KSWEEP_CSV_HEADER]
        for row in self.rows:
            lines.append(
                ",".join(
                    render(value)
                    for value in (
                        -1 if row.K is None else row.K,
                        row.norm,
                        row.A2,
                        row.B2,
                        row.C2,
                        row.x,
                        row.y,
                        row.alpha,
                        row.beta,
                        row.gamma,
                        row.F_lhs,
                    )
                )
            )
        return "\n".join(lines) + "\n"


def k_sweep(N: int) -> KSweepTable:
    """Extract the objective scalars for every secondary depth of level
    ``N`` (starting with the no-secondary case) and flag every depth at
    which the norm, or the identity value ``A2 + C x gamma / alpha``,
    fails to decrease strictly."""
    rows = []
    for K in (None, *range(N)):
        params, report, details = extract_params(N, K)
        rows.append(
            KSweepRow(
                K=K,
                norm=details["norm"],
                A2=params.A2,
                B2=params.B2,
                C2=params.C2,
                x=params.x,
                y=params.y,
                alpha=report.alpha,
                beta=report.beta,
                gamma=report.gamma,
                F_lhs=report.lhs_identity,
            )
        )
    norm_violations = []
    lhs_violations = []
    for previous, current in zip(rows, rows[1:]):
        flag = -1 if current.K is None else current.K
        if not current.norm < previous.norm:
            norm_violations.append(flag)
        if not current.F_lhs < previous.F_lhs:
            lhs_violations.append(flag)
    return KSweepTable(
        N=N,
        rows=tuple(rows),
        norm_violations=tuple(norm_violations),
        lhs_violations=tuple(lhs_violations),
    )
