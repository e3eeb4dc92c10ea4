"""Command-line surface for the package.

Subcommands reproduce the norm tables, sweep curves, and level-vector
listings, run the randomized conjecture-evidence hunts, apply partial-sum
rules to step functions from files, and export matrices.  Every command
writes deterministic CSV (a comment header with version, seed, and
tolerance; no timestamps), so a rerun with the same configuration is
byte-identical.  Plots are minimal hand-rolled SVG polylines: the CSV is
the contractual output, the SVG a convenience.

Exit codes: 0 success, 2 invalid arguments, 3 reduced-route gating
failure (the low-dimensional two-branch reduction disagreeing with the
dense oracle), 4 evidence-suite violation detected.  The environment
variable ``WALSH_TRUNC_THREADS`` caps worker threads for commands with
independent cells.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .critical import k_sweep
from .partial_sum import apply as apply_rule, import_manifest
from .spectral import (
    build_level_matrix,
    dense_norm,
    ensure_two_branch_reduction_validated,
    level_norm_curve,
    power_norm,
    result_csv_row,
    total_correlation,
    two_branch_level_blocks,
)
from .truncation import (
    TruncationMap,
    TWHMatrix,
    branch_decompose,
    node_reduce,
    random_dyadic,
    random_one_node,
    standard_truncation,
    trim,
    two_branch,
)
from .walsh_core import StepFunction, build_wh

NORM_CAP = 1.0 + math.sqrt(2.0) / 2.0
EVIDENCE_TOL = 1e-9


# -- shared plumbing ---------------------------------------------------------


def _thread_count() -> int:
    raw = os.environ.get("WALSH_TRUNC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        print(
            f"walsh-trunc: WALSH_TRUNC_THREADS must be an integer, got {raw!r}",
            file=sys.stderr,
        )
        raise SystemExit(2) from None


def _parallel_map(fn, items):
    """Order-preserving map over independent cells, capped by
    WALSH_TRUNC_THREADS (serial when the cap is 1)."""
    items = list(items)
    threads = min(_thread_count(), len(items))
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _csv_header(command: str, *, seed=None, tolerance=None) -> str:
    seed_text = "none" if seed is None else str(seed)
    tol_text = "none" if tolerance is None else repr(tolerance)
    return (
        f"# walsh-trunc {__version__}\n"
        f"# command: {command}\n"
        f"# seed: {seed_text}\n"
        f"# tolerance: {tol_text}\n"
    )


def _write_text(out_dir: str, name: str, text: str) -> Path:
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(path)
    return path


def _svg_line_plot(xs, ys, title: str) -> str:
    """One polyline over plain axes; corner labels give the data ranges."""
    width, height, margin = 640, 400, 60
    x_min, x_max = float(min(xs)), float(max(xs))
    y_min, y_max = float(min(ys)), float(max(ys))
    x_span = (x_max - x_min) or 1.0
    y_span = (y_max - y_min) or 1.0

    def sx(x: float) -> float:
        return margin + (x - x_min) / x_span * (width - 2 * margin)

    def sy(y: float) -> float:
        return height - margin - (y - y_min) / y_span * (height - 2 * margin)

    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    left, right = margin, width - margin
    top, bottom = margin, height - margin
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{left}" y="{top - 20}" font-size="14">{title}</text>\n'
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" '
        f'stroke="black"/>\n'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" '
        f'stroke="black"/>\n'
        f'<text x="{left}" y="{bottom + 20}" font-size="12">{x_min:.6g}</text>\n'
        f'<text x="{right - 40}" y="{bottom + 20}" font-size="12">'
        f"{x_max:.6g}</text>\n"
        f'<text x="5" y="{bottom}" font-size="12">{y_min:.6g}</text>\n'
        f'<text x="5" y="{top + 5}" font-size="12">{y_max:.6g}</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" '
        f'points="{points}"/>\n'
        f"</svg>\n"
    )


def _fail(message: str, code: int) -> int:
    print(f"walsh-trunc: {message}", file=sys.stderr)
    return code


def _gate_reduction() -> int | None:
    """Validate the reduced two-branch route against the dense oracle
    before any large-level use; exit code 3 on disagreement."""
    try:
        ensure_two_branch_reduction_validated()
    except RuntimeError as exc:
        return _fail(f"reduced-route gating failed: {exc}", 3)
    return None


# -- norm-curve ---------------------------------------------------------------


def cmd_norm_curve(args) -> int:
    n_max = args.nmax
    if not 1 <= n_max <= 1000:
        return _fail(f"--nmax must be in 1..1000, got {n_max}", 2)
    curve = level_norm_curve(n_max)
    header = _csv_header(f"norm-curve --nmax {n_max}", tolerance=EVIDENCE_TOL)
    lines = [header + "N,norm,gap_to_cap"]
    levels = list(range(1, n_max + 1))
    for N in levels:
        lines.append(f"{N},{float(curve[N])!r},{float(NORM_CAP - curve[N])!r}")
    _write_text(args.out, f"norm_curve_nmax{n_max}.csv", "\n".join(lines) + "\n")
    _write_text(
        args.out,
        f"norm_curve_nmax{n_max}.svg",
        _svg_line_plot(levels, curve[1:], f"standard-truncation norm, N=1..{n_max}"),
    )
    violations = []
    for N in range(2, n_max + 1):
        if not curve[N] > curve[N - 1]:
            violations.append(f"norm not increasing at N={N}")
    for N in levels:
        if not curve[N] < NORM_CAP:
            violations.append(f"norm at N={N} reached the conjectured cap")
    if violations:
        for line in violations:
            print(f"evidence violation: {line}", file=sys.stderr)
        return 4
    return 0


# -- ksweep -------------------------------------------------------------------


def cmd_ksweep(args) -> int:
    N = args.n
    if not 2 <= N <= 30:
        return _fail(f"--n must be in 2..30, got {N}", 2)
    if N > 10:
        failed = _gate_reduction()
        if failed is not None:
            return failed
    table = k_sweep(N)
    command = f"ksweep --n {N}"
    base = _csv_header(command, tolerance=EVIDENCE_TOL) + table.to_csv_text()
    _write_text(args.out, f"ksweep_n{N}.csv", base)

    indexed = {row.K: row for row in table.rows if row.K is not None}
    derived_lines = [
        _csv_header(command, tolerance=EVIDENCE_TOL)
        + "K,log2_beta,l1_ratio,log2_l1_ratio,cross_term,log2_gamma_step"
    ]
    for K in range(N):
        row = indexed[K]
        ratio = row.y / row.x
        if K + 1 < N:
            step = math.log2(indexed[K].gamma - indexed[K + 1].gamma)
            step_text = repr(step)
        else:
            step_text = ""
        derived_lines.append(
            f"{K},{math.log2(row.beta)!r},{ratio!r},{math.log2(ratio)!r},"
            f"{row.F_lhs - row.A2!r},{step_text}"
        )
    _write_text(args.out, f"ksweep_n{N}_derived.csv", "\n".join(derived_lines) + "\n")

    xs = [-1 if row.K is None else row.K for row in table.rows]
    ys = [row.norm for row in table.rows]
    _write_text(
        args.out,
        f"ksweep_n{N}.svg",
        _svg_line_plot(xs, ys, f"two-branch norm by secondary depth, N={N}"),
    )
    if table.norm_violations or table.lhs_violations:
        print(
            f"evidence violation: monotone decrease fails at depths "
            f"norm={list(table.norm_violations)} "
            f"identity={list(table.lhs_violations)}",
            file=sys.stderr,
        )
        return 4
    return 0


# -- level-vectors ------------------------------------------------------------


def cmd_level_vectors(args) -> int:
    N = args.n
    if not 2 <= N <= 30:
        return _fail(f"--n must be in 2..30, got {N}", 2)
    try:
        k_values = [int(piece) for piece in args.k.split(",") if piece != ""]
    except ValueError:
        return _fail(f"--k must be a comma-separated integer list, got {args.k!r}", 2)
    if not k_values:
        return _fail("--k must name at least one secondary depth", 2)
    if any(not 0 <= K <= N - 1 for K in k_values):
        return _fail(f"every --k must be in 0..{N - 1}", 2)
    if N > 10:
        failed = _gate_reduction()
        if failed is not None:
            return failed

    level_matrix = build_level_matrix(N - 1).entries

    def unit_primary(K: int) -> np.ndarray:
        c = two_branch_level_blocks(N, K).primary
        return c / np.linalg.norm(c)

    vectors = dict(zip(k_values, _parallel_map(unit_primary, k_values)))
    command = f"level-vectors --n {N} --k {','.join(str(K) for K in k_values)}"
    lines = [_csv_header(command, tolerance=EVIDENCE_TOL).rstrip("\n")]
    for K in k_values:
        image_norm = float(np.linalg.norm(level_matrix @ vectors[K]))
        lines.append(f"# image_norm K={K}: {image_norm!r}")
    monotone_violations = []
    if len(k_values) >= 2:
        ordered = sorted(k_values)
        for k in range(N):
            series = [vectors[K][k] for K in ordered]
            ups = all(b >= a - 1e-12 for a, b in zip(series, series[1:]))
            downs = all(b <= a + 1e-12 for a, b in zip(series, series[1:]))
            if not (ups or downs):
                monotone_violations.append(k)
        if monotone_violations:
            lines.append(
                "# monotone_in_K violations: "
                + ",".join(str(k) for k in monotone_violations)
            )
            print(
                f"note: {len(monotone_violations)} coordinate(s) not monotone "
                f"across the requested depths",
                file=sys.stderr,
            )
        else:
            lines.append("# monotone_in_K: ok")
    lines.append("K,k,c_k")
    for K in k_values:
        for k, value in enumerate(vectors[K]):
            lines.append(f"{K},{k},{float(value)!r}")
    _write_text(args.out, f"level_vectors_n{N}.csv", "\n".join(lines) + "\n")
    return 0


# -- trim-compare -------------------------------------------------------------


def cmd_trim_compare(args) -> int:
    N = args.n
    if not 2 <= N <= 10:
        return _fail(f"--n must be in 2..10, got {N}", 2)
    cases = [
        ("standard", N, None, standard_truncation(N)),
        ("two-branch", N, N - 1, two_branch(N, N - 1)),
        ("two-branch-trimmed", N, N - 1, trim(two_branch(N, N - 1))),
        ("standard", N + 1, None, standard_truncation(N + 1)),
    ]
    rows = _parallel_map(
        lambda case: (case[:3], power_norm(case[3]), total_correlation(case[3])),
        cases,
    )
    trimmed_norm = rows[2][1].norm
    crossover = trimmed_norm > rows[0][1].norm
    next_dominates = rows[3][1].norm > trimmed_norm
    lines = [_csv_header(f"trim-compare --n {N}", tolerance=EVIDENCE_TOL).rstrip("\n")]
    lines.append(f"# trimmed_exceeds_standard: {'yes' if crossover else 'no'}")
    lines.append(f"# next_standard_exceeds_trimmed: {'yes' if next_dominates else 'no'}")
    lines.append("label,N,K,norm,residual,iterations,total_correlation")
    for (label, level, K), result, correlation in rows:
        lines.append(f"{result_csv_row(label, level, K, result)},{correlation!r}")
    _write_text(args.out, f"trim_compare_n{N}.csv", "\n".join(lines) + "\n")
    return 0


# -- hunt ---------------------------------------------------------------------


def cmd_hunt(args) -> int:
    N = args.n
    trials = args.trials
    if not 2 <= N <= 10:
        return _fail(f"--n must be in 2..10, got {N}", 2)
    if trials < 1:
        return _fail(f"--trials must be positive, got {trials}", 2)
    cap = dense_norm(standard_truncation(N)).norm
    full_profile = TWHMatrix(
        N=N, phi=TruncationMap(N=N, lengths=np.full(1 << N, 1 << N, dtype=np.int64))
    )
    full_profile_norm = dense_norm(full_profile).norm

    seeds = np.random.SeedSequence(args.seed).spawn(trials)

    def check_one_node(matrix, record):
        (node,) = branch_decompose(matrix).nodes
        record["one_node_checks"] += 1
        base = dense_norm(matrix).norm
        if dense_norm(node_reduce(matrix, node)).norm < base - EVIDENCE_TOL:
            record["reduce_violations"] += 1
            record["manifests"].append(("reduce", matrix.phi.to_csv_text()))

    def run_trial(index_seed):
        index, seed = index_seed
        rng = np.random.default_rng(seed)
        matrix = random_dyadic(N, rng)
        norm = dense_norm(matrix).norm
        record = {
            "index": index,
            "norm": norm,
            "cap_violation": norm > cap + EVIDENCE_TOL,
            "one_node_checks": 0,
            "reduce_violations": 0,
            "manifests": [],
        }
        if record["cap_violation"]:
            record["manifests"].append(("cap", matrix.phi.to_csv_text()))
        # the no-decrease claim is about one-node instances (collapsing one
        # node of a multi-node profile can genuinely lower the norm), and
        # uniform draws are almost never one-node beyond small levels: test
        # a directly sampled one-node instance each trial, plus the uniform
        # draw on the rare occasions it qualifies
        if len(branch_decompose(matrix).nodes) == 1:
            check_one_node(matrix, record)
        check_one_node(random_one_node(N, rng), record)
        return record

    records = _parallel_map(run_trial, list(enumerate(seeds)))
    max_norm = max(record["norm"] for record in records)
    one_node_trials = sum(r["one_node_checks"] for r in records)
    cap_violations = [r for r in records if r["cap_violation"]]
    reduce_violations = [r for r in records if r["reduce_violations"]]
    command = f"hunt --n {N} --trials {trials} --seed {args.seed}"
    lines = [_csv_header(command, seed=args.seed, tolerance=EVIDENCE_TOL).rstrip("\n")]
    lines.append(
        "trials,N,max_norm,cap_norm,full_profile_norm,one_node_trials,"
        "cap_violations,node_reduce_violations"
    )
    lines.append(
        f"{trials},{N},{max_norm!r},{cap!r},{full_profile_norm!r},"
        f"{one_node_trials},{len(cap_violations)},"
        f"{sum(r['reduce_violations'] for r in records)}"
    )
    _write_text(args.out, f"hunt_n{N}_trials{trials}_seed{args.seed}.csv",
                "\n".join(lines) + "\n")
    for record in records:
        for tag, manifest in record["manifests"]:
            _write_text(
                args.out,
                f"hunt_counterexample_n{N}_seed{args.seed}"
                f"_trial{record['index']}_{tag}.csv",
                _csv_header(command, seed=args.seed, tolerance=EVIDENCE_TOL)
                + manifest,
            )
    if cap_violations or reduce_violations:
        print(
            f"evidence violation: {len(cap_violations)} norm(s) above the "
            f"standard-profile cap, "
            f"{sum(r['reduce_violations'] for r in records)} node "
            f"reduction(s) decreasing the norm",
            file=sys.stderr,
        )
        return 4
    return 0


# -- apply --------------------------------------------------------------------


def _read_step_function(path: str, N: int) -> StepFunction:
    # accepts the 2-column ``k,coeff`` shape and the CLI's own 3-column
    # ``k,coeff,value`` output (the value column is derived, so it is
    # ignored on input), plus one optional header row
    coeffs = {}
    parsed = 0
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if parsed == 0 and not fields[0].lstrip("+-").isdigit():
            continue
        if len(fields) not in (2, 3):
            raise ValueError(f"expected k,coeff rows, got {line!r}")
        coeffs[int(fields[0])] = float(fields[1])
        parsed += 1
    if sorted(coeffs) != list(range(1 << N)):
        raise ValueError(
            f"step-function file must cover k = 0..{(1 << N) - 1} exactly once"
        )
    return StepFunction(N=N, coeffs=np.array([coeffs[k] for k in range(1 << N)]))


def cmd_apply(args) -> int:
    try:
        operator = import_manifest(Path(args.phi_file).read_text())
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read depth profile: {exc}", 2)
    if operator.N > 10:
        return _fail(
            f"profile level {operator.N} exceeds the dense application cap (10)", 2
        )
    try:
        f = _read_step_function(args.f_file, operator.N)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read step function: {exc}", 2)
    result = apply_rule(operator, f, method="matrix")
    lines = [
        _csv_header(
            f"apply --phi-file {Path(args.phi_file).name} "
            f"--f-file {Path(args.f_file).name}",
            tolerance=1e-12,
        ).rstrip("\n")
    ]
    if operator.N <= 8:
        direct = apply_rule(operator, f, method="direct")
        deviation = float(np.max(np.abs(result.coeffs - direct.coeffs)))
        lines.append(f"# direct_route_deviation: {deviation!r}")
        if deviation > 1e-12:
            return _fail(
                f"matrix and direct application routes disagree: {deviation}", 4
            )
    lines.append("k,coeff,value")
    values = result.values()
    for k in range(1 << operator.N):
        lines.append(f"{k},{float(result.coeffs[k])!r},{float(values[k])!r}")
    _write_text(args.out, "apply_output.csv", "\n".join(lines) + "\n")
    return 0


# -- export-matrix ------------------------------------------------------------


def cmd_export_matrix(args) -> int:
    N = args.n
    if not 1 <= N <= 10:
        return _fail(f"--n must be in 1..10 (dense cap), got {N}", 2)
    kind = args.kind
    K = args.k
    if kind in ("two-branch", "trim"):
        if K is None:
            return _fail(f"--kind {kind} requires --k", 2)
        if not 0 <= K <= N - 1:
            return _fail(f"--k must be in 0..{N - 1}, got {K}", 2)
    elif K is not None:
        return _fail(f"--kind {kind} does not take --k", 2)
    if kind == "wh":
        entries = build_wh(N).entries
    elif kind == "opt":
        entries = standard_truncation(N).dense()
    elif kind == "two-branch":
        entries = two_branch(N, K).dense()
    else:
        entries = trim(two_branch(N, K)).dense()
    suffix = f"_k{K}" if K is not None else ""
    command = f"export-matrix --kind {kind} --n {N}" + (
        f" --k {K}" if K is not None else ""
    )
    body = "\n".join(
        ",".join(f"{value:.17g}" for value in row) for row in entries
    )
    _write_text(
        args.out,
        f"matrix_{kind}_n{N}{suffix}.csv",
        _csv_header(command) + body + "\n",
    )
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walsh-trunc",
        description=(
            "Truncated Walsh-Hadamard matrices: norm tables, sweeps, "
            "level vectors, conjecture-evidence hunts, and partial-sum "
            "application."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("norm-curve", help="standard-truncation norm by level")
    p.add_argument("--nmax", type=int, required=True)
    add_out(p)
    p.set_defaults(func=cmd_norm_curve)

    p = sub.add_parser("ksweep", help="two-branch sweep over secondary depths")
    p.add_argument("--n", type=int, required=True)
    add_out(p)
    p.set_defaults(func=cmd_ksweep)

    p = sub.add_parser("level-vectors", help="primary level coefficients by depth")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=str, required=True,
                   help="comma-separated secondary depths")
    add_out(p)
    p.set_defaults(func=cmd_level_vectors)

    p = sub.add_parser("trim-compare", help="norms and correlations around trimming")
    p.add_argument("--n", type=int, required=True)
    add_out(p)
    p.set_defaults(func=cmd_trim_compare)

    p = sub.add_parser("hunt", help="randomized norm-cap and node-reduction hunt")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_hunt)

    p = sub.add_parser("apply", help="apply a partial-sum rule to a step function")
    p.add_argument("--phi-file", required=True,
                   help="depth-profile manifest: one k,depth row per interval")
    p.add_argument("--f-file", required=True,
                   help="step function: one k,coeff row per interval "
                        "(scaled coefficients; pointwise value = 2^(N/2) coeff)")
    add_out(p)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("export-matrix", help="write a matrix as row-major CSV")
    p.add_argument("--kind", choices=("wh", "opt", "two-branch", "trim"),
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    add_out(p)
    p.set_defaults(func=cmd_export_matrix)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
