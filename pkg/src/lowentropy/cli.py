"""Command-line front end.

Every subcommand writes one CSV table, to ``--csv PATH`` or to standard
output.  ``verify`` prints a readable report unless ``--csv`` is given.
Exit codes: 0 success, 1 a verify criterion failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import expanders as xp
from .csvio import emit_csv
from .entropy import entropy_sup, truncation_radius
from .geom import as_sampled
from .mcf import FlowConfig, flow, sample_curvature
from .reifenberg import dyadic_scales, planar_distance
from .specfile import SpecError, load_surface
from .verify import SUITES, run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_real(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    # subparsers repeat the global flags with SUPPRESS so that values given
    # before the subcommand are not overwritten by subparser defaults
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--csv", metavar="PATH", default=d(None), help="write CSV here ('-' for stdout)")
    p.add_argument("--threads", type=_positive_int, default=d(1), help="worker threads")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lowentropy", description=__doc__.splitlines()[0])
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropy of a described surface")
    _add_global(p, suppress=True)
    p.add_argument("--surface", required=True, help="surface description file")
    p.add_argument("--eps", type=_positive_real, default=1e-6, help="tail tolerance")
    p.add_argument("--declare-lambda", type=float, default=None, help="declared entropy bound for the truncation radius")
    p.add_argument("--complete-noncompact", action="store_true", help="input is complete and noncompact")
    p.add_argument("--no-refine", action="store_true", help="report the grid maximum only")

    p = sub.add_parser("flow", help="mean curvature flow track")
    _add_global(p, suppress=True)
    p.add_argument("--surface", required=True)
    p.add_argument("--T", type=_positive_real, required=True, help="end time")
    p.add_argument("--record", type=_positive_real, required=True, help="recording cadence")
    p.add_argument("--h-min", type=_positive_real, default=None, help="remeshing length")
    p.add_argument("--dt", type=_positive_real, default=None, help="time step (must be stable)")

    p = sub.add_parser("reifenberg", help="planar distance scores")
    _add_global(p, suppress=True)
    p.add_argument("--surface", required=True)
    p.add_argument("--rmax", type=_positive_real, required=True, help="largest scale")
    p.add_argument("--rmin", type=_positive_real, default=None, help="smallest scale (default 4 spacings)")
    p.add_argument("--stride", type=_positive_int, default=5, help="use every stride-th sample as a centre")

    p = sub.add_parser("expander", help="expander solutions and cone convergence rate")
    _add_global(p, suppress=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--slope", type=float, help="asymptotic cone slope")
    g.add_argument("--b", type=float, help="tip height")
    p.add_argument("--n", type=_positive_int, default=1, help="dimension")
    p.add_argument("--L", type=_positive_real, default=20.0, help="integration length")
    p.add_argument("--h", type=_positive_real, default=1e-3, help="integration step")
    p.add_argument("--rate-fit", action="store_true", help="emit the cone convergence rate table")
    p.add_argument("--R", type=_positive_real, default=5.0, help="ball radius for the rate fit")
    p.add_argument("--t-min", type=_positive_real, default=None, help="default max(1e-4, (R / 0.9 L)^2)")
    p.add_argument("--t-max", type=_positive_real, default=1e-1)
    p.add_argument("--t-count", type=_positive_int, default=8)
    p.add_argument("--spacing", type=_positive_real, default=2e-4, help="sampling spacing for the rate fit")

    p = sub.add_parser("verify", help="run the acceptance scenarios")
    _add_global(p, suppress=True)
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    return parser


# ---------------------------------------------------------------------------


def _load(path: str):
    try:
        return load_surface(path)
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    except SpecError as err:
        raise UsageError(f"{path}: {err}") from None


def cmd_entropy(args) -> int:
    S = as_sampled(_load(args.surface))
    if args.declare_lambda is not None and args.declare_lambda < 1:
        raise UsageError("--declare-lambda must be at least 1")
    est = entropy_sup(
        S,
        refine=not args.no_refine,
        complete_noncompact=args.complete_noncompact,
        eps=args.eps,
        threads=args.threads,
    )
    lam = args.declare_lambda if args.declare_lambda is not None else max(1.0, est.value)
    rows = [
        ("value", est.value),
        ("branch", est.branch),
        ("argmax_t0", est.argmax.t0),
    ]
    rows += [(f"argmax_x{i}", float(v)) for i, v in enumerate(est.argmax.x0)]
    rows += [
        ("lambda_bound", lam),
        ("lambda_declared", args.declare_lambda is not None),
        ("truncation_radius", truncation_radius(S.dims, lam, args.eps)),
        ("grid_value", est.grid_value),
        ("probed_value", est.probed_value),
        ("refined", est.refined),
        ("evaluations", est.evaluations),
        ("samples", len(S)),
    ]
    rows += [(f"grid_step_{i}", s) for i, s in enumerate(est.grid_resolution)]
    emit_csv(("quantity", "value"), rows, args.csv or "-")
    return EXIT_OK


def cmd_flow(args) -> int:
    state = _load(args.surface)
    cfg = FlowConfig(T=args.T, record_dt=args.record, h_min=args.h_min, dt=args.dt)
    M = flow(state, cfg)
    d = M.dims.n + M.dims.k

    def rows():
        for i, t in enumerate(M.times):
            S = M.sampled(i)
            A = sample_curvature(M.states[i])
            for j in range(len(S)):
                yield (t, j, *(float(c) for c in S.points[j]), float(S.weights[j]), float(A[j]))

    header = ("time", "sample") + tuple(f"x{i}" for i in range(d)) + ("weight", "abs_A")
    emit_csv(header, rows(), args.csv or "-")
    if M.status != "complete":
        print(f"flow stopped: {M.status} at t={M.event_time:g}", file=sys.stderr)
    return EXIT_OK


def cmd_reifenberg(args) -> int:
    S = as_sampled(_load(args.surface))
    rmin = args.rmin if args.rmin is not None else 4 * S.spacing
    if rmin > args.rmax:
        raise UsageError("--rmin exceeds --rmax")
    scales = dyadic_scales(args.rmax, rmin)
    est, witness, scores = planar_distance(S, R_samples=scales, stride=args.stride, threads=args.threads)
    d = S.dims.n + S.dims.k
    n = S.dims.n
    header = (
        ("p_index",)
        + tuple(f"p{i}" for i in range(d))
        + ("R", "score", "pca_score")
        + tuple(f"frame{i}_{j}" for j in range(n) for i in range(d))
    )
    index = {}

    def rows():
        for s in scores:
            key = tuple(s.p)
            k = index.setdefault(key, len(index))
            frame = tuple(float(s.plane.frame[i, j]) for j in range(n) for i in range(d))
            yield (k, *(float(c) for c in s.p), s.R, s.score, s.pca_score, *frame)

    emit_csv(header, rows(), args.csv or "-")
    print(f"planar distance {est:.6g} at R={witness.R:g}", file=sys.stderr)
    return EXIT_OK


def _solve_expander(args):
    if args.slope is not None and args.slope < 0:
        raise UsageError("--slope must be nonnegative")
    if args.b is not None and args.b < 0:
        raise UsageError("--b must be nonnegative")
    if args.n == 1:
        if args.b is not None:
            return xp.solve_expander_curve(args.b, args.L, args.h)
        return xp.solve_expander_curve_for_slope(args.slope, args.L, args.h)
    if args.b is not None:
        return xp.integrate_expander_profile(args.n, args.b, args.L, args.h)
    return xp.solve_expander_profile(args.n, args.slope, args.L, args.h)


def cmd_expander(args) -> int:
    try:
        Sigma = _solve_expander(args)
    except xp.ExpanderBlowUp as err:
        raise UsageError(f"expander is not graphical on [0, L]: {err}") from None
    if not args.rate_fit:
        if args.n == 1:
            header, cols = ("x", "u", "du"), (Sigma.x, Sigma.u, Sigma.du)
        else:
            header, cols = ("r", "f", "df"), (Sigma.r, Sigma.f, Sigma.df)
        emit_csv(header, (tuple(float(c[i]) for c in cols) for i in range(len(cols[0]))), args.csv or "-")
        return EXIT_OK
    R = args.R
    # every rescaled ball must lie inside the solved part of the expander
    t_min = args.t_min if args.t_min is not None else max(1e-4, (R / (0.9 * args.L)) ** 2)
    if not t_min < args.t_max <= 1:
        raise UsageError(f"need t-min < t-max <= 1 (t-min is {t_min:g})")
    if R >= args.L * math.sqrt(t_min):
        raise UsageError(f"--R must be below L*sqrt(t-min) = {args.L * math.sqrt(t_min):g}")
    times = np.geomspace(args.t_max, t_min, args.t_count)
    C, _ = xp.cone_extract(Sigma, times, R, args.spacing)
    fit = xp.convergence_rate_fit(Sigma, C, R, times, args.spacing)
    rows = ((t, d, u, fit.p, fit.C_fit) for t, d, u in zip(fit.t, fit.d, fit.used))
    emit_csv(("t", "dist", "used", "p", "C_fit"), rows, args.csv or "-")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_verify(args.suite, threads=args.threads, seed=args.seed)
    if args.csv:
        emit_csv(report.HEADER, list(report.rows()), args.csv)
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK if report.overall else EXIT_FAIL


COMMANDS = {
    "entropy": cmd_entropy,
    "flow": cmd_flow,
    "reifenberg": cmd_reifenberg,
    "expander": cmd_expander,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"lowentropy {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as err:
        print(f"lowentropy {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
