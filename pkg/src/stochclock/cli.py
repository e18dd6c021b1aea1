"""Command-line front end.

Subcommands write plot-ready CSV (``--out``) and print a table to stdout.
Exit status: 0 ok, 1 invalid arguments, 2 verification failure, 3 I/O failure.
"""
import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import quantum, walk
from .clock import epsilon_continuity, make_clock, make_ladder, make_perfect
from .game import DEFAULT_CAP, GameConfig, estimate_score, renewal_estimate, run_rng

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3

RESULT_HEADER = [
    "d", "delta", "n_mean", "n_stderr", "runs", "capped_runs",
    "n_lower_headline", "n_upper_headline", "n_lower_exact", "n_upper_exact",
]
BOUND_HEADER = ["d", "delta", "variant", "D_lower", "D_upper", "N_lower", "N_upper", "notes"]
ABSORB_HEADER = ["d", "z", "boundary", "solver", "closed_form", "rel_error"]
VERIFY_HEADER = [
    "clock", "d", "p00", "kraus_residual", "channel_residual", "identity_residual",
    "offdiag_residual", "diag_residual", "norm", "epsilon", "min_form_X", "min_form_Z", "passed",
]

FIG1_DELTA = 0.05
FIG1_RUNS = 500
FIG1_D = "20:200:20"
CUSTOM_SUM_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class ResultRow:
    d: int
    delta: float
    n_mean: float
    n_stderr: float
    runs: int
    capped_runs: int
    n_lower_headline: float
    n_upper_headline: float
    n_lower_exact: float
    n_upper_exact: float

    def values(self):
        return [getattr(self, k) for k in RESULT_HEADER]


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    return str(x)


def parse_d_range(text):
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise UsageError(f"bad --d {text!r}; use start:stop:step or a single integer") from None
    if len(parts) == 1:
        ds = parts
    elif len(parts) == 3:
        start, stop, step = parts
        if step <= 0:
            raise UsageError("--d step must be positive")
        ds = list(range(start, stop + 1, step))
    else:
        raise UsageError(f"bad --d {text!r}; use start:stop:step or a single integer")
    if not ds or min(ds) < 1:
        raise UsageError("--d range must be non-empty with d >= 1")
    return ds


def parse_z0(text, d):
    if text == "half":
        return d // 2
    try:
        z0 = int(text)
    except ValueError:
        raise UsageError(f"bad --z0 {text!r}; use an integer or 'half'") from None
    if not abs(z0) < d:
        raise UsageError(f"--z0 {z0} must satisfy |z0| < d = {d}")
    return z0


def build_clock(spec, d, delta):
    if spec == "ladder":
        return make_ladder(d, delta)
    if spec == "perfect":
        return make_perfect(d)
    if spec.startswith("custom:"):
        try:
            p = np.array([float(x) for x in spec[len("custom:"):].split(",")])
        except ValueError:
            raise UsageError(f"bad custom clock {spec!r}") from None
        if p.size > d + 1:
            raise UsageError(f"custom clock has {p.size} offsets, more than d+1 = {d + 1}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > CUSTOM_SUM_TOL:
            raise UsageError("custom offsets must be non-negative and sum to 1 within 1e-9")
        return make_clock(p / p.sum(), d=d)
    raise UsageError(f"unknown --clock {spec!r}")


def ladder_theorem2(clock, d):
    """``(lower_headline, upper_headline, lower_exact, upper_exact)`` or NaNs."""
    p = clock.jumps.probs
    delta = float(p[1]) if p.size > 1 else 0.0
    is_ladder = clock.jumps.max_offset <= 1 and 0.0 < delta < 1.0
    if not is_ladder:
        return (math.nan,) * 4
    head, exact = walk.theorem2_bounds(d, delta)
    return head.N_lower, head.N_upper, exact.N_lower, exact.N_upper


def _table(header, rows):
    cells = [header] + [[fmt(v) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    return "\n".join("  ".join(c[i].rjust(widths[i]) for i in range(len(header))) for c in cells)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _emit(args, header, rows, out):
    print(_table(header, rows), file=out)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(_csv_text(header, rows))


def cmd_simulate(args, out):
    rows = []
    for d in parse_d_range(args.d):
        clock = build_clock(args.clock, d, args.delta)
        z0 = parse_z0(args.z0, d)
        cfg = GameConfig(clock, clock, z0=z0, application_cap=args.cap, seed=args.seed, runs=args.runs)
        est = estimate_score(cfg)
        bounds = ladder_theorem2(clock, d)
        rows.append(ResultRow(d, args.delta, est.mean, est.std_error, est.runs, est.capped_runs, *bounds))
        if est.capped_runs:
            print(f"# d={d}: {est.capped_runs} runs hit the cap; the mean is biased low", file=sys.stderr)
    _emit(args, RESULT_HEADER, [r.values() for r in rows], out)
    return EXIT_OK


def cmd_reproduce_fig1(args, out):
    args.delta = FIG1_DELTA
    args.clock = "ladder"
    args.z0 = "half"
    return cmd_simulate(args, out)


def bound_rows(clock, d, delta):
    reports = []
    dd = walk.delta_distribution(clock.jumps, clock.jumps)
    reports.append(walk.bound_eq5(d, dd))
    eps = epsilon_continuity(clock)
    m = clock.jumps.max_offset
    if 0.0 < eps < 1.0 and m >= 1:
        p = clock.jumps.probs
        reports.append(walk.theorem1_bounds(d, eps, m, float(p[m]), float(p[1])))
    if 0.0 < delta < 1.0:
        if clock.jumps.max_offset <= 1:
            reports.extend(walk.theorem2_bounds(d, delta))
        reports.append(walk.perfect_vs_ladder_bounds(d, delta))
    return [[r.d, delta, r.variant, r.D_lower, r.D_upper, r.N_lower, r.N_upper, r.notes] for r in reports]


def cmd_bounds(args, out):
    rows = []
    for d in parse_d_range(args.d):
        rows.extend(bound_rows(build_clock(args.clock, d, args.delta), d, args.delta))
    _emit(args, BOUND_HEADER, rows, out)
    return EXIT_OK


def cmd_absorb(args, out):
    rows = []
    for d in parse_d_range(args.d):
        clock = build_clock(args.clock, d, args.delta)
        dd = walk.delta_distribution(clock.jumps, clock.jumps)
        z = parse_z0(args.z0, d)
        for kind in (walk.NECESSARY, walk.SUFFICIENT):
            lo, hi = walk.boundaries(d, kind)
            solved = walk.solve_expected_absorption(walk.AbsorptionProblem(dd, lo, hi, z))
            closed = walk.closed_form_D(d, z, dd, kind)
            if math.isinf(solved) and math.isinf(closed):
                rel = 0.0
            else:
                rel = abs(solved - closed) / max(abs(solved), 1e-300)
            rows.append([d, z, kind, solved, closed, rel])
    _emit(args, ABSORB_HEADER, rows, out)
    return EXIT_OK


def verify_clock(clock, rng, trials):
    """Run every channel check for one clock and return a CSV-style row."""
    D = clock.d + 1
    kraus = quantum.build_kraus(clock, check=False)
    # a random density matrix with off-diagonal structure
    A = rng.standard_normal((D, D))
    rho = A @ A.T
    rho /= np.trace(rho)
    _, _, chan = quantum.apply_channel_two_ways(clock, rho)
    pair = quantum.build_certificate(clock)
    rep = quantum.verify_continuity_certificate(pair, clock, trials, rng)
    residuals_ok = max(kraus.completeness_residual(), chan, rep.identity_residual,
                       rep.offdiag_residual, rep.diag_residual) <= quantum.RESIDUAL_TOL
    passed = residuals_ok and rep.passed
    return [kraus.completeness_residual(), chan, rep.identity_residual, rep.offdiag_residual,
            rep.diag_residual, rep.norm, rep.epsilon, rep.min_form_X, rep.min_form_Z, passed], rep


def cmd_verify(args, out):
    rows = []
    failures = []
    rng = run_rng(args.seed, 0)
    for d in parse_d_range(args.d):
        if d + 1 > quantum.MAX_STATES:
            raise UsageError(f"d={d} is too large for dense verification (max {quantum.MAX_STATES - 1})")
        clocks = [("given", build_clock(args.clock, d, args.delta))]
        for i in range(args.runs):
            p = rng.dirichlet(np.ones(d + 1))
            clocks.append((f"random{i}", make_clock(p, d=d)))
        for name, clock in clocks:
            vals, rep = verify_clock(clock, rng, args.trials)
            rows.append([name, d, float(clock.jumps.probs[0])] + vals)
            failures.extend(f"d={d} {name}: {f}" for f in rep.failures)
    _emit(args, VERIFY_HEADER, rows, out)
    for f in failures:
        print(f"FAIL {f}", file=sys.stderr)
    return EXIT_VERIFY if any(not r[-1] for r in rows) else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "reproduce-fig1": cmd_reproduce_fig1,
    "bounds": cmd_bounds,
    "absorb": cmd_absorb,
    "verify": cmd_verify,
}


def build_parser():
    parser = _Parser(prog="stochclock", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--d", default=FIG1_D if name == "reproduce-fig1" else "20",
                       help="start:stop:step (inclusive) or a single d")
        p.add_argument("--delta", type=float, default=FIG1_DELTA)
        default_runs = {"verify": 5}.get(name, FIG1_RUNS)
        p.add_argument("--runs", type=int, default=default_runs,
                       help="games per d; random clocks per d for verify")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--z0", default="half")
        p.add_argument("--cap", type=int, default=DEFAULT_CAP)
        p.add_argument("--out", default=None, help="CSV output path")
        p.add_argument("--clock", default="ladder", help="ladder | perfect | custom:p0,p1,...")
        if name == "verify":
            p.add_argument("--trials", type=int, default=1000, help="random vectors per positivity probe")
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("stochclock: error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_USAGE
    if args.runs < 1 or args.cap < 1:
        print("stochclock: error: --runs and --cap must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ValueError) as exc:
        print(f"stochclock: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"stochclock: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
