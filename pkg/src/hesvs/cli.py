"""Command-line entry point.

Every subcommand prints a CSV (default) or JSON table to standard output, or
writes it atomically with ``--output``.  Defaults are the reference settings
(theta = pi/7, 2pi/7 or pi/5, r = 0.5, m = 1..4).

Exit status: 0 success, 1 usage error, 2 zero-probability event,
3 validation failure.
"""
import argparse
import math
import os
import sys
import tempfile
from fractions import Fraction

from . import analytic, gridscan, oracle
from .exceptions import ParameterError, UndefinedQError, ZeroProbabilityError
from .params import ModelParams, derive

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ZERO_PROBABILITY = 2
EXIT_VALIDATION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def theta_fraction(text):
    """Parse ``p/q`` (or an integer ``p``) as the angle pi * p / q."""
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"theta-frac={text!r}: expected p/q with integers p, q") from None
    return math.pi * frac.numerator / frac.denominator


def _range_pair(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r}: expected LO,HI") from None
    return lo, hi


def _perturbation(text):
    name, sep, eps = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return name, float(eps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"perturb={text!r}: expected NAME=EPS") from None


def _add_point(sp, theta, r, m, multi_m=True):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--theta", type=float, help=f"beam-splitter angle in radians (default {theta[1]})")
    g.add_argument("--theta-frac", type=theta_fraction, metavar="P/Q", help="angle as pi*P/Q")
    sp.set_defaults(theta_default=theta[0])
    sp.add_argument("--r", type=float, default=r, help=f"two-mode squeezing (default {r})")
    if multi_m:
        sp.add_argument("--m", type=int, nargs="+", default=m, help=f"detected photon counts (default {m})")
    else:
        sp.add_argument("--m", type=int, default=m, help=f"detected photon count (default {m})")


def _add_output(sp, fmt="csv"):
    sp.add_argument("--format", choices=("csv", "json"), default=fmt)
    sp.add_argument("--output", help="write to this file (atomically) instead of stdout")


def _add_source(sp):
    sp.add_argument("--source", choices=("analytic", "oracle"), default="analytic")
    sp.add_argument("--n-max", type=int, help="oracle Schmidt cutoff floor (default 64)")


def _add_window(sp, y_range=gridscan.DEFAULT_WINDOW, ny=gridscan.DEFAULT_POINTS, y_name="p"):
    sp.add_argument("--x-range", type=_range_pair, default=gridscan.DEFAULT_WINDOW, metavar="LO,HI")
    sp.add_argument("--y-range", type=_range_pair, default=y_range, metavar="LO,HI", help=f"{y_name} range")
    sp.add_argument("--nx", type=int, default=gridscan.DEFAULT_POINTS)
    sp.add_argument("--ny", type=int, default=ny)


def build_parser():
    ap = _Parser(prog="hesvs", description="Heralded Hermite-excited squeezed vacuum calculator.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    pi7, pi5, two_pi7 = (math.pi / 7, "pi/7"), (math.pi / 5, "pi/5"), (2 * math.pi / 7, "2pi/7")
    all_m = [1, 2, 3, 4]

    sp = sub.add_parser("prob", help="heralding probability p(m)")
    _add_point(sp, pi7, 0.5, all_m)
    sp.add_argument("--path", choices=("series", "legendre"), default="series")
    _add_source(sp)
    _add_output(sp)

    sp = sub.add_parser("pnd", help="photon-number distribution P(n|m)")
    _add_point(sp, two_pi7, 0.5, 1, multi_m=False)
    sp.add_argument("--n", type=int, nargs="+", help="photon numbers (default 0..20)")
    _add_source(sp)
    _add_output(sp)

    sp = sub.add_parser("moments", help="mean photon number and Mandel Q")
    _add_point(sp, pi5, 0.5, all_m)
    sp.add_argument("--k", type=int, help="also report <a^k a+^l>")
    sp.add_argument("--l", type=int, help="also report <a^k a+^l>")
    _add_source(sp)
    _add_output(sp)

    for name, help_text in (
        ("quad", "quadrature distribution P(x, phi|m)"),
        ("wigner", "Wigner function W(x, p|m)"),
        ("husimi", "Husimi function Q(x, p|m)"),
    ):
        sp = sub.add_parser(name, help=help_text)
        _add_point(sp, pi7, 0.5, all_m)
        if name == "quad":
            _add_window(sp, y_range=(0.0, math.pi), ny=101, y_name="phi")
        else:
            _add_window(sp)
            sp.add_argument("--measure", choices=("xp", "alpha"), default="xp")
        _add_output(sp)

    sp = sub.add_parser("sweep", help="p(m), <n> or Q along r or theta")
    sp.add_argument("--variable", choices=("r", "theta"), default="r")
    sp.add_argument("--observable", choices=gridscan.SWEEP_OBSERVABLES, default="p_event")
    sp.add_argument("--lo", type=float, help="default 0.01 (r) or 0 (theta)")
    sp.add_argument("--hi", type=float, help="default 3 (r) or pi/2 (theta)")
    sp.add_argument("--points", type=int, help="default 300 (r) or 50 (theta)")
    _add_point(sp, pi7, 0.5, all_m)
    _add_output(sp)

    sp = sub.add_parser("qmap", help="Mandel Q over the (theta, r) plane")
    sp.add_argument("--m", type=int, nargs="+", default=all_m)
    sp.add_argument("--theta-range", type=_range_pair, default=(0.0, math.pi / 2), metavar="LO,HI")
    sp.add_argument("--r-range", type=_range_pair, default=(0.05, 2.0), metavar="LO,HI")
    sp.add_argument("--n-theta", type=int, default=91)
    sp.add_argument("--n-r", type=int, default=40)
    _add_output(sp)

    sp = sub.add_parser("validate", help="cross-check every closed form against the Fock oracle")
    sp.add_argument("--rel-tol", type=float, default=1e-8)
    sp.add_argument("--abs-tol", type=float, default=1e-10)
    sp.add_argument("--floor", type=float, default=1e-6, help="below this the absolute tolerance applies")
    sp.add_argument("--grid-points", type=int, default=41)
    sp.add_argument("--grid-theta", type=float, nargs="+", default=list(gridscan.VALIDATION_THETAS))
    sp.add_argument("--grid-r", type=float, nargs="+", default=list(gridscan.VALIDATION_RS))
    sp.add_argument("--grid-m", type=int, nargs="+", default=list(gridscan.VALIDATION_MS))
    sp.add_argument("--perturb", type=_perturbation, action="append", metavar="NAME=EPS",
                    help="offset a derived coefficient in the closed forms (self-test)")
    _add_output(sp, fmt="json")
    return ap


def _theta(args):
    for value in (args.theta, args.theta_frac):
        if value is not None:
            return value
    return args.theta_default


def _policy(args):
    if args.n_max is None:
        return oracle.TruncationPolicy()
    if args.n_max < 1:
        raise ParameterError("n-max", args.n_max, "must be positive")
    return oracle.TruncationPolicy(n_max=args.n_max)


def cmd_prob(args):
    theta = _theta(args)
    rows = []
    for m in args.m:
        params = ModelParams(theta, args.r, m)
        if args.source == "oracle":
            _, p = oracle.conditional_amplitudes(params, _policy(args))
        else:
            p = analytic.event_probability(derive(params), args.r, m, path=args.path)
        rows.append((theta, args.r, m, p))
    meta = {"command": "prob", "source": args.source, "path": args.path, "theta": theta, "r": args.r}
    return gridscan.Table(["theta", "r", "m", "p_event"], rows, meta)


def cmd_pnd(args):
    theta = _theta(args)
    params = ModelParams(theta, args.r, args.m)
    ns = args.n if args.n is not None else list(range(21))
    for n in ns:
        if n < 0:
            raise ParameterError("n", n, "must be non-negative")
    if args.source == "oracle":
        state, _ = oracle.conditional_amplitudes(params, _policy(args))
        probs = oracle.oracle_pnd(state)
        values = [float(probs[n]) if n < len(probs) else 0.0 for n in ns]
    else:
        state = analytic.ConditionalState(theta, args.r, args.m)
        table = state.pnd(max(ns))
        values = [float(table[n]) for n in ns]
    meta = {"command": "pnd", "source": args.source, "m": args.m, "theta": theta, "r": args.r}
    return gridscan.Table(["n", "P"], list(zip(ns, values)), meta)


def cmd_moments(args):
    theta = _theta(args)
    if (args.k is None) != (args.l is None):
        raise UsageError("--k and --l must be given together")
    columns = ["theta", "r", "m", "mean_n", "mandel_q"]
    if args.k is not None:
        columns.append(f"moment_{args.k}_{args.l}")
    rows = []
    for m in args.m:
        if args.source == "oracle":
            state, _ = oracle.conditional_amplitudes(ModelParams(theta, args.r, m), _policy(args))
            mean, q_fn = oracle.oracle_mean(state), lambda: oracle.oracle_q(state)
            moment = lambda k, l: oracle.oracle_moments(state, k, l).real  # noqa: E731
        else:
            cs = analytic.ConditionalState(theta, args.r, m)
            mean, q_fn, moment = cs.mean_photon(), cs.mandel_q, cs.moments
        try:
            q = q_fn()
        except UndefinedQError:
            q = None
        row = [theta, args.r, m, mean, q]
        if args.k is not None:
            row.append(moment(args.k, args.l))
        rows.append(tuple(row))
    meta = {"command": "moments", "source": args.source, "theta": theta, "r": args.r}
    return gridscan.Table(columns, rows, meta)


def cmd_field(args):
    theta = _theta(args)
    observable = "qcd" if args.command == "quad" else args.command
    spec = gridscan.GridSpec(
        observable,
        x_range=args.x_range,
        y_range=args.y_range,
        nx=args.nx,
        ny=args.ny,
        measure=getattr(args, "measure", "xp"),
    )
    rows, meta = [], None
    for m in args.m:
        table = gridscan.grid(spec, ModelParams(theta, args.r, m))
        rows.extend((m,) + row for row in table.rows)
        if meta is None:
            meta = dict(table.metadata)
            columns = ["m"] + table.columns
    meta.pop("m")
    meta["m_list"] = ",".join(str(m) for m in args.m)
    return gridscan.Table(columns, rows, meta)


def cmd_sweep(args):
    if args.variable == "r":
        lo, hi, points, fixed = 0.01, 3.0, 300, _theta(args)
    else:
        if args.theta is not None or args.theta_frac is not None:
            raise UsageError("--theta cannot be fixed while sweeping theta")
        lo, hi, points, fixed = 0.0, math.pi / 2, 50, args.r
    spec = gridscan.SweepSpec(
        args.variable,
        lo if args.lo is None else args.lo,
        hi if args.hi is None else args.hi,
        points if args.points is None else args.points,
        fixed,
        tuple(args.m),
    )
    return gridscan.sweep(spec, args.observable)


def cmd_qmap(args):
    for name, n in (("n-theta", args.n_theta), ("n-r", args.n_r)):
        if n < 2:
            raise ParameterError(name, n, "need at least 2 points")
    thetas = [args.theta_range[0] + i * (args.theta_range[1] - args.theta_range[0]) / (args.n_theta - 1)
              for i in range(args.n_theta)]
    rs = [args.r_range[0] + i * (args.r_range[1] - args.r_range[0]) / (args.n_r - 1) for i in range(args.n_r)]
    rows, meta = [], None
    for m in args.m:
        table = gridscan.q_region_map(thetas, rs, m)
        rows.extend(table.rows)
        meta = meta or dict(table.metadata)
    meta.pop("m")
    meta["m_list"] = ",".join(str(m) for m in args.m)
    return gridscan.Table(["theta", "r", "m", "mandel_q"], rows, meta)


def cmd_validate(args):
    return gridscan.validate(
        args.grid_theta,
        args.grid_r,
        args.grid_m,
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        floor=args.floor,
        grid_points=args.grid_points,
        perturb=dict(args.perturb) if args.perturb else None,
    )


def _validation_table(report):
    rows = [(c.name, c.max_abs_error, c.max_rel_error, c.tolerance, c.passed) for c in report.checks]
    rows += [(f"finding:{f.name}", f.max_deviation, None, f.statement, not f.discrepancy) for f in report.findings]
    columns = ["check", "max_abs_error", "max_rel_error", "tolerance", "passed"]
    return gridscan.Table(columns, rows, {"command": "validate", "passed": report.passed})


COMMANDS = {
    "prob": cmd_prob,
    "pnd": cmd_pnd,
    "moments": cmd_moments,
    "quad": cmd_field,
    "wigner": cmd_field,
    "husimi": cmd_field,
    "sweep": cmd_sweep,
    "qmap": cmd_qmap,
    "validate": cmd_validate,
}


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a same-directory temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hesvs-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
        failed = None
        if isinstance(result, gridscan.ValidationReport):
            failed = result.failed()
            result = result if args.format == "json" else _validation_table(result)
        text = result.to_json() if args.format == "json" else result.to_csv()
    except ZeroProbabilityError as exc:
        print(f"hesvs: zero-probability event: {exc}", file=sys.stderr)
        return EXIT_ZERO_PROBABILITY
    except ParameterError as exc:
        print(f"hesvs: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"hesvs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        try:
            write_atomic(args.output, text)
        except OSError as exc:
            print(f"hesvs: cannot write output={args.output!r}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    if failed:
        print(f"hesvs: validation failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
