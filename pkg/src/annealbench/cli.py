"""``annealbench`` command line.

Exit codes: 0 success, 1 usage error, 2 numeric or domain failure, 3 I/O error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NumericError, UsageError
from .harness import fit_slope, make_figure_scripts, parse_config, read_table, run_sweep
from .harness.config import OBSERVABLES
from .models import parse_model
from .propagator import METHODS, IntegratorConfig, evolve, trajectory_recorder
from .schedules import parse_schedule
from .spectral import bound_report, sample_spectrum

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="sweep config file (INI-style, see docs/formats.md)")
    p.add_argument("--model", help="model spec, e.g. lz:h=2,alpha=0.2")
    p.add_argument("--schedule", help="schedule name(s), comma separated")
    p.add_argument("--tau", help="annealing time (evolve) or 'lo,hi' range (sweep)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    p.add_argument("--out", help="output path (default: stdout or the config's output)")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="annealbench", description="Quantum annealing schedule benchmarks.")
    parser.add_argument("--version", action="version", version=f"annealbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", parents=[common], help="instantaneous spectrum and A coefficients")
    sp.add_argument("--grid", type=int, default=101, help="number of s samples (default 101)")
    sp.add_argument("--levels", type=int, default=None, help="excited states to report (default all, max 16)")
    sp.add_argument("--orders", default="1", help="derivative orders for A columns, e.g. 1,2")

    bp = sub.add_parser("bound", parents=[common], help="endpoint bound coefficient for tau^-2m")
    bp.add_argument("--m", type=int, required=True, help="flatness order")
    bp.add_argument("--level", type=int, default=1, help="excited level (default 1)")
    bp.add_argument("--grid", type=int, default=101)

    ep = sub.add_parser("evolve", parents=[common], help="one evolution, printed as a CSV row")
    ep.add_argument("--method", choices=METHODS)
    ep.add_argument("--steps", type=int)
    ep.add_argument("--step-density", type=float)
    ep.add_argument("--renormalize", action="store_true")
    ep.add_argument("--dump-trajectory", metavar="PATH", help="write (s, norm, p_excited_inst) rows")
    ep.add_argument("--every", type=int, default=100, help="trajectory sampling interval in steps")

    wp = sub.add_parser("sweep", parents=[common], help="run a tau sweep from a config")
    wp.add_argument("--fresh", action="store_true", help="ignore existing rows in the output table")

    fp = sub.add_parser("fit", parents=[common], help="log-log slope fits on a sweep table")
    fp.add_argument("--table", help="sweep CSV (default: the config's output)")
    fp.add_argument("--observable", choices=OBSERVABLES)
    fp.add_argument("--window", help="'lo,hi' fit window (default: config windows or full range)")
    fp.add_argument("--floor", type=float)
    fp.add_argument("--envelope-bins", type=int)

    gp = sub.add_parser("figure", parents=[common], help="emit a gnuplot script for a sweep table")
    gp.add_argument("--table", required=True)
    gp.add_argument("--figure", required=True, choices=("fig1", "fig3", "fig5"))
    return parser


def _pair(text, what):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be 'lo,hi', got {text!r}") from None
    return lo, hi


def _spec(args):
    return parse_config(args.config) if args.config else None


def _model_and_schedule(args):
    spec = _spec(args)
    model_text = args.model or (spec.model if spec else None)
    sched_text = args.schedule or (spec.schedules[0] if spec else None)
    if not model_text or not sched_text:
        raise UsageError("need --model and --schedule (or --config)")
    sched_text = sched_text.split(",")[0]
    return spec, parse_model(model_text), parse_schedule(sched_text), model_text, sched_text


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(x):
    return repr(float(x))


def cmd_spectrum(args):
    _, model, sched, mtext, stext = _model_and_schedule(args)
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    try:
        orders = [int(x) for x in args.orders.split(",")]
    except ValueError:
        raise UsageError(f"--orders must be comma separated integers, got {args.orders!r}") from None
    k = min(model.dim - 1, args.levels or 16)
    cols = ["s", *(f"eps{j}" for j in range(k + 1)), *(f"gap{j}" for j in range(1, k + 1))]
    cols += [f"A{j}_m{m}" for m in orders for j in range(1, k + 1)]
    lines = [f"# model: {mtext}; schedule: {stext}; grid: {args.grid}", ",".join(cols)]
    for s in np.linspace(0.0, 1.0, args.grid):
        smp = sample_spectrum(model, sched, s, orders=orders)
        vals = [s, *smp.eigenvalues[: k + 1], *smp.gaps[:k]]
        for m in orders:
            vals += list(smp.a_coeffs[m][:k])
        lines.append(",".join(_fmt(v) for v in vals))
    _emit(lines, args.out)


def cmd_bound(args):
    _, model, sched, mtext, stext = _model_and_schedule(args)
    rep = bound_report(model, sched, args.m, args.level)
    j, m = args.level, args.m
    lines = [
        f"# model: {mtext}; schedule: {stext}; grid: {args.grid}",
        f"# m: {m}; level: {j}; A_start: {rep.a_start!r}; A_end: {rep.a_end!r}; coefficient: {rep.coefficient!r}",
        f"s,gap{j},A{j}_m{m}",
    ]
    for s in np.linspace(0.0, 1.0, args.grid):
        smp = sample_spectrum(model, sched, s, orders=(m,))
        lines.append(",".join(_fmt(v) for v in (s, smp.level_gaps[j - 1], smp.level_a_coeffs[m][j - 1])))
    _emit(lines, args.out)


def cmd_evolve(args):
    spec, model, sched, mtext, stext = _model_and_schedule(args)
    if args.tau is None:
        raise UsageError("evolve needs --tau")
    try:
        tau = float(args.tau)
    except ValueError:
        raise UsageError(f"--tau must be a number, got {args.tau!r}") from None
    cfg = spec.integrator if spec else IntegratorConfig()
    over = {"method": args.method, "steps": args.steps, "step_density": args.step_density}
    over = {k: v for k, v in over.items() if v is not None}
    if args.renormalize:
        over["renormalize"] = True
    if over:
        cfg = IntegratorConfig(**{**cfg.__dict__, **over})
    observer = trajectory_recorder(model, sched) if args.dump_trajectory else None
    if args.every < 1:
        raise UsageError("--every must be >= 1")
    res = evolve(model, sched, tau, cfg, observer=observer, every=args.every if observer else None)
    if observer:
        rows = ["s,norm,p_excited_inst", *(",".join(_fmt(v) for v in r) for r in observer.rows)]
        Path(args.dump_trajectory).write_text("\n".join(rows) + "\n")
    fields = ("model", "schedule", "tau", "p_excited", "e_residual", "norm_drift", "steps")
    vals = (f'"{mtext}"', stext, _fmt(tau), _fmt(res.p_excited), _fmt(res.e_residual),
            _fmt(res.norm_drift), str(res.steps_used))
    _emit([",".join(fields), ",".join(vals)], args.out)


def cmd_sweep(args):
    spec = _spec(args)
    if spec is None:
        raise UsageError("sweep needs --config")
    over = {"model": args.model, "output": args.out}
    if args.schedule:
        over["schedules"] = tuple(s for s in args.schedule.split(",") if s)
    if args.tau:
        over["tau_min"], over["tau_max"] = _pair(args.tau, "--tau")
    spec = spec.with_overrides(**over)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    table = run_sweep(spec, jobs=args.jobs, resume=not args.fresh)
    bad = sum(r.status != "ok" for r in table.rows)
    dest = spec.output or "(not written)"
    print(f"{len(table.rows)} rows -> {dest}" + (f"; {bad} flagged" if bad else ""))
    if table.rows and bad == len(table.rows):
        raise NumericError("every row failed numerically")


def cmd_fit(args):
    spec = _spec(args)
    table_path = args.table or (spec.output if spec else None)
    if not table_path:
        raise UsageError("fit needs --table (or a config with an output path)")
    table = read_table(table_path)
    fit = spec.fit if spec else None
    observable = args.observable or (fit.observable if fit else "p_excited")
    floor = args.floor if args.floor is not None else (fit.floor if fit else None)
    bins = args.envelope_bins if args.envelope_bins is not None else (fit.envelope_bins if fit else 0)
    names = args.schedule.split(",") if args.schedule else table.schedules()
    lines = ["schedule,slope,intercept,tau_lo,tau_hi,n_points,residual_rms,floor_excluded"]
    for name in names:
        window = _pair(args.window, "--window") if args.window else (fit.windows.get(name) if fit else None)
        r = fit_slope(table, observable, window, floor, name, bins)
        lines.append(",".join([name, _fmt(r.slope), _fmt(r.intercept), _fmt(r.window[0]), _fmt(r.window[1]),
                               str(r.n_points), _fmt(r.residual_rms), str(r.floor_excluded)]))
    _emit(lines, args.out)


def cmd_figure(args):
    path = make_figure_scripts(args.table, args.figure, args.out)
    print(path)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "bound": cmd_bound,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "figure": cmd_figure,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"annealbench: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, DomainError) as exc:
        print(f"annealbench: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"annealbench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
