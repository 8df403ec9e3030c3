"""Shared driver: run a figure's sweep, fit the windows, emit the plot script."""

import argparse
from pathlib import Path

from annealbench.errors import UsageError
from annealbench.harness import fit_slope, make_figure_scripts, parse_config, run_sweep

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main(figure):
    ap = argparse.ArgumentParser(description=f"Reproduce {figure}: sweep, fit, gnuplot script.")
    ap.add_argument("--out", help="CSV path (default: the config's output, relative to cwd)")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    spec = parse_config(CONFIGS / f"{figure}.ini")
    out = Path(args.out or spec.output)
    table = run_sweep(spec, out=out, jobs=args.jobs,
                      progress=lambda r: print(f"  {r.schedule:8s} tau={r.tau:<12.6g} {r.status}", flush=True))
    fs = spec.fit
    for name, window in fs.windows.items():
        try:
            fit = fit_slope(table, fs.observable, window, fs.effective_floor, name, fs.envelope_bins)
            print(f"{name}: slope {fit.slope:.3f} on [{window[0]:g}, {window[1]:g}] ({fit.n_points} points)")
        except UsageError as exc:
            print(f"{name}: {exc}")
    script = make_figure_scripts(out, figure)
    print(f"plot script: {script}  (run: gnuplot {script})")
