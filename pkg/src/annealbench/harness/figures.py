"""gnuplot script emission for the figure tables.

Scripts are self-contained: table rows are embedded as datablocks, so the
script can be run anywhere with ``gnuplot fig1.gp``.
"""

import math
from pathlib import Path

from ..errors import UsageError
from ..models import _kv
from ..schedules import check_flatness, parse_schedule
from ..spectral import crossing_point, lz_bound_coefficient
from .sweep import read_table

FIGURES = {
    "fig1": ("p_excited", "P_{ex}"),
    "fig3": ("e_residual", "E_{res}"),
    "fig5": ("e_residual", "E_{res}"),
}


def flatness_order(sched, top=4):
    """Largest m <= top with derivatives 1..m-1 vanishing at both ends."""
    m = 1
    while m < top and check_flatness(sched, m + 1):
        m += 1
    return m


def _block(name, rows, observable):
    body = [f"{r.tau!r} {getattr(r, observable)!r}" for r in rows
            if math.isfinite(getattr(r, observable)) and getattr(r, observable) > 0]
    return [f"${name} << EOD", *body, "EOD", ""]


def _lz_params(model_text):
    kind, _, body = model_text.partition(":")
    if kind != "lz":
        raise UsageError(f"fig1 overlays need an lz model, table has {model_text!r}")
    kv = _kv(body, {"h", "alpha"}, model_text)
    return float(kv["h"]), float(kv["alpha"])


def make_figure_scripts(table_path, figure, out=None):
    """Write a gnuplot script for ``figure`` (fig1 | fig3 | fig5); return its path."""
    if figure not in FIGURES:
        raise UsageError(f"figure must be one of {sorted(FIGURES)}, got {figure!r}")
    observable, ylabel = FIGURES[figure]
    table = read_table(table_path)
    names = [s for s in table.meta.get("schedules", "").split(",") if s] or table.schedules()
    taus = [r.tau for r in table.rows] or [1.0, 1e4]
    x_lo, x_hi = min(taus), max(taus)
    if x_lo == x_hi:
        x_hi = 10 * x_lo

    lines = [
        f"# {figure}: generated by annealbench from {Path(table_path).name}",
        "set terminal pngcairo size 800,600",
        f"set output '{figure}.png'",
        "set logscale xy",
        "set format y '10^{%L}'",
        "set xlabel '{/Symbol t}'",
        f"set ylabel '{ylabel}'",
        f"set xrange [{x_lo!r}:{x_hi!r}]",
        "set key outside right",
        "",
    ]
    plots = []
    series = [(n, table.select(n)) for n in names]
    for i, (name, rows) in enumerate(series, 1):
        if rows:
            block = f"d{i}"
            lines += _block(block, rows, observable)
            plots.append(f"${block} using 1:2 with points pt {i} title '{name}'")

    if figure == "fig1":
        h, alpha = _lz_params(table.meta.get("model", ""))
        for i, name in enumerate(names, 1):
            sched = parse_schedule(name)
            m = flatness_order(sched)
            slope = sched.deriv(crossing_point(sched), 1)
            rate = math.pi * alpha**2 / (slope * h)
            coef = lz_bound_coefficient(h, alpha, sched, m)
            lines.append(f"lz{i}(x) = exp(-{rate!r}*x)")
            lines.append(f"pw{i}(x) = {coef!r}/x**{2 * m}")
            plots.append(f"lz{i}(x) with lines lt {i} dt 2 title 'LZ {name}'")
            plots.append(f"pw{i}(x) with lines lt {i} title 'bound {name}'")
    else:
        # tau^-2m guides, each anchored at the last point of the matching schedule
        anchors = {}
        for name, rows in series:
            m = flatness_order(parse_schedule(name))
            good = [r for r in rows if getattr(r, observable) > 0]
            if good and m not in anchors:
                last = max(good, key=lambda r: r.tau)
                anchors[m] = getattr(last, observable) * last.tau ** (2 * m)
        for m in (1, 2, 3, 4):
            c = anchors.get(m, x_lo ** (2 * m))
            lines.append(f"g{m}(x) = {c!r}/x**{2 * m}")
            plots.append(f"g{m}(x) with lines lt -1 dt {m} title '{{/Symbol t}}^{{-{2 * m}}}'")

    lines.append("")
    lines.append("plot " + ", \\\n     ".join(plots))
    out = Path(out) if out else Path(table_path).with_suffix(f".{figure}.gp")
    out.write_text("\n".join(lines) + "\n")
    return out
