"""tau sweeps and the CSV table format they produce."""

import datetime
import math
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..errors import NumericError, UsageError
from ..models import parse_model
from ..propagator import evolve
from ..schedules import parse_schedule

COLUMNS = ("schedule", "tau", "p_excited", "e_residual", "norm_drift", "steps", "step_change", "status")
TIMESTAMP_PREFIX = "# created:"


@dataclass(frozen=True)
class SweepRow:
    schedule: str
    tau: float
    p_excited: float
    e_residual: float
    norm_drift: float
    steps: int
    step_change: float = math.nan  # relative e_residual change under step halving
    status: str = "ok"

    @property
    def key(self):
        return (self.schedule, repr(self.tau))

    def to_csv(self):
        return ",".join(str(getattr(self, c)) if c in ("schedule", "status", "steps") else repr(getattr(self, c))
                        for c in COLUMNS)


@dataclass
class SweepTable:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def select(self, schedule=None, ok_only=True):
        return [r for r in self.rows
                if (schedule is None or r.schedule == schedule) and (not ok_only or r.status == "ok")]

    def schedules(self):
        seen = []
        for r in self.rows:
            if r.schedule not in seen:
                seen.append(r.schedule)
        return seen

    def column(self, name, schedule=None):
        return [getattr(r, name) for r in self.select(schedule)]

    @classmethod
    def from_arrays(cls, tau, values, observable="p_excited", schedule="synthetic"):
        rows = []
        for t, v in zip(tau, values):
            kw = {"p_excited": math.nan, "e_residual": math.nan, observable: float(v)}
            rows.append(SweepRow(schedule, float(t), norm_drift=0.0, steps=0, **kw))
        return cls(rows)


def _build_id():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        tag = out.stdout.strip() if out.returncode == 0 else ""
    except (OSError, subprocess.SubprocessError):
        tag = ""
    return f"annealbench {__version__}" + (f" ({tag})" if tag else "")


def header_lines(spec):
    return [
        "# annealbench sweep",
        f"# model: {spec.model}",
        f"# schedules: {','.join(spec.schedules)}",
        f"# integrator: {spec.integrator.describe()}",
        f"# convergence_gate: {int(spec.convergence_gate)}",
        f"# build: {_build_id()}",
        f"{TIMESTAMP_PREFIX} {datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}",
        ",".join(COLUMNS),
    ]


def _parse_row(parts, where):
    if len(parts) != len(COLUMNS):
        raise UsageError(f"{where}: expected {len(COLUMNS)} columns, got {len(parts)}")
    vals = dict(zip(COLUMNS, parts))
    try:
        return SweepRow(
            schedule=vals["schedule"],
            tau=float(vals["tau"]),
            p_excited=float(vals["p_excited"]),
            e_residual=float(vals["e_residual"]),
            norm_drift=float(vals["norm_drift"]),
            steps=int(vals["steps"]),
            step_change=float(vals["step_change"]),
            status=vals["status"],
        )
    except ValueError as exc:
        raise UsageError(f"{where}: {exc}") from None


def read_table(path):
    """Read a sweep CSV. Missing required columns raise UsageError."""
    path = Path(path)
    meta, rows, header = {}, [], None
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            if sep:
                meta[key.strip()] = val.strip()
            continue
        parts = [p.strip() for p in line.split(",")]
        if header is None:
            header = parts
            missing = [c for c in COLUMNS if c not in header]
            if missing:
                raise UsageError(f"{path}: table lacks required columns {missing}")
            continue
        rows.append(_parse_row([parts[header.index(c)] for c in COLUMNS], f"{path}:{lineno}"))
    if header is None:
        raise UsageError(f"{path}: no column header line")
    return SweepTable(rows, meta)


def write_table(table, spec, path):
    """Write the full table sorted by (schedule order in spec, tau), atomically."""
    order = {name: i for i, name in enumerate(spec.schedules)}
    rows = sorted(table.rows, key=lambda r: (order.get(r.schedule, len(order)), r.schedule, r.tau))
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(header_lines(spec) + [r.to_csv() for r in rows]) + "\n")
    os.replace(tmp, path)


def compute_row(model, sched, tau, cfg, gate=False):
    try:
        res = evolve(model, sched, tau, cfg)
        change = math.nan
        if gate:
            fine = evolve(model, sched, tau, cfg.refined(2))
            change = abs(res.e_residual - fine.e_residual) / abs(fine.e_residual) if fine.e_residual else 0.0
        return SweepRow(sched.name, tau, res.p_excited, res.e_residual, res.norm_drift, res.steps_used, change)
    except NumericError:
        return SweepRow(sched.name, tau, math.nan, math.nan, math.nan, cfg.steps_for(tau), status="numeric_error")


def _worker(model_text, sched_text, tau, cfg, gate):
    return compute_row(parse_model(model_text), parse_schedule(sched_text), tau, cfg, gate)


def run_sweep(spec, out=None, jobs=1, resume=True, progress=None):
    """Run every (schedule, tau) of ``spec``.

    Rows are appended to ``out`` as they finish; rows already present in
    ``out`` (same key) are reused, so an interrupted sweep can be resumed.
    At the end ``out`` is rewritten sorted by (schedule, tau).
    """
    out = out if out is not None else spec.output
    model = parse_model(spec.model)
    scheds = {name: parse_schedule(name) for name in spec.schedules}
    done = {}
    if out and resume and Path(out).exists():
        old = read_table(out)
        if old.meta.get("model") != spec.model or old.meta.get("integrator") != spec.integrator.describe():
            raise UsageError(f"{out}: existing table was produced by a different model/integrator")
        done = {r.key: r for r in old.rows}
    todo = [(name, tau) for name in spec.schedules for tau in spec.tau_grid()
            if (name, repr(tau)) not in done]
    sink = None
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        if not Path(out).exists() or not done:
            Path(out).write_text("\n".join(header_lines(spec)) + "\n")
        sink = open(out, "a")
    table = SweepTable(list(done.values()), {"model": spec.model})

    def record(row):
        table.rows.append(row)
        if sink:
            sink.write(row.to_csv() + "\n")
            sink.flush()
        if progress:
            progress(row)

    try:
        if jobs <= 1:
            for name, tau in todo:
                record(compute_row(model, scheds[name], tau, spec.integrator, spec.convergence_gate))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futs = [pool.submit(_worker, spec.model, name, tau, spec.integrator, spec.convergence_gate)
                        for name, tau in todo]
                for fut in as_completed(futs):
                    record(fut.result())
    finally:
        if sink:
            sink.close()
    order = {name: i for i, name in enumerate(spec.schedules)}
    table.rows.sort(key=lambda r: (order.get(r.schedule, len(order)), r.tau))
    if out:
        write_table(table, spec, out)
    return table
