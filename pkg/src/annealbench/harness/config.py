"""Sweep configuration: dataclasses and the strict INI-style parser.

Grammar (see docs/formats.md)::

    # comment
    [sweep]
    key = value        # trailing comments allowed

Sections: ``[sweep]``, ``[integrator]``, ``[fit]``. Every key must be known;
``window.<schedule> = lo hi`` inside ``[fit]`` declares a fit window.
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import UsageError
from ..models import parse_model
from ..propagator import IntegratorConfig
from ..schedules import parse_schedule

DEFAULT_FLOORS = {"p_excited": 1e-15, "e_residual": 1e-13}
OBSERVABLES = tuple(DEFAULT_FLOORS)


@dataclass(frozen=True)
class FitSpec:
    observable: str = "p_excited"
    floor: float | None = None
    envelope_bins: int = 0
    windows: dict = field(default_factory=dict)  # schedule -> (lo, hi)

    @property
    def effective_floor(self):
        return DEFAULT_FLOORS[self.observable] if self.floor is None else self.floor


@dataclass(frozen=True)
class SweepSpec:
    model: str
    schedules: tuple
    tau_min: float
    tau_max: float
    points_per_decade: int = 8
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: str | None = None
    convergence_gate: bool = False
    fit: FitSpec = field(default_factory=FitSpec)

    def __post_init__(self):
        if not 0 < self.tau_min < self.tau_max:
            raise UsageError(f"tau range must satisfy 0 < min < max, got [{self.tau_min}, {self.tau_max}]")
        if self.points_per_decade < 3:
            raise UsageError(f"points_per_decade must be >= 3, got {self.points_per_decade}")
        if not self.schedules:
            raise UsageError("at least one schedule is required")

    def tau_grid(self):
        return geometric_grid(self.tau_min, self.tau_max, self.points_per_decade)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def geometric_grid(lo, hi, per_decade):
    """lo * 10^(k/per_decade) up to hi, rounded to 12 significant digits so
    grid values are stable CSV keys."""
    n = int(math.floor(per_decade * math.log10(hi / lo) + 1e-9))
    return [float(f"{lo * 10 ** (k / per_decade):.12g}") for k in range(n + 1)]


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_SWEEP_KEYS = {
    "model": str,
    "schedules": lambda v: tuple(x.strip() for x in v.split(",") if x.strip()),
    "tau_min": float,
    "tau_max": float,
    "points_per_decade": int,
    "output": str,
    "convergence_gate": _bool,
}
_INTEGRATOR_KEYS = {
    "method": str,
    "steps": int,
    "step_density": float,
    "min_steps": int,
    "renormalize": _bool,
    "norm_ceiling": float,
    "energy_shift": _bool,
}
_FIT_KEYS = {"observable": str, "floor": float, "envelope_bins": int}
_SECTIONS = {"sweep": _SWEEP_KEYS, "integrator": _INTEGRATOR_KEYS, "fit": _FIT_KEYS}


def _window(value):
    parts = value.split()
    if len(parts) != 2:
        raise ValueError(f"window needs 'lo hi', got {value!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not 0 < lo < hi:
        raise ValueError(f"window must satisfy 0 < lo < hi, got {value!r}")
    return lo, hi


def parse_config(path):
    path = Path(path)
    text = path.read_text()
    values = {name: {} for name in _SECTIONS}
    lines = {}
    windows = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in _SECTIONS:
                raise UsageError(f"{where}: unknown section {line!r}")
            section = line[1:-1].strip()
            continue
        if section is None:
            raise UsageError(f"{where}: key outside of a section")
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key or not value:
            raise UsageError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        if section == "fit" and key.startswith("window."):
            sched = key[len("window."):]
            try:
                parse_schedule(sched)
                windows[sched] = _window(value)
            except (UsageError, ValueError) as exc:
                raise UsageError(f"{where}: {exc}") from None
            continue
        conv = _SECTIONS[section].get(key)
        if conv is None:
            raise UsageError(f"{where}: unknown key {key!r} in [{section}]")
        if key in values[section]:
            raise UsageError(f"{where}: duplicate key {key!r}")
        try:
            values[section][key] = conv(value)
        except ValueError as exc:
            raise UsageError(f"{where}: bad value for {key!r}: {exc}") from None
        lines[(section, key)] = where

    sweep = values["sweep"]
    for required in ("model", "schedules", "tau_min", "tau_max"):
        if required not in sweep:
            raise UsageError(f"{path}: [sweep] is missing required key {required!r}")
    # validate names early so errors carry line numbers
    for key, check in (("model", parse_model), ("schedules", lambda v: [parse_schedule(s) for s in v])):
        try:
            check(sweep[key])
        except UsageError as exc:
            raise UsageError(f"{lines[('sweep', key)]}: {exc}") from None
    if sweep["tau_min"] >= sweep["tau_max"]:
        raise UsageError(
            f"{lines[('sweep', 'tau_max')]}: range error: tau_min {sweep['tau_min']} >= tau_max {sweep['tau_max']}"
        )
    fit = values["fit"]
    if fit.get("observable", "p_excited") not in OBSERVABLES:
        raise UsageError(f"{lines[('fit', 'observable')]}: observable must be one of {OBSERVABLES}")
    try:
        integrator = IntegratorConfig(**values["integrator"])
        return SweepSpec(integrator=integrator, fit=FitSpec(windows=windows, **fit), **sweep)
    except UsageError as exc:
        raise UsageError(f"{path}: {exc}") from None
