"""Log-log slope fits and small helpers for the experiments."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from .config import DEFAULT_FLOORS, OBSERVABLES


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float  # log10 of the prefactor
    window: tuple
    n_points: int
    residual_rms: float
    floor_excluded: int


def fit_slope(table, observable="p_excited", window=None, floor=None, schedule=None, envelope_bins=0):
    """OLS of log10(observable) against log10(tau) inside ``window``.

    Points below ``floor`` are dropped and counted. With ``envelope_bins > 0``
    the window is cut into that many equal bins in log tau and only the
    largest point of each non-empty bin is fitted, which tracks the upper
    envelope of an oscillating power law.
    """
    if observable not in OBSERVABLES:
        raise UsageError(f"observable must be one of {OBSERVABLES}, got {observable!r}")
    floor = DEFAULT_FLOORS[observable] if floor is None else floor
    rows = table.select(schedule)
    tau = np.array([r.tau for r in rows], dtype=float)
    y = np.array([getattr(r, observable) for r in rows], dtype=float)
    if window is None:
        window = (float(tau.min()), float(tau.max())) if tau.size else (math.nan, math.nan)
    lo, hi = window
    inside = (tau >= lo * (1 - 1e-12)) & (tau <= hi * (1 + 1e-12)) & np.isfinite(y)
    keep = inside & (y > floor)
    excluded = int(np.count_nonzero(inside & ~keep))
    x, v = np.log10(tau[keep]), np.log10(y[keep])
    if envelope_bins and x.size:
        edges = np.linspace(math.log10(lo), math.log10(hi), envelope_bins + 1)
        which = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, envelope_bins - 1)
        pick = [np.flatnonzero(which == b)[np.argmax(v[which == b])] for b in range(envelope_bins)
                if np.any(which == b)]
        x, v = x[pick], v[pick]
    if x.size < 4:
        raise UsageError(
            f"fit window [{lo:g}, {hi:g}] has {x.size} usable points (need >= 4; "
            f"{excluded} below floor {floor:g})"
        )
    slope, intercept = np.polyfit(x, v, 1)
    rms = float(np.sqrt(np.mean((v - (slope * x + intercept)) ** 2)))
    return FitResult(float(slope), float(intercept), (lo, hi), int(x.size), rms, excluded)


def grover_tau_for_delta(n, delta):
    """Annealing time sqrt(N-1)/delta of the local-adiabatic search schedule."""
    if not delta > 0:
        raise UsageError(f"delta must be > 0, got {delta}")
    return math.sqrt(n - 1) / delta
