"""Integrate i d psi/ds = tau H(s) psi and measure what is left excited."""

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels, linalg
from .errors import NumericError, UsageError

METHODS = ("rk4", "unitary_midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    steps: int | None = None  # fixed step count; overrides step_density
    step_density: float = 40.0  # steps per unit of physical time tau
    min_steps: int = 10
    renormalize: bool = False
    norm_ceiling: float = 1e-8
    energy_shift: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"unknown integrator {self.method!r}; choose from {METHODS}")
        if self.steps is not None and self.steps < 10:
            raise UsageError(f"steps must be >= 10, got {self.steps}")
        if not self.step_density > 0:
            raise UsageError(f"step_density must be > 0, got {self.step_density}")
        if self.min_steps < 10:
            raise UsageError(f"min_steps must be >= 10, got {self.min_steps}")

    def steps_for(self, tau):
        if self.steps is not None:
            return self.steps
        return max(self.min_steps, math.ceil(self.step_density * tau))

    def refined(self, factor=2):
        """Same policy with ``factor`` times as many steps."""
        if self.steps is not None:
            return replace(self, steps=self.steps * factor)
        return replace(self, step_density=self.step_density * factor, min_steps=self.min_steps * factor)

    def describe(self):
        steps = f"steps={self.steps}" if self.steps is not None else (
            f"step_density={self.step_density!r},min_steps={self.min_steps}"
        )
        return f"{self.method}:{steps},renormalize={int(self.renormalize)}"


@dataclass(frozen=True)
class EvolutionResult:
    final_state: np.ndarray
    tau: float
    norm_drift: float
    p_excited: float
    e_residual: float
    steps_used: int
    model_label: str
    schedule_label: str


# ------------------------------------------------------------------ observables


def _ground_level(model):
    spec = model.final_spectrum
    return spec.eigenvectors[:, spec.levels()[0]]


def excitation_probability(model, state):
    """Weight outside the ground level of H_pot, normalized by |state|^2.

    Computed as |psi - P0 psi|^2 rather than 1 - |<0|psi>|^2 so that small
    values are not lost to cancellation.
    """
    psi = np.asarray(state)
    v0 = _ground_level(model)
    rest = psi - v0 @ (v0.conj().T @ psi)
    return float(np.vdot(rest, rest).real / np.vdot(psi, psi).real)


def residual_energy(model, state):
    """<psi|H_pot|psi>/<psi|psi> - eps_0, evaluated as <psi|(H_pot - eps_0)|psi>."""
    psi = np.asarray(state)
    e0 = model.exact_ground_energy_final
    if model.pot_is_diagonal:
        shifted = np.diag(model.h_pot).real - e0
        num = float(np.sum(shifted * np.abs(psi) ** 2))
    else:
        num = float(np.vdot(psi, model.h_pot @ psi - e0 * psi).real)
    return num / float(np.vdot(psi, psi).real)


def excitation_overlaps(model, state):
    """[(level, probability)] over the distinct levels of H_pot, degenerate
    levels aggregated; probabilities sum to one."""
    psi = np.asarray(state)
    if psi.shape[0] != model.dim:
        raise UsageError(f"state dim {psi.shape[0]} does not match model dim {model.dim}")
    spec = model.final_spectrum
    amps = np.abs(spec.eigenvectors.conj().T @ psi) ** 2
    total = float(np.vdot(psi, psi).real)
    return [(k, float(amps[idx].sum() / total)) for k, idx in enumerate(spec.levels())]


def level_energies(model):
    spec = model.final_spectrum
    return [float(spec.eigenvalues[idx[0]]) for idx in spec.levels()]


def instantaneous_excitation(model, sched, s, state):
    """Weight outside the instantaneous ground state of H(s)."""
    from .models import interpolate

    spec = linalg.eigh(interpolate(model, sched, s))
    v0 = spec.eigenvectors[:, spec.levels()[0]]
    psi = np.asarray(state)
    rest = psi - v0 @ (v0.conj().T @ psi)
    return float(np.vdot(rest, rest).real / np.vdot(psi, psi).real)


# -------------------------------------------------------------------- evolution


def _chunks(n, size):
    k = 0
    while k < n:
        yield k, min(size, n - k)
        k += size


def evolve(model, sched, tau, cfg=None, observer: Callable | None = None, every=None):
    """Evolve the model's initial state from s=0 to s=1 at annealing time ``tau``.

    ``observer(s, psi)`` is called at s=0 and then every ``every`` steps
    (and at s=1).
    """
    cfg = cfg or IntegratorConfig()
    if not tau > 0:
        raise UsageError(f"tau must be > 0, got {tau}")
    n = cfg.steps_for(tau)
    ds = 1.0 / n
    d = model.dim
    psi = np.array(model.initial_state, dtype=complex)
    if cfg.method == "rk4":
        chunk = every or 4096
        ops = _kernels.pack_pair(model.h_kin, model.h_pot)
    else:
        chunk = every or max(1, min(4096, 2**21 // (d * d)))
    if observer:
        observer(0.0, psi)
    for k0, c in _chunks(n, chunk):
        if cfg.method == "rk4":
            s = np.arange(2 * k0, 2 * (k0 + c) + 1) / (2 * n)
            y = _kernels.rk4_chunk(*ops, _kernels.to_real(psi), sched(s), float(tau), ds, cfg.energy_shift)
            psi = _kernels.to_complex(y)
        else:
            f = sched((np.arange(k0, k0 + c) + 0.5) / n)[:, None, None]
            w, v = np.linalg.eigh((1.0 - f) * model.h_kin + f * model.h_pot)
            phases = np.exp(-1j * tau * ds * w)
            psi = _kernels.midpoint_chunk(np.ascontiguousarray(v), phases, psi)
        if cfg.renormalize:
            psi /= np.linalg.norm(psi)
        if not np.all(np.isfinite(psi)):
            raise NumericError(f"state diverged at s={(k0 + c) / n:.6g}; use more steps")
        if observer:
            observer((k0 + c) / n, psi)
    norm_drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if not cfg.renormalize and norm_drift > cfg.norm_ceiling:
        raise NumericError(
            f"norm drift {norm_drift:.3e} exceeds ceiling {cfg.norm_ceiling:g} "
            f"at tau={tau!r} with {n} steps; increase step_density",
            residual=norm_drift,
        )
    psi.flags.writeable = False
    return EvolutionResult(
        final_state=psi,
        tau=float(tau),
        norm_drift=norm_drift,
        p_excited=excitation_probability(model, psi),
        e_residual=residual_energy(model, psi),
        steps_used=n,
        model_label=model.label,
        schedule_label=sched.name,
    )


class ConvergenceCheck(NamedTuple):
    result: EvolutionResult
    result_half_step: EvolutionResult
    ratio: float  # |p(n)-p(2n)| / |p(2n)-p(4n)|; nan when not requested

    @property
    def e_residual_change(self):
        """Relative change of e_residual when the step is halved."""
        a, b = self.result.e_residual, self.result_half_step.e_residual
        return abs(a - b) / abs(b) if b else abs(a - b)


def convergence_check(model, sched, tau, cfg=None, with_ratio=True):
    cfg = cfg or IntegratorConfig()
    r1 = evolve(model, sched, tau, cfg)
    r2 = evolve(model, sched, tau, cfg.refined(2))
    ratio = float("nan")
    if with_ratio:
        r4 = evolve(model, sched, tau, cfg.refined(4))
        den = abs(r2.p_excited - r4.p_excited)
        ratio = abs(r1.p_excited - r2.p_excited) / den if den else float("inf")
    return ConvergenceCheck(r1, r2, ratio)


def trajectory_recorder(model, sched):
    """Observer collecting (s, norm, instantaneous excitation) rows."""
    rows = []

    def observe(s, psi):
        rows.append((s, float(np.linalg.norm(psi)), instantaneous_excitation(model, sched, s, psi)))

    observe.rows = rows
    return observe
