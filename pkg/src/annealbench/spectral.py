"""Instantaneous spectra along a schedule and the quantities built on them:
gaps, adiabatic coefficients A_j^(m)(s), endpoint bound coefficients, the
first-order excitation amplitude integral, and the Landau-Zener closed forms.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from . import linalg
from .errors import DomainError, UsageError
from .models import interpolate
from .schedules import check_flatness

GROUND_GAP_TOL = 1e-12


def hamiltonian_s_derivative(model, sched, s, order):
    """d^m H/ds^m = f^(m)(s) (H_pot - H_kin)."""
    return sched.deriv(s, order) * (model.h_pot - model.h_kin)


@dataclass(frozen=True)
class SpectrumSample:
    s: float
    eigenvalues: np.ndarray
    gaps: np.ndarray  # eps_j - eps_0, j = 1..dim-1
    matrix_elements: dict  # m -> <j| d^m H |0>, j = 1..dim-1
    a_coeffs: dict  # m -> A_j^(m), per eigenstate (basis-dependent in degenerate levels)
    levels: list = field(default_factory=list)  # eigen-index arrays of excited levels
    level_gaps: np.ndarray = None
    level_a_coeffs: dict = None  # m -> basis-independent A per excited level


def sample_spectrum(model, sched, s, orders=(1,)):
    spec = linalg.eigh(interpolate(model, sched, s))
    ev = spec.eigenvalues
    if ev.size < 2:
        raise UsageError("spectral analysis needs dim >= 2")
    gaps = ev[1:] - ev[0]
    if gaps[0] <= GROUND_GAP_TOL:
        raise DomainError(f"ground state degenerate at s={s!r} (gap {gaps[0]:.3e})")
    v = spec.eigenvectors
    coupling = v[:, 1:].conj().T @ ((model.h_pot - model.h_kin) @ v[:, 0])
    levels = [idx for idx in spec.levels()[1:]]
    level_gaps = np.array([gaps[idx[0] - 1] for idx in levels])
    level_coupling = np.array([np.sqrt(np.sum(np.abs(coupling[idx - 1]) ** 2)) for idx in levels])
    mel, acoef, lacoef = {}, {}, {}
    for m in orders:
        fm = sched.deriv(s, m)
        mel[m] = fm * coupling
        acoef[m] = np.abs(mel[m]) / gaps ** (m + 1)
        lacoef[m] = abs(fm) * level_coupling / level_gaps ** (m + 1)
    return SpectrumSample(float(s), ev, gaps, mel, acoef, levels, level_gaps, lacoef)


def adiabatic_profile(model, sched, grid=2001):
    """(s grid, max_j A_j(s)) using level-aggregated coefficients."""
    if grid < 2:
        raise UsageError("grid must be >= 2")
    ss = np.linspace(0.0, 1.0, grid)
    prof = np.array([sample_spectrum(model, sched, s).level_a_coeffs[1].max() for s in ss])
    return ss, prof


def adiabatic_condition(model, sched, grid=2001):
    """Characteristic time max_{s,j} A_j(s) over a uniform s grid."""
    return float(adiabatic_profile(model, sched, grid)[1].max())


@dataclass(frozen=True)
class BoundReport:
    m: int
    level: int
    a_start: float
    a_end: float

    @property
    def coefficient(self):
        return (self.a_start + self.a_end) ** 2

    def predict(self, tau):
        return self.coefficient / np.asarray(tau, dtype=float) ** (2 * self.m)


def bound_report(model, sched, m, level=1):
    """Endpoint coefficient {A^(m)(0) + A^(m)(1)}^2 of the tau^-2m bound for an
    excited level (1 = first excited level, degeneracies aggregated)."""
    if m > sched.max_order:
        raise UsageError(f"order {m} exceeds the analytic order of {sched.name}")
    if not check_flatness(sched, m):
        raise UsageError(
            f"{sched.name} has a non-vanishing derivative of order < {m} at an endpoint; "
            f"the tau^-{2 * m} bound does not apply"
        )
    ends = []
    for s in (0.0, 1.0):
        smp = sample_spectrum(model, sched, s, orders=(m,))
        if not 1 <= level <= len(smp.levels):
            raise UsageError(f"level {level} out of range at s={s}")
        ends.append(float(smp.level_a_coeffs[m][level - 1]))
    return BoundReport(m, level, ends[0], ends[1])


def _eigh_batch(model, sched, ss, chunk=4096):
    fs = sched(ss)
    w = np.empty((ss.size, model.dim))
    v = np.empty((ss.size, model.dim, model.dim), dtype=complex)
    step = max(1, min(chunk, 2**22 // model.dim**2))
    for a in range(0, ss.size, step):
        f = fs[a : a + step, None, None]
        w[a : a + step], v[a : a + step] = np.linalg.eigh((1 - f) * model.h_kin + f * model.h_pot)
    return w, v


def _align(vecs):
    """Phase-align consecutive vectors so <v_k|v_{k+1}> is real and positive."""
    ov = np.einsum("ki,ki->k", vecs[:-1].conj(), vecs[1:])
    theta = np.concatenate([[0.0], np.cumsum(np.angle(ov))])
    return vecs * np.exp(-1j * theta)[:, None]


def perturbative_amplitude(model, sched, tau, level=1, quad_points=None):
    """First-order excitation amplitude into eigenstate ``level`` at s=1:

        int_0^1 ds exp(i tau int_0^s Delta) / Delta <j(s)| dH/ds |0(s)>

    evaluated on a uniform grid with the trapezoid rule for both integrals
    and a phase-continuous eigenframe.
    """
    if quad_points is None:
        quad_points = max(2001, int(40 * tau) + 1)
    if quad_points < 100:
        raise UsageError("quad_points must be >= 100")
    ss = np.linspace(0.0, 1.0, quad_points)
    w, v = _eigh_batch(model, sched, ss)
    scale = 1e-9 * max(1.0, float(np.max(np.abs(w))))
    if np.any(w[:, 1] - w[:, 0] <= GROUND_GAP_TOL):
        raise DomainError("ground state becomes degenerate along the path")
    lower = w[:, level] - w[:, level - 1]
    upper = w[:, level + 1] - w[:, level] if level + 1 < model.dim else np.inf
    if np.any(np.minimum(lower, upper) <= scale):
        k = int(np.argmin(np.minimum(lower, upper)))
        raise DomainError(f"level {level} is degenerate near s={ss[k]:.6g}")
    v0 = _align(v[:, :, 0])
    vj = _align(v[:, :, level])
    gap = w[:, level] - w[:, 0]
    diff = model.h_pot - model.h_kin
    mel = sched.deriv(ss, 1) * np.einsum("ki,ij,kj->k", vj.conj(), diff, v0)
    h = ss[1] - ss[0]
    phase = np.concatenate([[0.0], np.cumsum(0.5 * h * (gap[1:] + gap[:-1]))])
    integrand = np.exp(1j * tau * phase) / gap * mel
    return complex(h * (integrand.sum() - 0.5 * (integrand[0] + integrand[-1])))


# ------------------------------------------------------------- Landau-Zener


def crossing_point(sched, tol=1e-12):
    """s* with f(s*) = 1/2, by bisection."""
    g = lambda s: sched(s) - 0.5  # noqa: E731
    if g(0.0) * g(1.0) > 0:
        raise DomainError(f"{sched.name} never reaches f = 1/2")
    return bisect(g, 0.0, 1.0, xtol=tol)


def lz_nonadiabatic_probability(h, alpha, sched, tau):
    """exp(-pi alpha^2 tau / (f'(s*) h))."""
    s_star = crossing_point(sched)
    return math.exp(-math.pi * alpha**2 * tau / (sched.deriv(s_star, 1) * h))


def lz_bound_coefficient(h, alpha, sched, m):
    """4 h^2 alpha^2 (h^2 + 4 alpha^2)^-(m+2) (|f^(m)(0)| + |f^(m)(1)|)^2."""
    ends = abs(sched.deriv(0.0, m)) + abs(sched.deriv(1.0, m))
    return 4 * h * h * alpha * alpha / (h * h + 4 * alpha * alpha) ** (m + 2) * ends**2
