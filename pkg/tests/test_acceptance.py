"""End-to-end acceptance checks, one PASS/FAIL line per criterion.

Sweeps are run from the shipped configs into a temporary directory. Criteria
that are known to be out of reach in double precision still run as stated;
their supporting numbers are printed as notes.
"""

from pathlib import Path

import numpy as np
import pytest

from annealbench import linalg
from annealbench.errors import UsageError
from annealbench.harness import SweepTable, fit_slope, geometric_grid, grover_tau_for_delta, parse_config, run_sweep
from annealbench.models import build_grover, build_lz, grover_gap, grover_symmetric_basis, make_model, parse_model
from annealbench.propagator import (
    IntegratorConfig,
    evolve,
    excitation_overlaps,
    level_energies,
)
from annealbench.schedules import check_flatness, parse_schedule, polynomial
from annealbench.spectral import bound_report, lz_nonadiabatic_probability, perturbative_amplitude

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
LZ = build_lz(2.0, 0.2)


@pytest.fixture(scope="session")
def sweep(tmp_path_factory):
    cache = {}
    root = tmp_path_factory.mktemp("acceptance")

    def get(name):
        if name not in cache:
            spec = parse_config(CONFIGS / f"{name}.ini")
            cache[name] = (spec, run_sweep(spec, out=root / f"{name}.csv"))
        return cache[name]

    return get


def window_rows(table, schedule, window):
    lo, hi = window
    return [r for r in table.select(schedule) if lo * (1 - 1e-12) <= r.tau <= hi * (1 + 1e-12)]


def try_fit(table, spec, schedule, **kw):
    fs = spec.fit
    args = dict(observable=fs.observable, window=fs.windows[schedule], floor=fs.effective_floor,
                schedule=schedule, envelope_bins=fs.envelope_bins)
    args.update(kw)
    try:
        return fit_slope(table, **args), None
    except UsageError as exc:
        return None, str(exc)


# ---------------------------------------------------------------- criterion 1


def test_criterion_1_lz_small_tau(sweep, verdicts):
    _, table = sweep("accept_lz_small")
    f1 = parse_schedule("f1")
    worst, n = 0.0, 0
    for r in table.select("f1"):
        if 0.05 <= r.p_excited <= 0.9:
            expect = lz_nonadiabatic_probability(2.0, 0.2, f1, r.tau)
            worst = max(worst, abs(r.p_excited - expect) / expect)
            n += 1
    ok = n >= 10 and worst <= 0.10
    verdicts.record(1, "closed form", ok, f"{n} points in [0.05, 0.9], worst relative error {worst:.3%}")
    assert ok


# ---------------------------------------------------------------- criterion 2


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_criterion_2_lz_slopes(sweep, verdicts, m):
    spec, table = sweep("accept_lz_slopes")
    name = f"f{m}"
    fit, err = try_fit(table, spec, name)
    coef = bound_report(LZ, parse_schedule(name), m).coefficient
    rows = window_rows(table, name, spec.fit.windows[name])
    env = max(r.p_excited * r.tau ** (2 * m) for r in rows) / coef
    env_ok = env <= 1.2
    if fit is None:
        verdicts.record(2, f"m={m}", False, f"no fit ({err}); envelope ratio {env:.3f}")
        deep, _ = try_fit(table, spec, name, floor=1e-27)
        if deep:
            verdicts.note(2, f"m={m} below the 1e-15 floor; fit at floor 1e-27 gives slope {deep.slope:.3f}")
        else:
            verdicts.note(2, f"m={m} below the 1e-15 floor and not fittable above the rounding floor")
        pytest.fail(f"m={m}: {err}")
    slope_ok = abs(fit.slope + 2 * m) <= 0.25
    ok = slope_ok and env_ok
    verdicts.record(2, f"m={m}", ok,
                    f"slope {fit.slope:.3f} (target {-2 * m} +- 0.25) from {fit.n_points} points, "
                    f"{fit.floor_excluded} below floor; envelope ratio {env:.3f} (<= 1.2)")
    assert ok


# ---------------------------------------------------------------- criterion 3


@pytest.mark.parametrize("name,target,tol", [("f1", -2, 0.3), ("f2", -4, 0.4)])
def test_criterion_3_spin_glass_slopes(sweep, verdicts, name, target, tol):
    spec, table = sweep("accept_spinglass")
    rows = window_rows(table, name, spec.fit.windows[name])
    in_band = all(1e-12 <= r.e_residual <= 1e-3 for r in rows)
    gate = max(r.step_change for r in rows)
    fit, err = try_fit(table, spec, name)
    ok = fit is not None and abs(fit.slope - target) <= tol and in_band and gate < 0.01
    slope = f"{fit.slope:.3f}" if fit else f"none ({err})"
    verdicts.record(3, name, ok, f"slope {slope} (target {target} +- {tol}), e_residual in band: {in_band}, "
                                 f"max step-halving change {gate:.1e}")
    assert ok


@pytest.mark.parametrize("name,target", [("f3", -6), ("f4", -8)])
def test_criterion_3_spin_glass_deep_report(sweep, verdicts, name, target):
    # reported only: these points sit below the double-precision floor
    spec, table = sweep("accept_spinglass_deep")
    fit, err = try_fit(table, spec, name)
    verdicts.note(3, f"{name} reduced window {spec.fit.windows[name]}, floor {spec.fit.effective_floor:g}: "
                     + (f"slope {fit.slope:.3f} (ideal {target})" if fit else f"no fit ({err})"))


# ---------------------------------------------------------------- criterion 4


@pytest.mark.parametrize("name,target,tol", [("opt:64", -2, 0.25), ("opt2:64", -4, 0.4)])
def test_criterion_4_grover_slopes(sweep, verdicts, name, target, tol):
    spec, table = sweep("accept_grover")
    fit, err = try_fit(table, spec, name)
    ok = fit is not None and abs(fit.slope - target) <= tol
    slope = f"{fit.slope:.3f}" if fit else f"none ({err})"
    verdicts.record(4, name, ok, f"e_residual slope {slope} (target {target} +- {tol})")
    assert ok


@pytest.mark.parametrize("name", ["opt3:64", "opt4:64"])
def test_criterion_4_grover_deep_report(sweep, verdicts, name):
    spec, table = sweep("accept_grover")
    fit, err = try_fit(table, spec, name)
    verdicts.note(4, f"{name}: " + (f"slope {fit.slope:.3f}" if fit else f"no fit at floor 1e-13 ({err})"))


def test_criterion_4_full_matrix_path(sweep, verdicts):
    spec, table = sweep("accept_grover")
    full = build_grover(64)
    # rounding enters the amplitude, so compare sqrt(e_residual) in absolute terms
    worst = 0.0
    for name in ("opt:64", "opt2:64"):
        for r in table.select(name)[::16]:
            res = evolve(full, parse_schedule(name), r.tau, spec.integrator)
            worst = max(worst, abs(np.sqrt(res.e_residual) - np.sqrt(r.e_residual)))
    ok = worst <= 1e-12
    verdicts.record(4, "full vs reduced", ok, f"max excitation-amplitude difference {worst:.1e}")
    assert ok


# ---------------------------------------------------------------- criterion 5


def test_criterion_5_gap_closed_forms(verdicts):
    fs = np.linspace(0.0, 1.0, 1000)
    worst = 0.0
    for n in (8, 64, 256):
        g = build_grover(n)
        for f in fs:
            w = linalg.eigh((1 - f) * np.asarray(g.h_kin) + f * np.asarray(g.h_pot)).eigenvalues
            worst = max(worst, abs(w[1] - w[0] - grover_gap(n, f)))
    fine = np.linspace(0.45, 0.55, 20001)
    lz_gaps = [np.diff(linalg.eigh((1 - f) * np.asarray(LZ.h_kin) + f * np.asarray(LZ.h_pot)).eigenvalues)[0]
               for f in fine]
    lz_err = abs(min(lz_gaps) - 0.4)
    ok = worst <= 1e-10 and lz_err <= 1e-12
    verdicts.record(5, "gaps", ok, f"search gap max deviation {worst:.1e}; LZ minimum gap error {lz_err:.1e}")
    assert ok


# ---------------------------------------------------------------- criterion 6


def test_criterion_6_sqrt_n_scaling(verdicts):
    cfg = IntegratorConfig(step_density=40)
    points, envelope = {}, {}
    for n in (16, 64, 256):
        model, sched = build_grover(n, reduced=True), parse_schedule(f"opt:{n}")
        tau = grover_tau_for_delta(n, 0.1)
        points[n] = evolve(model, sched, tau, cfg).p_excited
        envelope[n] = max(evolve(model, sched, t, cfg).p_excited for t in np.linspace(0.85 * tau, 1.15 * tau, 61))
    spread = max(points.values()) / min(points.values())
    env_spread = max(envelope.values()) / min(envelope.values())
    ok = spread < 3
    verdicts.record(6, "point values", ok,
                    ", ".join(f"N={n}: {p:.4g}" for n, p in points.items()) + f"; spread {spread:.2f}x (< 3)")
    verdicts.note(6, "max over tau within +-15%: " + ", ".join(f"N={n}: {p:.4g}" for n, p in envelope.items())
                     + f"; spread {env_spread:.2f}x")
    assert ok


# ---------------------------------------------------------------- criterion 7


def test_criterion_7_perturbative_cross_check(verdicts):
    f1 = parse_schedule("f1")
    cfg = IntegratorConfig(step_density=200)
    rows = []
    for tau in geometric_grid(100, 3000, 12):
        p = evolve(LZ, f1, tau, cfg).p_excited
        if 1e-8 <= p <= 1e-4:
            a2 = abs(perturbative_amplitude(LZ, f1, tau)) ** 2
            rows.append((tau, p, abs(a2 - p) / p))
    bad = [(t, e) for t, _, e in rows if e > 0.15]
    ok = len(rows) >= 5 and not bad
    verdicts.record(7, "LZ f1", ok, f"{len(rows)} points with p in [1e-8, 1e-4]; "
                                   + ("all within 15%" if not bad else
                                      "over 15% at " + ", ".join(f"tau={t:.0f} ({e:.0%})" for t, e in bad)))
    late = [e for t, _, e in rows if t >= 261]
    if late:
        verdicts.note(7, f"points at tau >= 261: max disagreement {max(late):.1%} over {len(late)} points")
    assert ok


# ---------------------------------------------------------------- criterion 8


def test_criterion_8_property_suites(sweep, verdicts):
    rng = np.random.default_rng(8)
    results = {}

    h = [linalg.random_hermitian(d, rng) for d in (2, 8, 64, 512)]
    results["eigh round trip"] = max(
        float(np.max(np.abs(d.eigenvectors @ np.diag(d.eigenvalues) @ d.eigenvectors.conj().T - m)) /
              np.linalg.norm(m))
        for m, d in ((m, linalg.eigh(m)) for m in h)) <= 1e-10

    table = {(m, 0, m): [1, 6, 60, 840][m - 1] for m in (1, 2, 3, 4)}
    results["derivative table"] = all(
        abs(polynomial(m).deriv(0.0, order) - v) <= 1e-9 * v for (m, _, order), v in table.items()
    ) and all(check_flatness(polynomial(m), m) and not check_flatness(polynomial(m), m + 1) for m in (1, 2, 3, 4))

    s = rng.uniform(0, 1, 200)
    results["f(s) + f(1-s) = 1"] = all(
        np.max(np.abs(polynomial(m)(s) + polynomial(m)(1 - s) - 1)) <= 1e-13 for m in (1, 2, 3, 4))

    drift = 0.0
    for name in ("accept_lz_small", "accept_lz_slopes", "accept_grover", "accept_spinglass",
                 "accept_spinglass_deep"):
        _, tab = sweep(name)
        drift = max(drift, max(r.norm_drift for r in tab.select()))
    results[f"norm drift {drift:.1e} <= 1e-10"] = drift <= 1e-10

    f2 = parse_schedule("f2")
    fine = IntegratorConfig(step_density=200)
    a = evolve(LZ, f2, 30.0, fine)
    eye = 2.5 * np.eye(2)
    b = evolve(make_model(LZ.h_kin + eye, LZ.h_pot + eye, LZ.initial_state, "shifted"), f2, 30.0, fine)
    results["gauge invariance"] = abs(a.p_excited - b.p_excited) < 1e-9 and abs(a.e_residual - b.e_residual) < 1e-9

    basis = grover_symmetric_basis(64)
    leak = []
    evolve(build_grover(64), parse_schedule("opt:64"), 200.0, IntegratorConfig(step_density=20),
           observer=lambda _s, psi: leak.append(np.linalg.norm(psi - basis @ (basis.T @ psi))), every=40)
    results["search subspace confinement"] = max(leak) <= 1e-10

    ising = parse_model("ising:grid=2x3,seed=4,h=0.1,gamma=1")
    res = evolve(ising, f2, 6.0, IntegratorConfig(step_density=100))
    lev = level_energies(ising)
    spectral = sum((lev[k] - lev[0]) * p for k, p in excitation_overlaps(ising, res.final_state))
    results["spectral-sum identity"] = abs(spectral - res.e_residual) <= 1e-9 * abs(res.e_residual)

    taus = np.geomspace(10, 1e4, 31)
    results["fit exactness"] = all(
        abs(fit_slope(SweepTable.from_arrays(taus, 2.0 * taus ** -k), floor=0.0).slope + k) <= 1e-9
        for k in (2, 4, 6, 8))

    ok = all(results.values())
    failing = [k for k, v in results.items() if not v]
    verdicts.record(8, "properties", ok, "all hold" if ok else "failing: " + ", ".join(failing))
    assert ok
