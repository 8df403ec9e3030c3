"""Annealing schedules f: [0, 1] -> [0, 1] with analytic derivatives.

Every schedule exposes a truncated Taylor expansion (a "jet") at any point;
derivatives are read off the jet and composition is series composition,
i.e. Faa di Bruno's formula in coefficient form.
"""

import math
import re

import numpy as np

from .errors import UsageError

MAX_ORDER = 6

# f_m(s) coefficients, ascending powers
_POLY_COEFFS = {
    1: [0, 1],
    2: [0, 0, 3, -2],
    3: [0, 0, 0, 10, -15, 6],
    4: [0, 0, 0, 0, 35, -84, 70, -20],
}


def _check_s(s):
    arr = np.asarray(s, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise UsageError(f"schedule argument outside [0, 1]: {s!r}")
    return arr


def _series_mul(a, b, order):
    out = np.zeros((order + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
    for i in range(order + 1):
        for j in range(order + 1 - i):
            out[i + j] = out[i + j] + a[i] * b[j]
    return out


def compose_jets(outer, inner, order):
    """Jet of g(h(s)) from the jet of g at h(s) and the jet of h at s."""
    shift = inner.copy()
    shift[0] = 0.0
    out = np.zeros_like(outer[: order + 1] * shift[: order + 1])
    power = np.zeros_like(out)
    power[0] = 1.0
    for k in range(order + 1):
        out = out + outer[k] * power
        power = _series_mul(power, shift, order)
    return out


class Schedule:
    name = "schedule"
    max_order = MAX_ORDER

    def jet(self, s, order):
        """Taylor coefficients c_0..c_order of f around s (c_k = f^(k)(s)/k!)."""
        raise NotImplementedError

    def __call__(self, s):
        arr = _check_s(s)
        val = self.jet(arr, 0)[0]
        return float(val) if np.ndim(s) == 0 else val

    def deriv(self, s, order):
        if not 1 <= order <= self.max_order:
            raise UsageError(
                f"derivative order {order} not available for {self.name} (max {self.max_order})"
            )
        arr = _check_s(s)
        val = self.jet(arr, order)[order] * math.factorial(order)
        return float(val) if np.ndim(s) == 0 else val

    def __repr__(self):
        return f"<Schedule {self.name}>"


class Polynomial(Schedule):
    def __init__(self, m):
        if m not in _POLY_COEFFS:
            raise UsageError(f"polynomial schedule f_m defined for m = 1..4, got {m}")
        self.m = m
        self.name = f"f{m}"
        self._polys = [np.polynomial.Polynomial(_POLY_COEFFS[m])]
        for k in range(MAX_ORDER):
            self._polys.append(self._polys[-1].deriv())

    def jet(self, s, order):
        s = np.asarray(s, dtype=float)
        return np.array([self._polys[k](s) / math.factorial(k) for k in range(order + 1)])


class CosineSq(Schedule):
    """f(s) = (1 - cos(pi s^2)) / 2."""

    name = "cossq"

    def jet(self, s, order):
        s = np.asarray(s, dtype=float)
        u = math.pi * s * s
        # (1 - cos u)/2 around u
        outer = np.array(
            [
                (1.0 - np.cos(u)) / 2 if k == 0 else -np.cos(u + k * math.pi / 2) / (2 * math.factorial(k))
                for k in range(order + 1)
            ]
        )
        inner = np.zeros((order + 1,) + s.shape)
        inner[0] = u
        if order >= 1:
            inner[1] = 2 * math.pi * s
        if order >= 2:
            inner[2] = math.pi
        return compose_jets(outer, inner, order)


class GroverOptimal(Schedule):
    """Local-adiabatic schedule for the N-item search Hamiltonian:

        f(s) = 1/2 + x / (2 sqrt(N - (N-1) x^2)),  x = 2s - 1
    """

    def __init__(self, n):
        if n < 2:
            raise UsageError(f"grover_optimal needs N >= 2, got {n}")
        self.n = int(n)
        self.name = f"opt:{self.n}"

    def jet(self, s, order):
        s = np.asarray(s, dtype=float)
        x0 = 2.0 * s - 1.0
        a = self.n - 1.0
        q = np.zeros((order + 1,) + s.shape)
        q[0] = self.n - a * x0 * x0
        if order >= 1:
            q[1] = -2.0 * a * x0
        if order >= 2:
            q[2] = -a
        # p = q^(-1/2):  n q0 p_n = sum_k ((alpha+1) k - n) q_k p_{n-k}
        alpha = -0.5
        p = np.zeros_like(q)
        p[0] = q[0] ** alpha
        for n in range(1, order + 1):
            acc = np.zeros_like(q[0])
            for k in range(1, min(n, 2) + 1):
                acc = acc + ((alpha + 1.0) * k - n) * q[k] * p[n - k]
            p[n] = acc / (n * q[0])
        lin = np.zeros_like(q)
        lin[0] = x0
        if order >= 1:
            lin[1] = 1.0
        g = 0.5 * _series_mul(lin, p, order)
        g[0] = g[0] + 0.5
        # d/ds = 2 d/dx
        return g * (2.0 ** np.arange(order + 1)).reshape((-1,) + (1,) * s.ndim)


class Composed(Schedule):
    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner
        self.max_order = min(outer.max_order, inner.max_order)
        self.name = f"{outer.name}∘{inner.name}"

    def jet(self, s, order):
        ij = self.inner.jet(s, order)
        # clip guards against 1 + 1ulp from polynomial evaluation
        oj = self.outer.jet(np.clip(ij[0], 0.0, 1.0), order)
        return compose_jets(oj, ij, order)


def polynomial(m):
    return Polynomial(m)


def cosine_sq():
    return CosineSq()


def grover_optimal(n):
    return GroverOptimal(n)


def compose(outer, inner):
    return Composed(outer, inner)


def check_flatness(sched, m, tol=1e-10):
    """True iff derivatives 1..m-1 vanish at both endpoints."""
    if m > sched.max_order:
        raise UsageError(f"flatness order {m} exceeds max analytic order {sched.max_order}")
    for k in range(1, m):
        if abs(sched.deriv(0.0, k)) > tol or abs(sched.deriv(1.0, k)) > tol:
            return False
    return True


_OPT_RE = re.compile(r"^opt(\d*):(\d+)$")


def parse_schedule(text):
    """Parse ``f1|f2|f3|f4|cossq|opt:<N>|opt<m>:<N>``."""
    t = text.strip()
    if t in ("f1", "f2", "f3", "f4"):
        sched = polynomial(int(t[1]))
    elif t == "cossq":
        sched = cosine_sq()
    else:
        match = _OPT_RE.match(t)
        if not match:
            raise UsageError(f"unknown schedule {text!r}")
        base = grover_optimal(int(match.group(2)))
        sched = compose(base, polynomial(int(match.group(1)))) if match.group(1) else base
    sched.name = t
    return sched
