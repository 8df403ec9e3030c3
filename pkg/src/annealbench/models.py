"""Annealing problems in interpolation form H(s) = (1-f) H_kin + f H_pot.

Three families: the Landau-Zener two-level system, the transverse-field
Ising model on a small graph, and the N-item database search.
"""

import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from . import linalg
from .errors import UsageError

MAX_ISING_SITES = 14
MAX_GROVER_N = 1024

CANONICAL_SEED = 1


@dataclass(frozen=True, eq=False)
class AnnealingModel:
    h_kin: np.ndarray
    h_pot: np.ndarray
    initial_state: np.ndarray
    label: str
    exact_ground_energy_final: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.h_kin.shape[0]
        if self.h_pot.shape[0] != d or self.initial_state.shape[0] != d:
            raise UsageError("h_kin, h_pot and initial_state must share a dimension")

    @property
    def dim(self):
        return self.h_kin.shape[0]

    @cached_property
    def final_spectrum(self):
        """Eigen-decomposition of H_pot (cached; models are immutable)."""
        return linalg.eigh(self.h_pot)

    @cached_property
    def pot_is_diagonal(self):
        return not np.any(self.h_pot - np.diag(np.diag(self.h_pot)))

    @cached_property
    def kin_is_diagonal(self):
        return not np.any(self.h_kin - np.diag(np.diag(self.h_kin)))


def make_model(h_kin, h_pot, initial_state, label, ground=None, params=None):
    hk = linalg.hermitian(h_kin)
    hp = linalg.hermitian(h_pot)
    psi0 = linalg.vector(initial_state, normalized=True, tol=1e-10)
    if ground is None:
        ground = float(linalg.eigh(hp).eigenvalues[0])
    return AnnealingModel(hk, hp, psi0, label, float(ground), dict(params or {}))


def interpolate(model, sched, s):
    f = sched(s)
    return (1.0 - f) * model.h_kin + f * model.h_pot


# ---------------------------------------------------------------- Landau-Zener


def build_lz(h, alpha):
    if not h > 0:
        raise UsageError(f"LZ needs h > 0, got {h}")
    if alpha == 0:
        raise UsageError("LZ needs alpha != 0")
    sz, sx = linalg.SIGMA_Z, linalg.SIGMA_X
    h_kin = -(h / 2) * sz - alpha * sx
    h_pot = (h / 2) * sz - alpha * sx
    psi0 = linalg.eigh(h_kin).vector(0)
    return make_model(
        h_kin, h_pot, psi0, f"lz:h={h!r},alpha={alpha!r}", params={"kind": "lz", "h": h, "alpha": alpha}
    )


# ----------------------------------------------------------------------- Ising

_M64 = (1 << 64) - 1


def splitmix64(seed):
    """SplitMix64 stream of 64-bit unsigned integers.

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)            (all arithmetic mod 2^64)
    """
    state = seed & _M64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        yield z ^ (z >> 31)


def generate_couplings(n_edges, seed):
    """Couplings uniform on [-1, 1): J = 2u - 1 with u = (x >> 11) * 2^-53."""
    stream = splitmix64(seed)
    return [2.0 * ((next(stream) >> 11) * 2.0**-53) - 1.0 for _ in range(n_edges)]


def grid_edges(rows, cols):
    """Open-boundary square lattice, sites numbered row-major.

    Horizontal bonds first (row by row), then vertical bonds (row by row).
    """
    edges = [(r * cols + c, r * cols + c + 1) for r in range(rows) for c in range(cols - 1)]
    edges += [(r * cols + c, (r + 1) * cols + c) for r in range(rows - 1) for c in range(cols)]
    return edges


@dataclass(frozen=True)
class IsingInstance:
    n_sites: int
    edges: tuple  # ((i, j, J_ij), ...)
    h: float
    gamma: float
    seed: int | None = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise UsageError("Ising instance needs at least one site")
        seen = set()
        for i, j, _ in self.edges:
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise UsageError(f"edge ({i}, {j}) out of range for {self.n_sites} sites")
            if i == j:
                raise UsageError(f"self-loop on site {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise UsageError(f"duplicate edge {key}")
            seen.add(key)

    @classmethod
    def grid(cls, rows, cols, seed, h, gamma):
        pairs = grid_edges(rows, cols)
        couplings = generate_couplings(len(pairs), seed)
        edges = tuple((i, j, J) for (i, j), J in zip(pairs, couplings))
        return cls(rows * cols, edges, h, gamma, seed)


def _embed(op, site, n):
    return np.kron(np.kron(np.eye(2**site), op), np.eye(2 ** (n - site - 1)))


def spin_table(n):
    """s[i, b] = +1 / -1: z-spin of site i in basis state b (site 0 = leftmost factor)."""
    z = np.array([1.0, -1.0])
    out = np.empty((n, 2**n))
    for i in range(n):
        out[i] = np.kron(np.kron(np.ones(2**i), z), np.ones(2 ** (n - i - 1)))
    return out


def build_ising(inst):
    n = inst.n_sites
    if n > MAX_ISING_SITES:
        raise UsageError(f"Ising builder capped at {MAX_ISING_SITES} sites, got {n}")
    spins = spin_table(n)
    # sigma^z terms are diagonal; kron of their diagonals is the same embedding
    diag = -inst.h * spins.sum(axis=0)
    for i, j, J in inst.edges:
        diag = diag - J * spins[i] * spins[j]
    h_pot = np.diag(diag)
    h_kin = np.zeros((2**n, 2**n))
    for i in range(n):
        h_kin -= inst.gamma * _embed(linalg.SIGMA_X.real, i, n)
    psi0 = np.full(2**n, 2 ** (-n / 2))
    label = f"ising:n={n},h={inst.h!r},gamma={inst.gamma!r}"
    if inst.seed is not None:
        label += f",seed={inst.seed}"
    return make_model(
        h_kin,
        h_pot,
        psi0,
        label,
        ground=float(diag.min()),
        params={"kind": "ising", "instance": inst},
    )


def read_ising_file(path):
    """Instance file: ``n_sites``, then ``i j J`` lines, then ``h v`` and ``gamma v``.

    ``#`` starts a comment.
    """
    lines = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if text:
            lines.append((lineno, text.split()))
    if not lines:
        raise UsageError(f"{path}: empty instance file")
    try:
        n_sites = int(lines[0][1][0])
        edges, params = [], {}
        for lineno, tok in lines[1:]:
            if tok[0] in ("h", "gamma"):
                if len(tok) != 2:
                    raise UsageError(f"{path}:{lineno}: expected '{tok[0]} <value>'")
                params[tok[0]] = float(tok[1])
            elif len(tok) == 3:
                if params:
                    raise UsageError(f"{path}:{lineno}: edge after h/gamma lines")
                edges.append((int(tok[0]), int(tok[1]), float(tok[2])))
            else:
                raise UsageError(f"{path}:{lineno}: cannot parse {' '.join(tok)!r}")
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: {exc}") from exc
    missing = {"h", "gamma"} - params.keys()
    if missing:
        raise UsageError(f"{path}: missing {', '.join(sorted(missing))}")
    return IsingInstance(n_sites, tuple(edges), params["h"], params["gamma"])


def write_ising_file(inst, path):
    out = [f"# seed {inst.seed}" if inst.seed is not None else "# explicit couplings", str(inst.n_sites)]
    out += [f"{i} {j} {J!r}" for i, j, J in inst.edges]
    out += [f"h {inst.h!r}", f"gamma {inst.gamma!r}"]
    Path(path).write_text("\n".join(out) + "\n")


def canonical_instance_path():
    return resources.files("annealbench") / "data" / "ising_3x3_seed1.txt"


def canonical_instance():
    """The frozen 3x3 open-lattice instance (seed 1, h=0.1, Gamma=1)."""
    with resources.as_file(canonical_instance_path()) as p:
        inst = read_ising_file(p)
    return IsingInstance(inst.n_sites, inst.edges, inst.h, inst.gamma, CANONICAL_SEED)


# ---------------------------------------------------------------------- Grover


def build_grover(n, reduced=False):
    """Database search with the marked item at basis index 0.

    ``reduced`` returns the exact restriction to span{|m>, sum_{i != m}|i>/sqrt(N-1)},
    which holds the whole evolution from the uniform superposition.
    """
    if not 2 <= n <= MAX_GROVER_N:
        raise UsageError(f"grover N must be in [2, {MAX_GROVER_N}], got {n}")
    if reduced:
        phi = np.array([1.0, np.sqrt(n - 1.0)]) / np.sqrt(n)
        h_pot = np.diag([0.0, 1.0])
        psi0 = phi
    else:
        h_pot = np.eye(n)
        h_pot[0, 0] = 0.0
        psi0 = np.full(n, 1.0 / np.sqrt(n))
    h_kin = np.eye(len(psi0)) - np.outer(psi0, psi0)
    label = f"grover:N={n}" + (",reduced=1" if reduced else "")
    return make_model(h_kin, h_pot, psi0, label, ground=0.0, params={"kind": "grover", "N": n, "reduced": reduced})


def grover_gap(n, f):
    """Closed-form Delta_1 = sqrt(1 - 4 (N-1)/N f (1-f))."""
    f = np.asarray(f, dtype=float)
    return np.sqrt(1.0 - 4.0 * (n - 1.0) / n * f * (1.0 - f))


def grover_symmetric_basis(n):
    """Columns |m>, sum_{i != m}|i>/sqrt(N-1) in the full N-dim space."""
    basis = np.zeros((n, 2))
    basis[0, 0] = 1.0
    basis[1:, 1] = 1.0 / np.sqrt(n - 1.0)
    return basis


# --------------------------------------------------------------------- parsing

_KV_RE = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*([^,]+?)\s*$")


def _kv(body, allowed, text):
    out = {}
    for part in body.split(","):
        m = _KV_RE.match(part)
        if not m:
            raise UsageError(f"malformed model spec {text!r} near {part!r}")
        key, val = m.groups()
        if key not in allowed:
            raise UsageError(f"unknown key {key!r} in model spec {text!r}")
        out[key] = val
    return out


def parse_model(text):
    """``lz:h=<v>,alpha=<v>`` | ``ising:file=<path>`` |
    ``ising:grid=RxC,seed=<n>,h=<v>,gamma=<v>`` | ``grover:N=<n>[,reduced=1]``."""
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "lz":
            kv = _kv(body, {"h", "alpha"}, text)
            return build_lz(float(kv["h"]), float(kv["alpha"]))
        if kind == "ising":
            kv = _kv(body, {"file", "grid", "seed", "h", "gamma"}, text)
            if "file" in kv:
                if set(kv) != {"file"}:
                    raise UsageError(f"ising:file= takes no other keys ({text!r})")
                return build_ising(read_ising_file(kv["file"]))
            rows, cols = (int(x) for x in kv["grid"].lower().split("x"))
            inst = IsingInstance.grid(rows, cols, int(kv["seed"]), float(kv["h"]), float(kv["gamma"]))
            return build_ising(inst)
        if kind == "grover":
            kv = _kv(body, {"N", "reduced"}, text)
            reduced = kv.get("reduced", "0").lower() in ("1", "true", "yes")
            return build_grover(int(kv["N"]), reduced=reduced)
    except KeyError as exc:
        raise UsageError(f"model spec {text!r} missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad value in model spec {text!r}: {exc}") from None
    raise UsageError(f"unknown model kind {kind!r} in {text!r}")
