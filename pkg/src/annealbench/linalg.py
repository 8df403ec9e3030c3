"""Dense complex linear algebra used by every other module.

Vectors and matrices are plain numpy arrays (complex128, marked read-only
once validated). The Hermitian eigensolver is LAPACK's ``zheevd`` through
``numpy.linalg.eigh``; this module adds the validation, the residual check
and a deterministic phase convention on top.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, UsageError

HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.flags.writeable = False


def _frozen(a):
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def hermitian(entries, tol=HERMITIAN_TOL):
    """Validate ``entries`` as a square Hermitian matrix and return a
    read-only complex copy."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise UsageError(f"expected a non-empty square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))))
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > tol * scale:
        raise UsageError(f"matrix is not Hermitian (max |m - m^H| = {asym:.3e})")
    # symmetrize so downstream code sees exact Hermiticity
    return _frozen(0.5 * (m + m.conj().T))


def vector(components, normalized=False, tol=1e-12):
    v = np.asarray(components, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise UsageError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if normalized and abs(np.linalg.norm(v) - 1.0) > tol:
        raise UsageError(f"state is not normalized (norm = {np.linalg.norm(v)!r})")
    return _frozen(v)


def _check_dims(n_a, n_b, what):
    if n_a != n_b:
        raise UsageError(f"dimension mismatch in {what}: {n_a} vs {n_b}")


def matvec(m, v):
    m = np.asarray(m)
    v = np.asarray(v)
    _check_dims(m.shape[1], v.shape[0], "matvec")
    return m @ v


def inner(a, b):
    """<a|b>, conjugate-linear in ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_dims(a.shape[0], b.shape[0], "inner")
    return complex(np.vdot(a, b))


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column j pairs with eigenvalues[j]

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def vector(self, j):
        return self.eigenvectors[:, j]

    def levels(self, tol=None):
        """Group indices of (numerically) degenerate eigenvalues.

        Returns a list of index arrays, one per distinct level, ascending.
        """
        return group_levels(self.eigenvalues, tol)


def group_levels(eigenvalues, tol=None):
    ev = np.asarray(eigenvalues)
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.max(np.abs(ev))))
    groups = [[0]]
    for j in range(1, ev.size):
        if ev[j] - ev[groups[-1][-1]] <= tol:
            groups[-1].append(j)
        else:
            groups.append([j])
    return [np.array(g) for g in groups]


def fix_phases(vectors):
    """Rotate each column so its largest-magnitude component is real >= 0.

    Ties within a relative 1e-10 go to the lowest index, which keeps the
    choice stable for vectors with many equal-magnitude entries.
    """
    vecs = np.array(vectors, dtype=complex, copy=True)
    mags = np.abs(vecs)
    peak = mags.max(axis=0)
    for j in range(vecs.shape[1]):
        i = int(np.argmax(mags[:, j] >= (1.0 - 1e-10) * peak[j]))
        c = vecs[i, j]
        if c != 0:
            vecs[:, j] *= np.conj(c) / abs(c)
            vecs[i, j] = abs(c)
    return vecs


def eigh(m, check=True):
    """Eigen-decomposition of a Hermitian matrix.

    Eigenvalues ascend; eigenvectors carry the phase convention of
    :func:`fix_phases`. With ``check`` the residual ``|H v - e v|`` is
    verified against ``1e-10 * |H|_F`` and a :class:`NumericError` carrying
    the residual is raised when it fails.
    """
    h = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise NumericError("matrix has non-finite entries")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver did not converge: {exc}") from exc
    v = fix_phases(v)
    if check:
        fro = max(float(np.linalg.norm(h)), np.finfo(float).tiny)
        resid = float(np.max(np.linalg.norm(h @ v - v * w, axis=0)))
        if not resid <= RESIDUAL_TOL * fro:
            raise NumericError(
                f"eigen-residual {resid:.3e} exceeds {RESIDUAL_TOL:g}*|H|_F", residual=resid
            )
    w = np.ascontiguousarray(w)
    w.flags.writeable = False
    v.flags.writeable = False
    return EigenDecomposition(w, v)


def random_hermitian(dim, rng, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitian(scale * 0.5 * (a + a.conj().T))


def random_unitary(dim, rng):
    """Unitary built from the eigenvectors of a random Hermitian matrix."""
    return eigh(random_hermitian(dim, rng)).eigenvectors
