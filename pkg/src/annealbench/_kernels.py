"""Compiled inner loops for the propagator.

States are stored as real (dim, 2) arrays [Re psi, Im psi]. The two
Hamiltonian terms are merged into one CSR sparsity pattern carrying a value
array per term, so H(f) y = sum_p ((1 - f) K_p + f P_p) y[col_p] is a single
pass with no per-step matrix assembly and no helper calls in the hot loop.
"""

import numba
import numpy as np


DENSE_FILL = 0.25  # above this nonzero fraction the row-major dense loop is used


def pack_pair(h_kin, h_pot):
    """Merge two matrices into one pattern.

    Returns (indptr, indices, k_re, k_im, p_re, p_im, is_complex, is_dense);
    in the dense case the value arrays are the flattened row-major matrices.
    """
    k = np.asarray(h_kin, dtype=complex)
    p = np.asarray(h_pot, dtype=complex)
    d = k.shape[0]
    mask = (k != 0) | (p != 0)
    is_complex = bool(np.any(k.imag) or np.any(p.imag))
    if np.count_nonzero(mask) > DENSE_FILL * d * d:
        none = np.zeros(1, dtype=np.int64)
        flat = [np.ascontiguousarray(x).ravel() for x in (k.real, k.imag, p.real, p.imag)]
        return (none, none, *flat, is_complex, True)
    rows, cols = np.nonzero(mask)
    indptr = np.searchsorted(rows, np.arange(d + 1)).astype(np.int64)
    kv, pv = k[rows, cols], p[rows, cols]
    return (indptr, cols.astype(np.int64), kv.real.copy(), kv.imag.copy(), pv.real.copy(), pv.imag.copy(),
            is_complex, False)


@numba.njit(cache=True)
def rk4_chunk(indptr, indices, kre, kim, pre, pim, cplx, dense, y, fvals, tau, ds, shift):
    """Advance y through len(fvals)//2 RK4 steps of i dy/ds = tau H(s) y.

    ``fvals`` holds f at s_k, s_k + ds/2, s_{k+1}, ... (2 n + 1 values).
    With ``shift`` the energy expectation at the start of each step is
    subtracted from H for that step; piecewise-constant shifts only change
    the global phase, and they keep the ground-state component nearly
    stationary so RK4's phase/amplitude error acts on the small excited part.
    """
    n = (fvals.shape[0] - 1) // 2
    d = y.shape[0]
    y = y.copy()
    yk = y.copy()
    acc = np.zeros_like(y)
    h = np.zeros_like(y)
    for k in range(n):
        for i in range(d):
            acc[i, 0] = 0.0
            acc[i, 1] = 0.0
            yk[i, 0] = y[i, 0]
            yk[i, 1] = y[i, 1]
        e = 0.0
        for stage in range(4):
            if stage == 0:
                f = fvals[2 * k]
            elif stage == 3:
                f = fvals[2 * k + 2]
            else:
                f = fvals[2 * k + 1]
            g = 1.0 - f
            if dense:
                for i in range(d):
                    a = 0.0
                    b = 0.0
                    for j in range(d):
                        vr = g * kre[i * d + j] + f * pre[i * d + j]
                        a += vr * yk[j, 0]
                        b += vr * yk[j, 1]
                    if cplx:
                        for j in range(d):
                            vi = g * kim[i * d + j] + f * pim[i * d + j]
                            a -= vi * yk[j, 1]
                            b += vi * yk[j, 0]
                    h[i, 0] = a
                    h[i, 1] = b
            else:
                for i in range(d):
                    a = 0.0
                    b = 0.0
                    for q in range(indptr[i], indptr[i + 1]):
                        j = indices[q]
                        vr = g * kre[q] + f * pre[q]
                        a += vr * yk[j, 0]
                        b += vr * yk[j, 1]
                    if cplx:
                        for q in range(indptr[i], indptr[i + 1]):
                            j = indices[q]
                            vi = g * kim[q] + f * pim[q]
                            a -= vi * yk[j, 1]
                            b += vi * yk[j, 0]
                    h[i, 0] = a
                    h[i, 1] = b
            if stage == 0 and shift:
                num = 0.0
                den = 0.0
                for i in range(d):
                    num += y[i, 0] * h[i, 0] + y[i, 1] * h[i, 1]
                    den += y[i, 0] * y[i, 0] + y[i, 1] * y[i, 1]
                e = num / den
            w = 1.0 if (stage == 0 or stage == 3) else 2.0
            step = 0.5 * ds if stage < 2 else ds
            for i in range(d):
                # slope = -i tau (h - e yk)
                s0 = tau * (h[i, 1] - e * yk[i, 1])
                s1 = -tau * (h[i, 0] - e * yk[i, 0])
                acc[i, 0] += w * s0
                acc[i, 1] += w * s1
                if stage < 3:
                    h[i, 0] = y[i, 0] + step * s0
                    h[i, 1] = y[i, 1] + step * s1
            if stage < 3:
                for i in range(d):
                    yk[i, 0] = h[i, 0]
                    yk[i, 1] = h[i, 1]
        c = ds / 6.0
        for i in range(d):
            y[i, 0] += c * acc[i, 0]
            y[i, 1] += c * acc[i, 1]
    return y


@numba.njit(cache=True)
def midpoint_chunk(vecs, phases, psi):
    """psi <- V_k diag(phases_k) V_k^H psi for each step k in order.

    Each step is exactly unitary, so the incoming norm is restored after it;
    this only undoes rounding in the numerically computed V_k.
    """
    norm = np.linalg.norm(psi)
    for k in range(vecs.shape[0]):
        v = vecs[k]
        c = np.conj(v.T) @ psi
        psi = v @ (phases[k] * c)
        psi *= norm / np.linalg.norm(psi)
    return psi


def to_real(psi):
    return np.ascontiguousarray(np.column_stack([psi.real, psi.imag]))


def to_complex(y):
    return y[:, 0] + 1j * y[:, 1]
