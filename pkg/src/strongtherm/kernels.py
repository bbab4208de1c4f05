"""Inner-loop kernels with a numba path and a pure-numpy path.

Every kernel exists twice: ``<name>_numpy`` (vectorised numpy) and
``<name>_numba`` (explicit loops under ``@njit``). The unsuffixed name is
bound to one of the two at import time, see :mod:`strongtherm._accel`.
Both paths must agree to rounding; ``tests/test_kernels.py`` checks this.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "ptrace_bipartite",
    "reduced_boltzmann",
    "conditional_gaussian_moments",
    "BACKEND",
]


# --- partial trace of a bipartite operator -------------------------------------


def ptrace_bipartite_numpy(M, d1, d2, keep_first):
    T = M.reshape(d1, d2, d1, d2)
    if keep_first:
        return np.einsum("ibjb->ij", T)
    return np.einsum("aiaj->ij", T)


@njit
def ptrace_bipartite_numba(M, d1, d2, keep_first):
    if keep_first:
        out = np.zeros((d1, d1), dtype=M.dtype)
        for i in range(d1):
            for j in range(d1):
                acc = 0.0j
                for b in range(d2):
                    acc += M[i * d2 + b, j * d2 + b]
                out[i, j] = acc
        return out
    out = np.zeros((d2, d2), dtype=M.dtype)
    for i in range(d2):
        for j in range(d2):
            acc = 0.0j
            for a in range(d1):
                acc += M[a * d2 + i, a * d2 + j]
            out[i, j] = acc
    return out


# --- Tr_b [U diag(w) U^dagger] without forming the composite matrix ----------


def reduced_boltzmann_numpy(U, w, d_s, d_b):
    V = U.reshape(d_s, d_b, U.shape[1])
    return np.einsum("ibn,jbn->ij", V * w, V.conj())


@njit
def reduced_boltzmann_numba(U, w, d_s, d_b):
    n = U.shape[1]
    out = np.zeros((d_s, d_s), dtype=np.complex128)
    for k in range(n):
        wk = w[k]
        if wk == 0.0:
            continue
        for i in range(d_s):
            for j in range(i, d_s):
                acc = 0.0j
                for b in range(d_b):
                    acc += U[i * d_b + b, k] * np.conj(U[j * d_b + b, k])
                out[i, j] += wk * acc
    for i in range(d_s):
        for j in range(i):
            out[i, j] = np.conj(out[j, i])
    return out


# --- one-dimensional conditional Gaussian-weighted sums ----------------------
#
# For every system node x_i and bath coordinate j the weight is
#     exp(-beta * (0.5 * curv[i, j] * y**2 + lin[i, j] * y))
# and the integral runs over y with Gauss-Hermite nodes centred on the
# conditional mean -lin/curv and scaled by s = sqrt(2 / (beta * curv)).
# Returned: log of the integral, <y>, <y^2>.


def conditional_gaussian_moments_numpy(curv, lin, beta, nodes, logw):
    s = np.sqrt(2.0 / (beta * curv))[..., None]
    y = s * nodes - (lin / curv)[..., None]
    expo = logw + nodes**2 - beta * (0.5 * curv[..., None] * y**2 + lin[..., None] * y)
    top = expo.max(axis=-1, keepdims=True)
    p = np.exp(expo - top)
    norm = p.sum(axis=-1)
    logz = np.log(norm) + top[..., 0] + np.log(s[..., 0])
    m1 = (p * y).sum(axis=-1) / norm
    m2 = (p * y * y).sum(axis=-1) / norm
    return logz, m1, m2


@njit
def conditional_gaussian_moments_numba(curv, lin, beta, nodes, logw):
    nx, ny = curv.shape
    nq = nodes.shape[0]
    logz = np.empty((nx, ny))
    m1 = np.empty((nx, ny))
    m2 = np.empty((nx, ny))
    expo = np.empty(nq)
    for i in range(nx):
        for j in range(ny):
            c = curv[i, j]
            b = lin[i, j]
            s = np.sqrt(2.0 / (beta * c))
            y0 = -b / c
            top = -np.inf
            for k in range(nq):
                y = y0 + s * nodes[k]
                e = logw[k] + nodes[k] * nodes[k] - beta * (0.5 * c * y * y + b * y)
                expo[k] = e
                if e > top:
                    top = e
            norm = 0.0
            a1 = 0.0
            a2 = 0.0
            for k in range(nq):
                y = y0 + s * nodes[k]
                p = np.exp(expo[k] - top)
                norm += p
                a1 += p * y
                a2 += p * y * y
            logz[i, j] = np.log(norm) + top + np.log(s)
            m1[i, j] = a1 / norm
            m2[i, j] = a2 / norm
    return logz, m1, m2


if USE_NUMBA:
    BACKEND = "numba"

    def ptrace_bipartite(M, d1, d2, keep_first):
        return ptrace_bipartite_numba(np.ascontiguousarray(M, dtype=np.complex128), d1, d2, keep_first)

    def reduced_boltzmann(U, w, d_s, d_b):
        return reduced_boltzmann_numba(
            np.ascontiguousarray(U, dtype=np.complex128), np.ascontiguousarray(w, dtype=np.float64), d_s, d_b
        )

    def conditional_gaussian_moments(curv, lin, beta, nodes, logw):
        return conditional_gaussian_moments_numba(
            np.ascontiguousarray(curv, dtype=np.float64),
            np.ascontiguousarray(lin, dtype=np.float64),
            float(beta),
            nodes,
            logw,
        )

else:
    BACKEND = "numpy"
    ptrace_bipartite = ptrace_bipartite_numpy
    reduced_boltzmann = reduced_boltzmann_numpy
    conditional_gaussian_moments = conditional_gaussian_moments_numpy
