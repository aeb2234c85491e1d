"""Fused numerical kernels for the pair-block Hamiltonian action.

The pair block dominates the cost of one operator application.  The numpy
path materializes several N x N temporaries per call, which is memory-bound;
the numba path fuses the gather, the local (diagonal, control-mix, band-gap)
terms and the scatter into single passes over the compact pair storage,
calling BLAS only for the two excitation-hop products.  Both paths compute
the same thing; the numba one is picked automatically when importable.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is in the standard stack
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco


@njit(cache=True, nogil=True)
def _pair_block_numba(
    pairs,
    i_idx,
    j_idx,
    W,
    diag_pairs,
    bg,
    rabi,
    v,
    v_conj,
    E,
    S,
    has_drive,
    oE,
    oS,
    out_pairs,
):  # pragma: no cover - exercised through the dispatching wrapper
    n = W.shape[0]
    npairs = pairs.shape[0]
    EE = np.zeros((n, n), dtype=np.complex128)
    ES = np.zeros((n, n), dtype=np.complex128)
    for p in range(npairs):
        a = i_idx[p]
        b = j_idx[p]
        EE[a, b] = pairs[p, 0]
        EE[b, a] = pairs[p, 0]
        ES[a, b] = pairs[p, 1]
        ES[b, a] = pairs[p, 2]
    WEE = np.dot(W, EE)
    WES = np.dot(W, ES)
    for p in range(npairs):
        a = i_idx[p]
        b = j_idx[p]
        p0 = pairs[p, 0]
        p1 = pairs[p, 1]
        p2 = pairs[p, 2]
        p3 = pairs[p, 3]
        mix = p1 + p2
        o0 = diag_pairs[p, 0] * p0 - rabi * mix + WEE[a, b] + WEE[b, a]
        o3 = diag_pairs[p, 3] * p3 - rabi * mix
        o1 = diag_pairs[p, 1] * p1 - rabi * (p0 + p3) + bg[p] * p2 + WES[a, b]
        o2 = diag_pairs[p, 2] * p2 - rabi * (p0 + p3) + bg[p] * p1 + WES[b, a]
        if has_drive:
            o0 -= v[a] * E[b] + v[b] * E[a]
            o1 -= v[a] * S[b]
            o2 -= v[b] * S[a]
        out_pairs[p, 0] = o0
        out_pairs[p, 1] = o1
        out_pairs[p, 2] = o2
        out_pairs[p, 3] = o3
    if has_drive:
        for a in range(n):
            acc_e = 0.0 + 0.0j
            acc_s = 0.0 + 0.0j
            for b in range(n):
                acc_e += EE[a, b] * v_conj[b]
                acc_s += v_conj[b] * ES[b, a]
            oE[a] -= acc_e
            oS[a] -= acc_s


def _pair_block_numpy(
    pairs, i_idx, j_idx, W, diag_pairs, bg, rabi, v, v_conj, E, S, has_drive, oE, oS, out_pairs
):
    n = W.shape[0]
    EE = np.zeros((n, n), dtype=np.complex128)
    ES = np.zeros((n, n), dtype=np.complex128)
    EE[i_idx, j_idx] = pairs[:, 0]
    EE[j_idx, i_idx] = pairs[:, 0]
    ES[i_idx, j_idx] = pairs[:, 1]
    ES[j_idx, i_idx] = pairs[:, 2]
    WEE = W @ EE
    WES = W @ ES

    mix = pairs[:, 1] + pairs[:, 2]
    both = pairs[:, 0] + pairs[:, 3]
    out_pairs[:, 0] = diag_pairs[:, 0] * pairs[:, 0] - rabi * mix
    out_pairs[:, 0] += WEE[i_idx, j_idx]
    out_pairs[:, 0] += WEE[j_idx, i_idx]
    out_pairs[:, 1] = diag_pairs[:, 1] * pairs[:, 1] - rabi * both + bg * pairs[:, 2]
    out_pairs[:, 1] += WES[i_idx, j_idx]
    out_pairs[:, 2] = diag_pairs[:, 2] * pairs[:, 2] - rabi * both + bg * pairs[:, 1]
    out_pairs[:, 2] += WES[j_idx, i_idx]
    out_pairs[:, 3] = diag_pairs[:, 3] * pairs[:, 3] - rabi * mix

    if has_drive:
        vi, vj = v[i_idx], v[j_idx]
        out_pairs[:, 0] -= vi * E[j_idx]
        out_pairs[:, 0] -= vj * E[i_idx]
        out_pairs[:, 1] -= vi * S[j_idx]
        out_pairs[:, 2] -= vj * S[i_idx]
        oE -= EE @ v_conj
        oS -= v_conj @ ES


pair_block_apply = _pair_block_numba if NUMBA_AVAILABLE else _pair_block_numpy


@njit(cache=True, nogil=True)
def _rk4_combine_numba(psi, k1, k2, k3, k4, w):  # pragma: no cover
    for q in range(psi.shape[0]):
        psi[q] += w * (k1[q] + 2.0 * (k2[q] + k3[q]) + k4[q])


def _rk4_combine_numpy(psi, k1, k2, k3, k4, w):
    psi += w * (k1 + 2.0 * (k2 + k3) + k4)


rk4_combine = _rk4_combine_numba if NUMBA_AVAILABLE else _rk4_combine_numpy


@njit(cache=True, nogil=True)
def _axpy_numba(out, x, a, y):  # pragma: no cover
    for q in range(out.shape[0]):
        out[q] = x[q] + a * y[q]


def _axpy_numpy(out, x, a, y):
    np.multiply(y, a, out=out)
    out += x


axpy = _axpy_numba if NUMBA_AVAILABLE else _axpy_numpy
