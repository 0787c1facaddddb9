# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: frame autocorrelation, valid correlation, pitch Viterbi.

Semantics match prosign.kernels.reference; see that module for contracts.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log2

cnp.import_array()

IMPL_NAME = "cython"


def autocorr_frames(object frames_in, int max_lag):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] frames = np.ascontiguousarray(
        frames_in, dtype=np.float64)
    cdef Py_ssize_t n = frames.shape[0]
    cdef Py_ssize_t window = frames.shape[1]
    if max_lag < 0 or max_lag >= window:
        raise ValueError(f"max_lag {max_lag} out of range for window {window}")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, max_lag + 1))
    cdef double[:, ::1] f = frames
    cdef double[:, ::1] r = out
    cdef Py_ssize_t i, l, j, m, m4
    cdef double a0, a1, a2, a3
    with nogil:
        for i in range(n):
            for l in range(max_lag + 1):
                m = window - l
                m4 = m - (m & 3)
                a0 = a1 = a2 = a3 = 0.0
                for j in range(0, m4, 4):
                    a0 += f[i, j] * f[i, j + l]
                    a1 += f[i, j + 1] * f[i, j + 1 + l]
                    a2 += f[i, j + 2] * f[i, j + 2 + l]
                    a3 += f[i, j + 3] * f[i, j + 3 + l]
                for j in range(m4, m):
                    a0 += f[i, j] * f[i, j + l]
                r[i, l] = (a0 + a1) + (a2 + a3)
    return out


def correlate_valid(object signal_in, object kernel_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] signal = np.ascontiguousarray(
        signal_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kernel = np.ascontiguousarray(
        kernel_in, dtype=np.float64)
    cdef Py_ssize_t m = signal.shape[0]
    cdef Py_ssize_t h = kernel.shape[0]
    if h > m:
        raise ValueError("kernel longer than signal")
    cdef Py_ssize_t n_out = m - h + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_out)
    cdef double[::1] x = signal
    cdef double[::1] k = kernel
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, h4 = h - (h & 3)
    cdef double a0, a1, a2, a3
    with nogil:
        for i in range(n_out):
            a0 = a1 = a2 = a3 = 0.0
            for j in range(0, h4, 4):
                a0 += x[i + j] * k[j]
                a1 += x[i + j + 1] * k[j + 1]
                a2 += x[i + j + 2] * k[j + 2]
                a3 += x[i + j + 3] * k[j + 3]
            for j in range(h4, h):
                a0 += x[i + j] * k[j]
            o[i] = (a0 + a1) + (a2 + a3)
    return out


def viterbi_pitch(object freqs_in, object strengths_in, double octave_cost,
                  double vu_cost):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] freqs = np.ascontiguousarray(
        freqs_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] strengths = np.ascontiguousarray(
        strengths_in, dtype=np.float64)
    cdef Py_ssize_t n = freqs.shape[0]
    cdef Py_ssize_t k = freqs.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] path = np.zeros(n, dtype=np.int64)
    if n == 0:
        return path
    cdef cnp.ndarray[cnp.int64_t, ndim=2] back = np.zeros((n, k), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] score = strengths[0].copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] next_score = np.zeros(k)
    cdef double[:, ::1] fq = freqs
    cdef double[:, ::1] st = strengths
    cdef long[:, ::1] bk = back
    cdef double[::1] sc = score
    cdef double[::1] ns = next_score
    cdef long[::1] pt = path
    cdef Py_ssize_t t, a, b, best
    cdef double trans, total, best_total
    cdef bint va, vb
    with nogil:
        for t in range(1, n):
            for b in range(k):
                vb = fq[t, b] > 0
                best = 0
                best_total = -1e300
                for a in range(k):
                    va = fq[t - 1, a] > 0
                    if va and vb:
                        trans = octave_cost * fabs(log2(fq[t - 1, a]) - log2(fq[t, b]))
                    elif va != vb:
                        trans = vu_cost
                    else:
                        trans = 0.0
                    total = sc[a] - trans
                    if total > best_total:
                        best_total = total
                        best = a
                bk[t, b] = best
                ns[b] = best_total + st[t, b]
            for b in range(k):
                sc[b] = ns[b]
        best = 0
        best_total = sc[0]
        for b in range(1, k):
            if sc[b] > best_total:
                best_total = sc[b]
                best = b
        pt[n - 1] = best
        for t in range(n - 1, 0, -1):
            pt[t - 1] = bk[t, pt[t]]
    return path
