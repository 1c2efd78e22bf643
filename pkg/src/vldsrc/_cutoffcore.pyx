# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float-lane kernels; see _purekernels.py for the reference
semantics. Both backends must produce matching results (the benchmark and
the test suite compare them)."""

from libc.math cimport floor, ldexp, log2, exp2

import numpy as np

BACKEND_NAME = "compiled"


def batch_expected_cutoff(values, masses, eps_grid):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] m = np.ascontiguousarray(masses, dtype=np.float64)
    cdef double[::1] e = np.ascontiguousarray(eps_grid, dtype=np.float64)
    cdef Py_ssize_t K = v.shape[0]
    cdef Py_ssize_t M = e.shape[0]
    out_arr = np.zeros(M, dtype=np.float64)
    cdef double[::1] out = out_arr
    if K == 0:
        return out_arr
    tail_arr = np.empty(K, dtype=np.float64)
    pvm_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] tail = tail_arr
    cdef double[::1] pvm = pvm_arr
    cdef Py_ssize_t i, t, lo, hi, mid
    cdef double acc = 0.0
    for i in range(K - 1, -1, -1):
        tail[i] = acc
        acc += m[i]
    acc = 0.0
    for i in range(K):
        acc += v[i] * m[i]
        pvm[i] = acc
    cdef double eps, res
    for t in range(M):
        eps = e[t]
        # first index with tail[idx] <= eps (tail is non-increasing)
        lo = 0
        hi = K - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if tail[mid] <= eps:
                hi = mid
            else:
                lo = mid + 1
        res = pvm[lo] - (eps - tail[lo]) * v[lo]
        out[t] = res if res > 0.0 else 0.0
    return out_arr


def merge_float_atoms(values, masses, double tol=1e-12):
    v_arr = np.asarray(values, dtype=np.float64)
    m_arr = np.asarray(masses, dtype=np.float64)
    order = np.argsort(v_arr, kind="stable")
    v_arr = np.ascontiguousarray(v_arr[order])
    m_arr = np.ascontiguousarray(m_arr[order])
    cdef double[::1] v = v_arr
    cdef double[::1] m = m_arr
    cdef Py_ssize_t K = v.shape[0]
    out_v = np.empty(K, dtype=np.float64)
    out_m = np.empty(K, dtype=np.float64)
    cdef double[::1] ov = out_v
    cdef double[::1] om = out_m
    cdef Py_ssize_t i, g = -1
    cdef double last = 0.0
    for i in range(K):
        if m[i] <= 0.0:
            continue
        if g >= 0 and v[i] - last <= tol:
            om[g] += m[i]
            ov[g] += v[i] * m[i]
        else:
            g += 1
            om[g] = m[i]
            ov[g] = v[i] * m[i]
        last = v[i]
    for i in range(g + 1):
        ov[i] = ov[i] / om[i]
    return out_v[: g + 1], out_m[: g + 1]


def split_rank_classes_float(log2_likelihoods, counts, Py_ssize_t n_values):
    cdef double[::1] l2 = np.ascontiguousarray(log2_likelihoods, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(counts, dtype=np.float64)
    out_arr = np.zeros(n_values, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, j
    cdef double s = 1.0
    cdef double remaining, ll, block_end, take, new_remaining
    for k in range(l2.shape[0]):
        remaining = c[k]
        ll = l2[k]
        while remaining > 0.0:
            j = <Py_ssize_t> floor(log2(s))
            block_end = ldexp(1.0, <int> (j + 1))
            if s >= block_end:
                j += 1
                block_end = ldexp(1.0, <int> (j + 1))
            take = remaining if remaining < block_end - s else block_end - s
            if take <= 0.0:
                s = block_end
                continue
            if j >= n_values:
                raise ValueError("rank spectrum output array too short")
            out[j] += exp2(ll + log2(take))
            s += take
            new_remaining = remaining - take
            if new_remaining >= remaining:
                s = block_end
            remaining = new_remaining if new_remaining > 0.0 else 0.0
    return out_arr
