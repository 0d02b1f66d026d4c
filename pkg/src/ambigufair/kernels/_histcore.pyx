# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled histogram and tree-traversal kernels.

Accumulation is sample-major, feature-minor: the same order the NumPy
fallback uses, so both backends return bit-identical float sums.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def build_histograms(cnp.int32_t[:, ::1] codes,
                     cnp.int64_t[::1] idx,
                     cnp.float64_t[::1] grad,
                     cnp.float64_t[::1] hess,
                     int n_bins):
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t d = codes.shape[1]
    hist_g = np.zeros((d, n_bins), dtype=np.float64)
    hist_h = np.zeros((d, n_bins), dtype=np.float64)
    hist_n = np.zeros((d, n_bins), dtype=np.int64)
    cdef cnp.float64_t[:, ::1] hg = hist_g
    cdef cnp.float64_t[:, ::1] hh = hist_h
    cdef cnp.int64_t[:, ::1] hn = hist_n
    cdef Py_ssize_t k, j, i
    cdef cnp.int32_t b
    cdef cnp.float64_t g, h
    for k in range(m):
        i = idx[k]
        g = grad[i]
        h = hess[i]
        for j in range(d):
            b = codes[i, j]
            hg[j, b] += g
            hh[j, b] += h
            hn[j, b] += 1
    return hist_g, hist_h, hist_n


def predict_tree(cnp.int32_t[:, ::1] codes,
                 cnp.int32_t[::1] feature,
                 cnp.int32_t[::1] split_bin,
                 cnp.int32_t[::1] left,
                 cnp.int32_t[::1] right,
                 cnp.float64_t[::1] value,
                 cnp.float64_t[::1] out):
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t i
    cdef cnp.int32_t node
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if codes[i, feature[node]] <= split_bin[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] += value[node]
    return np.asarray(out)
