# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libcpp.algorithm cimport sort
from libcpp.pair cimport pair
from libcpp.vector cimport vector

cnp.import_array()

NAME = "cython"


def best_split(const double[:, :] X, const cnp.int64_t[:] y, const cnp.intp_t[:] idx,
               features, int n_classes, int min_samples_leaf):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t lo = min_samples_leaf - 1
    cdef Py_ssize_t hi = n - min_samples_leaf - 1
    cdef int best_f = -1
    cdef double best_thr = 0.0
    cdef double best_score = -np.inf
    if n < 2 or hi < lo:
        return (best_f, best_thr, best_score)

    cdef vector[pair[double, cnp.int64_t]] buf
    buf.resize(n)
    cdef vector[double] left
    cdef vector[double] total
    left.resize(n_classes)
    total.resize(n_classes)
    cdef Py_ssize_t i, j
    cdef int c, f
    cdef double lsq, rsq, a, b, score, nl, nr, thr

    for c in range(n_classes):
        total[c] = 0.0
    for j in range(n):
        total[y[idx[j]]] += 1.0

    for f in features:
        for j in range(n):
            buf[j].first = X[idx[j], f]
            buf[j].second = y[idx[j]]
        sort(buf.begin(), buf.end())
        for c in range(n_classes):
            left[c] = 0.0
        for i in range(hi + 1):
            left[buf[i].second] += 1.0
            if i < lo or not (buf[i].first < buf[i + 1].first):
                continue
            lsq = 0.0
            rsq = 0.0
            for c in range(n_classes):
                a = left[c]
                b = total[c] - a
                lsq = lsq + a * a
                rsq = rsq + b * b
            nl = <double>(i + 1)
            nr = n - nl
            score = lsq / nl + rsq / nr
            if score > best_score:
                best_score = score
                best_f = f
                a = buf[i].first
                b = buf[i + 1].first
                thr = (a + b) * 0.5
                if thr >= b:
                    thr = a
                best_thr = thr
    return (best_f, best_thr, best_score)


def tree_apply(const double[:, :] X, const cnp.intp_t[:] feature, const double[:] threshold,
               const cnp.intp_t[:] left, const cnp.intp_t[:] right):
    cdef Py_ssize_t n = X.shape[0]
    out = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[:] node = out
    cdef Py_ssize_t r
    cdef cnp.intp_t k
    for r in range(n):
        k = 0
        while left[k] != -1:
            if X[r, feature[k]] <= threshold[k]:
                k = left[k]
            else:
                k = right[k]
        node[r] = k
    return out
