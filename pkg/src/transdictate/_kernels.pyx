# cython: language_level=3
"""Compiled versions of the hot loops in ``_pykernels``.

Same array conventions and return values; see that module for details.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY, fabs

cnp.import_array()


def forward_backward(trans, emit):
    cdef double[:, :, ::1] T = np.ascontiguousarray(trans, dtype=np.float64)
    cdef double[:, :, ::1] X = np.ascontiguousarray(emit, dtype=np.float64)
    cdef Py_ssize_t N = X.shape[0], L = X.shape[1], C = X.shape[2]
    cdef Py_ssize_t K = C + 1, B = C, E = C
    cdef Py_ssize_t n, i, a, b, c

    loglik_arr = np.zeros(N)
    counts_arr = np.zeros((K, K, K))
    gamma_arr = np.zeros((N, L, C))
    cdef double[::1] loglik = loglik_arr
    cdef double[:, :, ::1] counts = counts_arr
    cdef double[:, :, ::1] gamma = gamma_arr

    alphas_arr = np.zeros((L, K, C))
    beta_arr = np.zeros((K, C))
    prev_arr = np.zeros((K, C))
    scales_arr = np.ones(L)
    cdef double[:, :, ::1] alpha = alphas_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] prev = prev_arr
    cdef double[::1] scale = scales_arr
    cdef double s, s_end, acc, v, inv, ll
    cdef bint ok

    for n in range(N):
        ok = True
        ll = 0.0
        alpha[:, :, :] = 0.0
        for c in range(C):
            alpha[0, B, c] = T[B, B, c] * X[n, 0, c]
        for i in range(L):
            if i > 0:
                for b in range(C):
                    for c in range(C):
                        acc = 0.0
                        for a in range(K):
                            acc += alpha[i - 1, a, b] * T[a, b, c]
                        alpha[i, b, c] = acc * X[n, i, c]
            s = 0.0
            for a in range(K):
                for b in range(C):
                    s += alpha[i, a, b]
            if s <= 0.0:
                ok = False
                break
            inv = 1.0 / s
            for a in range(K):
                for b in range(C):
                    alpha[i, a, b] *= inv
            scale[i] = s
            ll += log(s)
        if not ok:
            loglik[n] = -INFINITY
            continue
        s_end = 0.0
        for a in range(K):
            for b in range(C):
                s_end += alpha[L - 1, a, b] * T[a, b, E]
        if s_end <= 0.0:
            loglik[n] = -INFINITY
            continue
        loglik[n] = ll + log(s_end)

        inv = 1.0 / s_end
        for a in range(K):
            for b in range(C):
                beta[a, b] = T[a, b, E] * inv
                counts[a, b, E] += alpha[L - 1, a, b] * T[a, b, E] * inv
        for i in range(L - 1, -1, -1):
            for c in range(C):
                acc = 0.0
                for a in range(K):
                    acc += alpha[i, a, c] * beta[a, c]
                gamma[n, i, c] = acc
            if i == 0:
                for c in range(C):
                    counts[B, B, c] += alpha[0, B, c] * beta[B, c]
                break
            inv = 1.0 / scale[i]
            for a in range(K):
                for b in range(C):
                    acc = 0.0
                    for c in range(C):
                        v = T[a, b, c] * X[n, i, c] * beta[b, c]
                        counts[a, b, c] += alpha[i - 1, a, b] * v * inv
                        acc += v
                    prev[a, b] = acc * inv
            beta[:, :] = prev
    return loglik_arr, counts_arr, gamma_arr


cdef inline double _logaddexp(double x, double y):
    if x == -INFINITY:
        return y
    if y == -INFINITY:
        return x
    if x > y:
        return x + log(1.0 + exp(y - x))
    return y + log(1.0 + exp(x - y))


cdef double _logsumexp_vec(double[::1] buf, Py_ssize_t m):
    cdef Py_ssize_t k
    cdef double mx = -INFINITY, acc = 0.0
    for k in range(m):
        if buf[k] > mx:
            mx = buf[k]
    if mx == -INFINITY:
        return -INFINITY
    for k in range(m):
        acc += exp(buf[k] - mx)
    return mx + log(acc)


def forward_logprob(logtrans, logemit):
    cdef double[:, :, ::1] T = np.ascontiguousarray(logtrans, dtype=np.float64)
    cdef double[:, ::1] X = np.ascontiguousarray(logemit, dtype=np.float64)
    cdef Py_ssize_t L = X.shape[0], C = X.shape[1]
    cdef Py_ssize_t K = C + 1, B = C, E = C
    cdef Py_ssize_t i, a, b, c
    la_arr = np.full((K, C), -np.inf)
    nxt_arr = np.full((K, C), -np.inf)
    buf_arr = np.empty(K * C)
    cdef double[:, ::1] la = la_arr
    cdef double[:, ::1] nxt = nxt_arr
    cdef double[::1] buf = buf_arr
    for c in range(C):
        la[B, c] = T[B, B, c] + X[0, c]
    for i in range(1, L):
        for b in range(C):
            for c in range(C):
                for a in range(K):
                    buf[a] = la[a, b] + T[a, b, c]
                nxt[b, c] = _logsumexp_vec(buf, K) + X[i, c]
        for c in range(C):
            nxt[B, c] = -INFINITY
        la[:, :] = nxt
    for a in range(K):
        for b in range(C):
            buf[a * C + b] = la[a, b] + T[a, b, E]
    return _logsumexp_vec(buf, K * C)


def viterbi(logtrans, logemit, order=None, double rel_tol=1e-12):
    cdef double[:, :, ::1] T = np.ascontiguousarray(logtrans, dtype=np.float64)
    cdef double[:, ::1] X = np.ascontiguousarray(logemit, dtype=np.float64)
    cdef Py_ssize_t L = X.shape[0], C = X.shape[1]
    cdef Py_ssize_t K = C + 1, B = C, E = C
    cdef Py_ssize_t i, a, b, c, k
    if order is None:
        order = np.tile(np.arange(C, dtype=np.int64), (L, 1))
    cdef long long[:, ::1] O = np.ascontiguousarray(order, dtype=np.int64)
    V_arr = np.empty((L, K, C))
    cdef double[:, :, ::1] V = V_arr
    cdef double best, v, tol, prefix, step
    path_arr = np.zeros(L, dtype=np.int64)
    cdef long long[::1] path = path_arr

    for a in range(K):
        for b in range(C):
            V[L - 1, a, b] = T[a, b, E]
    for i in range(L - 2, -1, -1):
        for a in range(K):
            for b in range(C):
                best = -INFINITY
                for c in range(C):
                    v = T[a, b, c] + X[i + 1, c] + V[i + 1, b, c]
                    if v > best:
                        best = v
                V[i, a, b] = best
    best = -INFINITY
    for c in range(C):
        v = T[B, B, c] + X[0, c] + V[0, B, c]
        if v > best:
            best = v
    if best == -INFINITY:
        return path_arr, float("-inf")
    tol = rel_tol * (fabs(best) if fabs(best) > 1.0 else 1.0)
    prefix = 0.0
    a = B
    b = B
    for i in range(L):
        for k in range(C):
            c = O[i, k]
            step = T[a, b, c] + X[i, c]
            if prefix + step + V[i, b, c] >= best - tol:
                path[i] = c
                prefix += step
                a = b
                b = c
                break
    return path_arr, prefix + T[a, b, E]


def trie_edit_distances(truth, parent, phone):
    cdef long long[::1] tr = np.ascontiguousarray(truth, dtype=np.int64)
    cdef long long[::1] par = np.ascontiguousarray(parent, dtype=np.int64)
    cdef long long[::1] ph = np.ascontiguousarray(phone, dtype=np.int64)
    cdef Py_ssize_t M = tr.shape[0], n_nodes = par.shape[0]
    cdef Py_ssize_t node, j, p
    rows_arr = np.empty((n_nodes, M + 1), dtype=np.int64)
    out_arr = np.empty(n_nodes, dtype=np.int64)
    cdef long long[:, ::1] rows = rows_arr
    cdef long long[::1] out = out_arr
    cdef long long x, y, z
    for j in range(M + 1):
        rows[0, j] = j
    out[0] = M
    for node in range(1, n_nodes):
        p = par[node]
        rows[node, 0] = rows[p, 0] + 1
        for j in range(1, M + 1):
            x = rows[p, j] + 1
            y = rows[node, j - 1] + 1
            z = rows[p, j - 1] + (0 if tr[j - 1] == ph[node] else 1)
            if y < x:
                x = y
            if z < x:
                x = z
            rows[node, j] = x
        out[node] = rows[node, M]
    return out_arr
