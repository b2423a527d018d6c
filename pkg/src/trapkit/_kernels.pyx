# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts as trapkit._kernels_py."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t

cnp.import_array()

BACKEND = "cython"


def independent_sets(list adj, int n, int max_size):
    cdef uint64_t adjm[64]
    cdef uint64_t masks[65]
    cdef uint64_t banned[65]
    cdef int nxt[65]
    cdef int depth, v
    cdef uint64_t child
    out = []
    if max_size <= 0 or n <= 0:
        return out
    if n > 64:
        raise ValueError("at most 64 vertices")
    for v in range(n):
        adjm[v] = <uint64_t>adj[v]
    depth = 0
    masks[0] = 0
    banned[0] = 0
    nxt[0] = 0
    while depth >= 0:
        v = nxt[depth]
        while v < n and (banned[depth] >> v) & 1:
            v += 1
        if v >= n:
            depth -= 1
            continue
        nxt[depth] = v + 1
        child = masks[depth] | ((<uint64_t>1) << v)
        out.append(child)
        if depth + 1 < max_size:
            masks[depth + 1] = child
            banned[depth + 1] = banned[depth] | adjm[v] | ((<uint64_t>1) << v)
            nxt[depth + 1] = v + 1
            depth += 1
    return out


cdef inline int _g(int x1, int z1, int x2, int z2) nogil:
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


cdef inline void _rowsum(uint8_t[:, ::1] x, uint8_t[:, ::1] z, uint8_t[::1] r, int h, int i, int n) nogil:
    cdef int j
    cdef int total = 2 * r[h] + 2 * r[i]
    for j in range(n):
        total += _g(x[i, j], z[i, j], x[h, j], z[h, j])
        x[h, j] ^= x[i, j]
        z[h, j] ^= z[i, j]
    r[h] = 0 if (total % 4 + 4) % 4 == 0 else 1


def tableau_measure(uint8_t[:, ::1] x, uint8_t[:, ::1] z, uint8_t[::1] r, int n, int a, int bit):
    cdef int p = -1
    cdef int row, j, s
    for row in range(n, 2 * n):
        if x[row, a]:
            p = row
            break
    if p >= 0:
        for row in range(2 * n):
            if row != p and x[row, a]:
                _rowsum(x, z, r, row, p, n)
        for j in range(n):
            x[p - n, j] = x[p, j]
            z[p - n, j] = z[p, j]
            x[p, j] = 0
            z[p, j] = 0
        r[p - n] = r[p]
        z[p, a] = 1
        r[p] = bit & 1
        return int(r[p]), 1
    s = 2 * n
    for j in range(n):
        x[s, j] = 0
        z[s, j] = 0
    r[s] = 0
    for row in range(n):
        if x[row, a]:
            _rowsum(x, z, r, s, row + n, n)
    return int(r[s]), 0


def tableau_rotate_measure(uint8_t[:, ::1] x, uint8_t[:, ::1] z, uint8_t[::1] r, int n, int a,
                           int s_pow, int pauli, int bit):
    cdef int row, k, rows = 2 * n + 1
    cdef uint8_t t
    for k in range(s_pow):
        for row in range(rows):
            r[row] ^= x[row, a] & z[row, a]
            z[row, a] ^= x[row, a]
    for row in range(rows):
        r[row] ^= x[row, a] & z[row, a]
        t = x[row, a]
        x[row, a] = z[row, a]
        z[row, a] = t
    if pauli:
        for row in range(rows):
            if pauli == 1:
                r[row] ^= z[row, a]
            elif pauli == 2:
                r[row] ^= x[row, a] ^ z[row, a]
            else:
                r[row] ^= x[row, a]
    return tableau_measure(x, z, r, n, a, bit)


cdef inline int _popcount(uint64_t v) nogil:
    cdef int c = 0
    while v:
        v &= v - 1
        c += 1
    return c


def count_failures(dev_masks, test_pos, canvas_idx, canvas_masks, parity):
    cdef uint64_t[:, ::1] dev = np.ascontiguousarray(dev_masks, dtype=np.uint64)
    cdef int64_t[:, ::1] pos = np.ascontiguousarray(test_pos, dtype=np.int64)
    cdef int64_t[:, ::1] cidx = np.ascontiguousarray(canvas_idx, dtype=np.int64)
    cdef uint64_t[::1] cm = np.ascontiguousarray(canvas_masks, dtype=np.uint64)
    cdef uint8_t[::1] par = np.ascontiguousarray(parity, dtype=np.uint8)
    cdef Py_ssize_t trials = pos.shape[0], s = pos.shape[1], t, k
    out_arr = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef uint64_t hit
    cdef int64_t fails
    cdef int64_t c
    with nogil:
        for t in range(trials):
            fails = 0
            for k in range(s):
                c = cidx[t, k]
                hit = dev[t, pos[t, k]] & cm[c]
                if par[c]:
                    fails += _popcount(hit) & 1
                elif hit:
                    fails += 1
            out[t] = fails
    return out_arr
