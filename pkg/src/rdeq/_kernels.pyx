# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops for typicality search, state enumeration and distortion."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def first_typical(const int[:, ::1] a_seqs, const long long[::1] group,
                  const long long[::1] ptr, const long long[::1] members,
                  const int[:, ::1] codebook, const int[::1] lo, const int[::1] hi,
                  int n_code_symbols, int stop_at):
    cdef Py_ssize_t m = a_seqs.shape[0]
    cdef Py_ssize_t n = a_seqs.shape[1]
    cdef Py_ssize_t n_cells = lo.shape[0]
    cdef Py_ssize_t t, i, k, g, r, cell
    cdef int C = n_code_symbols
    cdef int found
    cdef bint ok

    first = np.full(m, -1, dtype=np.int64)
    count = np.zeros(m, dtype=np.int8)
    cdef long long[::1] first_v = first
    cdef signed char[::1] count_v = count
    counts_arr = np.zeros(n_cells, dtype=np.int32)
    cdef int[::1] counts = counts_arr

    # cells that need a positive count; every other cell only has an upper bound
    need = np.flatnonzero(np.asarray(lo) > 0).astype(np.int64)
    cdef long long[::1] need_v = need
    cdef Py_ssize_t n_need = need.shape[0]

    with nogil:
        for t in range(m):
            g = group[t]
            found = 0
            for k in range(ptr[g], ptr[g + 1]):
                r = members[k]
                ok = True
                for i in range(n):
                    cell = a_seqs[t, i] * C + codebook[r, i]
                    counts[cell] += 1
                    if counts[cell] > hi[cell]:
                        ok = False
                if ok:
                    for i in range(n_need):
                        cell = need_v[i]
                        if counts[cell] < lo[cell]:
                            ok = False
                            break
                for i in range(n):
                    counts[a_seqs[t, i] * C + codebook[r, i]] = 0
                if ok:
                    if found == 0:
                        first_v[t] = r
                    found += 1
                    if found >= stop_at:
                        break
            count_v[t] = found
    return first, count


def expand_completions(const int[:, ::1] ydig, const long long[::1] counts,
                       const long long[::1] ccount, const int[:, ::1] ctable,
                       const int[::1] ys, const double[:, ::1] probs, int nx):
    """Every x completion of each y row, with joint probabilities and x codes."""
    cdef Py_ssize_t B = ydig.shape[0]
    cdef Py_ssize_t n = ydig.shape[1]
    cdef Py_ssize_t total = 0
    cdef Py_ssize_t r, t, i, c, pos
    cdef long long code
    cdef int d, xi, yi
    cdef double pr
    for r in range(B):
        total += counts[r]
    x = np.empty((total, n), dtype=np.int32)
    y = np.empty((total, n), dtype=np.int32)
    prob = np.empty(total, dtype=np.float64)
    rep = np.empty(total, dtype=np.int64)
    xcode = np.empty(total, dtype=np.int64)
    cdef int[:, ::1] xv = x
    cdef int[:, ::1] yv = y
    cdef double[::1] pv = prob
    cdef long long[::1] rv = rep
    cdef long long[::1] cv = xcode
    digit_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] dig = digit_arr
    with nogil:
        pos = 0
        for r in range(B):
            for i in range(n):
                dig[i] = 0
            for c in range(counts[r]):
                pr = 1.0
                code = 0
                for i in range(n):
                    d = ydig[r, i]
                    xi = ctable[d, dig[i]]
                    yi = ys[d]
                    xv[pos, i] = xi
                    yv[pos, i] = yi
                    pr = pr * probs[xi, yi]
                    code = code * nx + xi
                pv[pos] = pr
                rv[pos] = r
                cv[pos] = code
                pos += 1
                # odometer over completion digits, first position fastest
                for i in range(n):
                    dig[i] += 1
                    if dig[i] < ccount[ydig[r, i]]:
                        break
                    dig[i] = 0
    return x, y, prob, rep, xcode


def row_distortion(const int[:, ::1] x, const int[:, ::1] xhat, const long long[::1] row,
                   const double[:, ::1] table):
    """Per-row mean of table[x[t, i], xhat[row[t], i]]."""
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t t, i, k
    cdef double acc
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for t in range(m):
            k = row[t]
            acc = 0.0
            for i in range(n):
                acc = acc + table[x[t, i], xhat[k, i]]
            ov[t] = acc / n
    return out
