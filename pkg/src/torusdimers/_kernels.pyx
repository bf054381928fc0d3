# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor
from libcpp.vector cimport vector

cnp.import_array()


cdef struct EnumState:
    int n
    int* targets      # n*3
    int* closing      # flattened lists
    int* closing_ptr  # n+1 offsets
    char* used
    signed char* moves


cdef void _rec(EnumState* st, int i, vector[signed char]* out) noexcept nogil:
    cdef int mv, t, c, ok
    if i == st.n:
        for c in range(st.n):
            out.push_back(st.moves[c])
        return
    for mv in range(3):
        t = st.targets[3 * i + mv]
        if st.used[t]:
            continue
        st.used[t] = 1
        st.moves[i] = <signed char>mv
        ok = 1
        for c in range(st.closing_ptr[i], st.closing_ptr[i + 1]):
            if not st.used[st.closing[c]]:
                ok = 0
                break
        if ok:
            _rec(st, i + 1, out)
        st.used[t] = 0


def enumerate_moves(int m1, int m2):
    cdef int n = m1 * m2
    cdef int x1, x2, idx, y, p0, p1, p2, top, i
    cdef cnp.ndarray[int, ndim=1] targets = np.empty(3 * n, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] closing = np.empty(n, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1] closing_ptr = np.zeros(n + 1, dtype=np.intc)
    cdef cnp.ndarray[char, ndim=1] used = np.zeros(n, dtype=np.int8)
    cdef cnp.ndarray[signed char, ndim=1] moves = np.zeros(n, dtype=np.int8)
    owner = np.empty(n, dtype=np.intc)
    for x2 in range(m2):
        for x1 in range(m1):
            idx = x2 * m1 + x1
            targets[3 * idx] = idx
            targets[3 * idx + 1] = x2 * m1 + (x1 + 1) % m1
            targets[3 * idx + 2] = ((x2 + 1) % m2) * m1 + x1
            y = idx
            p0 = y
            p1 = x2 * m1 + (x1 - 1 + m1) % m1
            p2 = ((x2 - 1 + m2) % m2) * m1 + x1
            top = max(p0, p1, p2)
            owner[y] = top
    # bucket sites by owner, stable in site order
    order = np.argsort(owner, kind="stable").astype(np.intc)
    counts = np.bincount(owner, minlength=n)
    closing_ptr[1:] = np.cumsum(counts)
    closing[:] = order

    cdef EnumState st
    st.n = n
    st.targets = &targets[0]
    st.closing = &closing[0]
    st.closing_ptr = &closing_ptr[0]
    st.used = &used[0]
    st.moves = &moves[0]
    cdef vector[signed char] out
    with nogil:
        _rec(&st, 0, &out)
    cdef Py_ssize_t total = out.size()
    result = np.empty(total, dtype=np.int8)
    cdef signed char[::1] rv = result
    cdef Py_ssize_t q
    for q in range(total):
        rv[q] = out[q]
    return result.reshape(total // n if n else 0, n)


cdef inline void _insertion_sort(double* a, int length) noexcept nogil:
    cdef int i, j
    cdef double v
    for i in range(1, length):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


def classify_beads(strings, times, int n, int k):
    cdef const long long[:, ::1] sv = np.ascontiguousarray(strings, dtype=np.int64)
    cdef const double[:, ::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t S = sv.shape[0]
    cdef int N = n * k
    result = np.full(S, -1, dtype=np.int64)
    cdef long long[::1] out = result
    buf_arr = np.empty(max(N, 1), dtype=np.float64)
    fill_arr = np.empty(max(n, 1), dtype=np.intc)
    cdef double[::1] buf = buf_arr
    cdef int[::1] fill = fill_arr
    cdef Py_ssize_t s
    cdef int i, h, hn, q, first, second
    cdef long long code
    cdef double ell, a, b
    with nogil:
        for s in range(S):
            for h in range(n):
                fill[h] = 0
            first = 1  # reused as "counts ok"
            for i in range(N):
                code = sv[s, i]
                if code < 0 or code >= n or fill[code] >= k:
                    first = 0
                    break
                buf[code * k + fill[code]] = tv[s, i]
                fill[code] += 1
            if not first:
                continue
            for h in range(n):
                _insertion_sort(&buf[h * k], k)
            ell = 0.0
            q = 1
            for h in range(n):
                hn = (h + 1) % n
                first = 1
                second = 1
                for i in range(k):
                    a = buf[h * k + i]
                    b = buf[hn * k + i]
                    if not (a <= b):
                        first = 0
                    if not (b < a):
                        second = 0
                    if i + 1 < k:
                        if not (b < buf[h * k + i + 1]):
                            first = 0
                        if not (a <= buf[hn * k + i + 1]):
                            second = 0
                if first:
                    for i in range(k):
                        ell += buf[hn * k + i] - buf[h * k + i]
                elif second:
                    for i in range(k - 1):
                        ell += buf[hn * k + i + 1] - buf[h * k + i]
                    ell += buf[hn * k] + 1.0 - buf[h * k + k - 1]
                else:
                    q = 0
                    break
            if q:
                out[s] = <long long>floor(ell + 0.5)
    return result
