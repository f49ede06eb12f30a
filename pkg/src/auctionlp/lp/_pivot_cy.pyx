# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled pivot kernel; mirror of _pivot_py.eliminate.

Arithmetic stays on Python objects (Fraction or gmpy2.mpq); the win is
the elimination loop itself, which dominates solver runtime.
"""

KERNEL = "compiled"


def eliminate(list rows, Py_ssize_t r, Py_ssize_t c):
    cdef list prow = <list>rows[r]
    cdef Py_ssize_t ncols = len(prow)
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t k, idx, t, nnz
    cdef list nz = []
    cdef list row
    piv = prow[c]
    if piv != 1:
        inv = 1 / piv
        for k in range(ncols):
            val = prow[k]
            if val:
                prow[k] = val * inv
    for k in range(ncols):
        if prow[k]:
            nz.append(k)
    nnz = len(nz)
    for idx in range(nrows):
        if idx == r:
            continue
        row = <list>rows[idx]
        f = row[c]
        if f:
            if f == 1:
                for t in range(nnz):
                    k = <Py_ssize_t>nz[t]
                    row[k] = row[k] - prow[k]
            else:
                for t in range(nnz):
                    k = <Py_ssize_t>nz[t]
                    row[k] = row[k] - f * prow[k]
