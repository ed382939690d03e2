# cython: language_level=3
"""Compiled exact row reduction.

Same contract as pyref (unique RREF, same nullspace ordering), different
route: rows are cleared to integers, eliminated fraction-free with gcd
normalization, and divided back to Fractions only at the end. Arbitrary
precision is kept by doing the arithmetic on Python ints; the win over the
pure backend is loop and indexing overhead.
"""

from fractions import Fraction

from cpython.list cimport PyList_GET_ITEM, PyList_GET_SIZE

BACKEND_NAME = "compiled"


cdef object _gcd(object a, object b):
    while b:
        a, b = b, a % b
    return a if a >= 0 else -a


cdef list _int_row(object row):
    # Clear denominators; keep the row primitive (content 1, first nonzero > 0
    # is NOT enforced here — normalization happens at the end via division by
    # the pivot, which fixes signs the same way the pure backend does).
    cdef Py_ssize_t n = len(row)
    cdef Py_ssize_t j
    cdef object lcm = 1
    cdef object x, d
    for j in range(n):
        x = row[j]
        d = x.denominator
        lcm = lcm // _gcd(lcm, d) * d
    cdef list out = [None] * n
    for j in range(n):
        x = row[j]
        out[j] = x.numerator * (lcm // x.denominator)
    return out


def rref(rows):
    """Reduced row echelon form; returns (echelon_rows, pivot_columns)."""
    if not rows:
        return [], []
    cdef Py_ssize_t ncols = len(rows[0])
    cdef list mat = []
    for row in rows:
        if len(row) != ncols:
            raise ValueError("ragged matrix")
        mat.append(_int_row(row))
    cdef Py_ssize_t nrows = PyList_GET_SIZE(mat)
    cdef list pivots = []
    cdef Py_ssize_t r = 0, c, i, j, pr
    cdef list rowr, rowi
    cdef object p, f, g, a, b
    for c in range(ncols):
        pr = -1
        for i in range(r, nrows):
            if (<list>PyList_GET_ITEM(mat, i))[c] != 0:
                pr = i
                break
        if pr < 0:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        rowr = <list>PyList_GET_ITEM(mat, r)
        p = rowr[c]
        for i in range(nrows):
            if i == r:
                continue
            rowi = <list>PyList_GET_ITEM(mat, i)
            f = rowi[c]
            if f == 0:
                continue
            # row_i <- (p*row_i - f*row_r) / content
            g = 0
            for j in range(ncols):
                a = p * rowi[j] - f * rowr[j]
                rowi[j] = a
                if a != 0:
                    g = _gcd(g, a)
            if g > 1:
                for j in range(ncols):
                    rowi[j] = rowi[j] // g
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    cdef list out = []
    for i in range(r):
        rowi = <list>PyList_GET_ITEM(mat, i)
        p = rowi[pivots[i]]
        out.append([Fraction(x, p) for x in rowi])
    return out, pivots


def rank(rows):
    return len(rref(rows)[1])


def nullspace(rows, ncols):
    """Basis of the right nullspace; same ordering contract as pyref."""
    ech, pivots = rref(rows) if rows else ([], [])
    pivot_set = set(pivots)
    basis = []
    cdef Py_ssize_t free, prow
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for prow in range(len(pivots)):
            v[pivots[prow]] = -ech[prow][free]
        basis.append(v)
    return basis
