"""Small dense linear algebra over generic scalars (floats or jets).

Pivots are chosen on the primal (float) part so the elimination order is
deterministic and identical whether or not derivatives are being carried.
"""

from __future__ import annotations

from .jets import primal


class SingularMatrixError(ValueError):
    pass


def mat_vec(mat, vec):
    return [sum(row[j] * vec[j] for j in range(len(vec))) for row in mat]


def mat_mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def transpose(mat):
    return [list(col) for col in zip(*mat)]


def identity(n):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def mat_inverse(mat):
    """Gauss-Jordan inverse with partial pivoting on primal magnitude."""
    n = len(mat)
    a = [list(row) for row in mat]
    inv = identity(n)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(primal(a[r][col])))
        if abs(primal(a[pivot][col])) < 1e-300:
            raise SingularMatrixError("matrix is numerically singular")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = a[col][col]
        a[col] = [x / scale for x in a[col]]
        inv[col] = [x / scale for x in inv[col]]
        for row in range(n):
            if row == col:
                continue
            factor = a[row][col]
            if primal(factor) == 0.0 and not _carries_derivatives(factor):
                continue
            a[row] = [x - factor * y for x, y in zip(a[row], a[col])]
            inv[row] = [x - factor * y for x, y in zip(inv[row], inv[col])]
    return inv


def _carries_derivatives(x):
    return not isinstance(x, (int, float))


def null_space_basis(mat, tol=1e-10):
    """Basis of the kernel of a float matrix via reduced row echelon form.

    Deterministic: columns are processed left to right, pivot rows by
    largest magnitude.  Returns a list of basis vectors (lists).
    """
    if not mat:
        return identity(0)
    rows = [list(map(float, r)) for r in mat]
    nrows, ncols = len(rows), len(rows[0])
    scale = max((abs(x) for r in rows for x in r), default=1.0) or 1.0
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        pivot = max(range(r, nrows), key=lambda i: abs(rows[i][c]))
        if abs(rows[pivot][c]) <= tol * scale:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0.0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for c in free:
        v = [0.0] * ncols
        v[c] = 1.0
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][c]
        basis.append(v)
    return basis
