"""Dense linear algebra over finite fields.

Two layers: a generic one over lists of FieldElement (works for any
field, meant for small matrices) and a vectorized numpy layer mod a
prime (used by the jet solver and the grid checks).
"""

from __future__ import annotations

import numpy as np

from .fields import FieldElement


# -- generic field layer -------------------------------------------------


def mat_rref(rows: list[list[FieldElement]], field) -> tuple[list[list[FieldElement]], list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        s = m[r][c].inv()
        m[r] = [x * s for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def mat_rank(rows, field) -> int:
    return len(mat_rref(rows, field)[1])


def mat_nullspace(rows, field) -> list[list[FieldElement]]:
    """Basis of the right kernel {v : M v = 0}."""
    if not rows:
        return []
    ncols = len(rows[0])
    rref, pivots = mat_rref(rows, field)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [field.zero] * ncols
        v[fc] = field.one
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def mat_solve(rows, rhs, field):
    """One solution of M x = b, or None if inconsistent."""
    if not rows:
        return []
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    rref, pivots = mat_rref(aug, field)
    for r in range(len(rref)):
        if all(not x for x in rref[r][:ncols]) and rref[r][ncols]:
            return None
    x = [field.zero] * ncols
    for r, pc in enumerate(pivots):
        if pc < ncols:
            x[pc] = rref[r][ncols]
    return x


def mat_mul(a, b, field):
    return [
        [sum((x * y for x, y in zip(row, col)), field.zero) for col in zip(*b)]
        for row in a
    ]


def mat_vec(a, v, field):
    return [sum((x * y for x, y in zip(row, v)), field.zero) for row in a]


def charpoly(m: list[list[FieldElement]], field) -> list[FieldElement]:
    """Characteristic polynomial det(xI - M), low degree first.

    Berkowitz's division-free algorithm, safe in small characteristic.
    """
    n = len(m)
    if n == 0:
        return [field.one]
    # vectors of Toeplitz products, following the classical formulation
    poly = [field.one]  # char poly of the empty matrix
    for k in range(1, n + 1):
        a = m[k - 1][k - 1]
        row = m[k - 1][: k - 1]
        col = [m[i][k - 1] for i in range(k - 1)]
        sub = [r[: k - 1] for r in m[: k - 1]]
        # c_i = row * sub^(i-2) * col
        c = [field.one, -a]
        if k > 1:
            v = col
            c.append(-sum((x * y for x, y in zip(row, v)), field.zero))
            for _ in range(k - 2):
                v = mat_vec(sub, v, field)
                c.append(-sum((x * y for x, y in zip(row, v)), field.zero))
        # multiply previous poly (as lower-triangular Toeplitz) by c
        new = [field.zero] * (k + 1)
        for i, ci in enumerate(c):
            if not ci:
                continue
            for j, pj in enumerate(poly):
                if i + j <= k:
                    new[i + j] = new[i + j] + ci * pj
        poly = new
    # poly is ordered highest degree first in this recurrence; normalize
    poly = list(reversed(poly))
    if poly[-1] != field.one:
        s = poly[-1].inv()
        poly = [x * s for x in poly]
    return poly


# -- numpy layer mod a prime ----------------------------------------------


def rref_mod(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """RREF of an integer matrix mod p; returns (rref, pivot columns)."""
    m = np.array(mat, dtype=np.int64) % p
    nrows, ncols = m.shape
    pivots = []
    r = 0
    for c in range(ncols):
        rows = np.nonzero(m[r:, c])[0]
        if rows.size == 0:
            continue
        pr = r + int(rows[0])
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        other = np.nonzero(m[:, c])[0]
        other = other[other != r]
        if other.size:
            m[other] = (m[other] - np.outer(m[other, c], m[r])) % p
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def rank_mod(mat: np.ndarray, p: int) -> int:
    if mat.size == 0:
        return 0
    return len(rref_mod(mat, p)[1])


def nullspace_mod(mat: np.ndarray, p: int) -> np.ndarray:
    """Columns form a basis of the right kernel mod p."""
    nrows, ncols = mat.shape
    rref, pivots = rref_mod(mat, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((ncols, len(free)), dtype=np.int64)
    for j, fc in enumerate(free):
        basis[fc, j] = 1
        for r, pc in enumerate(pivots):
            basis[pc, j] = (-int(rref[r, fc])) % p
    return basis
