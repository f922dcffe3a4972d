"""Exact dense linear algebra over Q, Q(i) and Q(i, sqrt(s)).

Matrices are plain lists of lists whose entries are Fractions or ExactNums.
Two elimination routes are provided on purpose: straightforward row echelon
with field division, and a fraction-free (Bareiss) elimination whose
intermediate entries are minors of the input.  Rank computations in the
package are cross-checked between the two.

``hermitian_signature`` computes the inertia (n_plus, n_minus, n_null) of a
Hermitian form by symmetric elimination with diagonal pivoting, a hyperbolic
fallback when the diagonal vanishes, and an integer Bareiss lane for the
common all-rational case.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .exactnum import ExactNum, conjugate, is_rational_real, real_sign

__all__ = [
    "DependencyError",
    "hermitian_signature",
    "kernel_basis",
    "matrix_inverse",
    "rank",
    "rank_fraction_free",
    "rref",
]


class DependencyError(ValueError):
    """Raised when allegedly independent vectors are dependent.

    ``witness`` holds coefficients of a vanishing combination of the input
    rows.
    """

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


def _is_zero_row(row):
    return not any(row)


def rref(matrix, track=False):
    """Reduced row echelon form by field division.

    Returns (rows, pivot_columns) or, with ``track``, (rows, pivot_columns,
    transform) where transform @ input == rows.
    """
    rows = [list(r) for r in matrix]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    trans = [[Fraction(i == j) for j in range(nrows)] for i in range(nrows)] if track else None
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        if trans:
            trans[r], trans[pr] = trans[pr], trans[r]
        inv = Fraction(1) / rows[r][c] if isinstance(rows[r][c], (int, Fraction)) else rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        if trans:
            trans[r] = [x * inv for x in trans[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                if trans:
                    trans[i] = [a - f * b for a, b in zip(trans[i], trans[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    if track:
        return rows, pivots, trans
    return rows, pivots


def rank(matrix) -> int:
    if not matrix:
        return 0
    _, pivots = rref(matrix)
    return len(pivots)


def rank_fraction_free(matrix) -> int:
    """Rank by Bareiss elimination (independent of :func:`rref`)."""
    rows = [list(r) for r in matrix]
    if not rows:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    prev = Fraction(1)
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, nrows):
            fi = rows[i][c]
            rows[i] = [(rows[i][j] * piv - fi * rows[r][j]) / prev for j in range(ncols)]
        prev = piv
        r += 1
        if r == nrows:
            break
    return r


def kernel_basis(matrix, ncols=None):
    """Basis of the right kernel, in deterministic free-column order.

    Each basis vector has entry 1 at its free column and the solved pivot
    entries elsewhere.
    """
    if not matrix:
        if ncols is None:
            return []
        return [[Fraction(i == j) for j in range(ncols)] for i in range(ncols)]
    ncols = ncols if ncols is not None else len(matrix[0])
    rows, pivots = rref(matrix)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            if rows[r][fc]:
                vec[pc] = -rows[r][fc]
        basis.append(vec)
    return basis


def matrix_inverse(matrix):
    n = len(matrix)
    aug = [list(row) + [Fraction(i == j) for j in range(n)] for i, row in enumerate(matrix)]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in rows[:n]]


def independence_check(vectors):
    """Raise DependencyError (with witness coefficients) unless independent."""
    if not vectors:
        return
    rows, pivots, trans = rref(vectors, track=True)
    for i, row in enumerate(rows):
        if _is_zero_row(row) and any(trans[i]):
            raise DependencyError(
                "input vectors are linearly dependent", witness=trans[i]
            )


# -- Hermitian signature ---------------------------------------------------


def _row_is_zero(m, i):
    return not any(m[i])


def _sig_generic(m):
    """Inertia of a Hermitian matrix with exact field entries."""
    pos = neg = nul = 0
    while m:
        n = len(m)
        zero_rows = {i for i in range(n) if _row_is_zero(m, i)}
        if zero_rows:
            keep = [i for i in range(n) if i not in zero_rows]
            nul += len(zero_rows)
            m = [[m[i][j] for j in keep] for i in keep]
            continue
        pi = next((i for i in range(n) if m[i][i]), None)
        if pi is None:
            # Wholly isotropic diagonal: make a pivot with a hyperbolic pair.
            i, j, a = next(
                (i, j, m[i][j]) for i in range(n) for j in range(i + 1, n) if m[i][j]
            )
            two_re = a + conjugate(a)
            c = Fraction(1) if two_re else ExactNum(0, 1)
            # v_i <- v_i + c v_j :  row update then column update.
            cc = conjugate(c)
            m[i] = [x + cc * y for x, y in zip(m[i], m[j])]
            for k in range(n):
                m[k][i] = m[k][i] + c * m[k][j]
            continue
        piv = m[pi][pi]
        s = real_sign(piv)
        if s > 0:
            pos += 1
        else:
            neg += 1
        others = [i for i in range(n) if i != pi]
        m = [
            [m[i][j] - m[i][pi] * m[pi][j] / piv for j in others]
            for i in others
        ]
    return pos, neg, nul


def _as_fraction(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return x.rational_value()


def _sig_rational(g):
    """Integer Bareiss lane: entries stay minors of the scaled input."""
    n = len(g)
    f = [[_as_fraction(x) for x in row] for row in g]
    scale = []
    for i in range(n):
        l = 1
        for x in f[i]:
            l = l * x.denominator // gcd(l, x.denominator)
        scale.append(l)
    m = [
        [int(f[i][j] * scale[i] * scale[j]) for j in range(n)]
        for i in range(n)
    ]
    pos = neg = nul = 0
    prev = 1
    while m:
        n = len(m)
        zero_rows = {i for i in range(n) if not any(m[i])}
        if zero_rows:
            keep = [i for i in range(n) if i not in zero_rows]
            nul += len(zero_rows)
            m = [[m[i][j] for j in keep] for i in keep]
            continue
        pi = None
        best = None
        for i in range(n):
            v = abs(m[i][i])
            if v and (best is None or v < best):
                best, pi = v, i
        if pi is None:
            # rare: all-isotropic diagonal; hand the exact remainder over
            rest = [[Fraction(x, prev) for x in row] for row in m]
            p2, n2, z2 = _sig_generic(rest)
            return pos + p2, neg + n2, nul + z2
        piv = m[pi][pi]
        if piv * prev > 0:
            pos += 1
        else:
            neg += 1
        others = [i for i in range(n) if i != pi]
        m = [
            [(m[i][j] * piv - m[i][pi] * m[pi][j]) // prev for j in others]
            for i in others
        ]
        prev = piv
    return pos, neg, nul


def hermitian_signature(gram):
    """Inertia (n_plus, n_minus, n_null) of a Hermitian matrix.

    The matrix must be Hermitian with real diagonal; this is checked.  A
    congruence transform never changes the result (Sylvester).
    """
    n = len(gram)
    if n == 0:
        return (0, 0, 0)
    for i in range(n):
        for j in range(i, n):
            if gram[i][j] != conjugate(gram[j][i]):
                raise ValueError(f"matrix is not Hermitian at ({i},{j})")
    if all(is_rational_real(gram[i][j]) for i in range(n) for j in range(n)):
        return _sig_rational(gram)
    return _sig_generic([list(r) for r in gram])
