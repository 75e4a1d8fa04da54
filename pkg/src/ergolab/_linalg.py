"""Row reduction over Q with Fractions."""

from __future__ import annotations

from fractions import Fraction


def rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form and the pivot columns (left to right)."""
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Null-space basis, one vector per free column in increasing order.

    The vector for free column ``f`` has a 1 at ``f``, 0 at the other free
    columns, and pivot entries from back-substitution.
    """
    reduced, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Unique solution of a square nonsingular system."""
    n = len(mat)
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    reduced, pivots = rref(aug, n)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [row[n] for row in reduced]
