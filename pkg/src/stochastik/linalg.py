"""Exact linear algebra over the rationals.

Matrices are lists of lists of :class:`fractions.Fraction`. Pivots are chosen
among the nonzero candidates by smallest numerator+denominator bit size, which
keeps intermediate entries short; correctness does not depend on it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch, SingularMatrix

Matrix = list[list[Fraction]]


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, ``"a/b"`` strings and floats to Fraction.

    Floats are read through their shortest decimal repr, so ``0.1`` becomes
    ``1/10`` rather than the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(repr(x))
    # numpy scalars and the like
    return Fraction(repr(float(x)))


def fmatrix(rows) -> Matrix:
    return [[to_fraction(x) for x in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(n: int, m: int) -> Matrix:
    return [[Fraction(0)] * m for _ in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and len(a[0]) != len(b):
        raise DimensionMismatch(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x?")
    m = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [Fraction(0)] * m
        for k, aik in enumerate(row):
            if aik:
                bk = b[k]
                for j in range(m):
                    if bk[j]:
                        acc[j] += aik * bk[j]
        out.append(acc)
    return out


def vecmat(v: Sequence[Fraction], a: Matrix) -> list[Fraction]:
    if len(v) != len(a):
        raise DimensionMismatch(f"vector of length {len(v)} vs {len(a)} rows")
    m = len(a[0]) if a else 0
    acc = [Fraction(0)] * m
    for vi, row in zip(v, a):
        if vi:
            for j in range(m):
                if row[j]:
                    acc[j] += vi * row[j]
    return acc


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _size(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def _pick_pivot(a: Matrix, col: int, start: int) -> int | None:
    best, best_size = None, None
    for r in range(start, len(a)):
        v = a[r][col]
        if v:
            s = _size(v)
            if best is None or s < best_size:
                best, best_size = r, s
    return best


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form of a copy of ``a`` and its pivot columns."""
    a = [list(row) for row in a]
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = _pick_pivot(a, c, r)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        prow = a[r]
        for i in range(n_rows):
            if i != r and a[i][c]:
                f = a[i][c]
                row = a[i]
                a[i] = [x - f * y if y else x for x, y in zip(row, prow)]
        pivots.append(c)
        r += 1
    return a, pivots


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    if any(len(row) != n for row in a):
        raise DimensionMismatch("inverse needs a square matrix")
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrix("matrix is not invertible")
    return [row[n:] for row in red]


def solve(a: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Unique solution of ``a x = b``; raises SingularMatrix otherwise."""
    n = len(a)
    if len(b) != n:
        raise DimensionMismatch("right-hand side length mismatch")
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if pivots != list(range(len(a[0]))):
        raise SingularMatrix("system has no unique solution")
    return [row[-1] for row in red[: len(pivots)]]


def solve_overdetermined(a: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Unique solution of a consistent system with more rows than unknowns.

    Raises SingularMatrix if the solution is not unique or the system is
    inconsistent.
    """
    n_cols = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if n_cols in pivots:
        raise SingularMatrix("inconsistent system")
    if pivots != list(range(n_cols)):
        raise SingularMatrix("solution is not unique")
    return [red[i][-1] for i in range(n_cols)]
