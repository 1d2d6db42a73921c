"""Fraction-free exact linear algebra on small integer/rational matrices."""

from __future__ import annotations

from math import lcm
from typing import Sequence

from gmpy2 import mpq


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        qs = [mpq(v) for v in row]
        den = lcm(*(int(q.denominator) for q in qs)) if qs else 1
        out.append([int(q * den) for q in qs])
    return out


def bareiss_rank(rows: Sequence[Sequence]) -> int:
    """Rank over Q via Bareiss elimination (all intermediate values stay integral)."""
    m = _integer_rows(rows)
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, nrows):
            f = m[r][col]
            for c in range(col, ncols):
                m[r][c] = (p * m[r][c] - f * m[rank][c]) // prev
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def bareiss_det(rows: Sequence[Sequence]):
    """Exact determinant of a square matrix with integer or rational entries."""
    n = len(rows)
    if n == 0:
        return 1
    qs = [[mpq(v) for v in row] for row in rows]
    den = 1
    for row in qs:
        d = lcm(*(int(q.denominator) for q in row))
        den *= d
    m = _integer_rows(qs)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return mpq(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return mpq(sign * m[n - 1][n - 1], den)


def leading_minors(rows: Sequence[Sequence]) -> list:
    n = len(rows)
    return [bareiss_det([list(r[:k]) for r in rows[:k]]) for k in range(1, n + 1)]
