"""Integer row reduction for lattices generated by finitely many vectors."""
from __future__ import annotations

from typing import Iterable, Sequence


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_basis(generators: Iterable[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of the lattice spanned by ``generators``.

    Rows are returned in echelon order with positive pivots and entries above
    each pivot reduced into ``[0, pivot)``.  The empty list is the zero lattice.
    """
    rows = [list(map(int, g)) for g in generators if any(g)]
    for g in rows:
        if len(g) != dim:
            raise ValueError(f"generator {g} has length {len(g)}, expected {dim}")
    basis: list[list[int]] = []
    col = 0
    while rows and col < dim:
        pivots = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not pivots:
            col += 1
            continue
        piv = pivots[0]
        for other in pivots[1:]:
            g, s, t = _xgcd(piv[col], other[col])
            a, b = piv[col] // g, other[col] // g
            new_piv = [s * p + t * o for p, o in zip(piv, other)]
            killed = [a * o - b * p for p, o in zip(piv, other)]
            piv = new_piv
            if any(killed):
                rest.append(killed)
        if piv[col] < 0:
            piv = [-v for v in piv]
        basis.append(piv)
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce entries above pivots
    for i, row in enumerate(basis):
        pc = next(c for c, v in enumerate(row) if v)
        for j in range(i):
            q = basis[j][pc] // row[pc]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], row)]
    return [tuple(r) for r in basis]


def is_full_lattice(basis: Sequence[Sequence[int]], dim: int) -> bool:
    """True iff the Hermite basis is the identity, i.e. the lattice is all of Z^dim."""
    if len(basis) != dim:
        return False
    return all(basis[i][j] == (1 if i == j else 0) for i in range(dim) for j in range(dim))
