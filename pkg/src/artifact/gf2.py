"""Dense linear algebra over GF(2) on numpy ``uint8`` arrays.

Vectors are 1-d arrays and subspaces are stored as the rows of a 2-d array.
Every routine copies its input, so callers never see their arrays mutated.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "as_gf2",
    "zeros",
    "identity",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "in_span",
    "complement_basis",
    "Echelon",
    "matmul",
]


def as_gf2(matrix) -> np.ndarray:
    return np.array(matrix, dtype=np.uint8) & 1


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.uint8)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product reduced mod 2 (accumulates in a wide dtype first)."""
    if a.shape[1] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def rref(matrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    a = as_gf2(matrix)
    if a.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    n_rows, n_cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = a[:, c].astype(bool)
        hit[r] = False
        a[hit] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(matrix) -> int:
    a = np.asarray(matrix)
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def nullspace(matrix) -> np.ndarray:
    """Rows spanning {v : matrix @ v = 0}."""
    a = as_gf2(matrix)
    n_cols = a.shape[1]
    if a.shape[0] == 0:
        return identity(n_cols)
    r, pivots = rref(a)
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = zeros(len(free), n_cols)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = r[row, f]
    return basis


def solve(a, b) -> np.ndarray | None:
    """Solve ``a @ x = b`` for x (b a vector or a matrix of columns).

    Returns one solution with free variables set to zero, or None when the
    system is inconsistent.
    """
    a = as_gf2(a)
    b = as_gf2(b)
    vector = b.ndim == 1
    if vector:
        b = b.reshape(-1, 1)
    n_rows, n_cols = a.shape
    if n_rows == 0:
        x = zeros(n_cols, b.shape[1])
        return x[:, 0] if vector else x
    aug = np.concatenate([a, b], axis=1)
    r, pivots = rref(aug)
    if any(p >= n_cols for p in pivots):
        return None
    x = zeros(n_cols, b.shape[1])
    for row, p in enumerate(pivots):
        x[p] = r[row, n_cols:]
    return x[:, 0] if vector else x


def in_span(rows, vector) -> bool:
    rows = as_gf2(rows)
    vector = as_gf2(vector)
    if not vector.any():
        return True
    if rows.shape[0] == 0:
        return False
    return rank(np.vstack([rows, vector])) == rank(rows)


class Echelon:
    """Incrementally grown row-echelon basis of a subspace of GF(2)^n.

    Each stored row is reduced against the rows stored before it, so reducing
    a vector by the rows in insertion order always terminates correctly.
    """

    def __init__(self, n: int):
        self.n = n
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vector) -> np.ndarray:
        v = as_gf2(vector).copy()
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                v ^= row
        return v

    def add(self, vector) -> bool:
        """Insert ``vector``; return True when it enlarged the span."""
        v = self.reduce(vector)
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        self.rows.append(v)
        self.pivots.append(int(nz[0]))
        return True

    def contains(self, vector) -> bool:
        return not self.reduce(vector).any()


def complement_basis(sub, whole) -> np.ndarray:
    """Rows of ``whole`` whose classes form a basis of span(whole)/span(sub).

    The selection is greedy in the order the rows of ``whole`` are given,
    which keeps downstream choices deterministic.
    """
    sub = as_gf2(sub)
    whole = as_gf2(whole)
    n = whole.shape[1] if whole.ndim == 2 and whole.shape[0] else sub.shape[-1]
    ech = Echelon(n)
    for row in sub.reshape(-1, n):
        ech.add(row)
    chosen = [row.copy() for row in whole.reshape(-1, n) if ech.add(row)]
    if not chosen:
        return zeros(0, n)
    return np.array(chosen, dtype=np.uint8)
