"""Dense vectors and matrices over GF(2^m).

Entries are stored as plain integer element values together with the
owning :class:`~mbcr.gf.Field`.  Elimination uses first-nonzero pivoting;
arithmetic is exact so singularity is decided exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError, SingularMatrixError
from .gf import Field


@dataclass(frozen=True)
class FieldVector:
    field: Field
    elements: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(int(e) for e in self.elements))
        for e in self.elements:
            self.field.check(e)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class FieldMatrix:
    field: Field
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(e) for e in row) for row in self.entries)
        if rows and any(len(row) != len(rows[0]) for row in rows):
            raise ParameterError("ragged matrix rows")
        for row in rows:
            for e in row:
                self.field.check(e)
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, field: Field, size: int) -> FieldMatrix:
        return cls(field, tuple(tuple(int(i == j) for j in range(size)) for i in range(size)))

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence[int]]) -> FieldMatrix:
        return cls(field, tuple(zip(*columns)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> FieldVector:
        return FieldVector(self.field, tuple(row[j] for row in self.entries))

    def row(self, i: int) -> FieldVector:
        return FieldVector(self.field, self.entries[i])

    def select_columns(self, cols: Sequence[int]) -> FieldMatrix:
        return FieldMatrix(self.field, tuple(tuple(row[j] for j in cols) for row in self.entries))

    def transpose(self) -> FieldMatrix:
        return FieldMatrix(self.field, tuple(zip(*self.entries)))

    def __matmul__(self, other):
        if isinstance(other, FieldVector):
            return matvec(self, other)
        if isinstance(other, FieldMatrix):
            return matmul(self, other)
        return NotImplemented

    def inverse(self) -> FieldMatrix:
        return inverse(self)


def _same_field(*objs) -> Field:
    field = objs[0].field
    if any(o.field != field for o in objs):
        raise ParameterError("operands belong to different fields")
    return field


def dot(u: FieldVector, v: FieldVector) -> int:
    """Sum of u_i * v_i over the field."""
    f = _same_field(u, v)
    if len(u) != len(v):
        raise ParameterError(f"dot product of vectors with lengths {len(u)} and {len(v)}")
    acc = 0
    for a, b in zip(u, v):
        acc ^= f.mul(a, b)
    return acc


def matvec(a: FieldMatrix, x: FieldVector) -> FieldVector:
    if a.cols != len(x):
        raise ParameterError(f"cannot multiply {a.shape} matrix by length-{len(x)} vector")
    _same_field(a, x)
    return FieldVector(a.field, tuple(dot(a.row(i), x) for i in range(a.rows)))


def matmul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    if a.cols != b.rows:
        raise ParameterError(f"cannot multiply {a.shape} by {b.shape}")
    f = _same_field(a, b)
    bt = b.transpose()
    return FieldMatrix(f, tuple(tuple(dot(a.row(i), bt.row(j)) for j in range(b.cols)) for i in range(a.rows)))


def _eliminate(rows: list[list[int]], f: Field, ncols: int) -> list[int]:
    """In-place reduced row echelon form; returns pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = f.inv(rows[r][c])
        rows[r] = [f.mul(inv, e) for e in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                factor = rows[i][c]
                rows[i] = [e ^ f.mul(factor, pe) for e, pe in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank(a: FieldMatrix) -> int:
    rows = [list(row) for row in a.entries]
    return len(_eliminate(rows, a.field, a.cols))


def inverse(a: FieldMatrix) -> FieldMatrix:
    if a.rows != a.cols:
        raise ParameterError(f"only square matrices are invertible, got {a.shape}")
    n = a.rows
    rows = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(a.entries)]
    pivots = _eliminate(rows, a.field, n)
    if len(pivots) < n:
        raise SingularMatrixError(f"matrix is singular (rank {len(pivots)} < {n})")
    return FieldMatrix(a.field, tuple(tuple(row[n:]) for row in rows))


def solve(a: FieldMatrix, b: FieldVector) -> FieldVector:
    """Return x with a @ x == b for square invertible a."""
    if a.rows != a.cols:
        raise ParameterError(f"solve needs a square matrix, got {a.shape}")
    if len(b) != a.rows:
        raise ParameterError("right-hand side length does not match matrix")
    _same_field(a, b)
    n = a.rows
    rows = [list(row) + [b[i]] for i, row in enumerate(a.entries)]
    pivots = _eliminate(rows, a.field, n)
    if len(pivots) < n:
        raise SingularMatrixError(f"matrix is singular (rank {len(pivots)} < {n})")
    return FieldVector(a.field, tuple(row[n] for row in rows))


def apply_to_arrays(a: FieldMatrix, arrays: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Row-wise linear combinations of payload arrays: out_i = sum_j a[i,j] * arrays[j]."""
    if a.cols != len(arrays):
        raise ParameterError(f"{a.shape} matrix applied to {len(arrays)} arrays")
    return [a.field.combine(row, arrays) for row in a.entries]
