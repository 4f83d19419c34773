"""MDS generator matrices: every k columns linearly independent.

Two kinds are supported.  ``builtin-paper-gf2`` is the fixed 3x4 binary
matrix whose columns are e1+e2+e3, e1, e2, e3.  ``vandermonde`` builds
column j as (1, p_j, p_j^2, ..., p_j^(k-1)) from distinct evaluation
points, which requires a field with at least n-1 elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations

from .errors import ParameterError
from .gf import GF2, Field
from .matrix import FieldMatrix, rank

BUILTIN = "builtin-paper-gf2"
VANDERMONDE = "vandermonde"
KINDS = (BUILTIN, VANDERMONDE)

BUILTIN_GF2_MATRIX = (
    (1, 1, 0, 0),
    (1, 0, 1, 0),
    (1, 0, 0, 1),
)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    k: int
    length: int
    field: Field
    eval_points: tuple[int, ...] = dc_field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.k < 1 or self.length < 1:
            raise ParameterError("generator dimension and length must be positive")
        if self.kind == BUILTIN:
            if (self.k, self.length, self.field) != (3, 4, GF2):
                raise ParameterError("builtin-paper-gf2 generator exists only for k=3, length 4 over GF(2)")
            if self.eval_points:
                raise ParameterError("builtin generator takes no evaluation points")
            return
        points = tuple(int(p) for p in self.eval_points) or tuple(range(self.length))
        if len(points) != self.length:
            raise ParameterError(f"need {self.length} evaluation points, got {len(points)}")
        if len(set(points)) != len(points):
            raise ParameterError(f"evaluation points must be distinct: {points}")
        if self.length > self.field.order:
            raise ParameterError(
                f"vandermonde generator of length {self.length} needs q >= {self.length}, "
                f"field has q = {self.field.order}"
            )
        for p in points:
            self.field.check(p)
        object.__setattr__(self, "eval_points", points)

    @classmethod
    def vandermonde(cls, k: int, length: int, field: Field, eval_points=()) -> GeneratorSpec:
        return cls(VANDERMONDE, k, length, field, tuple(eval_points))

    @classmethod
    def builtin(cls) -> GeneratorSpec:
        return cls(BUILTIN, 3, 4, GF2)


def build_generator(spec: GeneratorSpec) -> FieldMatrix:
    """The k x length generator matrix described by ``spec``."""
    if spec.kind == BUILTIN:
        g = FieldMatrix(GF2, BUILTIN_GF2_MATRIX)
    else:
        f = spec.field
        columns = [[f.pow(p, e) for e in range(spec.k)] for p in spec.eval_points]
        g = FieldMatrix.from_columns(f, columns)
    assert is_mds(g, spec.k), "generator failed its MDS check"
    return g


def is_mds(g: FieldMatrix, k: int) -> bool:
    """True iff every k-column submatrix of ``g`` has rank k (exhaustive)."""
    if g.rows != k:
        raise ParameterError(f"generator has {g.rows} rows, expected k={k}")
    if g.cols < k:
        return False
    return all(rank(g.select_columns(cols)) == k for cols in combinations(range(g.cols), k))
