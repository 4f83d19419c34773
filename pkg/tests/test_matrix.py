import itertools
import random

import numpy as np
import pytest

from mbcr.errors import ParameterError, SingularMatrixError
from mbcr.gf import GF2, get_field
from mbcr.matrix import FieldMatrix, FieldVector, apply_to_arrays, dot, inverse, matvec, rank, solve
from mbcr.mds import BUILTIN_GF2_MATRIX


def random_matrix(f, rows, cols, r):
    return FieldMatrix(f, [[r.randrange(f.order) for _ in range(cols)] for _ in range(rows)])


def test_dot_builtin_parity():
    # x_5 . v_1 over GF(2) with x_5 = (x12, x13, x14) and v_1 = (1, 1, 1): the sum of all three
    for bits in itertools.product((0, 1), repeat=3):
        x5 = FieldVector(GF2, bits)
        v1 = FieldVector(GF2, (1, 1, 1))
        assert dot(x5, v1) == bits[0] ^ bits[1] ^ bits[2]


def test_dot_zero_and_unit(gf256):
    u = FieldVector(gf256, (3, 7, 200))
    assert dot(u, FieldVector(gf256, (0, 0, 0))) == 0
    for i in range(3):
        e = FieldVector(gf256, tuple(int(i == j) for j in range(3)))
        assert dot(u, e) == u[i]


def test_dot_length_mismatch(gf256):
    with pytest.raises(ParameterError):
        dot(FieldVector(gf256, (1, 2)), FieldVector(gf256, (1,)))


def test_rank_basic(gf256):
    assert rank(FieldMatrix.identity(gf256, 4)) == 4
    dup = FieldMatrix(gf256, [(1, 1, 5), (2, 2, 7), (3, 3, 9)])
    assert rank(dup) < 3


def test_rank_builtin_columns():
    # columns 1..3 of the 3x4 generator
    a = FieldMatrix(GF2, [(1, 1, 0), (1, 0, 1), (1, 0, 0)])
    assert rank(a) == 3
    assert a == FieldMatrix(GF2, BUILTIN_GF2_MATRIX).select_columns([0, 1, 2])


def test_solve_identity(gf256):
    b = FieldVector(gf256, (9, 8, 7))
    assert solve(FieldMatrix.identity(gf256, 3), b) == b


def test_solve_builtin_generator_columns():
    g = FieldMatrix(GF2, BUILTIN_GF2_MATRIX)
    for cols in itertools.combinations(range(4), 3):
        a = g.select_columns(cols).transpose()
        for bits in itertools.product((0, 1), repeat=3):
            x = FieldVector(GF2, bits)
            assert solve(a, matvec(a, x)) == x


def test_solve_singular(gf256):
    a = FieldMatrix(gf256, [(1, 2), (1, 2)])
    with pytest.raises(SingularMatrixError):
        solve(a, FieldVector(gf256, (1, 1)))
    with pytest.raises(SingularMatrixError):
        inverse(a)


@pytest.mark.parametrize("m", [1, 4, 8])
def test_solve_round_trip_random(m):
    f = get_field(m)
    r = random.Random(m)
    done = 0
    while done < 40:
        size = r.randint(1, 5)
        a = random_matrix(f, size, size, r)
        if rank(a) < size:
            continue
        x = FieldVector(f, [r.randrange(f.order) for _ in range(size)])
        assert solve(a, matvec(a, x)) == x
        assert a @ inverse(a) == FieldMatrix.identity(f, size)
        done += 1


@pytest.mark.parametrize("m", [1, 4, 8])
def test_rank_invariant_under_row_ops(m):
    f = get_field(m)
    r = random.Random(10 + m)
    for _ in range(30):
        a = random_matrix(f, r.randint(1, 5), r.randint(1, 5), r)
        rows = [list(row) for row in a.entries]
        i, j = r.randrange(len(rows)), r.randrange(len(rows))
        rows[i], rows[j] = rows[j], rows[i]
        c = r.randrange(1, f.order)
        rows[i] = [f.mul(c, e) for e in rows[i]]
        assert rank(FieldMatrix(f, rows)) == rank(a)


def test_apply_to_arrays_matches_scalar(gf256):
    r = random.Random(7)
    a = random_matrix(gf256, 3, 4, r)
    arrays = [np.array([r.randrange(256) for _ in range(6)], dtype=np.uint8) for _ in range(4)]
    out = apply_to_arrays(a, arrays)
    for s in range(6):
        x = FieldVector(gf256, [arr[s] for arr in arrays])
        assert [int(o[s]) for o in out] == list(matvec(a, x))
