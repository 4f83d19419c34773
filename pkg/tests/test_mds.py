import itertools

import pytest

from mbcr.errors import ParameterError
from mbcr.gf import GF2, get_field
from mbcr.matrix import FieldMatrix
from mbcr.mds import GeneratorSpec, build_generator, is_mds


def test_builtin_matrix():
    g = build_generator(GeneratorSpec.builtin())
    assert g.entries == ((1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1))
    assert is_mds(g, 3)


def test_builtin_rejects_other_shapes():
    with pytest.raises(ParameterError):
        GeneratorSpec("builtin-paper-gf2", 2, 4, GF2)
    with pytest.raises(ParameterError):
        GeneratorSpec("builtin-paper-gf2", 3, 4, get_field(8))


def test_vandermonde_k1_all_ones():
    f = get_field(8)
    g = build_generator(GeneratorSpec.vandermonde(1, 5, f, [3, 9, 0, 1, 77]))
    assert g.entries == ((1, 1, 1, 1, 1),)


def test_vandermonde_gf4_pairs_independent():
    f = get_field(2)
    g = build_generator(GeneratorSpec.vandermonde(2, 3, f, [1, 2, 3]))
    for i, j in itertools.combinations(range(3), 2):
        # 2x2 determinant over GF(4)
        det = f.mul(g[0, i], g[1, j]) ^ f.mul(g[0, j], g[1, i])
        assert det != 0
    assert is_mds(g, 2)


def test_zero_column_not_mds():
    f = get_field(8)
    g = FieldMatrix(f, [(1, 0, 1), (2, 0, 3)])
    assert not is_mds(g, 2)


def test_duplicate_points_rejected():
    with pytest.raises(ParameterError):
        GeneratorSpec.vandermonde(2, 3, get_field(8), [1, 1, 2])


def test_too_long_for_field():
    with pytest.raises(ParameterError):
        GeneratorSpec.vandermonde(2, 5, get_field(2))


def test_row_count_checked():
    g = build_generator(GeneratorSpec.builtin())
    with pytest.raises(ParameterError):
        is_mds(g, 2)


def _det(f, rows):
    # Leibniz expansion; independent of elimination
    n = len(rows)
    total = 0
    for perm in itertools.permutations(range(n)):
        term = 1
        for i, p in enumerate(perm):
            term = f.mul(term, rows[i][p])
        total ^= term  # signs vanish in characteristic 2
    return total


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_is_mds_equals_distinct_points_predicate(m):
    """Any point tuple (distinct or not) is MDS iff points are pairwise distinct."""
    f = get_field(m)
    for k in range(1, 4):
        for length in range(k, min(f.order, 5) + 1):
            for points in itertools.islice(itertools.product(range(f.order), repeat=length), 60):
                cols = [[f.pow(p, e) for e in range(k)] for p in points]
                g = FieldMatrix.from_columns(f, cols)
                expected = len(set(points)) == len(points) or k == 1
                assert is_mds(g, k) == expected
                if expected and k > 1:
                    for sub in itertools.combinations(range(length), k):
                        assert _det(f, [[g[i, j] for j in sub] for i in range(k)]) != 0
