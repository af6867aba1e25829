import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fareyflow.congruence import (
    ClosureError, CosetSubset, ModMatrix, ResiduePairSet, SubsetError, all_cosets,
    check_closure, coset_count, den_congruent, from_matrices, from_residue_pairs,
    index_gamma, is_den_one_family, mat_mul, membership, num_not_congruent,
    parse_subset, read_matrix_file, sl2_mod, write_matrix_file,
)
from fareyflow.farey import FareyPairState, iter_farey
from fareyflow.stream import stream_blocks

from oracles import farey_arrays, sl2_count


@pytest.mark.parametrize("m, want", [(1, 1), (2, 6), (3, 24), (4, 48), (6, 144)])
def test_index_gamma_examples(m, want):
    assert index_gamma(m) == want


def test_index_gamma_matches_exhaustive_count():
    for m in range(1, 13):
        assert index_gamma(m) == sl2_count(m) == len(sl2_mod(m))


def test_coset_count_examples():
    assert coset_count(CosetSubset(1, [ModMatrix.identity(1)])) == 1
    assert coset_count(from_residue_pairs(ResiduePairSet(3, [(a, 1) for a in range(3)]))) == 9
    odd = ResiduePairSet(2, [(n1, 1) for n1 in range(2)])
    assert coset_count(from_residue_pairs(odd)) == 4


def test_den_one_family_has_m_squared_cosets():
    for m in range(1, 13):
        assert coset_count(den_congruent(m, 1)) == m * m


def test_from_residue_pairs_examples():
    M1 = from_residue_pairs(ResiduePairSet(1, [(0, 0)]))
    assert M1.mats == (ModMatrix.identity(1),)
    M3 = from_residue_pairs(ResiduePairSet(3, [(a, 1) for a in range(3)]))
    assert len(M3) == 9
    assert {(X.e21, X.e22) for X in M3.mats} == {(2, 0), (2, 1), (2, 2)}
    M2 = from_residue_pairs(ResiduePairSet(2, [(1, 0)]))
    assert len(M2) == 2 and all((X.e21, X.e22) == (0, 1) for X in M2.mats)


def test_non_primitive_pairs_are_dropped_or_rejected():
    with pytest.raises(SubsetError):
        from_residue_pairs(ResiduePairSet(4, [(0, 2), (2, 2)]))
    M = from_residue_pairs(ResiduePairSet(4, [(0, 2), (1, 1)]))
    assert M == from_residue_pairs(ResiduePairSet(4, [(1, 1)]))


def test_check_closure_examples():
    for m in range(1, 6):
        assert check_closure(all_cosets(m))
    assert not check_closure(CosetSubset(2, [ModMatrix.identity(2)]))
    with pytest.raises(ClosureError):
        from_matrices(2, [ModMatrix.identity(2)])


def test_closure_of_residue_subsets_exhaustive():
    # M(A) is the union of M({pair}) over pairs, and closure survives unions,
    # so every single pair settles all A; small m also run every A outright
    for m in range(1, 7):
        for pair in product(range(m), repeat=2):
            if math.gcd(math.gcd(*pair), m) == 1:
                assert check_closure(from_residue_pairs(ResiduePairSet(m, [pair])))
    for m in (2, 3):
        pairs = list(product(range(m), repeat=2))
        for mask in range(1, 1 << len(pairs)):
            A = [p for k, p in enumerate(pairs) if mask >> k & 1]
            try:
                M = from_residue_pairs(ResiduePairSet(m, A))
            except SubsetError:
                assert all(math.gcd(math.gcd(*p), m) > 1 for p in A)
                continue
            assert check_closure(M)


@given(st.integers(1, 9), st.data())
def test_closure_random_residue_sets(m, data):
    A = data.draw(st.sets(st.tuples(st.integers(0, m - 1), st.integers(0, m - 1)), min_size=1))
    if not any(math.gcd(math.gcd(*p), m) == 1 for p in A):
        return
    assert check_closure(from_residue_pairs(ResiduePairSet(m, A)))


def test_mat_mul_examples():
    X = ModMatrix(5, 2, 3, 1, 2)
    assert mat_mul(ModMatrix.identity(5), X) == X
    assert mat_mul(ModMatrix(3, 1, 1, 0, 1), ModMatrix(3, 1, 0, 1, 1)) == ModMatrix(3, 2, 1, 1, 1)
    assert mat_mul(ModMatrix(2, 0, 1, 1, 0), ModMatrix(2, 0, 1, 1, 0)) == ModMatrix.identity(2)
    with pytest.raises(SubsetError):
        mat_mul(ModMatrix.identity(2), ModMatrix.identity(3))


def test_modmatrix_rejects_bad_determinant():
    with pytest.raises(SubsetError):
        ModMatrix(3, 1, 1, 1, 1)


@given(st.integers(1, 8), st.data())
def test_mat_mul_associative_and_unimodular(m, data):
    G = sl2_mod(m)
    X, Y, Z = (data.draw(st.sampled_from(G)) for _ in range(3))
    assert (X @ Y) @ Z == X @ (Y @ Z)


def test_membership_examples():
    M1 = all_cosets(1)
    assert all(membership(s, M1) for s in iter_farey(7))
    M = from_residue_pairs(ResiduePairSet(3, [(a, 1) for a in range(3)]))
    assert membership(FareyPairState(1, 4, 1, 3, 5), M)
    assert not membership(FareyPairState(1, 3, 2, 5, 5), M)


def _random_A(rng, m):
    pairs = [p for p in product(range(m), repeat=2)]
    while True:
        A = [p for p in pairs if rng.random() < 0.4]
        if any(math.gcd(math.gcd(*p), m) == 1 for p in A):
            return A


def test_membership_iff_residues_exhaustive_sweeps():
    rng = np.random.default_rng(3)
    cache = {Q: farey_arrays(Q) for Q in range(1, 201)}
    for m in range(1, 7):
        families = [[(a, 1) for a in range(m)], [(n1, n2) for n1, n2 in product(range(m), repeat=2) if n1]]
        families += [_random_A(rng, m) for _ in range(3)]
        for A in families:
            if not any(math.gcd(math.gcd(*p), m) == 1 for p in A):
                continue
            M = from_residue_pairs(ResiduePairSet(m, A))
            allowed = np.zeros((m, m), bool)
            for x, y in A:
                allowed[x % m, y % m] = True
            for Q in range(1, 201):
                a, q = cache[Q]
                want = allowed[a % m, q % m]
                blocks = list(stream_blocks(Q, None, M))
                got = np.concatenate(blocks)[:, 4] if blocks else np.empty(0, np.int64)
                assert np.array_equal(got, np.flatnonzero(want))


def test_python_membership_agrees_with_kernel():
    M = num_not_congruent(4)
    for Q in (1, 9, 23):
        kern = {(int(r[0]), int(r[1])) for b in stream_blocks(Q, None, M) for r in b}
        py = {(s.a, s.q) for s in iter_farey(Q) if membership(s, M)}
        assert kern == py


def test_is_den_one_family():
    assert is_den_one_family(den_congruent(6, 1))
    assert not is_den_one_family(den_congruent(6, 5))


def test_text_format_round_trip():
    M = den_congruent(4, 1)
    back = read_matrix_file(write_matrix_file(M))
    assert back.mats == M.mats
    with pytest.raises(SubsetError):
        read_matrix_file("1 0 0 1\n")
    with pytest.raises(SubsetError):
        read_matrix_file("m=3\n1 0 0\n")
    with pytest.raises(ClosureError):
        read_matrix_file("# just one\nm=3\n1 0 0 1\n")


def test_parse_shorthands(tmp_path):
    assert parse_subset("den≡1", 3).mats == den_congruent(3, 1).mats
    assert parse_subset("den=1", 3).mats == den_congruent(3, 1).mats
    assert parse_subset("num≢0", 4).mats == num_not_congruent(4).mats
    assert parse_subset("num!=0", 4).mats == num_not_congruent(4).mats
    assert parse_subset("all", 4).mats == all_cosets(4).mats
    assert parse_subset("3:0,1;1,1;2,1").mats == den_congruent(3, 1).mats
    assert len(parse_subset("all", 5)) == index_gamma(5)
    p = tmp_path / "M.txt"
    p.write_text(write_matrix_file(den_congruent(2, 1)))
    assert parse_subset(str(p), 2).mats == den_congruent(2, 1).mats
    with pytest.raises(SubsetError):
        parse_subset(str(p), 3)
    with pytest.raises(SubsetError):
        parse_subset("3:0,1", 4)
    with pytest.raises(SubsetError):
        parse_subset("bogus", 3)


def test_codes_sorted_and_match_mats():
    M = all_cosets(6)
    assert np.all(np.diff(M.codes) > 0)
    assert sorted(X.code for X in M.mats) == M.codes.tolist()
