import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dirbp import codes, gf2
from dirbp.gf2 import BinaryMatrix


def brute_span(M: np.ndarray) -> set[tuple[int, ...]]:
    """All GF(2) combinations of the rows of M, by explicit enumeration."""
    m, n = M.shape
    out = set()
    for coef in itertools.product((0, 1), repeat=m):
        v = (np.array(coef, dtype=int) @ M.astype(int)) % 2 if m else np.zeros(n, dtype=int)
        out.add(tuple(int(x) for x in v))
    return out


def brute_rank(M: np.ndarray) -> int:
    return int(np.log2(len(brute_span(M))))


small_mats = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 70).flatmap(lambda n: arrays(np.uint8, (m, n), elements=st.integers(0, 1))))


# ---- packing


@given(small_mats)
def test_pack_roundtrip(M):
    assert np.array_equal(gf2.unpack_rows(gf2.pack_rows(M), M.shape[1]), M)


def test_bit_layout_little_endian():
    v = np.zeros(70, dtype=np.uint8)
    v[0] = v[65] = 1
    words = gf2.pack_rows(v[None, :])
    assert words.shape == (1, 2)
    assert int(words[0, 0]) == 1 and int(words[0, 1]) == 2


def test_unpack_empty():
    assert gf2.unpack_rows(np.zeros((0, 1), dtype=np.uint64), 5).shape == (0, 5)


# ---- rank


def test_rank_identity_and_zeros():
    assert gf2.rank(BinaryMatrix.identity(3)) == 3
    assert gf2.rank(BinaryMatrix.zeros(4, 6)) == 0


def test_rank_toric3_hx():
    assert gf2.rank(codes.toric(3).h_x) == 8


@settings(max_examples=60)
@given(small_mats)
def test_rank_matches_span_size(M):
    assert gf2.rank(M) == brute_rank(M)


# ---- row reduction


def test_row_reduce_identity():
    R, piv = gf2.row_reduce(BinaryMatrix.identity(3))
    assert np.array_equal(R.to_dense(), np.eye(3, dtype=np.uint8))
    assert piv == [0, 1, 2]


def test_row_reduce_duplicate_rows():
    R, piv = gf2.row_reduce(np.array([[1, 1], [1, 1]]))
    assert R.to_dense().tolist() == [[1, 1], [0, 0]]
    assert piv == [0]


@settings(max_examples=40)
@given(arrays(np.uint8, (5, 8), elements=st.integers(0, 1)))
def test_row_reduce_preserves_rowspace(M):
    R, piv = gf2.row_reduce(M)
    assert brute_span(R.to_dense()) == brute_span(M)
    Rd = R.to_dense()
    for i, c in enumerate(piv):
        assert Rd[:, c].sum() == 1 and Rd[i, c] == 1


def test_row_reduce_column_order():
    M = np.array([[1, 1, 0], [0, 1, 1]])
    _, piv = gf2.row_reduce(M, column_order=[2, 1, 0])
    assert piv == [2, 1]


# ---- solve


def test_solve_single_equation():
    e = gf2.solve(np.array([[1, 1]]), [1])
    assert e is not None and (int(e[0]) ^ int(e[1])) == 1


def test_solve_zero_syndrome_gives_zero():
    rng = np.random.default_rng(1)
    M = rng.integers(0, 2, (4, 9))
    assert not gf2.solve(M, np.zeros(4)).any()


def test_solve_inconsistent():
    assert gf2.solve(np.array([[1, 1], [1, 1]]), [1, 0]) is None


@settings(max_examples=60)
@given(small_mats, st.data())
def test_solve_residual(M, data):
    e_true = data.draw(arrays(np.uint8, (M.shape[1],), elements=st.integers(0, 1)))
    s = (M.astype(int) @ e_true) % 2
    e = gf2.solve(M, s)
    assert e is not None
    assert np.array_equal((M.astype(int) @ e) % 2, s)


def test_solve_absent_iff_outside_image():
    rng = np.random.default_rng(7)
    for _ in range(30):
        M = rng.integers(0, 2, (4, 3))
        image = {tuple((M @ np.array(x)) % 2) for x in itertools.product((0, 1), repeat=3)}
        for s in itertools.product((0, 1), repeat=4):
            assert (gf2.solve(M, s) is not None) == (s in image)


# ---- nullspace


def test_nullspace_identity_empty():
    assert gf2.nullspace_basis(BinaryMatrix.identity(4)).rows == 0


def test_nullspace_path():
    N = gf2.nullspace_basis(np.array([[1, 1, 0], [0, 1, 1]]))
    assert N.to_dense().tolist() == [[1, 1, 1]]


@settings(max_examples=60)
@given(small_mats)
def test_nullspace_residual_and_dimension(M):
    N = gf2.nullspace_basis(M)
    assert N.rows == M.shape[1] - brute_rank(M)
    if N.rows:
        assert not ((M.astype(int) @ N.to_dense().T.astype(int)) % 2).any()
        assert gf2.rank(N) == N.rows


# ---- rowspace membership


def test_in_rowspace_trivial_cases():
    M = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]])
    assert gf2.in_rowspace(M, np.zeros(4))
    assert gf2.in_rowspace(M, M[0] ^ M[1])


@settings(max_examples=40)
@given(arrays(np.uint8, (3, 6), elements=st.integers(0, 1)))
def test_in_rowspace_matches_span(M):
    span = brute_span(M)
    for v in itertools.product((0, 1), repeat=6):
        assert gf2.in_rowspace(M, v) == (v in span)


def test_reducer_coset_representative():
    rng = np.random.default_rng(3)
    M = rng.integers(0, 2, (4, 10)).astype(np.uint8)
    red = gf2.RowspaceReducer(M)
    span = [np.array(v, dtype=np.uint8) for v in brute_span(M)]
    for _ in range(20):
        v = rng.integers(0, 2, 10).astype(np.uint8)
        rep = red.reduce(v)
        coset = [tuple(v ^ u) for u in span]
        # lexicographic least with position 0 most significant
        assert tuple(rep) == min(coset)


# ---- affine iteration


def test_affine_empty_basis():
    e0 = np.array([1, 0, 1], dtype=np.uint8)
    out = list(gf2.iterate_affine_space(e0, BinaryMatrix.zeros(0, 3)))
    assert len(out) == 1 and np.array_equal(out[0], e0)


def test_affine_two_rows():
    basis = np.array([[1, 1, 0, 0], [0, 0, 1, 1]])
    out = {tuple(v) for v in gf2.iterate_affine_space(np.zeros(4, dtype=np.uint8), basis)}
    assert len(out) == 4


def test_affine_preserves_syndrome():
    rng = np.random.default_rng(5)
    M = BinaryMatrix.from_dense(rng.integers(0, 2, (3, 9)))
    e0 = rng.integers(0, 2, 9).astype(np.uint8)
    ker = gf2.nullspace_basis(M)
    vecs = list(gf2.iterate_affine_space(e0, ker))
    assert len({tuple(v) for v in vecs}) == 2 ** ker.rows
    for v in vecs:
        assert np.array_equal(M.matvec(v), M.matvec(e0))


def test_affine_cap():
    basis = BinaryMatrix.identity(25)
    with pytest.raises(gf2.CapExceededError):
        next(gf2.iterate_affine_space(np.zeros(25, dtype=np.uint8), basis))


def test_span_chunks_counting_order_large():
    basis = BinaryMatrix.identity(18)
    chunks = list(gf2.span_chunks(basis))
    allv = np.concatenate(chunks)[:, 0]
    assert allv.size == 2 ** 18
    assert np.array_equal(np.sort(allv), np.arange(2 ** 18, dtype=np.uint64))


# ---- matrix operations


def test_matvec_and_mul_transpose():
    rng = np.random.default_rng(2)
    A = rng.integers(0, 2, (5, 80)).astype(np.uint8)
    B = rng.integers(0, 2, (4, 80)).astype(np.uint8)
    v = rng.integers(0, 2, 80).astype(np.uint8)
    MA, MB = BinaryMatrix.from_dense(A), BinaryMatrix.from_dense(B)
    assert np.array_equal(MA.matvec(v), (A.astype(int) @ v) % 2)
    assert np.array_equal(MA.mul_transpose(MB), (A.astype(int) @ B.T.astype(int)) % 2)
    assert np.array_equal(MA.T.to_dense(), A.T)
    assert MA == BinaryMatrix.from_dense(A) and hash(MA) == hash(BinaryMatrix.from_dense(A))
