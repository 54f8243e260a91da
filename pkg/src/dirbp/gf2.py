"""Linear algebra over GF(2) on bit-packed matrices.

Rows are stored as little-endian arrays of 64-bit words: entry ``(i, j)``
lives in word ``j // 64`` of row ``i`` at bit position ``j % 64``. Bit
vectors at the API boundary are plain ``uint8`` numpy arrays of 0/1.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

WORD = 64
AFFINE_CAP = 24

__all__ = [
    "CapExceededError",
    "BinaryMatrix",
    "RowspaceReducer",
    "as_bits",
    "pack_rows",
    "unpack_rows",
    "rank",
    "row_reduce",
    "solve",
    "nullspace_basis",
    "in_rowspace",
    "iterate_affine_space",
    "span_chunks",
]


class CapExceededError(ValueError):
    """An exhaustive enumeration would exceed its size cap."""


def _nwords(cols: int) -> int:
    return max(1, (cols + WORD - 1) // WORD)


def as_bits(v, length: Optional[int] = None) -> np.ndarray:
    """Coerce ``v`` to a 1-D uint8 array of 0/1 entries."""
    arr = np.asarray(v)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bit vector entries must be 0 or 1")
    arr = arr.astype(np.uint8, copy=False)
    if length is not None and arr.size != length:
        raise ValueError(f"expected bit vector of length {length}, got {arr.size}")
    return arr


def pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into ``(rows, nwords)`` uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8)
    if dense.ndim == 1:
        dense = dense[None, :]
    rows, cols = dense.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(rows, nw).astype(np.uint64)


def unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    """Inverse of :func:`pack_rows`; returns ``(rows, cols)`` uint8."""
    words = np.ascontiguousarray(np.asarray(words, dtype="<u8"))
    if words.ndim == 1:
        words = words[None, :]
    if words.shape[0] == 0:
        return np.zeros((0, cols), dtype=np.uint8)
    as_bytes = words.view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, count=cols, bitorder="little")


def _parity(words: np.ndarray) -> np.ndarray:
    """Parity of the popcount along the last axis."""
    return (np.bitwise_count(words).sum(axis=-1) & 1).astype(np.uint8)


class BinaryMatrix:
    """Immutable dense matrix over GF(2) with bit-packed rows."""

    __slots__ = ("_words", "_rows", "_cols")

    def __init__(self, words: np.ndarray, rows: int, cols: int):
        words = np.array(words, dtype=np.uint64).reshape(rows, _nwords(cols))
        words.flags.writeable = False
        self._words = words
        self._rows = int(rows)
        self._cols = int(cols)

    @classmethod
    def from_dense(cls, dense, cols: Optional[int] = None) -> "BinaryMatrix":
        arr = np.asarray(dense)
        if arr.size == 0:
            rows = arr.shape[0] if arr.ndim == 2 else 0
            if cols is None:
                cols = arr.shape[1] if arr.ndim == 2 else 0
            return cls.zeros(rows, cols)
        if arr.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("matrix entries must be 0 or 1")
        return cls(pack_rows(arr.astype(np.uint8)), arr.shape[0], arr.shape[1])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(np.zeros((rows, _nwords(cols)), dtype=np.uint64), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self._words, self._cols)

    def row(self, i: int) -> np.ndarray:
        return unpack_rows(self._words[i], self._cols)[0]

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(idx)
        return int((self._words[i, j // WORD] >> np.uint64(j % WORD)) & np.uint64(1))

    def matvec(self, v) -> np.ndarray:
        """Return ``M @ v`` over GF(2) as a uint8 vector of length ``rows``."""
        packed = pack_rows(as_bits(v, self._cols))[0]
        return _parity(self._words & packed)

    def mul_transpose(self, other: "BinaryMatrix") -> np.ndarray:
        """Return the dense product ``self @ other.T`` over GF(2)."""
        if self._cols != other._cols:
            raise ValueError("column counts differ")
        return _parity(self._words[:, None, :] & other._words[None, :, :])

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense().T.copy(), cols=self._rows)

    @property
    def T(self) -> "BinaryMatrix":
        return self.transpose()

    def vstack(self, other: "BinaryMatrix") -> "BinaryMatrix":
        if self._cols != other._cols:
            raise ValueError("column counts differ")
        return BinaryMatrix(np.vstack([self._words, other._words]), self._rows + other._rows, self._cols)

    def column_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0).astype(int)

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self._words).sum(axis=1).astype(int)

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices of the ones, row-major."""
        return np.nonzero(self.to_dense())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self._rows}x{self._cols})"


def _coerce(M) -> BinaryMatrix:
    return M if isinstance(M, BinaryMatrix) else BinaryMatrix.from_dense(M)


def _eliminate(words: np.ndarray, order: Iterable[int]) -> tuple[np.ndarray, list[int]]:
    """Gauss-Jordan elimination in place, visiting columns in ``order``.

    Rows ``0..len(pivots)-1`` of the result are the pivot rows, and row ``r``
    carries the pivot at column ``pivots[r]``.
    """
    m = words.shape[0]
    pivots: list[int] = []
    r = 0
    for c in order:
        if r >= m:
            break
        w, b = divmod(c, WORD)
        col = (words[r:, w] >> np.uint64(b)) & np.uint64(1)
        hits = np.flatnonzero(col)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
        mask = ((words[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
        mask[r] = False
        if mask.any():
            words[mask] ^= words[r]
        pivots.append(c)
        r += 1
    return words, pivots


def row_reduce(M, column_order: Optional[Sequence[int]] = None) -> tuple[BinaryMatrix, list[int]]:
    """Reduced row-echelon form and the pivot columns.

    Columns are visited in increasing order unless ``column_order`` is given,
    in which case pivots are reported in visiting order.
    """
    M = _coerce(M)
    order = range(M.cols) if column_order is None else column_order
    words, pivots = _eliminate(M.words.copy(), order)
    return BinaryMatrix(words, M.rows, M.cols), pivots


def rank(M) -> int:
    return len(row_reduce(M)[1])


def solve(M, s) -> Optional[np.ndarray]:
    """Some ``e`` with ``M @ e = s`` (free variables zero), or None if inconsistent."""
    M = _coerce(M)
    s = as_bits(s, M.rows)
    aug = np.hstack([M.to_dense(), s[:, None]])
    words, pivots = _eliminate(pack_rows(aug), range(M.cols))
    rhs = unpack_rows(words, M.cols + 1)[:, M.cols]
    if rhs[len(pivots):].any():
        return None
    e = np.zeros(M.cols, dtype=np.uint8)
    e[pivots] = rhs[: len(pivots)]
    return e


def nullspace_basis(M) -> BinaryMatrix:
    """Rows form a basis of ``ker(M)``, one per free column."""
    M = _coerce(M)
    rref, pivots = row_reduce(M)
    dense = rref.to_dense()
    free = [c for c in range(M.cols) if c not in set(pivots)]
    basis = np.zeros((len(free), M.cols), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for r, p in enumerate(pivots):
            basis[t, p] = dense[r, f]
    return BinaryMatrix.from_dense(basis, cols=M.cols)


class RowspaceReducer:
    """Precomputed RREF of a matrix for repeated rowspace tests.

    ``reduce`` maps a vector to the lexicographically least member of its
    coset ``v + rowsp(M)`` (position 0 most significant).
    """

    def __init__(self, M):
        M = _coerce(M)
        rref, pivots = row_reduce(M)
        self.cols = M.cols
        self.pivots = pivots
        self._rows = rref.words[: len(pivots)].copy()
        self._piv_word = np.array([p // WORD for p in pivots], dtype=np.intp)
        self._piv_bit = np.array([p % WORD for p in pivots], dtype=np.uint64)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def basis(self) -> BinaryMatrix:
        return BinaryMatrix(self._rows, self.rank, self.cols)

    def reduce_packed(self, words: np.ndarray) -> np.ndarray:
        """Reduce packed rows ``(N, nwords)``; returns a new array."""
        out = np.array(words, dtype=np.uint64, copy=True)
        single = out.ndim == 1
        if single:
            out = out[None, :]
        for r in range(self.rank):
            w = self._piv_word[r]
            mask = ((out[:, w] >> self._piv_bit[r]) & np.uint64(1)).astype(bool)
            if mask.any():
                out[mask] ^= self._rows[r]
        return out[0] if single else out

    def reduce(self, v) -> np.ndarray:
        packed = pack_rows(as_bits(v, self.cols))[0]
        return unpack_rows(self.reduce_packed(packed), self.cols)[0]

    def contains_packed(self, words: np.ndarray) -> np.ndarray:
        red = self.reduce_packed(words)
        return ~red.any(axis=-1)

    def contains(self, v) -> bool:
        return not self.reduce(v).any()


def in_rowspace(M, v) -> bool:
    M = _coerce(M)
    return RowspaceReducer(M).contains(as_bits(v, M.cols))


def span_chunks(basis, offset=None, chunk_bits: int = 16, cap: int = AFFINE_CAP) -> Iterator[np.ndarray]:
    """Yield packed arrays covering ``offset + span(basis)`` in counting order.

    Element ``i`` of the concatenated stream is ``offset`` plus the XOR of
    basis rows ``j`` with bit ``j`` of ``i`` set.
    """
    basis = _coerce(basis)
    r = basis.rows
    if r > cap:
        raise CapExceededError(f"affine space of dimension {r} exceeds cap 2^{cap}")
    nw = _nwords(basis.cols)
    if offset is None:
        base = np.zeros(nw, dtype=np.uint64)
    else:
        base = pack_rows(as_bits(offset, basis.cols))[0]
    low = min(r, chunk_bits)
    table = base[None, :].copy()
    for j in range(low):
        table = np.vstack([table, table ^ basis.words[j]])
    high_rows = basis.words[low:]
    for hi in range(1 << (r - low)):
        shift = np.zeros(nw, dtype=np.uint64)
        for j in range(r - low):
            if hi >> j & 1:
                shift ^= high_rows[j]
        yield table ^ shift if hi else table.copy()


def iterate_affine_space(e0, basis, cap: int = AFFINE_CAP) -> Iterator[np.ndarray]:
    """Yield every vector of ``e0 + span(basis)`` exactly once, in counting order."""
    basis = _coerce(basis)
    if basis.rows > cap:
        raise CapExceededError(f"affine space of dimension {basis.rows} exceeds cap 2^{cap}")
    e0 = as_bits(e0, basis.cols)
    for chunk in span_chunks(basis, e0, cap=cap):
        for row in unpack_rows(chunk, basis.cols):
            yield row
