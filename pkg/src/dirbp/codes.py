"""CSS code construction, validation, distances and alist I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import gf2
from .gf2 import BinaryMatrix

DISTANCE_CAP = 24


class CodeError(ValueError):
    pass


class CommutationError(CodeError):
    def __init__(self, row_x: int, row_z: int):
        super().__init__(f"H_X row {row_x} and H_Z row {row_z} overlap on an odd number of qubits")
        self.row_x = row_x
        self.row_z = row_z


class CycleError(CodeError):
    pass


class AlistError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CssCode:
    h_x: BinaryMatrix
    h_z: BinaryMatrix
    name: str = "css"
    coords: Optional[tuple[tuple[int, int], ...]] = None
    rank_x: int = field(init=False)
    rank_z: int = field(init=False)

    def __post_init__(self):
        if self.h_x.cols != self.h_z.cols:
            raise CodeError(f"H_X has {self.h_x.cols} columns but H_Z has {self.h_z.cols}")
        bad = np.argwhere(self.h_x.mul_transpose(self.h_z))
        if bad.size:
            raise CommutationError(int(bad[0, 0]), int(bad[0, 1]))
        if self.coords is not None:
            coords = tuple((int(x), int(y)) for x, y in self.coords)
            if len(coords) != self.n:
                raise CodeError(f"{len(coords)} coordinates supplied for {self.n} qubits")
            object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "rank_x", gf2.rank(self.h_x))
        object.__setattr__(self, "rank_z", gf2.rank(self.h_z))

    @property
    def n(self) -> int:
        return self.h_x.cols

    @property
    def k(self) -> int:
        return self.n - self.rank_x - self.rank_z

    @property
    def rate(self) -> float:
        return self.k / self.n

    def check_matrix(self, side: str) -> BinaryMatrix:
        """Matrix whose syndrome detects errors of the given side."""
        return self.h_z if _side(side) == "X" else self.h_x

    def stabilizer_matrix(self, side: str) -> BinaryMatrix:
        """Generators of the stabilizers that leave ``side`` errors invisible."""
        return self.h_x if _side(side) == "X" else self.h_z

    def coordinate_array(self) -> np.ndarray:
        if self.coords is None:
            raise CodeError(f"code {self.name!r} has no qubit coordinates")
        return np.array(self.coords, dtype=float)

    def __repr__(self) -> str:
        return f"CssCode({self.name!r}, n={self.n}, k={self.k})"


def _side(side: str) -> str:
    s = side.upper().split("-")[0]
    if s not in ("X", "Z"):
        raise ValueError(f"side must be 'X' or 'Z', got {side!r}")
    return s


def new_css(h_x, h_z, coords=None, name: str = "css") -> CssCode:
    """Validate a pair of check matrices and build the code."""
    h_x = h_x if isinstance(h_x, BinaryMatrix) else BinaryMatrix.from_dense(h_x)
    h_z = h_z if isinstance(h_z, BinaryMatrix) else BinaryMatrix.from_dense(h_z)
    return CssCode(h_x, h_z, name=name, coords=coords)


def toric_index(L: int, x: int, y: int, vertical: bool) -> int:
    return (L * L if vertical else 0) + (y % L) * L + (x % L)


def toric(L: int) -> CssCode:
    """The [[2L^2, 2, L]] toric code.

    Horizontal edge ``(x, y)`` is qubit ``yL + x`` at coordinate ``(2x, 2y)``;
    vertical edge ``(x, y)`` is qubit ``L^2 + yL + x`` at ``(2x+1, 2y+1)``.
    X checks sit at the odd/even sites ``(2x+1, 2y)`` and Z checks at the
    even/odd sites ``(2x, 2y+1)`` of the same doubled lattice, each acting on
    its four nearest qubits (indices modulo L).
    """
    if L < 2:
        raise CodeError("toric code needs L >= 2")
    n = 2 * L * L
    h_x = np.zeros((L * L, n), dtype=np.uint8)
    h_z = np.zeros((L * L, n), dtype=np.uint8)
    for y in range(L):
        for x in range(L):
            row = y * L + x
            for q in (
                toric_index(L, x, y, False),
                toric_index(L, x + 1, y, False),
                toric_index(L, x, y, True),
                toric_index(L, x, y - 1, True),
            ):
                h_x[row, q] = 1
            for q in (
                toric_index(L, x, y, False),
                toric_index(L, x, y + 1, False),
                toric_index(L, x, y, True),
                toric_index(L, x - 1, y, True),
            ):
                h_z[row, q] = 1
    coords = [(2 * x, 2 * y) for y in range(L) for x in range(L)]
    coords += [(2 * x + 1, 2 * y + 1) for y in range(L) for x in range(L)]
    return new_css(h_x, h_z, coords=coords, name=f"toric{L}")


def _tanner_has_cycle(h: BinaryMatrix) -> bool:
    m, n = h.shape
    parent = list(range(n + m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for j, i in zip(*h.nonzero()):
        a, b = find(int(i)), find(n + int(j))
        if a == b:
            return True
        parent[a] = b
    return False


def tree_code(h, name: str = "tree") -> CssCode:
    """Single-sided code whose Z checks are ``h``; ``h`` must have an acyclic Tanner graph."""
    h = h if isinstance(h, BinaryMatrix) else BinaryMatrix.from_dense(h)
    if _tanner_has_cycle(h):
        raise CycleError("Tanner graph of the check matrix contains a cycle")
    return CssCode(BinaryMatrix.zeros(0, h.cols), h, name=name)


def random_forest(n: int, m: int, rng: np.random.Generator, attach: float = 0.85) -> BinaryMatrix:
    """Random check matrix with acyclic Tanner graph.

    Nodes are added one by one; each attaches by a single edge to an existing
    node of the other kind (probability ``attach``) or starts a new tree, so no
    cycle can form. Checks left without neighbours are dropped.
    """
    kinds = ["v"] * n + ["c"] * m
    rng.shuffle(kinds)
    seen: dict[str, list[int]] = {"v": [], "c": []}
    counters = {"v": 0, "c": 0}
    edges = []
    for kind in kinds:
        idx = counters[kind]
        counters[kind] += 1
        other = seen["c" if kind == "v" else "v"]
        if other and rng.random() < attach:
            peer = other[int(rng.integers(len(other)))]
            edges.append((idx, peer) if kind == "c" else (peer, idx))
        seen[kind].append(idx)
    dense = np.zeros((m, n), dtype=np.uint8)
    for j, i in edges:
        dense[j, i] = 1
    dense = dense[dense.any(axis=1)]
    return BinaryMatrix.from_dense(dense, cols=n)


def random_css(n: int, rng: np.random.Generator, m_x: Optional[int] = None, m_z: Optional[int] = None,
               density: float = 0.5, min_k: int = 1) -> CssCode:
    """Random small CSS code: random H_X, then H_Z rows drawn from ker(H_X)."""
    for _ in range(1000):
        mx = m_x if m_x is not None else int(rng.integers(1, max(2, n // 2)))
        mz = m_z if m_z is not None else int(rng.integers(1, max(2, n // 2)))
        h_x = (rng.random((mx, n)) < density).astype(np.uint8)
        ker = gf2.nullspace_basis(h_x).to_dense()
        if ker.shape[0] == 0:
            continue
        coeffs = rng.integers(0, 2, (mz, ker.shape[0]))
        h_z = (coeffs @ ker % 2).astype(np.uint8)
        code = new_css(h_x, h_z, name=f"rand{n}")
        if code.k >= min_k and code.rank_x > 0 and code.rank_z > 0:
            return code
    raise RuntimeError("could not draw a random CSS code with the requested parameters")


@dataclass(frozen=True)
class CodeDistances:
    d: Optional[int]
    d_x: Optional[int]
    d_z: Optional[int]
    d_s: Optional[int]


def _min_logical_weight(kernel_of: BinaryMatrix, modulo: BinaryMatrix, cap: int) -> Optional[int]:
    ker = gf2.nullspace_basis(kernel_of)
    if ker.rows > cap:
        raise gf2.CapExceededError(f"kernel dimension {ker.rows} exceeds distance cap {cap}")
    reducer = gf2.RowspaceReducer(modulo)
    best = None
    for chunk in gf2.span_chunks(ker, cap=cap):
        logical = ~reducer.contains_packed(chunk)
        if logical.any():
            w = int(np.bitwise_count(chunk[logical]).sum(axis=1).min())
            best = w if best is None else min(best, w)
    return best


def _min_span_weight(h: BinaryMatrix, cap: int) -> Optional[int]:
    basis = gf2.RowspaceReducer(h).basis()
    if basis.rows == 0:
        return None
    if basis.rows > cap:
        raise gf2.CapExceededError(f"stabilizer dimension {basis.rows} exceeds distance cap {cap}")
    best = None
    for chunk in gf2.span_chunks(basis, cap=cap):
        wts = np.bitwise_count(chunk).sum(axis=1)
        wts = wts[wts > 0]
        if wts.size:
            w = int(wts.min())
            best = w if best is None else min(best, w)
    return best


def distances(code: CssCode, cap: int = DISTANCE_CAP) -> CodeDistances:
    """Exhaustive X, Z and stabilizer distances.

    ``cap`` bounds the dimension of every enumerated subspace (kernels and
    stabilizer rowspaces), so the search touches at most ``2**cap`` vectors
    per subspace.
    """
    d_x = _min_logical_weight(code.h_z, code.h_x, cap)
    d_z = _min_logical_weight(code.h_x, code.h_z, cap)
    ds = [w for w in (_min_span_weight(code.h_x, cap), _min_span_weight(code.h_z, cap)) if w is not None]
    both = [w for w in (d_x, d_z) if w is not None]
    return CodeDistances(
        d=min(both) if both else None,
        d_x=d_x,
        d_z=d_z,
        d_s=min(ds) if ds else None,
    )


def save_alist(M: BinaryMatrix, path) -> None:
    dense = M.to_dense()
    m, n = dense.shape
    col_nb = [np.flatnonzero(dense[:, i]) + 1 for i in range(n)]
    row_nb = [np.flatnonzero(dense[j]) + 1 for j in range(m)]
    col_deg = [len(c) for c in col_nb]
    row_deg = [len(r) for r in row_nb]
    max_c = max(col_deg, default=0)
    max_r = max(row_deg, default=0)

    def padded(nbrs, width):
        return " ".join(str(int(v)) for v in list(nbrs) + [0] * (width - len(nbrs)))

    lines = [f"{n} {m}", f"{max_c} {max_r}", " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    lines += [padded(c, max_c) for c in col_nb]
    lines += [padded(r, max_r) for r in row_nb]
    Path(path).write_text("\n".join(lines) + "\n")


def load_alist(path) -> BinaryMatrix:
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        rows = [[int(t) for t in ln] for ln in lines]
    except ValueError as exc:
        raise AlistError(f"non-integer token in {path}") from exc
    if len(rows) < 4 or len(rows[0]) != 2 or len(rows[1]) != 2:
        raise AlistError("malformed alist header")
    n, m = rows[0]
    max_c, max_r = rows[1]
    col_deg, row_deg = rows[2], rows[3]
    if len(col_deg) != n or len(row_deg) != m:
        raise AlistError("degree list lengths do not match n and m")
    if sum(col_deg) != sum(row_deg):
        raise AlistError("column degree sum differs from row degree sum")
    if max(col_deg, default=0) > max_c or max(row_deg, default=0) > max_r:
        raise AlistError("degree exceeds declared maximum")
    if len(rows) < 4 + n + m:
        raise AlistError("truncated alist: missing neighbour lists")
    dense = np.zeros((m, n), dtype=np.uint8)
    for i in range(n):
        nbrs = [v for v in rows[4 + i] if v != 0]
        if len(nbrs) != col_deg[i]:
            raise AlistError(f"column {i + 1} lists {len(nbrs)} checks, degree says {col_deg[i]}")
        for v in nbrs:
            if not 1 <= v <= m:
                raise AlistError(f"check index {v} out of range in column {i + 1}")
            dense[v - 1, i] = 1
    for j in range(m):
        nbrs = [v for v in rows[4 + n + j] if v != 0]
        if len(nbrs) != row_deg[j]:
            raise AlistError(f"row {j + 1} lists {len(nbrs)} qubits, degree says {row_deg[j]}")
        for v in nbrs:
            if not 1 <= v <= n:
                raise AlistError(f"qubit index {v} out of range in row {j + 1}")
            if not dense[j, v - 1]:
                raise AlistError(f"row {j + 1} and column {v} neighbour lists disagree")
    if int(dense.sum()) != sum(col_deg):
        raise AlistError("duplicate neighbour entries")
    return BinaryMatrix.from_dense(dense, cols=n)


def load_coords(path) -> list[tuple[int, int]]:
    """Read an ``x y`` integer pair per line."""
    coords = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise CodeError(f"{path}:{lineno}: expected 'x y'")
        coords.append((int(parts[0]), int(parts[1])))
    return coords


def save_coords(coords: Sequence[tuple[int, int]], path) -> None:
    Path(path).write_text("".join(f"{x} {y}\n" for x, y in coords))
