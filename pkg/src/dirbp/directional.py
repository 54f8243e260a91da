"""Directional edge annotations, per-qubit weights and weight fields."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .codes import CodeError, CssCode


@dataclass(frozen=True, eq=False)
class EdgeWeights:
    """Nonnegative weights on the Tanner edges of H_X and H_Z.

    ``d_x`` has the shape of ``H_X`` (checks by qubits) and must vanish off
    its support; likewise ``d_z``.
    """

    d_x: np.ndarray
    d_z: np.ndarray

    @classmethod
    def for_code(cls, code: CssCode, d_x, d_z) -> "EdgeWeights":
        d_x = np.asarray(d_x, dtype=float).reshape(code.h_x.shape)
        d_z = np.asarray(d_z, dtype=float).reshape(code.h_z.shape)
        if (d_x < 0).any() or (d_z < 0).any():
            raise ValueError("edge weights must be nonnegative")
        if (d_x[code.h_x.to_dense() == 0] != 0).any() or (d_z[code.h_z.to_dense() == 0] != 0).any():
            raise ValueError("edge weights must be supported on Tanner edges")
        return cls(d_x, d_z)

    @property
    def delta_max(self) -> float:
        return float(self.d_x.max(initial=0.0))


def per_qubit_from_edges(e: EdgeWeights) -> np.ndarray:
    return e.d_x.sum(axis=0) + e.d_z.sum(axis=0)


def directional_cost(w, E) -> float:
    return float(np.dot(np.asarray(w, dtype=float), np.asarray(E, dtype=float)))


def edge_cost(e: EdgeWeights, E) -> float:
    """Sum of edge weights over all edges incident to the support of ``E``."""
    support = np.flatnonzero(np.asarray(E))
    return float(e.d_x[:, support].sum() + e.d_z[:, support].sum())


def standardize(c: Iterable[float]) -> np.ndarray:
    """Zero mean, unit sample variance (n-1 divisor); constant input maps to zeros."""
    c = np.asarray(list(c) if not isinstance(c, np.ndarray) else c, dtype=float)
    if c.size < 2:
        raise ValueError("standardize needs at least two values")
    sd = c.std(ddof=1)
    if sd == 0 or np.ptp(c) == 0:
        return np.zeros_like(c)
    return (c - c.mean()) / sd


def orientation_field(code: CssCode, axis: str = "x") -> np.ndarray:
    xy = code.coordinate_array()
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    return standardize(xy[:, 0 if axis == "x" else 1])


def strip_field(code: CssCode, favored_cols, w0: float) -> np.ndarray:
    if w0 <= 0:
        raise ValueError("strip contrast w0 must be positive")
    xs = code.coordinate_array()[:, 0].astype(int)
    favored = np.isin(xs, np.fromiter(favored_cols, dtype=int))
    return np.where(favored, float(w0), -float(w0))


def radial_field(code: CssCode, center: tuple[float, float]) -> np.ndarray:
    xy = code.coordinate_array()
    r = np.hypot(xy[:, 0] - center[0], xy[:, 1] - center[1])
    return standardize(r)


def edges_from_qubit(code: CssCode, w_raw, scheme: str = "uniform-split") -> EdgeWeights:
    """Spread per-qubit weights back onto incident Tanner edges."""
    w_raw = np.asarray(w_raw, dtype=float)
    if w_raw.shape != (code.n,):
        raise ValueError(f"expected {code.n} weights")
    if (w_raw < 0).any():
        raise ValueError("qubit weights must be nonnegative")
    hx = code.h_x.to_dense().astype(float)
    hz = code.h_z.to_dense().astype(float)
    if scheme == "replicate":
        return EdgeWeights(hx * w_raw, hz * w_raw)
    if scheme != "uniform-split":
        raise ValueError(f"unknown scheme {scheme!r}")
    deg = hx.sum(axis=0) + hz.sum(axis=0)
    isolated = (deg == 0) & (w_raw > 0)
    if isolated.any():
        raise CodeError(f"qubit {int(np.flatnonzero(isolated)[0])} has no checks to carry its weight")
    share = np.divide(w_raw, deg, out=np.zeros_like(w_raw), where=deg > 0)
    return EdgeWeights(hx * share, hz * share)


def load_weights(path, n: int | None = None) -> np.ndarray:
    w = np.array([float(t) for t in Path(path).read_text().split()], dtype=float)
    if n is not None and w.size != n:
        raise ValueError(f"{path}: expected {n} weights, found {w.size}")
    return w


def save_weights(w, path) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.asarray(w, dtype=float)))
