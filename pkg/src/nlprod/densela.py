"""Small dense linear-algebra kernel.

Complex matrices are plain ``numpy`` arrays validated by :func:`as_complex_matrix`.
Real homogeneous systems ``A x = 0`` are carried by :class:`RealLinearSystem`
and solved by :func:`nullspace` (SVD based).  :func:`rank_oracle` computes the
numerical rank by Gaussian row elimination with partial pivoting, so the two
routes can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


def as_complex_matrix(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Return ``entries`` as a finite 2-D complex array.

    ``entries`` may be nested sequences or a flat row-major sequence when
    ``rows`` and ``cols`` are given.
    """
    arr = np.asarray(entries, dtype=complex)
    if rows is not None or cols is not None:
        if rows is None or cols is None:
            raise ValueError("rows and cols must be given together")
        if arr.size != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {arr.size}")
        arr = arr.reshape(rows, cols)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def is_hermitian(a: np.ndarray, atol: float = 1e-12) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.allclose(a, adjoint(a), rtol=0, atol=atol))


def is_projector(a: np.ndarray, atol: float = 1e-12) -> bool:
    a = np.asarray(a)
    return is_hermitian(a, atol) and bool(np.allclose(a @ a, a, rtol=0, atol=atol))


def gram(vectors: np.ndarray) -> np.ndarray:
    """Gram matrix ``G[j, k] = <v_j, v_k>`` of the rows of ``vectors``."""
    v = np.asarray(vectors)
    return np.conj(v) @ v.T


@dataclass(frozen=True)
class RealLinearSystem:
    """Homogeneous real system ``rows @ x = 0`` in ``width`` unknowns."""

    rows: np.ndarray
    width: int

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, self.width)
        if rows.ndim != 2 or rows.shape[1] != self.width:
            raise ValueError(f"rows must have shape (m, {self.width}), got {rows.shape}")
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]], width: int) -> "RealLinearSystem":
        rows = [np.asarray(r, dtype=float) for r in rows]
        if any(r.shape != (width,) for r in rows):
            raise ValueError("all rows must share the system width")
        data = np.vstack(rows) if rows else np.zeros((0, width))
        return cls(data, width)

    @classmethod
    def from_complex_rows(cls, rows: Iterable[Sequence[complex]], width: int) -> "RealLinearSystem":
        """Split complex equations over real unknowns into real and imaginary rows."""
        rows = [np.asarray(r, dtype=complex) for r in rows]
        real = []
        for r in rows:
            real.append(r.real)
            real.append(r.imag)
        return cls.from_rows(real, width)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]


def _validate(system: RealLinearSystem, tol: float) -> np.ndarray:
    if system.width < 1:
        raise ValueError("system width must be at least 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = system.rows
    if not np.all(np.isfinite(a)):
        raise ValueError("system contains non-finite entries")
    return a


def _canonical_order(basis: np.ndarray) -> np.ndarray:
    """Sort columns by the index of their largest component, made positive."""
    cols = []
    for v in basis.T:
        idx = int(np.argmax(np.abs(v)))
        if v[idx] < 0:
            v = -v
        cols.append((idx, v))
    cols.sort(key=lambda item: item[0])
    if not cols:
        return np.zeros((basis.shape[0], 0))
    return np.column_stack([v for _, v in cols])


def nullspace(system: RealLinearSystem, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``{x : A x = 0}``.

    Singular values not exceeding ``tol * s_max`` (``tol`` when ``A`` is zero)
    count as null.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(width, k)``; column ``j`` is the ``j``-th basis vector.
    """
    a = _validate(system, tol)
    width = system.width
    if a.shape[0] == 0:
        return np.eye(width)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * smax))
    return _canonical_order(vh[rank:].T)


def rank_oracle(system: RealLinearSystem, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank by row elimination with partial pivoting.

    A pivot counts when its magnitude exceeds ``tol`` times the largest row
    norm of the original system (or ``tol`` for a zero system).
    """
    a = _validate(system, tol).copy()
    m, n = a.shape
    if m == 0:
        return 0
    scale = float(np.max(np.linalg.norm(a, axis=1)))
    threshold = tol * (scale if scale > 0 else 1.0)
    rank = 0
    for col in range(n):
        if rank == m:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= threshold:
            continue
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        factors = a[rank + 1 :, col] / a[rank, col]
        a[rank + 1 :, col:] -= np.outer(factors, a[rank, col:])
        rank += 1
    return rank


def realify(matrix: np.ndarray) -> np.ndarray:
    """Real ``2m x 2n`` embedding ``[[Re, -Im], [Im, Re]]`` of a complex matrix."""
    m = np.asarray(matrix, dtype=complex)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def complex_rank(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Rank of a complex matrix through its real embedding (which doubles rank)."""
    m = as_complex_matrix(matrix)
    block = realify(m)
    return rank_oracle(RealLinearSystem(block, block.shape[1]), tol) // 2
