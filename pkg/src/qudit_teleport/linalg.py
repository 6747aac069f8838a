"""Dense complex linear algebra used by the protocol code.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Public index arguments are 1-based; storage is 0-based.
"""
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInputError, DimensionError

UNITARY_TOL = 1e-10
IDENTITY_TOL = 1e-12


def as_complex(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise DimensionError("entries must be finite")
    return arr


def tensor(u, v) -> np.ndarray:
    """Kronecker product of two vectors or two matrices.

    The composite index is ``(i_u - 1) * dim_v + i_v`` (1-based), i.e. the
    first factor varies slowest.
    """
    u, v = as_complex(u), as_complex(v)
    if u.ndim != v.ndim or u.ndim not in (1, 2):
        raise DimensionError("tensor() needs two vectors or two matrices")
    return np.kron(u, v)


def adjoint(m) -> np.ndarray:
    return as_complex(m).conj().T


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    """True iff ``max|M^dagger M - I| <= tol``."""
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"unitarity needs a square matrix, got shape {m.shape}")
    err = m.conj().T @ m - np.eye(m.shape[0])
    return bool(np.max(np.abs(err), initial=0.0) <= tol)


def cyclic_shift_power(n: int, p: int) -> np.ndarray:
    """``Pi**p`` for the cyclic shift ``Pi e_j = e_{j+1}`` on ``C^n``.

    ``Pi`` has a 1 in row 1, column n and ones on the subdiagonal.
    Negative ``p`` gives inverse powers.
    """
    if n < 1:
        raise DimensionError("shift dimension must be >= 1")
    return np.roll(np.eye(n, dtype=np.complex128), p % n, axis=0)


def index_mod(x: int, n: int) -> int:
    """Wrap a 1-based index into ``1..n``."""
    if n < 1:
        raise DimensionError("modulus must be >= 1")
    return (x - 1) % n + 1


def embed(block, dim: int) -> np.ndarray:
    """Place a square block in the top-left corner of ``I_dim``."""
    block = as_complex(block)
    k = block.shape[0]
    if k > dim:
        raise DimensionError(f"block of size {k} does not fit in dimension {dim}")
    out = np.eye(dim, dtype=np.complex128)
    out[:k, :k] = block
    return out


class SchmidtResult(NamedTuple):
    """``a = left[:, :r] @ diag(sqrt(lambdas)) @ right[:, :r]^dagger``.

    ``lambdas`` has ``r = min(a.shape)`` entries, descending. ``left`` and
    ``right`` are full square unitaries.
    """

    lambdas: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        r = len(self.lambdas)
        return (self.left[:, :r] * np.sqrt(self.lambdas)) @ self.right[:, :r].conj().T


def schmidt(a) -> SchmidtResult:
    """Schmidt decomposition of a bipartite amplitude matrix via SVD."""
    a = as_complex(a)
    if a.ndim != 2:
        raise DimensionError("schmidt() needs a matrix")
    if not np.any(a):
        raise DegenerateInputError("cannot Schmidt-decompose the zero matrix")
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    return SchmidtResult(lambdas=s**2, left=u, right=vh.conj().T)


def complete_unitary(columns, tol: float = 1e-9) -> np.ndarray:
    """Extend orthonormal columns to a square unitary.

    Missing columns are found by Gram-Schmidt over the computational basis
    in ascending order, so the completion is deterministic. When the given
    columns are themselves basis vectors the result is a permutation.
    """
    cols = as_complex(columns)
    dim, m = cols.shape
    if m > dim:
        raise DimensionError(f"{m} columns cannot be orthonormal in dimension {dim}")
    gram = cols.conj().T @ cols
    if np.max(np.abs(gram - np.eye(m)), initial=0.0) > 1e-8:
        raise DimensionError("columns are not orthonormal")
    basis = [cols[:, j] for j in range(m)]
    for e in np.eye(dim, dtype=np.complex128):
        if len(basis) == dim:
            break
        w = e.copy()
        # two passes keep the result orthogonal to working precision
        for _ in range(2):
            for q in basis:
                w -= (q.conj() @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol:
            basis.append(w / nrm)
    return np.column_stack(basis)
