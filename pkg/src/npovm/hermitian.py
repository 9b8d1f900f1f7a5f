"""Dense complex Hermitian linear algebra.

Matrices are carried as numpy arrays; the constructors here validate and
symmetrize, and every other module routes its matrix handling through this
one so tolerances live in a single place.  Coordinates refer to the fixed
orthonormal operator basis built by :func:`canonical_basis`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, InvalidState, NotHermitian

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-12


def as_hermitian(entries, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate and symmetrize a Hermitian matrix.

    Asymmetry up to `tol` (absolute, relative to the matrix scale) is
    absorbed by averaging with the conjugate transpose; anything larger is
    rejected rather than silently repaired.
    """
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise DimensionMismatch("dimension must be at least 1")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > tol * scale:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds tolerance {tol * scale:.3e}")
    return (a + a.conj().T) / 2.0


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product Tr(a b), real for Hermitian arguments."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.real(np.sum(a * b.T)))


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def eig_extrema(a: np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalues of a Hermitian matrix."""
    vals = np.linalg.eigvalsh(a)
    return float(vals[0]), float(vals[-1])


def min_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(a)[0])


def is_psd(a: np.ndarray, tol: float = PSD_TOL) -> bool:
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    return min_eig(a) >= -tol


def as_density(entries, psd_tol: float = PSD_TOL, trace_tol: float = TRACE_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD within psd_tol, trace 1."""
    rho = as_hermitian(entries)
    low = min_eig(rho)
    if low < -psd_tol:
        raise InvalidState(f"smallest eigenvalue {low:.3e} below -{psd_tol:.1e}")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > trace_tol:
        raise InvalidState(f"trace {tr!r} differs from 1 by more than {trace_tol:.1e}")
    return rho


def partial_transpose(a: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Transpose the second tensor factor of a bipartite matrix.

    `dims = (dA, dB)` with dA*dB equal to the matrix dimension; each dB x dB
    block is transposed in place.  Involutive, trace- and Hermiticity-preserving.
    """
    da, db = dims
    n = a.shape[0]
    if a.shape[0] != a.shape[1] or da * db != n:
        raise DimensionMismatch(f"cannot factor dimension {a.shape} as {da}x{db}")
    blocks = a.reshape(da, db, da, db)
    return np.ascontiguousarray(blocks.transpose(0, 3, 2, 1).reshape(n, n))


@dataclass(frozen=True, eq=False)
class CanonicalBasis:
    """Orthonormal basis of the real space of d x d Hermitian matrices.

    Order: the d diagonal projectors E_j first, then for each pair j < k
    (lexicographic) the symmetric element (E_jk + E_kj)/sqrt(2) followed by
    the antisymmetric element i(E_jk - E_kj)/sqrt(2).
    """

    dim: int
    elements: tuple[np.ndarray, ...]
    _stack: np.ndarray  # (d^2, d, d) view of elements for fast contractions

    def to_coords(self, a: np.ndarray) -> np.ndarray:
        """Real coordinate vector of a Hermitian matrix in this basis."""
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected {(self.dim, self.dim)}, got {a.shape}")
        return np.real(np.einsum("aij,ji->a", self._stack, a))

    def from_coords(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim * self.dim,):
            raise DimensionMismatch(f"expected {self.dim * self.dim} coordinates, got {x.shape}")
        m = np.einsum("a,aij->ij", x, self._stack)
        return (m + m.conj().T) / 2.0


@lru_cache(maxsize=32)
def canonical_basis(dim: int) -> CanonicalBasis:
    if dim < 1:
        raise DimensionMismatch("dimension must be at least 1")
    elements: list[np.ndarray] = []
    for j in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[j, j] = 1.0
        elements.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = inv_sqrt2
            sym[k, j] = inv_sqrt2
            elements.append(sym)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[j, k] = 1j * inv_sqrt2
            anti[k, j] = -1j * inv_sqrt2
            elements.append(anti)
    stack = np.stack(elements)
    return CanonicalBasis(dim=dim, elements=tuple(elements), _stack=stack)
