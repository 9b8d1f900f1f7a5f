"""Real-linear maps on the space of Hermitian matrices.

A map is stored as its real action matrix in the canonical operator basis,
so the adjoint (with respect to the Hilbert-Schmidt inner product) is the
transpose and composition is a matrix product.  Builtin maps are generated
by applying the exact operation to each basis element, which keeps their
action matrices exact (entries 0, +-1, or exact products of U entries).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hermitian as hm
from .errors import DimensionMismatch, InvalidSuperMap

FIXED_TOL = 1e-9
TAG_TOL = 1e-12


@dataclass(eq=False)
class SuperMap:
    dim: int
    action: np.ndarray  # (d^2, d^2) real
    tag: str | None = None

    def __post_init__(self) -> None:
        self.action = np.asarray(self.action, dtype=float)
        n = self.dim * self.dim
        if self.action.shape != (n, n):
            raise InvalidSuperMap(f"action must be {n}x{n}, got {self.action.shape}")
        if not np.all(np.isfinite(self.action)):
            raise InvalidSuperMap("action matrix contains non-finite entries")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"map acts on {self.dim}x{self.dim}, got {x.shape}")
        basis = hm.canonical_basis(self.dim)
        return basis.from_coords(self.action @ basis.to_coords(x))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x)

    def adjoint(self) -> "SuperMap":
        return SuperMap(self.dim, self.action.T.copy(), tag=_adjoint_tag(self.tag))


def _adjoint_tag(tag: str | None) -> str | None:
    if tag in (None,):
        return None
    if tag in ("identity", "transpose") or tag.startswith("partial_transpose"):
        return tag  # self-adjoint builtins
    return None


def compose(f: SuperMap, g: SuperMap) -> SuperMap:
    """The map x -> f(g(x))."""
    if f.dim != g.dim:
        raise DimensionMismatch("composed maps must share a dimension")
    return SuperMap(f.dim, f.action @ g.action)


def identity_map(dim: int) -> SuperMap:
    return SuperMap(dim, np.eye(dim * dim), tag="identity")


def _map_from_matrix_op(dim: int, op, tag: str | None) -> SuperMap:
    basis = hm.canonical_basis(dim)
    cols = [basis.to_coords(op(b)) for b in basis.elements]
    return SuperMap(dim, np.column_stack(cols), tag=tag)


def transpose_map(dim: int) -> SuperMap:
    return _map_from_matrix_op(dim, lambda x: x.T, tag="transpose")


def partial_transpose_map(da: int, db: int) -> SuperMap:
    dim = da * db
    return _map_from_matrix_op(
        dim, lambda x: hm.partial_transpose(x, (da, db)), tag=f"partial_transpose({da},{db})"
    )


def unitary_conjugation_map(u: np.ndarray) -> SuperMap:
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    if u.shape != (dim, dim):
        raise DimensionMismatch("unitary must be square")
    if np.max(np.abs(u @ u.conj().T - np.eye(dim))) > 1e-10:
        raise InvalidSuperMap("matrix is not unitary within 1e-10")
    return _map_from_matrix_op(dim, lambda x: u @ x @ u.conj().T, tag="unitary_conjugation")


def scaling_map(dim: int, factor: float) -> SuperMap:
    """x -> factor * x.  Not trace preserving unless factor == 1."""
    return SuperMap(dim, factor * np.eye(dim * dim))


def is_trace_preserving(f: SuperMap, tol: float = 1e-10) -> bool:
    """Tr f(B) == Tr B for every canonical basis element B.

    In coordinates the trace functional is the vector of basis traces, so
    this is one matrix-vector product.
    """
    basis = hm.canonical_basis(f.dim)
    tr = np.array([float(np.real(np.trace(b))) for b in basis.elements])
    return bool(np.max(np.abs(f.action.T @ tr - tr)) <= tol)


@dataclass(eq=False)
class Subspace:
    """Linear subspace of Hermitian matrices with an orthonormal basis."""

    dim: int
    basis: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.basis) > self.dim * self.dim:
            raise DimensionMismatch("basis larger than the ambient space")
        if self.basis:
            gram = np.array([[hm.hs_inner(a, b) for b in self.basis] for a in self.basis])
            if np.max(np.abs(gram - np.eye(len(self.basis)))) > 1e-10:
                raise InvalidSuperMap("subspace basis is not orthonormal within 1e-10")

    @property
    def size(self) -> int:
        return len(self.basis)

    def project(self, x: np.ndarray) -> np.ndarray:
        """HS-orthogonal projection of x onto the subspace."""
        out = np.zeros_like(x, dtype=complex)
        for b in self.basis:
            out = out + hm.hs_inner(b, x) * b
        return out

    def residual(self, x: np.ndarray) -> float:
        """Distance from x to the subspace."""
        return hm.hs_norm(x - self.project(x))

    def contains(self, x: np.ndarray, tol: float = FIXED_TOL) -> bool:
        return self.residual(x) <= tol * max(1.0, hm.hs_norm(x))


def subspace_from_span(dim: int, matrices: list[np.ndarray], cutoff: float = 1e-9) -> Subspace:
    """Orthonormalize a spanning set of Hermitian matrices into a Subspace."""
    cb = hm.canonical_basis(dim)
    if not matrices:
        return Subspace(dim, ())
    rows = np.stack([cb.to_coords(hm.as_hermitian(m)) for m in matrices])
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    keep = s > cutoff * max(1.0, s[0] if len(s) else 1.0)
    return Subspace(dim, tuple(cb.from_coords(v) for v in vt[keep]))


def common_fixed_subspace(
    maps: list[SuperMap], dim: int | None = None, cutoff: float = 1e-9
) -> Subspace:
    """Orthonormal basis of the joint fixed space of the adjoints.

    Computed as the null space of the stacked coordinate matrices
    (action^T - I), with a relative singular-value cutoff.  An empty map
    list returns the full space.
    """
    if not maps:
        if dim is None:
            raise DimensionMismatch("dimension required for an empty map list")
        cb = hm.canonical_basis(dim)
        return Subspace(dim, tuple(cb.elements))
    d = maps[0].dim
    if dim is not None and dim != d:
        raise DimensionMismatch("dim argument disagrees with the maps")
    if any(f.dim != d for f in maps):
        raise DimensionMismatch("all maps must share a dimension")
    n = d * d
    stacked = np.vstack([f.action.T - np.eye(n) for f in maps])
    u, s, vt = np.linalg.svd(stacked)
    scale = max(1.0, s[0] if len(s) else 1.0)
    rank = int(np.sum(s > cutoff * scale))
    null_rows = vt[rank:]
    cb = hm.canonical_basis(d)
    return Subspace(d, tuple(cb.from_coords(v) for v in null_rows))
