"""Ambiguous state discrimination with post-selection.

Linearly independent pure states are discriminated perfectly, conditional on
accepting, by weighted projectors onto their dual basis plus one ambiguous
outcome.  When the weight is uniform the post-selected statistics are
constant on the span of the target states and the measurement inverts to a
family that discriminates the (non-orthogonal) states without any
post-selection.  Group orbits supply natural uniform-weight instances:
commutative groups via character amplitudes, general finite groups via
per-irrep multiplicity blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hermitian as hm
from .bridge import InversionConditionReport, invert_postselection
from .errors import (
    DegenerateC0,
    DimensionMismatch,
    InvalidState,
    InversionConditionError,
    NearSingularFamily,
    OperatorInequalityViolated,
    SingularMultiplicityBlock,
)
from .measurement import Measurement
from .supermap import Subspace, subspace_from_span

BIORTH_TOL = 1e-9
AMBIGUOUS_LABEL = "ambiguous"


@dataclass(eq=False)
class PureStateFamily:
    """d linearly independent unit vectors on a d-dimensional space."""

    dim: int
    states: np.ndarray  # (d, d) complex, column j is |psi_j>

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"need {self.dim} vectors of dimension {self.dim}, got {self.states.shape}"
            )
        norms = np.linalg.norm(self.states, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise InvalidState("family vectors must be unit norm within 1e-12")
        smin = np.linalg.svd(self.states, compute_uv=False)[-1]
        if smin <= 1e-9:
            raise NearSingularFamily(f"smallest singular value {smin:.3e} <= 1e-9")

    @classmethod
    def from_vectors(cls, vectors: list[np.ndarray]) -> "PureStateFamily":
        cols = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        return cls(dim=cols.shape[0], states=cols)

    def vector(self, j: int) -> np.ndarray:
        return self.states[:, j]

    def projector(self, j: int) -> np.ndarray:
        v = self.vector(j)
        return np.outer(v, v.conj())


@dataclass(eq=False)
class DualBasis:
    """Vectors biorthogonal to a family: <phi_j|psi_k> = delta_jk."""

    dim: int
    vectors: np.ndarray  # (d, d) complex, column j is |phi_j>

    def vector(self, j: int) -> np.ndarray:
        return self.vectors[:, j]

    def frame_operator(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


def dual_basis(family: PureStateFamily) -> DualBasis:
    """Invert the family matrix: the dual vectors are the conjugated rows."""
    inv = np.linalg.inv(family.states)
    dual = DualBasis(dim=family.dim, vectors=inv.conj().T)
    resid = np.max(np.abs(dual.vectors.conj().T @ family.states - np.eye(family.dim)))
    if resid > BIORTH_TOL:
        raise NearSingularFamily(f"biorthogonality residual {resid:.3e} > {BIORTH_TOL:.1e}")
    return dual


def max_uniform_c(dual: DualBasis | np.ndarray) -> float:
    """Largest uniform coefficient keeping the ambiguous effect PSD:
    the inverse of the largest eigenvalue of the dual frame operator."""
    frame = dual.frame_operator() if isinstance(dual, DualBasis) else (
        np.asarray(dual) @ np.asarray(dual).conj().T
    )
    return 1.0 / hm.eig_extrema(frame)[1]


def asd_measurement(
    dual: DualBasis | np.ndarray, c: list[float] | np.ndarray
) -> Measurement:
    """POVM {c_j |phi_j><phi_j|} plus the complementary ambiguous effect."""
    vectors = dual.vectors if isinstance(dual, DualBasis) else np.asarray(dual, dtype=complex)
    d = vectors.shape[0]
    c = np.asarray(c, dtype=float)
    if c.shape != (vectors.shape[1],):
        raise DimensionMismatch("need one coefficient per dual vector")
    if np.min(c) <= 0:
        raise InvalidState("coefficients must be positive")
    total = (vectors * c) @ vectors.conj().T
    ambiguous = np.eye(d) - total
    low = hm.min_eig(ambiguous)
    if low < -1e-10:
        raise OperatorInequalityViolated(
            f"weighted dual projectors exceed the identity by {-low:.3e}"
        )
    pairs = [
        (str(j), c[j] * np.outer(vectors[:, j], vectors[:, j].conj()))
        for j in range(vectors.shape[1])
    ]
    pairs.append((AMBIGUOUS_LABEL, ambiguous))
    return Measurement.create(pairs)


@dataclass(eq=False)
class CommutativeGroupRep:
    """Commutative group given by its character table (rows = irreps,
    columns = elements, column 0 the identity) plus input amplitudes."""

    order: int
    characters: np.ndarray  # (k, k) complex, unit modulus
    amplitudes: np.ndarray  # (k,) complex, (1/k) sum |f_l|^2 = 1

    def __post_init__(self) -> None:
        k = self.order
        self.characters = np.asarray(self.characters, dtype=complex)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.characters.shape != (k, k) or self.amplitudes.shape != (k,):
            raise DimensionMismatch("character table must be k x k with k amplitudes")
        if np.max(np.abs(np.abs(self.characters) - 1.0)) > 1e-9:
            raise InvalidState("characters must have unit modulus")
        if np.max(np.abs(self.characters[:, 0] - 1.0)) > 1e-9:
            raise InvalidState("column 0 must be the identity element")
        norm = float(np.sum(np.abs(self.amplitudes) ** 2)) / k
        if abs(norm - 1.0) > 1e-10:
            raise InvalidState(f"(1/k) sum |f_l|^2 = {norm!r}, expected 1")
        # rows must be closed under pointwise multiplication (group of characters)
        for a in range(k):
            for b in range(k):
                prod = self.characters[a] * self.characters[b]
                if min(np.max(np.abs(prod - row)) for row in self.characters) > 1e-9:
                    raise InvalidState("character rows are not closed under products")


@dataclass(eq=False)
class BlockGroupRep:
    """Finite group as a direct sum of irreps with multiplicity blocks.

    Per irrep l: unitary matrices f_l(g) for every element (index 0 the
    identity) and an invertible multiplicity matrix F_l.  The multiplication
    table indexes elements so the homomorphism property can be validated.
    """

    order: int
    mult_table: np.ndarray  # (|G|, |G|) int, table[g, h] = index of g*h
    irreps: list[np.ndarray]  # each (|G|, d_l, d_l) complex unitary
    blocks: list[np.ndarray]  # each (d_l, d_l) complex invertible

    def __post_init__(self) -> None:
        g = self.order
        self.mult_table = np.asarray(self.mult_table, dtype=int)
        self.irreps = [np.asarray(r, dtype=complex) for r in self.irreps]
        self.blocks = [np.asarray(b, dtype=complex) for b in self.blocks]
        if self.mult_table.shape != (g, g):
            raise DimensionMismatch("multiplication table must be |G| x |G|")
        dims = [r.shape[1] for r in self.irreps]
        if any(r.shape != (g, dl, dl) for r, dl in zip(self.irreps, dims)):
            raise DimensionMismatch("irrep arrays must be (|G|, d_l, d_l)")
        if sum(dl * dl for dl in dims) != g:
            raise InvalidState("sum of squared irrep dimensions must equal |G|")
        if any(b.shape != (dl, dl) for b, dl in zip(self.blocks, dims)):
            raise DimensionMismatch("one multiplicity block per irrep, same shape")
        for b in self.blocks:
            if np.linalg.svd(b, compute_uv=False)[-1] <= 1e-9:
                raise SingularMultiplicityBlock("multiplicity block is not invertible")
        weights = self.weights
        norm = sum(
            w * float(np.real(np.trace(b @ b.conj().T))) for w, b in zip(weights, self.blocks)
        )
        if abs(norm - 1.0) > 1e-10:
            raise InvalidState(f"sum p_l Tr F_l F_l^dag = {norm!r}, expected 1")
        for r, dl in zip(self.irreps, dims):
            eye = np.eye(dl)
            if np.max(np.abs(r[0] - eye)) > 1e-9:
                raise InvalidState("element 0 must be represented by the identity")
            for mat in r:
                if np.max(np.abs(mat @ mat.conj().T - eye)) > 1e-9:
                    raise InvalidState("irrep matrices must be unitary")
            for a in range(g):
                for b_idx in range(g):
                    if np.max(np.abs(r[a] @ r[b_idx] - r[self.mult_table[a, b_idx]])) > 1e-9:
                        raise InvalidState("irrep is not a homomorphism within 1e-9")

    @property
    def dims(self) -> list[int]:
        return [r.shape[1] for r in self.irreps]

    @property
    def weights(self) -> list[float]:
        return [dl * dl / self.order for dl in self.dims]

    def element(self, g: int) -> np.ndarray:
        """Full representation f(g) = direct sum of f_l(g) (x) identity."""
        mats = [np.kron(r[g], np.eye(r.shape[1])) for r in self.irreps]
        d = sum(m.shape[0] for m in mats)
        out = np.zeros((d, d), dtype=complex)
        at = 0
        for m in mats:
            out[at : at + m.shape[0], at : at + m.shape[0]] = m
            at += m.shape[0]
        return out


@dataclass
class CovariantFamily:
    family: PureStateFamily
    dual_vectors: np.ndarray  # (d, |G|), column g: scaled dual orbit vector
    dual_generator: np.ndarray  # t-normalized generator
    c: float
    t: float
    acceptance: float
    acceptance_spread: float
    biorth_residual: float
    family_norm: float  # norm of the raw generated state before unit-normalization


def _commutative_vectors(rep: CommutativeGroupRep) -> tuple[np.ndarray, np.ndarray, float]:
    """Raw orbit, its true dual orbit, and the normalization constant t."""
    k = rep.order
    f = rep.amplitudes
    if np.min(np.abs(f)) <= 1e-9:
        raise SingularMultiplicityBlock("zero amplitude makes the orbit degenerate")
    scale = 1.0 / np.sqrt(k)
    # column g of the orbit: components scale * f_l * chi_l(g)
    orbit = scale * (f[:, None] * rep.characters)
    dual = scale * ((1.0 / f.conj())[:, None] * rep.characters)
    t = 1.0 / (float(np.sum(np.abs(f) ** -2)) / k)
    return orbit, dual, t


def _block_vectors(rep: BlockGroupRep) -> tuple[np.ndarray, np.ndarray, float]:
    """Raw orbit, its true dual orbit, and t for a block representation."""
    dims = rep.dims
    weights = rep.weights
    psi_parts, phi_parts = [], []
    for dl, w, block in zip(dims, weights, rep.blocks):
        ent = np.eye(dl, dtype=complex).reshape(-1) / np.sqrt(dl)  # normalized max-entangled
        lift = np.sqrt(w) * np.kron(np.eye(dl), block) @ ent
        dual_lift = np.sqrt(w) * np.kron(np.eye(dl), np.linalg.inv(block.conj().T)) @ ent
        psi_parts.append(lift)
        phi_parts.append(dual_lift)
    psi = np.concatenate(psi_parts)
    phi = np.concatenate(phi_parts)
    t = 1.0 / sum(
        w * float(np.real(np.trace(np.linalg.inv(b.conj().T) @ np.linalg.inv(b))))
        for w, b in zip(rep.weights, rep.blocks)
    )
    orbit = np.column_stack([rep.element(g) @ psi for g in range(rep.order)])
    dual = np.column_stack([rep.element(g) @ phi for g in range(rep.order)])
    return orbit, dual, t


def covariant_family(rep: CommutativeGroupRep | BlockGroupRep) -> CovariantFamily:
    """Group-covariant discrimination instance.

    Builds the orbit of the input state, the biorthogonal dual orbit, and the
    uniform coefficient c (commutative shortcut min_l |f_l|^-2, block case
    via the multiplicity blocks).  The returned dual orbit is rescaled so
    that c is exactly its maximal uniform coefficient: the ambiguous effect
    at c is PSD and singular, and the induced POVM coincides with the
    true-dual construction at its own maximal coefficient.
    """
    if isinstance(rep, CommutativeGroupRep):
        orbit, dual, t = _commutative_vectors(rep)
        c = float(np.min(np.abs(rep.amplitudes) ** -2))
    else:
        orbit, dual, t = _block_vectors(rep)
        c = 1.0 / max(
            hm.eig_extrema(np.linalg.inv(b.conj().T) @ np.linalg.inv(b))[1] for b in rep.blocks
        )

    nu = float(np.linalg.norm(orbit[:, 0]))
    family = PureStateFamily(dim=orbit.shape[0], states=orbit / nu)

    # <dual_g | orbit_h> = delta; rescale so c is the exact PSD threshold.
    frame = dual @ dual.conj().T
    lam = hm.eig_extrema(frame)[1]
    scale = 1.0 / np.sqrt(c * lam)
    dual_scaled = scale * dual

    biorth = dual_scaled.conj().T @ family.states
    target = biorth[0, 0]
    resid = float(np.max(np.abs(biorth - np.eye(rep.order) * target)))

    m = asd_measurement(dual_scaled, [c] * dual_scaled.shape[1])
    ambiguous = m.effect(AMBIGUOUS_LABEL)
    accept = np.array(
        [1.0 - hm.hs_inner(family.projector(j), ambiguous) for j in range(family.dim)]
    )
    return CovariantFamily(
        family=family,
        dual_vectors=dual_scaled,
        dual_generator=t * dual[:, 0],
        c=c,
        t=t,
        acceptance=float(np.mean(accept)),
        acceptance_spread=float(np.max(accept) - np.min(accept)),
        biorth_residual=resid,
        family_norm=nu,
    )


def asd_to_npovm(
    family: PureStateFamily,
    dual: DualBasis | np.ndarray,
    c_uniform: float | list[float],
    tol: float = BIORTH_TOL,
) -> tuple[Measurement, Subspace, InversionConditionReport]:
    """Convert a uniform-coefficient discrimination POVM into a measurement
    family on the span of the target projectors.

    The acceptance must be constant on the span (it is, for uniform c and a
    biorthogonal dual family); c0 is read off the reject mass, and the
    inversion is delegated to the post-selection bridge.  The returned family
    satisfies Tr(rho_j N_k) = delta_jk on the targets.  A non-uniform
    coefficient list is refused with a diagnostic rather than averaged.
    """
    d = family.dim
    coeffs = np.atleast_1d(np.asarray(c_uniform, dtype=float))
    if coeffs.size == 1:
        coeffs = np.full(d, float(coeffs[0]))
    if float(np.max(coeffs) - np.min(coeffs)) > 1e-12:
        raise InversionConditionError(
            "conversion requires a uniform coefficient; got spread "
            f"{float(np.max(coeffs) - np.min(coeffs)):.3e}"
        )
    m = asd_measurement(dual, coeffs)
    projectors = [family.projector(j) for j in range(d)]
    k = subspace_from_span(d, projectors)
    ambiguous = m.effect(AMBIGUOUS_LABEL)
    reject_mass = np.array([hm.hs_inner(p, ambiguous) for p in projectors])
    spread = float(np.max(reject_mass) - np.min(reject_mass))
    if spread > tol:
        raise InversionConditionError(
            f"acceptance varies by {spread:.3e} across the targets (> {tol:.1e}); "
            "a single family cannot reproduce the post-selected statistics"
        )
    mean_mass = float(np.mean(reject_mass))
    if mean_mass <= 1e-12:
        raise DegenerateC0("no rejection mass on the targets; post-selection is trivial")
    c0 = 1.0 / mean_mass
    rng = np.random.default_rng(7)
    mixtures = []
    for _ in range(32):
        wts = rng.dirichlet(np.ones(d))
        mixtures.append(sum(w * p for w, p in zip(wts, projectors)))
    states = projectors + mixtures
    npovm, report = invert_postselection(
        m, AMBIGUOUS_LABEL, k, c0=c0, tol=tol, states=states
    )
    return npovm, k, report
