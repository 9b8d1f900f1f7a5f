"""Measurement families, domain membership, and post-selected simulation.

A measurement is an ordered family of labelled Hermitian effects summing to
the identity; it is a POVM when every effect is PSD and an N-POVM otherwise.
Outcome probabilities are only meaningful on the quantum domain (states with
nonnegative probability under every effect).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hermitian as hm
from .errors import (
    AllShotsRejected,
    AnchorOutsideSubspace,
    DimensionMismatch,
    InvalidMeasurement,
    NegativeProbability,
    RejectionBudgetExceeded,
)
from .supermap import Subspace

SUM_TOL = 1e-10
CLASSIFY_TOL = 1e-10
PROB_TOL = 1e-9


@dataclass(eq=False)
class Measurement:
    dim: int
    labels: tuple[str, ...]
    effects: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.effects) or not self.labels:
            raise InvalidMeasurement("need at least one labelled effect")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidMeasurement("labels must be unique")
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for e in self.effects:
            if e.shape != (self.dim, self.dim):
                raise DimensionMismatch("effect dimension mismatch")
            total = total + e
        if np.max(np.abs(total - np.eye(self.dim))) > SUM_TOL:
            raise InvalidMeasurement(
                f"effects sum to identity only within "
                f"{np.max(np.abs(total - np.eye(self.dim))):.3e} > {SUM_TOL:.1e}"
            )

    @classmethod
    def create(cls, pairs: list[tuple[str, np.ndarray]]) -> "Measurement":
        labels = tuple(str(lbl) for lbl, _ in pairs)
        effects = tuple(hm.as_hermitian(e) for _, e in pairs)
        dim = effects[0].shape[0] if effects else 0
        return cls(dim=dim, labels=labels, effects=effects)

    def effect(self, label: str) -> np.ndarray:
        return self.effects[self.labels.index(label)]

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass
class MeasurementClass:
    kind: str  # "povm" | "n-povm"
    witness_index: int | None = None
    witness_min_eig: float | None = None

    @property
    def is_povm(self) -> bool:
        return self.kind == "povm"


def classify(m: Measurement, tol: float = CLASSIFY_TOL) -> MeasurementClass:
    """POVM iff every effect is PSD within tol; otherwise report the worst witness."""
    worst_idx, worst = None, 0.0
    for i, e in enumerate(m.effects):
        low = hm.min_eig(e)
        if low < worst:
            worst_idx, worst = i, low
    if worst_idx is not None and worst < -tol:
        return MeasurementClass(kind="n-povm", witness_index=worst_idx, witness_min_eig=worst)
    return MeasurementClass(kind="povm")


def in_quantum_domain(rho: np.ndarray, m: Measurement, tol: float = PROB_TOL) -> bool:
    if rho.shape != (m.dim, m.dim):
        raise DimensionMismatch("state dimension mismatch")
    return all(hm.hs_inner(rho, e) >= -tol for e in m.effects)


def outcome_probabilities(rho: np.ndarray, m: Measurement, tol: float = PROB_TOL) -> np.ndarray:
    """Probability vector (Tr rho N_i)_i, clipped to [0, 1].

    Raises NegativeProbability when some probability is below -tol: the state
    is outside the quantum domain and the family has no statistical meaning
    there.
    """
    if rho.shape != (m.dim, m.dim):
        raise DimensionMismatch("state dimension mismatch")
    p = np.array([hm.hs_inner(rho, e) for e in m.effects])
    if np.min(p) < -tol:
        i = int(np.argmin(p))
        raise NegativeProbability(
            f"outcome {m.labels[i]!r} has probability {p[i]:.3e} on this state"
        )
    return np.clip(p, 0.0, 1.0)


@dataclass(eq=False)
class DomainSample:
    states: list[np.ndarray]
    subspace: Subspace


def sample_domain_states(
    subspace: Subspace,
    count: int,
    seed: int = 42,
    jitter: float = 0.05,
    psd_tol: float = 1e-12,
) -> DomainSample:
    """Draw density matrices from a subspace slice around the maximally mixed state.

    Each state is 1/d + eps*X with X a random traceless unit-norm element of
    the subspace, rejection-sampled for positivity.  The jitter eps is halved
    (at most 6 times) when rejections exhaust the budget.
    """
    d = subspace.dim
    anchor = np.eye(d, dtype=complex) / d
    if subspace.residual(anchor) > 1e-9:
        raise AnchorOutsideSubspace("identity/d does not lie in the subspace")
    rng = np.random.default_rng(seed)
    basis_stack = np.stack(subspace.basis)
    states: list[np.ndarray] = []
    eps = jitter
    halvings = 0
    budget_per_state = 200
    while len(states) < count:
        attempts = 0
        while True:
            coeffs = rng.standard_normal(subspace.size)
            x = np.einsum("k,kij->ij", coeffs, basis_stack)
            x = x - (np.trace(x) / d) * np.eye(d)
            norm = hm.hs_norm(x)
            if norm < 1e-13:
                rho = anchor.copy()
                break
            rho = anchor + eps * (x / norm)
            rho = (rho + rho.conj().T) / 2.0
            if hm.min_eig(rho) >= -psd_tol:
                break
            attempts += 1
            if attempts >= budget_per_state:
                if halvings >= 6:
                    raise RejectionBudgetExceeded(
                        f"PSD sampling failed at jitter {eps:.3e} after 6 halvings"
                    )
                eps /= 2.0
                halvings += 1
                attempts = 0
        states.append(rho)
    return DomainSample(states=states, subspace=subspace)


@dataclass
class SimulationResult:
    acceptance_rate: float
    conditional_freqs: dict[str, float]
    shots: int
    seed: int
    accepted: int


def simulate_postselected(
    m: Measurement, reject_label: str, rho: np.ndarray, shots: int, seed: int = 42
) -> SimulationResult:
    """Monte Carlo post-selected measurement: sample, discard the reject
    outcome, return conditional frequencies over the kept outcomes."""
    cls = classify(m)
    if not cls.is_povm:
        raise InvalidMeasurement(
            "simulation is physical only for POVMs; "
            f"effect {cls.witness_index} has min eigenvalue {cls.witness_min_eig:.3e}"
        )
    if reject_label not in m.labels:
        raise InvalidMeasurement(f"no outcome labelled {reject_label!r}")
    if shots <= 0:
        raise AllShotsRejected("no shots requested")
    p = outcome_probabilities(rho, m)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(p), size=shots, p=p)
    counts = np.bincount(draws, minlength=len(p))
    reject_idx = m.index(reject_label)
    accepted = int(shots - counts[reject_idx])
    if accepted == 0:
        raise AllShotsRejected("every shot hit the reject outcome")
    freqs = {
        lbl: float(counts[i] / accepted)
        for i, lbl in enumerate(m.labels)
        if i != reject_idx
    }
    return SimulationResult(
        acceptance_rate=accepted / shots,
        conditional_freqs=freqs,
        shots=shots,
        seed=seed,
        accepted=accepted,
    )
