"""Random instance generators used by the verification suites.

Decompositions are built by drawing PSD summands under random maps and
closing the family with an identity-mapped complement, so the induced
effects always sum to the identity with every summand PSD.  The witness
family puts a partially transposed entangled projector into one effect,
which keeps all diagonals nonnegative (the partial transpose fixes the
diagonal) while making the effect indefinite.
"""

from __future__ import annotations

import numpy as np

from . import hermitian as hm
from .bridge import Decomposition
from .measurement import Measurement, classify
from .supermap import (
    SuperMap,
    identity_map,
    partial_transpose_map,
    transpose_map,
    unitary_conjugation_map,
)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    a = g @ g.conj().T
    return a / max(1.0, hm.eig_extrema(a)[1])


def _map_pool(dim: int, rng: np.random.Generator) -> list[SuperMap]:
    pool = [identity_map(dim), transpose_map(dim), unitary_conjugation_map(random_unitary(dim, rng))]
    if dim == 4:
        pool.append(partial_transpose_map(2, 2))
    return pool


def random_decomposition(
    dim: int, rng: np.random.Generator, n_outcomes: int | None = None
) -> Decomposition:
    """Random valid decomposition: drawn summands are scaled so the last
    outcome can absorb the complement with an identity map."""
    n_outcomes = n_outcomes or int(rng.integers(2, 4))
    pool = _map_pool(dim, rng)
    labels = tuple(str(i) for i in range(n_outcomes))
    terms: dict[str, list[tuple[SuperMap, np.ndarray]]] = {lbl: [] for lbl in labels}
    drawn: list[tuple[str, SuperMap, np.ndarray]] = []
    for lbl in labels[:-1]:
        for _ in range(int(rng.integers(1, 3))):
            f = pool[int(rng.integers(len(pool)))]
            s = random_psd(dim, rng)
            drawn.append((lbl, f, s))
    total = np.zeros((dim, dim), dtype=complex)
    for _, f, s in drawn:
        total = total + f.apply(s)
    scale = 0.8 / max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(total)))))
    total = total * scale
    for lbl, f, s in drawn:
        terms[lbl].append((f, s * scale))
    terms[labels[-1]].append((identity_map(dim), np.eye(dim) - total))
    return Decomposition(dim=dim, labels=labels, terms=terms)


def random_entangled_vector(rng: np.random.Generator) -> np.ndarray:
    """Two-qubit unit vector with both Schmidt coefficients bounded away from 0."""
    while True:
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v = v / np.linalg.norm(v)
        svals = np.linalg.svd(v.reshape(2, 2), compute_uv=False)
        if svals[-1] > 0.25:
            return v


def random_pt_witness_family(rng: np.random.Generator) -> tuple[Measurement, list[np.ndarray]]:
    """Two-qubit family {t*Gamma(P), 1 - t*Gamma(P)} with P an entangled
    projector: not a POVM, but positive on the computational basis states.

    Returns the family together with the d orthogonal pure states certifying
    the domain conditions.
    """
    d = 4
    while True:
        v = random_entangled_vector(rng)
        p = np.outer(v, v.conj())
        gp = hm.partial_transpose(p, (2, 2))
        t = float(rng.uniform(0.5, 1.0)) / max(1.0, hm.eig_extrema(gp)[1])
        n0 = t * gp
        n1 = np.eye(d) - n0
        m = Measurement.create([("0", n0), ("1", n1)])
        cls = classify(m)
        if not cls.is_povm and np.min(np.real(np.diag(n0))) > 1e-6:
            basis = [np.diag(row).astype(complex) for row in np.eye(d)]
            return m, basis
