"""Constructions linking N-POVMs and post-selected POVMs.

Forward direction: a decomposition N_i = sum_k f_i^(k)(S_i^(k)) with PSD
summands induces a POVM (one reject outcome added) whose post-selected
statistics reproduce the family on the joint fixed space of the adjoint
maps.  Backward direction: a POVM whose reject effect is constant on a
subspace inverts to a measurement family with the same conditional
statistics there.  The canonical pipeline builds a decomposition with cost
bounds from the diagonal/off-diagonal split in a basis of orthogonal pure
states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hermitian as hm
from .errors import (
    AllOutcomesRejected,
    CompensatorInfeasible,
    DegenerateC0,
    DegenerateDecomposition,
    DimensionMismatch,
    InvalidDecomposition,
    InvalidDiagonalStructure,
    InvalidMeasurement,
    InvalidState,
    InversionConditionError,
)
from .measurement import Measurement, classify, sample_domain_states
from .supermap import (
    Subspace,
    SuperMap,
    common_fixed_subspace,
    compose,
    identity_map,
    is_trace_preserving,
    subspace_from_span,
    unitary_conjugation_map,
)

S_PSD_TOL = 1e-10
SUM_TOL = 1e-9
RATIO_TOL = 1e-9
CONDITION_TOL = 1e-9


@dataclass(eq=False)
class Decomposition:
    """Presentation of a measurement family as per-outcome lists of
    (linear map, PSD matrix) summands."""

    dim: int
    labels: tuple[str, ...]
    terms: dict[str, list[tuple[SuperMap, np.ndarray]]]

    def __post_init__(self) -> None:
        if set(self.labels) != set(self.terms) or not self.labels:
            raise InvalidDecomposition("labels and term keys must coincide and be nonempty")
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for label in self.labels:
            for f, s in self.terms[label]:
                if f.dim != self.dim or s.shape != (self.dim, self.dim):
                    raise DimensionMismatch("term dimension mismatch")
                low = hm.min_eig(s)
                if low < -S_PSD_TOL:
                    raise InvalidDecomposition(
                        f"summand for outcome {label!r} has min eigenvalue {low:.3e}"
                    )
                total = total + f.apply(s)
        if np.max(np.abs(total - np.eye(self.dim))) > SUM_TOL:
            raise InvalidDecomposition(
                "induced effects sum to identity only within "
                f"{np.max(np.abs(total - np.eye(self.dim))):.3e}"
            )

    def effect(self, label: str) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for f, s in self.terms[label]:
            out = out + f.apply(s)
        return (out + out.conj().T) / 2.0

    def induced_measurement(self) -> Measurement:
        return Measurement(
            dim=self.dim,
            labels=self.labels,
            effects=tuple(self.effect(lbl) for lbl in self.labels),
        )

    def all_maps(self) -> list[SuperMap]:
        return [f for lbl in self.labels for f, _ in self.terms[lbl]]


@dataclass(eq=False)
class PostSelectedPOVM:
    povm: Measurement
    reject_label: str
    c: float | None  # normalization constant; acceptance is 1/c

    def __post_init__(self) -> None:
        if self.reject_label not in self.povm.labels:
            raise InvalidMeasurement(f"reject label {self.reject_label!r} missing")
        cls = classify(self.povm)
        if not cls.is_povm:
            raise InvalidMeasurement(
                f"not a POVM: effect {cls.witness_index} has min eig {cls.witness_min_eig:.3e}"
            )
        if self.c is not None and not (self.c > 0):
            raise InvalidMeasurement("normalization constant must be positive")

    @property
    def acceptance(self) -> float | None:
        return None if self.c is None else 1.0 / self.c

    @property
    def accept_labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl in self.povm.labels if lbl != self.reject_label)


@dataclass(eq=False)
class ImplementationDomain:
    subspace: Subspace
    tol: float = 1e-9
    contains_max_mixed: bool = False

    @property
    def size(self) -> int:
        return self.subspace.size


@dataclass
class ImplementationReport:
    max_ratio_error: float
    lemma1_constancy_spread: float
    acceptance: float
    samples_used: int
    informativeness: bool


def _fresh_reject_label(labels: tuple[str, ...]) -> str:
    if all(lbl.lstrip("-").isdigit() for lbl in labels):
        return str(max(int(lbl) for lbl in labels) + 1)
    cand = "reject"
    while cand in labels:
        cand = "_" + cand
    return cand


def construct_povm(dec: Decomposition) -> PostSelectedPOVM:
    """Normalize the summands into a POVM with one extra reject outcome.

    c is the largest eigenvalue of the summand total; the accept effects are
    the per-outcome summand sums divided by c, and the reject effect is the
    complement, which is PSD precisely because of the choice of c.
    """
    d = dec.dim
    total = np.zeros((d, d), dtype=complex)
    sums: dict[str, np.ndarray] = {}
    for lbl in dec.labels:
        s_sum = np.zeros((d, d), dtype=complex)
        for _, s in dec.terms[lbl]:
            s_sum = s_sum + s
        sums[lbl] = s_sum
        total = total + s_sum
    c = hm.eig_extrema(total)[1]
    if c <= 1e-14:
        raise DegenerateDecomposition("all summands vanish; no normalization constant")
    reject = _fresh_reject_label(dec.labels)
    pairs = [(lbl, sums[lbl] / c) for lbl in dec.labels]
    pairs.append((reject, np.eye(d) - total / c))
    return PostSelectedPOVM(povm=Measurement.create(pairs), reject_label=reject, c=float(c))


def implementation_domain(dec: Decomposition, cutoff: float = 1e-9) -> ImplementationDomain:
    """Joint fixed space of the adjoints of every map in the decomposition."""
    sub = common_fixed_subspace(dec.all_maps(), dim=dec.dim, cutoff=cutoff)
    anchor = np.eye(dec.dim, dtype=complex) / dec.dim
    return ImplementationDomain(
        subspace=sub,
        tol=cutoff,
        contains_max_mixed=bool(sub.size and sub.residual(anchor) <= 1e-9),
    )


def verify_implementation(
    n: Measurement,
    ps: PostSelectedPOVM,
    dom: ImplementationDomain,
    n_samples: int = 200,
    seed: int = 42,
    tol: float = RATIO_TOL,
    jitter: float = 0.05,
    states: list[np.ndarray] | None = None,
) -> ImplementationReport:
    """Compare Tr(rho N_i) against the post-selected ratio on sampled domain states.

    Also reports the spread of the total accept mass (its constancy is what
    makes the ratio linear) and whether the sampled states are statistically
    separated by the family (the hypothesis under which constancy is forced).
    """
    if n.dim != ps.povm.dim:
        raise DimensionMismatch("family and POVM dimensions differ")
    if states is None:
        states = sample_domain_states(dom.subspace, n_samples, seed=seed, jitter=jitter).states
    accept_effects = [ps.povm.effect(lbl) for lbl in n.labels]
    n_probs = np.array([[hm.hs_inner(rho, e) for e in n.effects] for rho in states])
    m_probs = np.array([[hm.hs_inner(rho, e) for e in accept_effects] for rho in states])
    accept_mass = m_probs.sum(axis=1)
    if np.min(accept_mass) <= 1e-12:
        raise AllOutcomesRejected("a sampled state gives zero mass to the kept outcomes")
    ratio = m_probs / accept_mass[:, None]
    max_err = float(np.max(np.abs(n_probs - ratio))) if len(states) else 0.0
    spread = float(np.max(accept_mass) - np.min(accept_mass))
    # Informativeness: every pair of distinct sampled states is separated
    # by at least one outcome of the family (what forces constant accept mass).
    informative = True
    if len(states) >= 2:
        diffs = np.abs(n_probs[:, None, :] - n_probs[None, :, :]).max(axis=2)
        dist = np.array(
            [[hm.hs_norm(a - b) for b in states] for a in states]
        )
        distinct = dist > 1e-8
        informative = bool(np.all(diffs[distinct] > 1e-12)) if distinct.any() else True
    return ImplementationReport(
        max_ratio_error=max_err,
        lemma1_constancy_spread=spread,
        acceptance=float(np.mean(accept_mass)),
        samples_used=len(states),
        informativeness=informative,
    )


@dataclass
class BoundCheck:
    acc: float
    bound: float
    trace_preserving: bool
    satisfied: bool


def acceptance_bound_check(dec: Decomposition, ps: PostSelectedPOVM) -> BoundCheck:
    """Acceptance lower bound 1/d, asserted only when every map preserves traces."""
    acc = 1.0 / ps.c
    bound = 1.0 / dec.dim
    tp = all(is_trace_preserving(f) for f in dec.all_maps())
    return BoundCheck(
        acc=acc,
        bound=bound,
        trace_preserving=tp,
        satisfied=(not tp) or acc >= bound - 1e-12,
    )


@dataclass
class DomainConditions:
    orthogonal_states_ok: bool
    ball_ok: bool
    eps_max: float


def _pure_state_vectors(dim: int, pure_states: list[np.ndarray]) -> list[np.ndarray]:
    vectors = []
    for rho in pure_states:
        rho = hm.as_density(rho)
        if rho.shape != (dim, dim):
            raise DimensionMismatch("pure state dimension mismatch")
        purity = float(np.real(np.trace(rho @ rho)))
        if abs(purity - 1.0) > 1e-9:
            raise InvalidState(f"state is not rank one (purity {purity!r})")
        vals, vecs = np.linalg.eigh(rho)
        v = vecs[:, -1]
        k = int(np.argmax(np.abs(v)))
        phase = v[k] / abs(v[k])
        vectors.append(v * np.conj(phase))
    return vectors


def check_domain_conditions(
    n: Measurement, pure_states: list[np.ndarray], tol: float = 1e-9
) -> DomainConditions:
    """The two quantum-domain conditions the canonical pipeline needs.

    First: the d given pure states are pairwise orthogonal and each lies in
    the quantum domain.  Second: some ball around the maximally mixed state
    lies in the quantum domain; its radius is limited per effect by
    (Tr N_i / d) / ||traceless part of N_i|| and capped at 1/sqrt(d(d-1)) so
    the ball stays inside the density matrices.
    """
    d = n.dim
    if len(pure_states) != d:
        raise InvalidState(f"need exactly {d} pure states, got {len(pure_states)}")
    states = [hm.as_density(rho) for rho in pure_states]
    _pure_state_vectors(d, states)  # validates rank-1
    ortho = all(
        abs(hm.hs_inner(states[a], states[b])) <= tol
        for a in range(d)
        for b in range(a + 1, d)
    )
    in_domain = all(
        hm.hs_inner(rho, e) >= -tol for rho in states for e in n.effects
    )
    cap = 1.0 / np.sqrt(d * (d - 1)) if d > 1 else 1.0
    eps = cap
    ball_ok = True
    for e in n.effects:
        tr = float(np.real(np.trace(e)))
        tilde = e - (tr / d) * np.eye(d)
        norm = hm.hs_norm(tilde)
        if norm <= 1e-12:
            if tr < -tol:
                ball_ok = False
            continue
        eps = min(eps, (tr / d) / norm)
    if eps <= 0:
        ball_ok = False
        eps = max(eps, 0.0)
    return DomainConditions(
        orthogonal_states_ok=bool(ortho and in_domain),
        ball_ok=bool(ball_ok),
        eps_max=float(eps),
    )


def _max_psd_delta(base: np.ndarray, v: np.ndarray, delta_max: float, iters: int = 16) -> float:
    """Largest delta in [0, delta_max] with base + delta*v PSD (min eig is
    concave in delta, so the feasible set is an interval containing 0)."""
    if hm.min_eig(base + delta_max * v) >= -S_PSD_TOL:
        return delta_max
    lo, hi = 0.0, delta_max
    for _ in range(iters):
        mid = (lo + hi) / 2.0
        if hm.min_eig(base + mid * v) >= -S_PSD_TOL:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class CanonicalImplementation:
    dec: Decomposition
    dom: ImplementationDomain
    ps: PostSelectedPOVM
    dim_prime_upper: int
    dim_bound_ok: bool
    acc_bound_ok: bool


def canonical_implementation(
    n: Measurement, pure_states: list[np.ndarray]
) -> CanonicalImplementation:
    """Build a decomposition with cost bounds from the diagonal split.

    Works in the basis diagonalizing the given orthogonal pure states.  Each
    effect splits into its diagonal part (nonnegative under the domain
    conditions) plus an off-diagonal part; a traceless summand is completed
    by bisection so the per-outcome matrix stays PSD, and each map is the
    identity except on a single off-diagonal direction.  Maps are trace
    preserving by construction, which yields the 1/d acceptance bound; the
    fixed space loses at most one direction per outcome, which yields the
    dimension bound.
    """
    d = n.dim
    conds = check_domain_conditions(n, pure_states)
    if not (conds.orthogonal_states_ok and conds.ball_ok):
        raise InvalidState(
            f"domain conditions fail (orthogonal_states_ok={conds.orthogonal_states_ok}, "
            f"ball_ok={conds.ball_ok})"
        )
    vectors = _pure_state_vectors(d, [hm.as_density(r) for r in pure_states])
    w = np.column_stack(vectors)
    rotate = bool(np.max(np.abs(w - np.eye(d))) > 1e-12)

    effects = [w.conj().T @ e @ w if rotate else e for e in n.effects]
    effects = [hm.as_hermitian(e, tol=1e-9) for e in effects]

    diag_parts = [np.diag(np.real(np.diag(e))).astype(complex) for e in effects]
    off_parts = [e - dh for e, dh in zip(effects, diag_parts)]

    for lbl, dh, off in zip(n.labels, diag_parts, off_parts):
        diag = np.real(np.diag(dh))
        if np.min(diag) < -S_PSD_TOL:
            raise InvalidDiagonalStructure(
                f"effect {lbl!r} has negative diagonal entry {np.min(diag):.3e}"
            )
        if np.max(diag) <= 1e-12 and hm.hs_norm(off) > 1e-10:
            raise InvalidDiagonalStructure(
                f"effect {lbl!r} has an all-zero diagonal but nonzero off-diagonal part"
            )

    off_span = subspace_from_span(d, [o for o in off_parts if hm.hs_norm(o) > 1e-12])
    dim_prime_upper = d + off_span.size

    terms: dict[str, list[tuple[SuperMap, np.ndarray]]] = {}
    for lbl, dh, off in zip(n.labels, diag_parts, off_parts):
        off_norm = hm.hs_norm(off)
        if off_norm <= 1e-12:
            terms[lbl] = [(identity_map(d), dh)]
            continue
        v = off / off_norm
        diag = np.real(np.diag(dh))
        nonzero = diag[diag > 1e-12]
        delta_max = float(np.min(nonzero))
        delta = _max_psd_delta(dh, v, delta_max)
        compensator = np.zeros((d, d), dtype=complex)
        if delta <= delta_max * 1e-9:
            # The direction hits zero diagonal entries; move the diagonal
            # halfway toward the uniform one (same trace) to open room.
            target = (diag + np.sum(diag) / d) / 2.0
            compensator = np.diag(target - diag).astype(complex)
            base = dh + compensator
            delta = _max_psd_delta(base, v, float(np.min(target)))
            if delta <= 0:
                raise CompensatorInfeasible(
                    f"no traceless completion keeps the summand for {lbl!r} PSD"
                )
        s = dh + compensator + delta * v
        cb = hm.canonical_basis(d)
        e_coords = cb.to_coords(v)
        u_coords = cb.to_coords((off - compensator) / delta)
        action = np.eye(d * d) + np.outer(u_coords - e_coords, e_coords)
        terms[lbl] = [(SuperMap(d, action), s)]

    if rotate:
        cw = unitary_conjugation_map(w)
        cw_dag = unitary_conjugation_map(w.conj().T)
        terms = {
            lbl: [(compose(cw, compose(f, cw_dag)), w @ s @ w.conj().T) for f, s in pairs]
            for lbl, pairs in terms.items()
        }

    dec = Decomposition(dim=d, labels=n.labels, terms=terms)
    dom = implementation_domain(dec)
    ps = construct_povm(dec)
    dim_bound_ok = dom.size >= d * d + d - 2 * dim_prime_upper
    acc_bound_ok = 1.0 / ps.c >= 1.0 / d - 1e-12
    return CanonicalImplementation(
        dec=dec,
        dom=dom,
        ps=ps,
        dim_prime_upper=dim_prime_upper,
        dim_bound_ok=bool(dim_bound_ok),
        acc_bound_ok=bool(acc_bound_ok),
    )


@dataclass
class InversionConditionReport:
    ok: bool
    projection_norm: float
    tol: float
    reject_mass_mean: float | None = None
    reject_mass_spread: float | None = None
    samples_used: int = 0

    def __bool__(self) -> bool:
        return self.ok


def _states_in_subspace(
    k: Subspace, count: int, seed: int, jitter: float = 0.05
) -> list[np.ndarray]:
    """Density matrices inside a subspace, anchored at the maximally mixed
    state when possible, else at the normalized projection of it."""
    d = k.dim
    anchor = np.eye(d, dtype=complex) / d
    if k.size and k.residual(anchor) <= 1e-9:
        return sample_domain_states(k, count, seed=seed, jitter=jitter).states
    proj = k.project(anchor)
    tr = float(np.real(np.trace(proj)))
    if tr <= 1e-9:
        return []
    cand = proj / tr
    if hm.min_eig(cand) < -1e-10:
        return []
    rng = np.random.default_rng(seed)
    states = [cand]
    basis = np.stack(k.basis)
    eps = jitter
    attempts = 0
    while len(states) < count and attempts < 50 * count:
        attempts += 1
        x = np.einsum("k,kij->ij", rng.standard_normal(k.size), basis)
        x = x - (np.trace(x) / np.trace(cand)) * cand  # keep trace 1 within the span
        norm = hm.hs_norm(x)
        if norm < 1e-13:
            continue
        rho = cand + eps * (x / norm)
        rho = (rho + rho.conj().T) / 2.0
        if abs(np.trace(rho) - 1.0) < 1e-10 and hm.min_eig(rho) >= -1e-12:
            states.append(rho)
    return states


def check_inversion_condition(
    m: Measurement,
    reject_label: str,
    k: Subspace,
    c0: float,
    tol: float = CONDITION_TOL,
    states: list[np.ndarray] | None = None,
    n_samples: int = 50,
    seed: int = 42,
) -> InversionConditionReport:
    """Does c0 * reject-effect look like the identity on the subspace?

    The projection of c0*M_reject - 1 onto the subspace must vanish; its norm
    is the reported violation.  When domain states are available the constancy
    of the reject mass (should be 1/c0) is reported alongside.
    """
    if reject_label not in m.labels:
        raise InvalidMeasurement(f"no outcome labelled {reject_label!r}")
    if m.dim != k.dim:
        raise DimensionMismatch("measurement and subspace dimensions differ")
    x = c0 * m.effect(reject_label) - np.eye(m.dim)
    coeffs = np.array([hm.hs_inner(b, x) for b in k.basis]) if k.size else np.zeros(0)
    norm = float(np.linalg.norm(coeffs))
    if states is None:
        states = _states_in_subspace(k, n_samples, seed=seed)
    mass_mean = mass_spread = None
    if states:
        mass = np.array([hm.hs_inner(rho, m.effect(reject_label)) for rho in states])
        mass_mean = float(np.mean(mass))
        mass_spread = float(np.max(mass) - np.min(mass))
    return InversionConditionReport(
        ok=norm <= tol,
        projection_norm=norm,
        tol=tol,
        reject_mass_mean=mass_mean,
        reject_mass_spread=mass_spread,
        samples_used=len(states) if states else 0,
    )


def infer_c0(m: Measurement, reject_label: str, k: Subspace, seed: int = 42) -> float | None:
    """1 / (reject mass) evaluated on domain states; None when no state is available."""
    d = m.dim
    anchor = np.eye(d, dtype=complex) / d
    if k.size and k.residual(anchor) <= 1e-9:
        mass = hm.hs_inner(anchor, m.effect(reject_label))
        return 1.0 / mass if mass > 1e-12 else None
    states = _states_in_subspace(k, 8, seed=seed)
    if not states:
        return None
    mass = float(np.mean([hm.hs_inner(rho, m.effect(reject_label)) for rho in states]))
    return 1.0 / mass if mass > 1e-12 else None


def invert_postselection(
    m: Measurement,
    reject_label: str,
    k: Subspace,
    c0: float | None = None,
    tol: float = CONDITION_TOL,
    states: list[np.ndarray] | None = None,
    seed: int = 42,
    enforce: bool = True,
) -> tuple[Measurement, InversionConditionReport]:
    """Invert a post-selected POVM into a measurement family on a domain.

    The returned family sums to the identity exactly (algebraic identity) and
    reproduces the conditional kept-outcome statistics on the subspace's
    density matrices.  With enforce=True the consistency condition and the
    supplied-vs-inferred c0 agreement are hard errors.
    """
    if reject_label not in m.labels:
        raise InvalidMeasurement(f"no outcome labelled {reject_label!r}")
    accept = [lbl for lbl in m.labels if lbl != reject_label]
    if not accept:
        raise InvalidMeasurement("no kept outcomes to invert")
    inferred = infer_c0(m, reject_label, k, seed=seed)
    if c0 is None:
        if inferred is None:
            raise DegenerateC0("cannot infer c0: no domain state carries reject mass")
        c0 = inferred
    if c0 <= 1.0 + 1e-12:
        raise DegenerateC0(f"c0={c0!r} leaves no rejection mass; post-selection is trivial")
    report = check_inversion_condition(m, reject_label, k, c0, tol=tol, states=states, seed=seed)
    if enforce and inferred is not None and abs(c0 - inferred) > 1e-8 * max(1.0, abs(c0)):
        err = InversionConditionError(
            f"supplied c0={c0!r} disagrees with inferred value {inferred!r} "
            f"(projection norm {report.projection_norm:.3e})"
        )
        err.projection_norm = report.projection_norm
        raise err
    if enforce and not report.ok:
        err = InversionConditionError(
            f"projection norm {report.projection_norm:.3e} exceeds {tol:.1e}"
        )
        err.projection_norm = report.projection_norm
        raise err
    d = m.dim
    mr = m.effect(reject_label)
    # Shared term enters with a minus sign: that is what makes the family sum
    # to the identity (and it vanishes on the domain, where Tr rho(1-c0*Mr)=0).
    shared = (np.eye(d) - c0 * mr) / len(accept)
    pairs = [(lbl, (c0 * m.effect(lbl) - shared) / (c0 - 1.0)) for lbl in accept]
    family = Measurement.create(pairs)
    total = sum(family.effects)
    if np.max(np.abs(total - np.eye(d))) > 1e-12:
        raise InvalidMeasurement("inverted family failed the exact sum identity")
    return family, report
