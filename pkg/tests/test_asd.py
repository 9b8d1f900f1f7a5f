"""Dual bases, discrimination measurements, covariant instances, conversion."""

from itertools import permutations

import numpy as np
import pytest

from npovm import hermitian as hm
from npovm import ptdemo
from npovm.asd import (
    AMBIGUOUS_LABEL,
    BlockGroupRep,
    CommutativeGroupRep,
    PureStateFamily,
    asd_measurement,
    asd_to_npovm,
    covariant_family,
    dual_basis,
    max_uniform_c,
)
from npovm.bridge import construct_povm, invert_postselection
from npovm.errors import (
    DegenerateC0,
    InvalidState,
    NearSingularFamily,
    OperatorInequalityViolated,
)
from npovm.measurement import classify, outcome_probabilities
from npovm.supermap import subspace_from_span


def z2_rep(f1, f2):
    return CommutativeGroupRep(
        order=2,
        characters=np.array([[1, 1], [1, -1]], dtype=complex),
        amplitudes=np.array([f1, f2], dtype=complex),
    )


def cyclic_rep(k, amplitudes):
    omega = np.exp(2j * np.pi / k)
    chars = np.array([[omega ** (l * g) for g in range(k)] for l in range(k)])
    return CommutativeGroupRep(order=k, characters=chars, amplitudes=np.asarray(amplitudes))


def normalized_amplitudes(rng, k):
    while True:
        f = rng.uniform(0.3, 1.7, size=k)
        f = f * np.sqrt(k / np.sum(f**2))
        if np.min(f) > 0.2:
            return f.astype(complex)


def s3_block_rep(a=0.9, b=1.1, seedC=None):
    elems = sorted(permutations(range(3)), key=lambda p: (p != (0, 1, 2), p))
    idx = {p: i for i, p in enumerate(elems)}

    def comp(p, q):
        return tuple(p[q[x]] for x in range(3))

    table = np.array([[idx[comp(p, q)] for q in elems] for p in elems])

    def perm_matrix(p):
        m = np.zeros((3, 3))
        for j in range(3):
            m[p[j], j] = 1.0
        return m

    def parity(p):
        s = 1
        for i in range(3):
            for j in range(i + 1, 3):
                if p[i] > p[j]:
                    s = -s
        return s

    triv = np.ones((6, 1, 1), dtype=complex)
    sign = np.array([[[parity(p)]] for p in elems], dtype=complex)
    basis = np.column_stack(
        [np.array([1, -1, 0]) / np.sqrt(2), np.array([1, 1, -2]) / np.sqrt(6)]
    )
    std = np.array([basis.T @ perm_matrix(p) @ basis for p in elems], dtype=complex)
    c_block = np.array([[0.8, 0.15], [-0.1, 0.75]], dtype=complex)
    if seedC is not None:
        rng = np.random.default_rng(seedC)
        c_block = c_block + 0.1 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    scale = (1 - (a * a + b * b) / 6) / ((2 / 3) * np.trace(c_block @ c_block.conj().T).real)
    c_block = c_block * np.sqrt(scale)
    return BlockGroupRep(
        order=6,
        mult_table=table,
        irreps=[triv, sign, std],
        blocks=[
            np.array([[a]], dtype=complex),
            np.array([[b]], dtype=complex),
            c_block,
        ],
    )


def test_family_rejects_near_dependence():
    v0 = np.array([1.0, 0.0], dtype=complex)
    v1 = np.array([1.0, 1e-10], dtype=complex)
    v1 = v1 / np.linalg.norm(v1)
    with pytest.raises(NearSingularFamily):
        PureStateFamily.from_vectors([v0, v1])


def test_family_rejects_non_unit():
    with pytest.raises(InvalidState):
        PureStateFamily.from_vectors(
            [np.array([1.0, 0.0]), np.array([0.0, 2.0])]
        )


def test_dual_basis_orthonormal_self_dual():
    fam = PureStateFamily.from_vectors([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    dual = dual_basis(fam)
    assert np.max(np.abs(dual.vectors - fam.states)) < 1e-12


def test_dual_basis_closed_form_d2():
    a, b = 0.6, 0.8
    fam = PureStateFamily.from_vectors([np.array([1.0, 0.0]), np.array([a, b])])
    dual = dual_basis(fam)
    # phi_0 = (1, -a/b), phi_1 = (0, 1/b) as the biorthogonal pair
    assert np.allclose(dual.vector(0), [1.0, -a / b], atol=1e-12)
    assert np.allclose(dual.vector(1), [0.0, 1.0 / b], atol=1e-12)


def test_dual_basis_random_biorthogonality():
    rng = np.random.default_rng(1)
    for _ in range(10):
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        g = g / np.linalg.norm(g, axis=0)
        if np.linalg.svd(g, compute_uv=False)[-1] < 0.05:
            continue
        fam = PureStateFamily(dim=4, states=g)
        dual = dual_basis(fam)
        assert np.max(np.abs(dual.vectors.conj().T @ fam.states - np.eye(4))) < 1e-9


def test_asd_measurement_orthonormal_projective():
    fam = PureStateFamily.from_vectors([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    m = asd_measurement(dual_basis(fam), [1.0, 1.0])
    assert np.max(np.abs(m.effect(AMBIGUOUS_LABEL))) < 1e-12
    assert classify(m).is_povm


def test_asd_measurement_max_uniform_gives_singular_ambiguous_effect():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    g = g / np.linalg.norm(g, axis=0)
    fam = PureStateFamily(dim=3, states=g)
    dual = dual_basis(fam)
    c = max_uniform_c(dual)
    m = asd_measurement(dual, [c] * 3)
    assert classify(m).is_povm
    assert hm.min_eig(m.effect(AMBIGUOUS_LABEL)) == pytest.approx(0.0, abs=1e-9)


def test_asd_measurement_overweight_rejected():
    a, b = 0.6, 0.8
    fam = PureStateFamily.from_vectors([np.array([1.0, 0.0]), np.array([a, b])])
    dual = dual_basis(fam)
    c = max_uniform_c(dual)
    with pytest.raises(OperatorInequalityViolated):
        asd_measurement(dual, [c * 1.01] * 2)


def test_perfect_conditional_discrimination():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    g = g / np.linalg.norm(g, axis=0)
    fam = PureStateFamily(dim=4, states=g)
    dual = dual_basis(fam)
    c = max_uniform_c(dual)
    m = asd_measurement(dual, [c] * 4)
    for j in range(4):
        p = outcome_probabilities(fam.projector(j), m)
        kept = p[:-1] / p[:-1].sum()
        target = np.zeros(4)
        target[j] = 1.0
        assert np.max(np.abs(kept - target)) < 1e-10


def test_max_uniform_c_orthonormal_is_one():
    fam = PureStateFamily.from_vectors([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert max_uniform_c(dual_basis(fam)) == pytest.approx(1.0, abs=1e-12)


def test_block_rep_rejects_singular_multiplicity():
    from npovm.errors import SingularMultiplicityBlock

    rep = s3_block_rep()
    bad_blocks = [rep.blocks[0], rep.blocks[1], np.zeros((2, 2), dtype=complex)]
    with pytest.raises(SingularMultiplicityBlock):
        BlockGroupRep(
            order=6, mult_table=rep.mult_table, irreps=rep.irreps, blocks=bad_blocks
        )


def test_commutative_zero_amplitude_rejected():
    with pytest.raises(Exception):
        # normalization also fails for a zero amplitude, either error is fine
        covariant_family(z2_rep(np.sqrt(2.0), 0.0))


def test_covariant_z2_trivial():
    cov = covariant_family(z2_rep(1.0, 1.0))
    assert cov.c == pytest.approx(1.0, abs=1e-12)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    assert np.max(np.abs(np.abs(cov.family.states) - np.abs(np.column_stack([plus, plus * [1, -1]])))) < 1e-12
    m = asd_measurement(cov.dual_vectors, [cov.c] * 2)
    assert np.max(np.abs(m.effect(AMBIGUOUS_LABEL))) < 1e-12


def test_covariant_z2_skewed_amplitudes():
    cov = covariant_family(z2_rep(np.sqrt(1.6), np.sqrt(0.4)))
    assert cov.c == pytest.approx(0.625, abs=1e-12)
    assert cov.t == pytest.approx(0.64, abs=1e-12)
    assert np.allclose(np.abs(cov.family.vector(0)), [np.sqrt(0.8), np.sqrt(0.2)], atol=1e-12)
    assert cov.acceptance_spread <= 1e-10
    assert cov.biorth_residual < 1e-9
    # returned c is exactly the feasibility threshold of the returned dual
    assert max_uniform_c(cov.dual_vectors) == pytest.approx(cov.c, abs=1e-9)


def test_covariant_commutative_shortcut_matches_machinery():
    rng = np.random.default_rng(4)
    for k in (2, 3, 4):
        for _ in range(3):
            f = normalized_amplitudes(rng, k)
            cov = covariant_family(cyclic_rep(k, f))
            shortcut = float(np.min(np.abs(f) ** -2))
            assert cov.c == pytest.approx(shortcut, abs=1e-12)
            assert max_uniform_c(cov.dual_vectors) == pytest.approx(shortcut, rel=1e-9)
            assert cov.acceptance_spread <= 1e-10


def test_covariant_ambiguous_effect_group_invariant():
    rng = np.random.default_rng(5)
    f = normalized_amplitudes(rng, 3)
    rep = cyclic_rep(3, f)
    cov = covariant_family(rep)
    m = asd_measurement(cov.dual_vectors, [cov.c] * 3)
    m0 = m.effect(AMBIGUOUS_LABEL)
    omega = np.exp(2j * np.pi / 3)
    for g in range(3):
        fg = np.diag([omega ** (l * g) for l in range(3)])
        for j in range(3):
            psi = cov.family.vector(j)
            before = float(np.real(psi.conj() @ m0 @ psi))
            after = float(np.real((fg @ psi).conj() @ m0 @ (fg @ psi)))
            assert abs(before - after) <= 1e-10


def test_covariant_z3_perturbed_discrimination():
    f = np.array([1.05, 1.0, 0.95]) * np.sqrt(3 / np.sum([1.05**2, 1.0, 0.95**2]))
    cov = covariant_family(cyclic_rep(3, f.astype(complex)))
    assert cov.c == pytest.approx(float(np.min(np.abs(f) ** -2)), abs=1e-12)
    npovm_m, k, rep = asd_to_npovm(cov.family, cov.dual_vectors, cov.c)
    for j in range(3):
        probs = [hm.hs_inner(cov.family.projector(j), e) for e in npovm_m.effects]
        target = np.eye(3)[j]
        assert np.max(np.abs(np.array(probs) - target)) < 1e-9


def test_covariant_s3_block_against_dual_oracle():
    rep = s3_block_rep()
    cov = covariant_family(rep)
    # brute-force dual basis: invert the raw orbit matrix
    raw_orbit = cov.family.states * cov.family_norm
    dual_bf = np.linalg.inv(raw_orbit).conj().T
    phi_gen = dual_bf[:, 0]
    tinv_oracle = 0.0
    at = 0
    for dl, w in zip(rep.dims, rep.weights):
        blk = phi_gen[at : at + dl * dl]
        at += dl * dl
        g_mat = blk.reshape(dl, dl).T * np.sqrt(dl) / np.sqrt(w)
        tinv_oracle += w * float(np.real(np.trace(g_mat.conj().T @ g_mat)))
    assert 1.0 / cov.t == pytest.approx(tinv_oracle, abs=1e-9)
    # analytic generator equals t * (brute-force dual generator)
    assert np.max(np.abs(cov.dual_generator - cov.t * phi_gen)) < 1e-9
    # c follows the block formula and is the threshold of the returned dual family
    expected_c = 1.0 / max(
        hm.eig_extrema(np.linalg.inv(b.conj().T) @ np.linalg.inv(b))[1] for b in rep.blocks
    )
    assert cov.c == pytest.approx(expected_c, abs=1e-12)
    assert max_uniform_c(cov.dual_vectors) == pytest.approx(cov.c, rel=1e-9)
    assert cov.acceptance_spread <= 1e-10
    assert cov.biorth_residual < 1e-9


def test_covariant_s3_discrimination_and_conversion():
    cov = covariant_family(s3_block_rep(seedC=7))
    m = asd_measurement(cov.dual_vectors, [cov.c] * 6)
    assert classify(m).is_povm
    npovm_m, k, rep = asd_to_npovm(cov.family, cov.dual_vectors, cov.c)
    assert np.max(np.abs(sum(npovm_m.effects) - np.eye(6))) < 1e-12
    for j in range(6):
        probs = [hm.hs_inner(cov.family.projector(j), e) for e in npovm_m.effects]
        assert np.max(np.abs(np.array(probs) - np.eye(6)[j])) < 1e-9


def test_asd_to_npovm_z2_instance():
    cov = covariant_family(z2_rep(np.sqrt(1.6), np.sqrt(0.4)))
    npovm_m, k, rep = asd_to_npovm(cov.family, cov.dual_vectors, cov.c)
    assert classify(npovm_m).kind == "n-povm"
    assert np.max(np.abs(sum(npovm_m.effects) - np.eye(2))) < 1e-12
    for j in range(2):
        probs = [hm.hs_inner(cov.family.projector(j), e) for e in npovm_m.effects]
        assert np.max(np.abs(np.array(probs) - np.eye(2)[j])) < 1e-9


def test_asd_to_npovm_orthonormal_degenerate():
    fam = PureStateFamily.from_vectors([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    dual = dual_basis(fam)
    with pytest.raises(DegenerateC0):
        asd_to_npovm(fam, dual, 1.0)


def test_asd_to_npovm_nonuniform_acceptance_rejected():
    # a dual family that is not biorthogonal to the targets makes the
    # acceptance state-dependent, which the conversion must refuse
    rng = np.random.default_rng(6)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    g = g / np.linalg.norm(g, axis=0)
    fam = PureStateFamily(dim=3, states=g)
    dual = dual_basis(fam)
    skew = dual.vectors.copy()
    skew[:, 0] *= 0.8  # per-vector rescaling breaks uniformity
    c = max_uniform_c(skew) * 0.9
    from npovm.errors import InversionConditionError

    with pytest.raises(InversionConditionError):
        asd_to_npovm(fam, skew, c)


def test_demo_states_as_two_state_domain_cross_check():
    # the demo's rho_1 is rank two, so it enters through the bridge directly:
    # K = span{rho_0, rho_1} with the demo POVM reproduces the demo family
    inst = ptdemo.demo_instance()
    ps = construct_povm(inst.decomposition)
    k = subspace_from_span(4, inst.states)
    rng = np.random.default_rng(8)
    states = list(inst.states)
    for _ in range(20):
        w = rng.dirichlet([1.0, 1.0])
        states.append(w[0] * inst.states[0] + w[1] * inst.states[1])
    family, rep = invert_postselection(ps.povm, "2", k, c0=2.0, states=states)
    for rho in states:
        for lbl in family.labels:
            assert hm.hs_inner(rho, family.effect(lbl)) == pytest.approx(
                hm.hs_inner(rho, inst.family.effect(lbl)), abs=1e-9
            )
