"""Hermitian primitives: construction, spectra, partial transpose, coordinates."""

import numpy as np
import pytest

from npovm import hermitian as hm
from npovm import ptdemo
from npovm.errors import DimensionMismatch, InvalidState, NotHermitian


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2.0


def test_as_hermitian_symmetrizes_noise():
    a = np.array([[1.0, 0.5 + 1e-14j], [0.5, 2.0]])
    out = hm.as_hermitian(a)
    assert np.allclose(out, out.conj().T)


def test_as_hermitian_rejects_asymmetry():
    with pytest.raises(NotHermitian):
        hm.as_hermitian(np.array([[1.0, 0.5], [0.2, 2.0]]))


def test_as_hermitian_rejects_nonsquare():
    with pytest.raises(DimensionMismatch):
        hm.as_hermitian(np.zeros((2, 3)))


def test_hs_inner_identity_and_projectors():
    assert hm.hs_inner(np.eye(2, dtype=complex), np.eye(2, dtype=complex)) == pytest.approx(2.0)
    e1 = np.diag([1.0, 0.0]).astype(complex)
    e2 = np.diag([0.0, 1.0]).astype(complex)
    assert hm.hs_inner(e1, e2) == pytest.approx(0.0)


def test_hs_inner_demo_effects_against_entrywise_sum():
    # independent oracle: explicit double loop over entries
    expected = 0.0
    for i in range(4):
        for j in range(4):
            expected += (ptdemo.N0[i, j] * ptdemo.N1[j, i]).real
    assert expected == pytest.approx(-2.0)
    assert hm.hs_inner(ptdemo.N0, ptdemo.N1) == pytest.approx(expected, abs=1e-12)


def test_hs_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        hm.hs_inner(np.eye(2, dtype=complex), np.eye(3, dtype=complex))


def test_eig_extrema_examples():
    assert hm.eig_extrema(np.eye(3, dtype=complex)) == pytest.approx((1.0, 1.0))
    lo, hi = hm.eig_extrema(ptdemo.GAMMA_N0 + ptdemo.N1)
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert hi == pytest.approx(2.0, abs=1e-12)
    lo, hi = hm.eig_extrema(ptdemo.N0)
    assert lo == pytest.approx(-1.0, abs=1e-12)
    assert hi == pytest.approx(1.0, abs=1e-12)


def test_is_psd_examples():
    assert hm.is_psd(ptdemo.N1)
    assert not hm.is_psd(ptdemo.N0)
    assert hm.is_psd(np.zeros((3, 3), dtype=complex))


def test_trace_between_extreme_eigenvalues():
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        a = random_hermitian(rng, d)
        lo, hi = hm.eig_extrema(a)
        mean = np.trace(a).real / d
        assert lo - 1e-12 <= mean <= hi + 1e-12


def test_as_density_accepts_demo_states():
    hm.as_density(ptdemo.RHO0)
    hm.as_density(ptdemo.RHO1)


def test_as_density_rejects_bad_trace_and_negativity():
    with pytest.raises(InvalidState):
        hm.as_density(np.eye(2, dtype=complex))  # trace 2
    with pytest.raises(InvalidState):
        hm.as_density(np.diag([1.5, -0.5]).astype(complex))


def test_partial_transpose_demo_matrix():
    four_corner = np.zeros((4, 4), dtype=complex)
    for i, j in [(0, 0), (0, 3), (3, 0), (3, 3)]:
        four_corner[i, j] = 1.0
    assert np.array_equal(hm.partial_transpose(ptdemo.N0, (2, 2)), four_corner)
    assert np.array_equal(hm.partial_transpose(four_corner, (2, 2)), ptdemo.N0)


def test_partial_transpose_identity_and_involution():
    assert np.array_equal(hm.partial_transpose(np.eye(4, dtype=complex), (2, 2)), np.eye(4))
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = random_hermitian(rng, 6)
        g = hm.partial_transpose(a, (2, 3))
        assert np.allclose(hm.partial_transpose(g, (2, 3)), a, atol=1e-14)
        assert abs(np.trace(g) - np.trace(a)) < 1e-12
        assert abs(hm.hs_norm(g) - hm.hs_norm(a)) < 1e-12
        assert np.allclose(g, g.conj().T)


def test_partial_transpose_rejects_bad_factorization():
    with pytest.raises(DimensionMismatch):
        hm.partial_transpose(np.eye(6, dtype=complex), (2, 2))


def test_canonical_basis_structure():
    for d in (1, 2, 3, 4):
        basis = hm.canonical_basis(d)
        assert len(basis.elements) == d * d
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, j] = 1.0
            assert np.array_equal(basis.elements[j], e)
        gram = np.array(
            [[hm.hs_inner(a, b) for b in basis.elements] for a in basis.elements]
        )
        assert np.max(np.abs(gram - np.eye(d * d))) < 1e-12


def test_coords_identity_example():
    basis = hm.canonical_basis(2)
    coords = basis.to_coords(np.eye(2, dtype=complex))
    assert np.allclose(coords, [1.0, 1.0, 0.0, 0.0])


def test_coords_round_trip_and_isometry():
    rng = np.random.default_rng(23)
    basis = hm.canonical_basis(4)
    for _ in range(50):
        a = random_hermitian(rng, 4)
        back = basis.from_coords(basis.to_coords(a))
        assert np.max(np.abs(back - a)) < 1e-12
        b = random_hermitian(rng, 4)
        assert hm.hs_inner(a, b) == pytest.approx(
            float(np.dot(basis.to_coords(a), basis.to_coords(b))), abs=1e-10
        )
        assert hm.hs_norm(a) == pytest.approx(
            float(np.linalg.norm(basis.to_coords(a))), abs=1e-12
        )
