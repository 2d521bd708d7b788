import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmeasure.operators import (
    IDENTITY_2,
    KET_MINUS_Z,
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_hermitian,
    as_operator,
    as_state,
    child_seed,
    commutator,
    expectation,
    is_hermitian,
    make_rng,
    operator_norm,
    polarization_reconstruct,
    polarization_states,
    random_hermitian,
    random_state,
    random_unitary,
    sigma_phi,
    spectral_decompose,
    tensor_product,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=8)


def test_identity_tensor_identity():
    assert np.array_equal(tensor_product(IDENTITY_2, IDENTITY_2), np.eye(4))


def test_tensor_product_acts_factorwise():
    zero = np.array([1, 0], dtype=complex)
    lhs = tensor_product(SIGMA_X, IDENTITY_2) @ tensor_product(KET_PLUS_Z, zero)
    assert np.allclose(lhs, tensor_product(SIGMA_X @ KET_PLUS_Z, zero), atol=1e-15)


def test_zz_squares_to_identity():
    zz = tensor_product(SIGMA_Z, SIGMA_Z)
    assert np.allclose(zz @ zz, np.eye(4), atol=1e-15)


@given(seeds)
def test_tensor_product_associative(seed):
    rng = make_rng(seed)
    x, y, z = (random_hermitian(2, rng) for _ in range(3))
    lhs = tensor_product(tensor_product(x, y), z)
    rhs = tensor_product(x, tensor_product(y, z))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_pauli_commutator():
    assert np.allclose(commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z, atol=1e-15)
    assert np.array_equal(commutator(SIGMA_X, SIGMA_X), np.zeros((2, 2)))
    assert expectation(commutator(SIGMA_X, SIGMA_Y), KET_PLUS_Z) == pytest.approx(2j)


def test_commutator_dimension_mismatch():
    with pytest.raises(ValueError):
        commutator(SIGMA_X, np.eye(3))


@given(seeds, dims)
def test_commutator_expectation_is_imaginary(seed, d):
    rng = make_rng(seed)
    a, b, s = random_hermitian(d, rng), random_hermitian(d, rng), random_state(d, rng)
    assert abs(expectation(commutator(a, b), s).real) <= 1e-10


def test_expectation_values():
    assert expectation(SIGMA_Z, KET_PLUS_Z) == pytest.approx(1.0)
    assert expectation(SIGMA_X, KET_PLUS_Z) == pytest.approx(0.0)
    for phi in np.linspace(0, np.pi / 2, 7):
        assert abs(expectation(sigma_phi(phi), KET_PLUS_Z)) <= 1e-15
    with pytest.raises(ValueError):
        expectation(SIGMA_Z, np.ones(3) / np.sqrt(3))


def test_expectation_of_hermitian_is_real(rng):
    a, s = random_hermitian(5, rng), random_state(5, rng)
    assert abs(expectation(a, s).imag) <= 1e-10


def test_operator_norm_examples():
    assert operator_norm(SIGMA_Y) == pytest.approx(1.0)
    assert operator_norm(np.zeros((3, 3))) == 0.0
    assert operator_norm(-2.5j * np.eye(4)) == pytest.approx(2.5)


@given(seeds, dims)
def test_operator_norm_is_max_abs_eigenvalue(seed, d):
    a = random_hermitian(d, seed)
    assert operator_norm(a) == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(a))), rel=1e-12)


def test_spectral_decompose_sigma_z():
    dec = spectral_decompose(SIGMA_Z)
    assert np.allclose(dec.eigenvalues, [-1, 1])
    assert np.allclose(dec.projectors[0], np.diag([0, 1]))
    assert np.allclose(dec.projectors[1], np.diag([1, 0]))


def test_spectral_decompose_identity_merges():
    dec = spectral_decompose(np.eye(3))
    assert len(dec) == 1
    assert np.allclose(dec.projectors[0], np.eye(3))


def test_spectral_decompose_sigma_phi_matches_sigma_y():
    dec = spectral_decompose(sigma_phi(np.pi / 2))
    assert np.allclose(dec.eigenvalues, spectral_decompose(SIGMA_Y).eigenvalues, atol=1e-12)


def test_near_degenerate_eigenvalues_merge():
    a = np.diag([0.0, 1e-11, 1.0]).astype(complex)
    dec = spectral_decompose(a)
    assert len(dec) == 2
    assert np.trace(dec.projectors[0]).real == pytest.approx(2.0)


def test_spectral_decompose_rejects_non_finite():
    with pytest.raises(ValueError):
        spectral_decompose(np.array([[np.nan, 0], [0, 1]]))


@given(seeds, dims, st.booleans())
def test_spectral_invariants(seed, d, degenerate):
    rng = make_rng(seed)
    if degenerate:
        u = random_unitary(d, rng)
        a = u @ np.diag(rng.integers(-1, 2, size=d).astype(float)) @ u.conj().T
        a = (a + a.conj().T) / 2
    else:
        a = random_hermitian(d, rng)
    dec = spectral_decompose(a)
    assert np.all(np.diff(dec.eigenvalues) > 0)
    assert np.max(np.abs(sum(dec.projectors) - np.eye(d))) <= 1e-10
    for i, p in enumerate(dec.projectors):
        for j, q in enumerate(dec.projectors):
            target = p if i == j else np.zeros_like(p)
            assert np.max(np.abs(p @ q - target)) <= 1e-10
    assert np.max(np.abs(dec.reconstruct() - a)) <= 1e-10


def test_random_sampling_is_seed_deterministic():
    assert np.array_equal(random_state(4, 7), random_state(4, 7))
    assert np.array_equal(random_hermitian(3, 7), random_hermitian(3, 7))
    assert np.array_equal(random_unitary(3, child_seed(1, 2)), random_unitary(3, child_seed(1, 2)))
    assert not np.array_equal(random_state(4, 7), random_state(4, 8))


def test_random_state_sphere_symmetry():
    rng = make_rng(2024)
    vals = [expectation(SIGMA_Z, random_state(2, rng)).real for _ in range(10_000)]
    assert abs(np.mean(vals)) <= 0.05


@given(seeds, dims)
def test_random_outputs_satisfy_invariants(seed, d):
    rng = make_rng(seed)
    assert is_hermitian(random_hermitian(d, rng), 1e-12)
    as_state(random_state(d, rng))
    u = random_unitary(d, rng)
    assert np.max(np.abs(u.conj().T @ u - np.eye(d))) <= 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        as_operator(np.ones((2, 3)))
    with pytest.raises(ValueError):
        as_operator([[np.inf]])
    with pytest.raises(ValueError):
        as_hermitian([[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        as_state([1.0, 1.0])
    with pytest.raises(ValueError):
        random_state(0, 1)


def test_polarization_diagonal_case(rng):
    psi, b = random_state(3, rng), random_hermitian(3, rng)
    got = polarization_reconstruct(b, polarization_states(psi, psi))
    assert got == pytest.approx(expectation(b, psi), abs=1e-12)


def test_polarization_pauli_element():
    got = polarization_reconstruct(SIGMA_X, polarization_states(KET_PLUS_Z, KET_MINUS_Z))
    assert got == pytest.approx(1.0, abs=1e-15)


def test_polarization_coefficients():
    coefs = [c for c, _ in polarization_states(KET_PLUS_Z, KET_MINUS_Z)]
    assert coefs == [0.25, -0.25, -0.25j, 0.25j]


@given(seeds, st.integers(min_value=1, max_value=6), st.floats(min_value=0.1, max_value=5.0))
def test_polarization_identity_random(seed, d, scale):
    rng = make_rng(seed)
    psi = random_state(d, rng)
    psi_prime = scale * random_state(d, rng)
    b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    got = polarization_reconstruct(b, polarization_states(psi, psi_prime))
    assert abs(got - np.vdot(psi, b @ psi_prime)) <= 1e-10


def test_polarization_dimension_mismatch():
    with pytest.raises(ValueError):
        polarization_states(KET_PLUS_Z, np.ones(3))


def test_constants_are_read_only():
    with pytest.raises(ValueError):
        SIGMA_X[0, 0] = 1
