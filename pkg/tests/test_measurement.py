import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmeasure.audit import random_model
from qmeasure.measurement import (
    KrausSet,
    MeasurementModel,
    ModelError,
    SpinDetuningModel,
    kraus_from_model,
    marginal,
    model_from_dict,
    model_from_json,
    model_from_kraus,
    model_to_dict,
    model_to_json,
    out_operator_pointer,
    out_operator_system,
    outcome_probabilities,
    projective_dilation,
    simultaneous_eigenbasis,
    spin_model,
)
from qmeasure.moments import MomentContext, error_epsilon
from qmeasure.operators import (
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    make_rng,
    operator_norm,
    random_hermitian,
    random_state,
    sigma_phi,
)

I2 = np.eye(2)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
phis = st.floats(min_value=0.0, max_value=np.pi / 2)


def trivial_model(ds=2, da=2, m=None, n=None):
    xi = np.zeros(da)
    xi[0] = 1
    m = np.diag(np.arange(da, dtype=float)) if m is None else m
    return MeasurementModel(ds, da, xi, np.eye(ds * da), m, n)


# -- MeasurementModel invariants ---------------------------------------------


def test_model_rejects_non_unitary():
    with pytest.raises(ModelError):
        MeasurementModel(2, 2, [1, 0], 2 * np.eye(4), SIGMA_Z)


def test_model_rejects_non_commuting_pointers():
    with pytest.raises(ModelError):
        MeasurementModel(2, 2, [1, 0], np.eye(4), SIGMA_Z, SIGMA_X)


def test_model_rejects_unnormalized_xi():
    with pytest.raises(ModelError):
        MeasurementModel(2, 2, [1, 1], np.eye(4), SIGMA_Z)


def test_model_rejects_shape_mismatch():
    with pytest.raises(ModelError):
        MeasurementModel(2, 3, [1, 0, 0], np.eye(4), np.eye(3))


def test_pointer_n_defaults_to_zero():
    model = trivial_model()
    assert np.array_equal(model.pointer_N, np.zeros((2, 2)))


def test_model_arrays_are_frozen():
    model = spin_model(0.3)
    with pytest.raises(ValueError):
        model.U[0, 0] = 0


# -- out-operators -----------------------------------------------------------


def test_identity_interaction_out_operators():
    model = trivial_model()
    assert np.allclose(out_operator_pointer(model, "M"), np.kron(I2, model.pointer_M))
    assert np.allclose(out_operator_system(model, SIGMA_Y), np.kron(SIGMA_Y, I2))


@given(phis)
def test_spin_pointer_out_operator(phi):
    m_out = out_operator_pointer(spin_model(phi), "M")
    assert np.allclose(m_out, np.kron(sigma_phi(phi), SIGMA_Z), atol=1e-12)


@given(phis)
def test_spin_disturbed_observable(phi):
    o = np.cos(phi) * (np.cos(phi) * SIGMA_Y - np.sin(phi) * SIGMA_X)
    b_out = out_operator_system(spin_model(phi), SIGMA_Y)
    expected = -np.kron(o, I2) + np.kron(o, SIGMA_X)
    assert np.allclose(b_out - np.kron(SIGMA_Y, I2), expected, atol=1e-12)


def test_out_operator_validation():
    model = spin_model(0.0)
    with pytest.raises(ValueError):
        out_operator_pointer(model, "Q")
    with pytest.raises(ValueError):
        out_operator_system(model, np.eye(3))


@given(seeds)
def test_out_operators_hermitian_and_commuting(seed):
    rng = make_rng(seed)
    model = random_model(int(rng.integers(2, 5)), int(rng.integers(2, 5)), rng)
    m_out, n_out = out_operator_pointer(model, "M"), out_operator_pointer(model, "N")
    b = random_hermitian(model.sys_dim, rng)
    b_out = out_operator_system(model, b)
    for op in (m_out, n_out, b_out):
        assert np.max(np.abs(op - op.conj().T)) <= 1e-10
    assert np.max(np.abs(m_out @ n_out - n_out @ m_out)) <= 1e-10
    assert operator_norm(b_out) == pytest.approx(operator_norm(b), rel=1e-9)
    want = np.sort(np.linalg.eigvalsh(np.kron(b, np.eye(model.app_dim))))
    assert np.allclose(np.sort(np.linalg.eigvalsh(b_out)), want, atol=1e-9)


# -- Kraus sets --------------------------------------------------------------


def test_identity_interaction_single_kraus_element():
    ks = kraus_from_model(trivial_model(2, 3))
    assert len(ks) == 1
    assert np.allclose(ks.ops[0], I2)
    assert ks.m_values[0] == 0.0 and ks.n_values[0] == 0.0


@given(phis)
def test_spin_kraus_elements(phi):
    model = SpinDetuningModel(phi)
    e_plus, e_minus = model.projectors
    ks = kraus_from_model(model.model())
    assert list(ks.m_values) == [-1.0, 1.0]
    assert np.allclose(ks.ops[0], e_minus, atol=1e-12)
    assert np.allclose(ks.ops[1], e_plus, atol=1e-12)
    probs = [p for _, _, p in outcome_probabilities(ks, KET_PLUS_Z)]
    assert np.allclose(probs, [0.5, 0.5], atol=1e-12)


@given(phis)
def test_spin_projectors_invariants(phi):
    e_plus, e_minus = SpinDetuningModel(phi).projectors
    assert np.max(np.abs(e_plus + e_minus - I2)) <= 1e-12
    assert np.max(np.abs(e_plus @ e_plus - e_plus)) <= 1e-12
    assert np.max(np.abs(e_minus @ e_minus - e_minus)) <= 1e-12


@given(phis)
def test_spin_pinching_of_sigma_y(phi):
    ks = kraus_from_model(spin_model(phi))
    assert np.allclose(ks.pinch(SIGMA_Y), np.sin(phi) * sigma_phi(phi), atol=1e-12)


def test_spin_phi_out_of_range():
    with pytest.raises(ValueError):
        spin_model(-0.1)
    with pytest.raises(ValueError):
        SpinDetuningModel(2.0)


def test_kraus_set_rejects_incomplete():
    with pytest.raises(ModelError):
        KrausSet((0.5 * I2,), [1.0], [0.0])
    with pytest.raises(ModelError):
        KrausSet((I2,), [1.0, 2.0], [0.0])


def test_simultaneous_eigenbasis_orders_lexicographically():
    m = np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)
    n = np.diag([0.0, 2.0, -3.0, 1.0]).astype(complex)
    vecs, mv, nv = simultaneous_eigenbasis(m, n)
    assert list(zip(mv, nv)) == [(-1, 1), (-1, 2), (1, -3), (1, 0)]
    assert np.allclose(vecs.conj().T @ vecs, np.eye(4))


def test_simultaneous_eigenbasis_degenerate_m_splits_by_n(rng):
    # M degenerate on a 2-dim block where N is non-diagonal in the given basis
    v = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
    m = v @ np.diag([0.0, 0.0, 1.0]) @ v.conj().T
    n = v @ np.diag([5.0, -5.0, 0.0]) @ v.conj().T
    vecs, mv, nv = simultaneous_eigenbasis((m + m.conj().T) / 2, (n + n.conj().T) / 2)
    assert np.allclose(nv, [-5, 5, 0])
    assert np.allclose(vecs.conj().T @ vecs, np.eye(3), atol=1e-10)


def test_sigma_z_dilation_on_eigenstate():
    ks = kraus_from_model(projective_dilation(SIGMA_Z))
    probs = {m: p for m, _, p in outcome_probabilities(ks, KET_PLUS_Z)}
    assert probs[1.0] == pytest.approx(1.0)
    assert probs[-1.0] == pytest.approx(0.0, abs=1e-15)


def test_outcome_probabilities_dimension_mismatch():
    ks = kraus_from_model(spin_model(0.0))
    with pytest.raises(ValueError):
        outcome_probabilities(ks, np.ones(3) / np.sqrt(3))


@given(seeds)
def test_two_route_moments(seed):
    rng = make_rng(seed)
    model = random_model(int(rng.integers(2, 5)), int(rng.integers(2, 5)), rng)
    psi = random_state(model.sys_dim, rng)
    s = model.composite_state(psi)
    ks = kraus_from_model(model)
    rows = outcome_probabilities(ks, psi)
    p = np.array([r[2] for r in rows])
    m = np.array([r[0] for r in rows])
    n = np.array([r[1] for r in rows])
    assert np.all(p >= -1e-12)
    assert p.sum() == pytest.approx(1.0, abs=1e-10)
    m_out, n_out = out_operator_pointer(model, "M"), out_operator_pointer(model, "N")
    mean = lambda op: np.vdot(s, op @ s).real
    for k in (1, 2, 3):
        assert np.dot(m ** k, p) == pytest.approx(mean(np.linalg.matrix_power(m_out, k)), abs=1e-9)
        assert np.dot(n ** k, p) == pytest.approx(mean(np.linalg.matrix_power(n_out, k)), abs=1e-9)
    assert np.dot(m * n, p) == pytest.approx(mean(m_out @ n_out), abs=1e-9)


def test_marginal_merges_equal_readings():
    rows = [(1.0, 0.0, 0.2), (-1.0, 0.0, 0.3), (1.0, 5.0, 0.5)]
    vals, probs = marginal(rows, "M")
    assert list(vals) == [-1.0, 1.0]
    assert np.allclose(probs, [0.3, 0.7])
    vals, probs = marginal(rows, "N")
    assert list(vals) == [0.0, 5.0]


# -- projective dilation -----------------------------------------------------


def test_dilation_of_sigma_x():
    model = projective_dilation(SIGMA_X)
    assert model.app_dim == 2
    e_plus, e_minus = (I2 + SIGMA_X) / 2, (I2 - SIGMA_X) / 2
    # eigenvalues ascend, so the -1 branch keeps the pointer in |0>
    assert np.allclose(model.U, np.kron(e_minus, I2) + np.kron(e_plus, SIGMA_X))
    assert np.allclose(np.diag(model.pointer_M).real, [-1, 1])


def test_dilation_of_identity_is_disturbance_free():
    model = projective_dilation(np.eye(3))
    assert model.app_dim == 1
    assert np.allclose(model.U, np.eye(3))


@given(seeds, st.integers(min_value=1, max_value=5), st.booleans())
def test_dilation_is_precise(seed, d, degenerate):
    rng = make_rng(seed)
    if degenerate:
        a = np.diag(rng.integers(-1, 2, size=d).astype(float)).astype(complex)
    else:
        a = random_hermitian(d, rng)
    model = projective_dilation(a)
    assert model.app_dim == len(np.unique(np.round(np.linalg.eigvalsh(a), 8)))
    for _ in range(5):
        ctx = MomentContext(model, a, a, random_state(d, rng))
        assert error_epsilon(ctx, "A") ** 2 <= 1e-10


def test_dilation_precise_on_hundred_states(rng):
    a = random_hermitian(3, rng)
    model = projective_dilation(a)
    worst = max(error_epsilon(MomentContext(model, a, a, random_state(3, rng))) ** 2
                for _ in range(100))
    assert worst <= 1e-10


# -- model_from_kraus --------------------------------------------------------


def test_model_from_kraus_reproduces_kraus_set(rng):
    u = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))[0]
    ops = [u[2 * j:2 * j + 2, :2] for j in range(3)]
    model = model_from_kraus(ops, [-1.0, 0.5, 2.0], [3.0, 1.0, -1.0], app_dim=4)
    ks = kraus_from_model(model)
    order = np.argsort([-1.0, 0.5, 2.0])
    for j, k in zip(order, ks.ops):
        assert np.allclose(k.conj().T @ k, ops[j].conj().T @ ops[j], atol=1e-12)


def test_model_from_kraus_rejects_incomplete():
    with pytest.raises(ModelError):
        model_from_kraus([0.5 * I2], [1.0])
    with pytest.raises(ValueError):
        model_from_kraus([I2 / np.sqrt(2), I2 / np.sqrt(2)], [1, 2], app_dim=1)


# -- serialization -----------------------------------------------------------


@given(seeds)
def test_json_round_trip(seed):
    model = random_model(2, 3, seed)
    back = model_from_json(model_to_json(model))
    for name in ("xi", "U", "pointer_M", "pointer_N"):
        assert np.max(np.abs(getattr(back, name) - getattr(model, name))) <= 1e-12
    assert (back.sys_dim, back.app_dim) == (2, 3)


def test_json_layout(schema_validator):
    doc = model_to_dict(spin_model(0.25))
    schema_validator(doc, "model")
    assert list(doc) == ["sys_dim", "app_dim", "xi", "U", "pointer_M", "pointer_N"]
    assert len(doc["U"]) == 16
    assert doc["pointer_M"]["spectrum"] == [-1.0, 1.0]
    # row-major complex pairs
    U = spin_model(0.25).U
    assert doc["U"][1] == [U[0, 1].real, U[0, 1].imag]
    assert json.loads(json.dumps(doc)) == doc
    assert model_from_dict(doc).app_dim == 2


@given(phis)
def test_spin_model_matches_generic_dilation(phi):
    generic = projective_dilation(sigma_phi(phi))
    exact = spin_model(phi)
    assert np.max(np.abs(generic.U - exact.U)) <= 1e-12
    assert np.max(np.abs(generic.pointer_M - exact.pointer_M)) <= 1e-12


@given(phis, seeds)
def test_spin_model_expectations(phi, seed):
    psi = random_state(2, seed)
    model = spin_model(phi)
    s = model.composite_state(psi)
    m_out = out_operator_pointer(model, "M")
    b_out = out_operator_system(model, SIGMA_Y)
    assert np.vdot(s, m_out @ s).real == pytest.approx(np.vdot(psi, sigma_phi(phi) @ psi).real, abs=1e-12)
    want = np.sin(phi) * np.vdot(psi, sigma_phi(phi) @ psi).real
    assert np.vdot(s, b_out @ s).real == pytest.approx(want, abs=1e-12)


def test_two_route_moments_thousand_models():
    worst = 0.0
    for i in range(1000):
        rng = make_rng(np.random.SeedSequence([99, i]))
        model = random_model(int(rng.integers(2, 5)), int(rng.integers(2, 5)), rng)
        psi = random_state(model.sys_dim, rng)
        s = model.composite_state(psi)
        rows = outcome_probabilities(kraus_from_model(model), psi)
        m_out = out_operator_pointer(model, "M")
        m = np.array([r[0] for r in rows])
        p = np.array([r[2] for r in rows])
        ms = m_out @ s
        worst = max(worst, abs(np.dot(m, p) - np.vdot(s, ms).real),
                    abs(np.dot(m * m, p) - np.vdot(ms, ms).real), abs(p.sum() - 1))
    assert worst <= 1e-9
