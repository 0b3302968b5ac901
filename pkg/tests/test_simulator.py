import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import controlled_matrix, random_circuit
from qclone import cloning, simulator
from qclone.gates import CNOT, Circuit, GlobalPhase, MultiControlled, SingleQubit, X_MATRIX
from qclone.linalg import random_unitary, unitarity_residual
from qclone.simulator import (
    apply_gate,
    circuit_to_matrix,
    clone_experiment,
    fidelity,
    postselect,
    run_circuit,
    state_from_text,
    state_to_text,
)


def basis(n, k):
    psi = np.zeros(1 << n, dtype=complex)
    psi[k] = 1.0
    return psi


def test_x_on_last_qubit():
    out = apply_gate(basis(6, 0), SingleQubit(5, X_MATRIX))
    assert np.array_equal(out, basis(6, 1))


def test_full_control_flips_only_when_armed():
    g = MultiControlled((0, 1, 2, 3, 4), 5, X_MATRIX)
    armed = apply_gate(basis(6, 0b111110), g)
    assert np.array_equal(armed, basis(6, 0b111111))
    idle = apply_gate(basis(6, 0b011110), g)
    assert np.array_equal(idle, basis(6, 0b011110))


def test_control_zero_is_identity():
    rng = np.random.default_rng(0)
    g = MultiControlled((0,), 2, random_unitary(2, rng))
    psi = basis(3, 0b011)
    assert np.array_equal(apply_gate(psi, g), psi)


def test_apply_gate_rejects_out_of_range():
    with pytest.raises(ValueError):
        apply_gate(basis(2, 0), SingleQubit(5, X_MATRIX))


def test_global_phase():
    psi = apply_gate(basis(2, 1), GlobalPhase(np.pi / 2))
    assert psi[1] == pytest.approx(1j, abs=1e-15)


def test_run_circuit_empty_and_involution():
    psi = np.full(4, 0.5, dtype=complex)
    assert np.array_equal(run_circuit(Circuit(2, []), psi), psi)
    c = Circuit(2, [SingleQubit(0, X_MATRIX), SingleQubit(0, X_MATRIX)])
    assert np.allclose(run_circuit(c, psi), psi)


def test_run_circuit_checks_size():
    with pytest.raises(ValueError):
        run_circuit(Circuit(3, []), np.ones(4, dtype=complex) / 2)


def test_circuit_to_matrix_trivial():
    assert np.array_equal(circuit_to_matrix(Circuit(2, [])), np.eye(4))
    want = np.eye(4)
    want[[2, 3]] = want[[3, 2]]
    assert np.array_equal(circuit_to_matrix(Circuit(2, [CNOT(0, 1)])), want)


def test_fast_path_agrees_with_slow_path():
    # Pad a random circuit with enough gates to cross the fast-path threshold.
    rng = np.random.default_rng(11)
    gates = []
    for _ in range(600):
        gates.append(SingleQubit(int(rng.integers(3)), random_unitary(2, rng)))
    c = Circuit(3, gates)
    psi = random_unitary(8, rng)[:, 0]
    fast = run_circuit(c, psi)
    slow = psi.copy()
    for g in c.gates:
        slow = apply_gate(slow, g)
    assert np.max(np.abs(fast - slow)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_norm_preserved_and_matrix_unitary(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng)
    psi = random_unitary(1 << c.num_qubits, rng)[:, 0]
    out = run_circuit(c, psi)
    assert abs(np.linalg.norm(out) - 1.0) <= 1e-9
    assert unitarity_residual(circuit_to_matrix(c)) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng)
    dim = 1 << c.num_qubits
    u = random_unitary(dim, rng)
    psi, phi = u[:, 0], u[:, 1]
    a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    lhs = run_circuit(c, a * psi + b * phi)
    rhs = a * run_circuit(c, psi) + b * run_circuit(c, phi)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_apply_gate_matches_reference_matrix():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(0, n))
        picks = [int(q) for q in rng.choice(n, size=k + 1, replace=False)]
        g = MultiControlled(tuple(picks[:-1]), picks[-1], random_unitary(2, rng))
        psi = random_unitary(1 << n, rng)[:, 0]
        want = controlled_matrix(n, g.controls, g.target, g.u) @ psi
        assert np.max(np.abs(apply_gate(psi, g) - want)) <= 1e-12


# --- post-selection ------------------------------------------------------------


def test_postselect_initial_flag():
    p, state = postselect(cloning.input_state("h1"), (4, 5), (0, 0))
    assert p == pytest.approx(1.0, abs=1e-12)
    assert state is not None


def test_postselect_success_probability(reference_unitary):
    psi = reference_unitary @ cloning.input_state("h2")
    p, state = postselect(psi, (4, 5), (0, 0))
    assert p == pytest.approx(4 / 7, abs=1e-9)
    assert abs(np.linalg.norm(state) - 1.0) <= 1e-12


def test_postselect_failure_state_is_empty_on_success_flag():
    task = cloning.default_task()
    p, state = postselect(task.failure_states[1], (4, 5), (0, 0))
    assert p < 1e-14
    assert state is None


def test_postselect_validates_arguments():
    with pytest.raises(ValueError):
        postselect(np.ones(4, dtype=complex) / 2, (0, 1), (0,))
    with pytest.raises(ValueError):
        postselect(np.ones(4, dtype=complex) / 2, (7,), (0,))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9))
def test_postselect_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    psi = random_unitary(1 << n, rng)[:, 0]
    q = int(rng.integers(n))
    p0, _ = postselect(psi, (q,), (0,))
    p1, _ = postselect(psi, (q,), (1,))
    assert p0 + p1 == pytest.approx(1.0, abs=1e-12)


def test_fidelity_cases():
    psi = np.array([1, 0, 0, 0], dtype=complex)
    phi = np.array([0, 1, 0, 0], dtype=complex)
    assert fidelity(psi, psi) == pytest.approx(1.0)
    assert fidelity(psi, phi) == 0.0
    h1, h2, _ = (s.vec for s in cloning.clone_states())
    assert fidelity(h1, h2) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        fidelity(psi, np.ones(8, dtype=complex))


# --- the experiment -------------------------------------------------------------


@pytest.mark.parametrize("label,gamma", [("h1", 1 / 7), ("h2", 4 / 7), ("h3", 4 / 7)])
def test_clone_experiment_matrix_engine(label, gamma):
    r = clone_experiment(label, engine="matrix")
    assert r.success_probability == pytest.approx(gamma, abs=1e-9)
    assert r.clone_fidelity == pytest.approx(1.0, abs=1e-9)
    assert r.success_probability + r.failure_probability == pytest.approx(1.0, abs=1e-9)
    assert abs(r.failure_ab_state[0]) ** 2 == pytest.approx(1.0, abs=1e-9)
    assert r.failure_ab_state.shape == (16,)


def test_clone_experiment_rejects_unknown():
    with pytest.raises(ValueError):
        clone_experiment("h9")
    with pytest.raises(ValueError):
        clone_experiment("h1", engine="abacus")


def test_engines_agree(synthesized):
    circ, _ = synthesized
    for label in cloning.STATE_LABELS:
        a = clone_experiment(label, engine="matrix")
        b = clone_experiment(label, engine="circuit", circuit=circ)
        assert b.success_probability == pytest.approx(a.success_probability, abs=1e-7)
        assert b.clone_fidelity == pytest.approx(a.clone_fidelity, abs=1e-7)
        assert b.failure_probability == pytest.approx(a.failure_probability, abs=1e-7)


# --- state text format -----------------------------------------------------------


def test_state_text_roundtrip():
    rng = np.random.default_rng(8)
    psi = random_unitary(8, rng)[:, 0]
    assert np.array_equal(state_from_text(state_to_text(psi)), psi)


def test_state_text_rejects_malformed():
    with pytest.raises(ValueError):
        state_from_text("qubits 2\n1+0i\n")
    with pytest.raises(ValueError):
        state_from_text("dim 2\n1+0i 0+0i\n")
