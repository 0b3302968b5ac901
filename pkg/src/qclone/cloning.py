"""The 6-qubit probabilistic-cloning instance.

Register layout: qubits (0, 1) hold the two-qubit system A whose state is
cloned, qubits (2, 3) the ancilla B, qubits (4, 5) the two flag qubits P.
Measuring the flag in |00> heralds success; any other outcome is failure.

The published construction of the 64x64 cloning unitary is a left chain of
basis-index swaps, times a block-diagonal matrix whose upper-left 18x18
block does all the amplitude mixing, times a right chain of swaps. Swap
indices are kept 1-based exactly as transcribed; the conversion to 0-based
happens in one place (:func:`_swap_matrix`).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .gates import X_MATRIX
from .linalg import TwoLevelUnitary, embed_two_level, kron

# Residual below which the cloning condition counts as satisfied. Looser
# than the unitarity tolerance: the unitary is a 50-factor product.
TAU_CLONE = 1e-9

FLAG_QUBITS = (4, 5)
SUCCESS_OUTCOME = (0, 0)

GAMMAS = (1.0 / 7.0, 4.0 / 7.0, 4.0 / 7.0)
SUCCESS_FLAG_PHASES = (1.0, -1.0, -1.0)

STATE_LABELS = ("h1", "h2", "h3")


@dataclass(frozen=True)
class CloneState:
    """One of the three two-qubit input states; amplitudes are exactly +-1/2."""

    label: str
    vec: np.ndarray

    def __post_init__(self):
        v = np.array(self.vec, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)


@dataclass(frozen=True)
class CloningTask:
    states: tuple
    sigma: np.ndarray
    p0: np.ndarray
    success_outcome: tuple
    gammas: tuple
    success_flag_phases: tuple
    failure_states: tuple
    flag_qubits: tuple = FLAG_QUBITS


@dataclass(frozen=True)
class CloningVerdict:
    residuals: tuple
    passed: bool


class GramMismatchError(ValueError):
    """The input and target Gram matrices disagree: no unitary can map one onto the other."""


def clone_states() -> tuple:
    """The three linearly independent states to be cloned, in the |00>,|01>,|10>,|11> basis."""
    half = 0.5
    return (
        CloneState("h1", np.array([half, half, -half, half])),
        CloneState("h2", np.array([half, -half, half, -half])),
        CloneState("h3", np.array([-half, half, half, -half])),
    )


def _state_by_label(label: str) -> CloneState:
    for s in clone_states():
        if s.label == label:
            return s
    raise ValueError(f"unknown state label {label!r}, expected one of {STATE_LABELS}")


def input_state(label: str) -> np.ndarray:
    """|h_label> on A, ancilla B and flag P both |00>: a 64-dim vector."""
    s = _state_by_label(label)
    rest = np.zeros(16, dtype=complex)
    rest[0] = 1.0
    return kron(s.vec.reshape(4, 1), rest.reshape(16, 1)).reshape(64)


def _failure_states() -> tuple:
    f1 = np.zeros(64, dtype=complex)
    f1[1] = 1.0 / math.sqrt(2.0)
    f1[2] = 1.0 / math.sqrt(2.0)
    f2 = np.zeros(64, dtype=complex)
    f2[1] = -1.0
    f3 = np.zeros(64, dtype=complex)
    f3[2] = -1.0
    for f in (f1, f2, f3):
        f.setflags(write=False)
    return (f1, f2, f3)


def default_task() -> CloningTask:
    two_zero = np.zeros(4, dtype=complex)
    two_zero[0] = 1.0
    two_zero.setflags(write=False)
    return CloningTask(
        states=clone_states(),
        sigma=two_zero,
        p0=two_zero,
        success_outcome=SUCCESS_OUTCOME,
        gammas=GAMMAS,
        success_flag_phases=SUCCESS_FLAG_PHASES,
        failure_states=_failure_states(),
    )


def success_target(task: CloningTask, idx: int) -> np.ndarray:
    """|h_i>|h_i>|00>, the success branch before its weight and sign."""
    h = task.states[idx].vec
    return kron(kron(h.reshape(4, 1), h.reshape(4, 1)), task.p0.reshape(4, 1)).reshape(64)


def task_input(task: CloningTask, idx: int) -> np.ndarray:
    h = task.states[idx].vec
    return kron(kron(h.reshape(4, 1), task.sigma.reshape(4, 1)), task.p0.reshape(4, 1)).reshape(64)


def task_rhs(task: CloningTask, idx: int) -> np.ndarray:
    """The required image of input i: weighted success branch plus failure branch."""
    g = task.gammas[idx]
    ph = task.success_flag_phases[idx]
    return math.sqrt(g) * ph * success_target(task, idx) + math.sqrt(1.0 - g) * task.failure_states[idx]


# --- the published 18x18 mixing block ---------------------------------------
#
# Entries are evaluated once from their exact surd expressions rather than
# transcribed decimals, so the unitarity check is limited only by float64.

_R2 = 1.0 / math.sqrt(2.0)
_H3 = 0.5 / math.sqrt(3.0)
_T3 = 1.0 / math.sqrt(3.0)
_H7 = 0.5 / math.sqrt(7.0)
_Q7 = 0.25 / math.sqrt(7.0)
_TQ7 = 0.75 / math.sqrt(7.0)
_S37 = math.sqrt(3.0 / 7.0)
_S314 = math.sqrt(3.0 / 14.0)
_S370 = math.sqrt(3.0 / 70.0)
_S42 = 1.0 / math.sqrt(42.0)
_S235 = 2.0 * math.sqrt(2.0 / 35.0)
_S70 = 3.0 / math.sqrt(70.0)
_S514 = math.sqrt(5.0 / 14.0)

_MIXING_ROWS = (
    (_R2, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, _H3, -_H7, _H7, -_Q7, -_Q7, _S42, -_S370, -_S370 / 2),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -_S37 / 2, _S37 / 2, 0, _S37, 0, _S235, -_S70),
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -_S37 / 2, _S37 / 2, _S37, 0, 0, 0, _S514),
    (0, 0, 0, _R2, 0, 0, 0, 0, 0, 0, 0, _H7, -_H7, _TQ7, _TQ7, _S314, -_S370, -_S370 / 2),
    (0, 0, 0, 0, _R2, 0, 0, 0, -0.5, 0, 0, 0, 0, -_TQ7, _Q7, _S314 / 2, _S370 / 2, 3 * _S370 / 2),
    (0, 0, 0, 0, _R2, 0, 0, 0, 0.5, 0, 0, 0, 0, _TQ7, -_Q7, -_S314 / 2, -_S370 / 2, -3 * _S370 / 2),
    (0, 0, 0, -_R2, 0, 0, 0, 0, 0, 0, 0, _H7, -_H7, _TQ7, _TQ7, _S314, -_S370, -_S370 / 2),
    (-_R2, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, _H3, -_H7, _H7, -_Q7, -_Q7, _S42, -_S370, -_S370 / 2),
    (0, _R2, 0, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, 0, _Q7, -_TQ7, _S314 / 2, 3 * _S370 / 2, -_S370 / 2),
    (0, _R2, 0, 0, 0, 0, 0, 0, 0, -0.5, 0, 0, 0, -_Q7, _TQ7, -_S314 / 2, -3 * _S370 / 2, _S370 / 2),
    (0, 0, 0, 0, 0, 0, 0, 0, 0.5, 0, 0, 0.5, 0.5, -_TQ7, _Q7, _S314 / 2, _S370 / 2, 3 * _S370 / 2),
    (0, 0, 0, 0, 0, 0, _R2, 0, 0, -0.5, 0, 0, 0, _Q7, -_TQ7, _S314 / 2, 3 * _S370 / 2, -_S370 / 2),
    (0, 0, _R2, 0, 0, 0, 0, -0.5, 0, 0, _H3, -_H7, _H7, -_Q7, -_Q7, _S42, -_S370, -_S370 / 2),
    (0, 0, _R2, 0, 0, 0, 0, 0.5, 0, 0, -_H3, _H7, -_H7, _Q7, _Q7, -_S42, _S370, _S370 / 2),
    (0, 0, 0, 0, 0, 0, 0, 0, -0.5, 0, 0, 0.5, 0.5, _TQ7, -_Q7, -_S314 / 2, -_S370 / 2, -3 * _S370 / 2),
    (0, 0, 0, 0, 0, 0, _R2, 0, 0, 0.5, 0, 0, 0, -_Q7, _TQ7, -_S314 / 2, -3 * _S370 / 2, _S370 / 2),
    (0, 0, 0, 0, 0, _R2, 0, 0, 0, 0, _T3, _H7, -_H7, _Q7, _Q7, -_S42, _S370, _S370 / 2),
    (0, 0, 0, 0, 0, _R2, 0, 0, 0, 0, -_T3, -_H7, _H7, -_Q7, -_Q7, _S42, -_S370, -_S370 / 2),
)


def mixing_matrix() -> np.ndarray:
    """The 18x18 unitary block acting on the first 18 lexicographic basis states."""
    return np.array(_MIXING_ROWS, dtype=complex)


# --- swap chains, 1-based indices as transcribed -----------------------------

LEFT_CHAIN = (
    (53, 57), (49, 53), (45, 49), (37, 45), (33, 41), (29, 37), (25, 33), (21, 33),
    (18, 61), (17, 29), (16, 57), (15, 53), (14, 49), (13, 25), (12, 45), (11, 41),
    (10, 37), (9, 21), (8, 33), (7, 29), (6, 25), (5, 21), (4, 21),
)

RIGHT_CHAIN = (
    (11, 12), (1, 14), (7, 15), (13, 15),
    (4, 21), (5, 21), (6, 25), (7, 29), (8, 33), (9, 21), (10, 37), (11, 41),
    (12, 45), (13, 25), (14, 49), (15, 53), (16, 57), (17, 29), (18, 61), (21, 33),
    (25, 33), (29, 37), (33, 41), (37, 45), (45, 49), (49, 53), (53, 57),
)


def permutation_chain() -> tuple:
    """The ordered swap fixture as (side, i, j) triples, indices 1-based."""
    return tuple(("L", i, j) for i, j in LEFT_CHAIN) + tuple(("R", i, j) for i, j in RIGHT_CHAIN)


def permutation_chain_csv() -> str:
    buf = io.StringIO()
    buf.write("side,i,j\n")
    for side, i, j in permutation_chain():
        buf.write(f"{side},{i},{j}\n")
    return buf.getvalue()


def _swap_matrix(i_one_based: int, j_one_based: int) -> np.ndarray:
    # Single 1-based -> 0-based conversion point for the whole fixture.
    return embed_two_level(TwoLevelUnitary(64, i_one_based - 1, j_one_based - 1, X_MATRIX))


def cloning_unitary() -> np.ndarray:
    """The published 64x64 cloning unitary: left chain x blockdiag x right chain."""
    block = np.eye(64, dtype=complex)
    block[:18, :18] = mixing_matrix()
    u = np.eye(64, dtype=complex)
    for i, j in LEFT_CHAIN:
        u = u @ _swap_matrix(i, j)
    u = u @ block
    for i, j in RIGHT_CHAIN:
        u = u @ _swap_matrix(i, j)
    return u


def verify_cloning_condition(u: np.ndarray, task: CloningTask = None) -> CloningVerdict:
    """Check that ``u`` maps each input onto its required image within TAU_CLONE."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (64, 64):
        raise ValueError(f"expected a 64x64 matrix, got {u.shape}")
    if task is None:
        task = default_task()
    residuals = []
    for idx in range(len(task.states)):
        got = u @ task_input(task, idx)
        residuals.append(float(np.max(np.abs(got - task_rhs(task, idx)))))
    residuals = tuple(residuals)
    return CloningVerdict(residuals, all(r <= TAU_CLONE for r in residuals))


def _signed_qr(m: np.ndarray):
    # Full QR with the R diagonal rotated to positive real, so equal Gram
    # matrices yield equal R factors.
    q, r = np.linalg.qr(m, mode="complete")
    k = m.shape[1]
    for c in range(k):
        piv = r[c, c]
        if abs(piv) == 0.0:
            raise ValueError("rank-deficient column set")
        ph = piv / abs(piv)
        q[:, c] *= ph
        r[c, :] *= np.conj(ph)
    return q, r[:k, :k]


def oracle_cloning_unitary(task: CloningTask = None) -> np.ndarray:
    """An independently constructed unitary satisfying the cloning condition.

    Maps each input exactly onto its required image and extends to the
    orthogonal complement by basis completion. Raises
    :class:`GramMismatchError` when the two Gram matrices disagree, since a
    unitary extension then cannot exist.
    """
    if task is None:
        task = default_task()
    n = len(task.states)
    xs = np.column_stack([task_input(task, i) for i in range(n)])
    ys = np.column_stack([task_rhs(task, i) for i in range(n)])
    gx = xs.conj().T @ xs
    gy = ys.conj().T @ ys
    dev = float(np.max(np.abs(gx - gy)))
    if dev > 1e-12:
        raise GramMismatchError(f"Gram matrices differ by {dev:.3e}")
    qx, _ = _signed_qr(xs)
    qy, _ = _signed_qr(ys)
    return qy @ qx.conj().T
