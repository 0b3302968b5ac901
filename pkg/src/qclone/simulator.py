"""Dense state-vector execution, post-selected measurement, and the cloning experiment.

Gate application is a stride update over amplitude pairs, O(2**n) per gate;
no gate matrices are materialized except in :func:`circuit_to_matrix`. Long
circuits are compiled to flat arrays and run through a numba kernel when
numba is importable, with an equivalent numpy path as fallback.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from . import cloning
from .gates import CNOT, Circuit, GlobalPhase, MultiControlled, SingleQubit, X_MATRIX
from .linalg import format_complex, parse_complex

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

# Post-selection outcomes below this probability are reported as empty.
ZERO_PROBABILITY = 1e-14

# Circuits at least this long take the compiled fast path.
_FASTPATH_THRESHOLD = 512


@dataclass(frozen=True)
class ExperimentResult:
    label: str
    success_probability: float
    clone_fidelity: float
    failure_probability: float
    failure_ab_state: np.ndarray


def _num_qubits(psi: np.ndarray) -> int:
    n = psi.shape[0].bit_length() - 1
    if 1 << n != psi.shape[0]:
        raise ValueError(f"state length {psi.shape[0]} is not a power of two")
    return n


def _bit(q: int, n: int) -> int:
    return 1 << (n - 1 - q)


def _apply_pair_update(amps, cmask: int, tbit: int, u) -> None:
    # amps may be 1-d (a state) or 2-d (a batch of states in columns).
    dim = amps.shape[0]
    idx = np.arange(dim)
    i0 = idx[((idx & tbit) == 0) & ((idx & cmask) == cmask)]
    i1 = i0 | tbit
    a0 = amps[i0].copy()
    a1 = amps[i1]
    amps[i0] = u[0, 0] * a0 + u[0, 1] * a1
    amps[i1] = u[1, 0] * a0 + u[1, 1] * a1


def _gate_params(g, n: int):
    """Uniform (control mask, target bit, 2x2 matrix) view of a gate."""
    if isinstance(g, SingleQubit):
        return 0, _bit(g.target, n), g.u
    if isinstance(g, MultiControlled):
        cmask = 0
        for c in g.controls:
            cmask |= _bit(c, n)
        return cmask, _bit(g.target, n), g.u
    if isinstance(g, CNOT):
        return _bit(g.control, n), _bit(g.target, n), X_MATRIX
    raise TypeError(f"unsupported gate {type(g).__name__}")


def _apply_inplace(amps, g, n: int) -> None:
    if isinstance(g, GlobalPhase):
        amps *= complex(math.cos(g.phi), math.sin(g.phi))
        return
    cmask, tbit, u = _gate_params(g, n)
    _apply_pair_update(amps, cmask, tbit, u)


def _touched_qubits(g) -> tuple:
    if isinstance(g, SingleQubit):
        return (g.target,)
    if isinstance(g, MultiControlled):
        return g.controls + (g.target,)
    if isinstance(g, CNOT):
        return (g.control, g.target)
    return ()


def apply_gate(psi: np.ndarray, g) -> np.ndarray:
    """Apply one gate to a state, returning a new state vector."""
    psi = np.asarray(psi, dtype=complex)
    n = _num_qubits(psi)
    for q in _touched_qubits(g):
        if not 0 <= q < n:
            raise ValueError(f"gate touches qubit {q} but the state has {n} qubits")
    out = psi.copy()
    _apply_inplace(out, g, n)
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _run_kernel(amps, kinds, cmasks, tbits, mats, phases):  # pragma: no cover - jitted
        dim = amps.shape[0]
        for g in range(kinds.shape[0]):
            if kinds[g] == 0:
                cm = cmasks[g]
                tb = tbits[g]
                u00 = mats[g, 0, 0]
                u01 = mats[g, 0, 1]
                u10 = mats[g, 1, 0]
                u11 = mats[g, 1, 1]
                for i0 in range(dim):
                    if (i0 & tb) == 0 and (i0 & cm) == cm:
                        i1 = i0 | tb
                        a0 = amps[i0]
                        a1 = amps[i1]
                        amps[i0] = u00 * a0 + u01 * a1
                        amps[i1] = u10 * a0 + u11 * a1
            else:
                ph = phases[g]
                for i in range(dim):
                    amps[i] = amps[i] * ph


_compiled_cache: dict = {}


def _compile_circuit(c: Circuit):
    """Flatten a circuit into arrays for the kernel; cached per circuit object."""
    key = id(c)
    hit = _compiled_cache.get(key)
    if hit is not None and hit[0]() is c:
        return hit[1]
    n = c.num_qubits
    count = len(c.gates)
    kinds = np.zeros(count, dtype=np.int8)
    cmasks = np.zeros(count, dtype=np.int64)
    tbits = np.zeros(count, dtype=np.int64)
    mats = np.zeros((count, 2, 2), dtype=np.complex128)
    phases = np.ones(count, dtype=np.complex128)
    for k, g in enumerate(c.gates):
        if isinstance(g, GlobalPhase):
            kinds[k] = 1
            phases[k] = complex(math.cos(g.phi), math.sin(g.phi))
        else:
            cmask, tbit, u = _gate_params(g, n)
            cmasks[k] = cmask
            tbits[k] = tbit
            mats[k] = u
    arrays = (kinds, cmasks, tbits, mats, phases)
    _compiled_cache[key] = (weakref.ref(c), arrays)
    return arrays


def run_circuit(c: Circuit, psi0: np.ndarray) -> np.ndarray:
    """Apply all gates of a circuit to a state, left to right."""
    psi = np.array(psi0, dtype=complex)
    n = _num_qubits(psi)
    if n != c.num_qubits:
        raise ValueError(f"state has {n} qubits but the circuit expects {c.num_qubits}")
    if HAVE_NUMBA and len(c.gates) >= _FASTPATH_THRESHOLD:
        _run_kernel(psi, *_compile_circuit(c))
        return psi
    for g in c.gates:
        _apply_inplace(psi, g, n)
    return psi


def circuit_to_matrix(c: Circuit) -> np.ndarray:
    """The full matrix of a circuit; column k is the image of basis state k."""
    n = c.num_qubits
    dim = 1 << n
    m = np.eye(dim, dtype=complex)
    for g in c.gates:
        _apply_inplace(m, g, n)
    return m


def postselect(psi: np.ndarray, qubits, outcome):
    """Project onto a measurement outcome of a qubit subset.

    Returns ``(probability, renormalized state)``; the state is ``None``
    when the outcome carries probability below ZERO_PROBABILITY.
    """
    psi = np.asarray(psi, dtype=complex)
    n = _num_qubits(psi)
    qubits = list(qubits)
    outcome = list(outcome)
    if len(qubits) != len(outcome):
        raise ValueError("qubits and outcome must have equal length")
    idx = np.arange(psi.shape[0])
    sel = np.ones(psi.shape[0], dtype=bool)
    for q, b in zip(qubits, outcome):
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
        bit = (idx & _bit(q, n)) != 0
        sel &= bit if b else ~bit
    prob = float(np.sum(np.abs(psi[sel]) ** 2))
    if prob < ZERO_PROBABILITY:
        return prob, None
    out = np.where(sel, psi, 0.0) / math.sqrt(prob)
    return prob, out


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Squared overlap |<a|b>|^2 of two pure states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)) ** 2)


def _failure_ab_factor(failure_state: np.ndarray, flag_qubits) -> np.ndarray:
    # Rearrange to an (AB, P) amplitude matrix; the leading left singular
    # vector is the AB factor (exact whenever the branch is a product state).
    n = _num_qubits(failure_state)
    flags = list(flag_qubits)
    rest = [q for q in range(n) if q not in flags]
    tensor = failure_state.reshape((2,) * n).transpose(rest + flags)
    amp = tensor.reshape(1 << len(rest), 1 << len(flags))
    u, s, _ = np.linalg.svd(amp, full_matrices=False)
    return u[:, 0] * (1.0 if s[0] > 0 else 0.0)


_synth_cache: dict = {}


def synthesized_cloning_network():
    """(circuit, report) for the published cloning unitary, built once per process."""
    if "circuit" not in _synth_cache:
        from .synthesis import synthesize

        circ, report = synthesize(cloning.cloning_unitary())
        _synth_cache["circuit"] = circ
        _synth_cache["report"] = report
    return _synth_cache["circuit"], _synth_cache["report"]


def synthesized_cloning_circuit() -> Circuit:
    return synthesized_cloning_network()[0]


def clone_experiment(label: str, engine: str = "matrix", circuit: Circuit = None,
                     task: cloning.CloningTask = None) -> ExperimentResult:
    """Run the cloning protocol end to end for one input state.

    The state is prepared, evolved by the chosen engine, and the flag is
    post-selected: outcome (0,0) is the success branch (fidelity measured
    against both clones), everything else aggregates into the failure branch.
    """
    if task is None:
        task = cloning.default_task()
    try:
        idx = cloning.STATE_LABELS.index(label)
    except ValueError:
        raise ValueError(f"unknown state label {label!r}") from None
    psi = cloning.task_input(task, idx)

    if engine == "matrix":
        evolved = cloning.cloning_unitary() @ psi
    elif engine == "circuit":
        circ = circuit if circuit is not None else synthesized_cloning_circuit()
        evolved = run_circuit(circ, psi)
    else:
        raise ValueError(f"unknown engine {engine!r}, expected 'matrix' or 'circuit'")

    p_succ, succ = postselect(evolved, task.flag_qubits, task.success_outcome)
    target = cloning.success_target(task, idx)
    fid = fidelity(succ, target) if succ is not None else 0.0

    n = _num_qubits(evolved)
    sel = np.ones(evolved.shape[0], dtype=bool)
    arange = np.arange(evolved.shape[0])
    for q, b in zip(task.flag_qubits, task.success_outcome):
        bit = (arange & _bit(q, n)) != 0
        sel &= bit if b else ~bit
    failure = np.where(sel, 0.0, evolved)
    p_fail = float(np.sum(np.abs(failure) ** 2))
    if p_fail >= ZERO_PROBABILITY:
        failure = failure / math.sqrt(p_fail)
        ab = _failure_ab_factor(failure, task.flag_qubits)
    else:
        ab = np.zeros(1 << (n - len(task.flag_qubits)), dtype=complex)

    return ExperimentResult(
        label=label,
        success_probability=p_succ,
        clone_fidelity=fid,
        failure_probability=p_fail,
        failure_ab_state=ab,
    )


# --- state-vector text format -------------------------------------------------


def state_to_text(psi: np.ndarray) -> str:
    psi = np.asarray(psi, dtype=complex)
    n = _num_qubits(psi)
    lines = [f"qubits {n}"]
    lines.extend(format_complex(z) for z in psi)
    return "\n".join(lines) + "\n"


def state_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty state text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "qubits":
        raise ValueError(f"expected 'qubits <n>' header, got {lines[0]!r}")
    n = int(head[1])
    dim = 1 << n
    if len(lines) - 1 != dim:
        raise ValueError(f"expected {dim} amplitudes, got {len(lines) - 1}")
    return np.array([parse_complex(ln) for ln in lines[1:]], dtype=complex)
