"""Compiler pipeline: unitary -> two-level factors -> Gray-code multi-controlled
gates -> CNOT plus single-qubit gates, with equality checked after every stage.

All stages reproduce their input exactly (never merely up to global phase).
The lowering is deterministic: fixed column elimination order, fixed Gray-code
path, principal branches everywhere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .gates import (
    CNOT,
    Circuit,
    GlobalPhase,
    MultiControlled,
    SingleQubit,
    SynthesisReport,
    X_MATRIX,
    circuit_stats,
)
from .linalg import TAU_UNITARY, TwoLevelUnitary, adjoint, embed_two_level, unitarity_residual

TOL_TWO_LEVEL = 1e-9
TOL_LOWER = 1e-10
TOL_ELEMENTARY = 1e-8

# Entries at or below this magnitude are treated as already eliminated.
_SKIP = 1e-13

MAX_QUBITS = 6


class SynthesisError(RuntimeError):
    """A stage failed to reproduce its input within tolerance."""


@dataclass(frozen=True)
class StageReport:
    stage: str
    count: int
    residual: float


def _require_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    res = unitarity_residual(u)
    if res > TAU_UNITARY:
        raise ValueError(f"matrix is not unitary (residual {res:.3e})")
    return u


def two_level_decompose(u: np.ndarray) -> list:
    """Factor a unitary into at most d(d-1)/2 two-level unitaries.

    Column-by-column Givens elimination: for column c the below-diagonal
    entries are zeroed top to bottom by mixing rows (c, r); leftover diagonal
    phases are swept into two-level diagonal factors at the end. The
    left-to-right product of the embedded factors equals the input exactly,
    and identity factors are omitted.
    """
    u = _require_unitary(u)
    d = u.shape[0]
    m = u.copy()
    factors: list = []
    if d == 1:
        if abs(m[0, 0] - 1.0) > _SKIP:
            raise ValueError("a 1x1 phase admits no two-level factorization")
        return factors

    for c in range(d - 1):
        for r in range(c + 1, d):
            b = m[r, c]
            if abs(b) <= _SKIP:
                continue
            a = m[c, c]
            norm = math.hypot(abs(a), abs(b))
            g = np.array(
                [[np.conj(a) / norm, np.conj(b) / norm], [b / norm, -a / norm]],
                dtype=complex,
            )
            m[[c, r], :] = g @ m[[c, r], :]
            factors.append(TwoLevelUnitary(d, c, r, adjoint(g)))

    # m is now diagonal up to _SKIP; fold the non-unit phases into two-level
    # diagonal factors (pairing them up keeps the count within the bound).
    leftover = [k for k in range(d) if abs(m[k, k] - 1.0) > _SKIP]
    while len(leftover) >= 2:
        i = leftover.pop(0)
        j = leftover.pop(0)
        factors.append(TwoLevelUnitary(d, i, j, np.diag([m[i, i], m[j, j]])))
    if leftover:
        k = leftover[0]
        last = factors[-1] if factors else None
        if last is not None and k in (last.i, last.j):
            ph = np.diag([m[k, k] if last.i == k else 1.0, m[k, k] if last.j == k else 1.0])
            factors[-1] = TwoLevelUnitary(d, last.i, last.j, last.block @ ph)
        elif k < d - 1:
            factors.append(TwoLevelUnitary(d, k, k + 1, np.diag([m[k, k], 1.0])))
        else:
            factors.append(TwoLevelUnitary(d, k - 1, k, np.diag([1.0, m[k, k]])))
    return factors


def remultiply(factors, dim: int) -> np.ndarray:
    """Left-to-right product of embedded factors, the stage-1 oracle."""
    out = np.eye(dim, dtype=complex)
    for f in factors:
        cols = [f.i, f.j]
        out[:, cols] = out[:, cols] @ f.block
    return out


def _qubit_bit(q: int, n: int) -> int:
    # Qubit 0 is the most significant bit of the basis index.
    return 1 << (n - 1 - q)


def _pattern_sandwich(n: int, target: int, pattern: int, u: np.ndarray) -> list:
    """Multi-controlled u with an arbitrary 0/1 control pattern.

    Controls sit on every qubit except the target; qubits whose pattern bit
    is 0 are conjugated with X, the same trick the published network uses.
    """
    controls = tuple(q for q in range(n) if q != target)
    flips = [SingleQubit(q, X_MATRIX) for q in controls if not pattern & _qubit_bit(q, n)]
    return flips + [MultiControlled(controls, target, u)] + flips


def graycode_lower(t: TwoLevelUnitary, n: int) -> Circuit:
    """Lower a two-level unitary on 2**n dimensions to multi-controlled gates.

    Differing bits of (i, j) are flipped most significant first, each flip a
    fully controlled X routing state i toward a Hamming neighbor of j; the
    last differing bit carries the controlled 2x2 block, then the chain is
    undone in reverse. The circuit matrix equals the embedded input exactly.
    """
    if t.dim != 1 << n:
        raise ValueError(f"dimension {t.dim} is not 2**{n}")
    i, j = t.i, t.j
    diff_qubits = [q for q in range(n) if (i ^ j) & _qubit_bit(q, n)]
    target = diff_qubits[-1]
    gates: list = []
    cur = i
    steps = []
    for q in diff_qubits[:-1]:
        steps.append((q, cur))
        cur ^= _qubit_bit(q, n)
    for q, ref in steps:
        gates.extend(_pattern_sandwich(n, q, ref, X_MATRIX))
    block = t.block
    if cur > j:
        # The routed state carries the target bit 1, so the block is written
        # in the (j, cur) ordering: swap its basis.
        block = block[::-1, ::-1]
    gates.extend(_pattern_sandwich(n, target, j, block))
    for q, ref in reversed(steps):
        gates.extend(_pattern_sandwich(n, q, ref, X_MATRIX))
    return Circuit(n, gates)


# --- single-qubit algebra ----------------------------------------------------


def rz(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def phase_gate(alpha: float) -> np.ndarray:
    return np.array([[1, 0], [0, cmath.exp(1j * alpha)]])


def zyz_decompose(u: np.ndarray):
    """Angles (alpha, beta, gamma, delta) with u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).

    Rz(t) = diag(e^{-it/2}, e^{it/2}) and Ry(t) = [[cos t/2, -sin t/2],
    [sin t/2, cos t/2]]. The phase alpha is always carried explicitly.
    Canonical branch: gamma in [0, pi]; when gamma is 0 the two z angles are
    split evenly (beta = delta), when gamma is pi they cancel (delta = -beta).
    """
    u = _require_unitary(u)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {u.shape}")
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    alpha = math.atan2(det.imag, det.real) / 2.0
    s = u * cmath.exp(-1j * alpha)
    c_mag = abs(s[0, 0])
    s_mag = abs(s[1, 0])
    gamma = 2.0 * math.atan2(s_mag, c_mag)
    if s_mag <= 1e-14:
        total = -2.0 * cmath.phase(s[0, 0])
        beta = delta = total / 2.0
    elif c_mag <= 1e-14:
        beta = cmath.phase(s[1, 0])
        delta = -beta
    else:
        plus = -2.0 * cmath.phase(s[0, 0])
        minus = 2.0 * cmath.phase(s[1, 0])
        beta = (plus + minus) / 2.0
        delta = (plus - minus) / 2.0
    return alpha, beta, gamma, delta


def sqrt_2x2(u: np.ndarray) -> np.ndarray:
    """Principal square root of a 2x2 unitary.

    The determinant phase is split off first (principal half), the special
    part is rooted in closed form through its rotation angle. When the
    special part is -I the rotation axis is fixed to z for determinism.
    """
    u = _require_unitary(u)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    half = math.atan2(det.imag, det.real) / 2.0
    s = u * cmath.exp(-1j * half)
    tr = (s[0, 0] + s[1, 1]).real
    tr = max(-2.0, min(2.0, tr))
    theta = math.acos(tr / 2.0)
    if math.sin(theta) < 1e-12:
        root = np.eye(2, dtype=complex) if tr > 0 else np.diag([1j, -1j])
    else:
        axis = (s - math.cos(theta) * np.eye(2)) / (1j * math.sin(theta))
        root = math.cos(theta / 2.0) * np.eye(2) + 1j * math.sin(theta / 2.0) * axis
    return cmath.exp(1j * half / 2.0) * root


_EXPANSION_CACHE: dict = {}


def _expand(controls: tuple, target: int, u: np.ndarray) -> tuple:
    key = (controls, target, u.tobytes())
    hit = _EXPANSION_CACHE.get(key)
    if hit is not None:
        return hit

    k = len(controls)
    if k == 0:
        gates = (SingleQubit(target, u),)
    elif k == 1:
        c = controls[0]
        if np.array_equal(u, X_MATRIX):
            gates = (CNOT(c, target),)
        else:
            alpha, beta, gamma, delta = zyz_decompose(u)
            a = rz(beta) @ ry(gamma / 2.0)
            b = ry(-gamma / 2.0) @ rz(-(delta + beta) / 2.0)
            cm = rz((delta - beta) / 2.0)
            gates = (
                SingleQubit(target, cm),
                CNOT(c, target),
                SingleQubit(target, b),
                CNOT(c, target),
                SingleQubit(target, a),
                SingleQubit(c, phase_gate(alpha)),
            )
    else:
        v = sqrt_2x2(u)
        head, tail = controls[:-1], controls[-1]
        gates = (
            _expand((tail,), target, v)
            + _expand(head, tail, X_MATRIX)
            + _expand((tail,), target, adjoint(v))
            + _expand(head, tail, X_MATRIX)
            + _expand(head, target, v)
        )
    _EXPANSION_CACHE[key] = gates
    return gates


def expand_multicontrolled(controls, target: int, u: np.ndarray, num_qubits: int = None) -> Circuit:
    """Expand a k-controlled 2x2 unitary into CNOT and single-qubit gates.

    k = 0 emits the gate directly, k = 1 uses the two-CNOT ABC construction
    with an explicit controlled-phase correction, and k >= 2 recurses through
    controlled square roots without ancillas. Equality with the multi-
    controlled matrix is exact, not up to phase.
    """
    controls = tuple(controls)
    u = _require_unitary(np.asarray(u, dtype=complex))
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {u.shape}")
    touched = controls + (target,)
    if len(set(touched)) != len(touched):
        raise ValueError(f"index clash among controls {controls} and target {target}")
    u = u.copy()
    u.setflags(write=False)
    if num_qubits is None:
        num_qubits = max(touched) + 1
    return Circuit(num_qubits, list(_expand(controls, target, u)))


def synthesize(u: np.ndarray):
    """Full lowering of a unitary on at most six qubits to elementary gates.

    Returns the elementary circuit and a report with per-variant counts, the
    per-stage residuals, and the measured end-to-end residual. Raises
    :class:`SynthesisError` if any stage drifts beyond its tolerance.
    """
    from .simulator import circuit_to_matrix

    u = _require_unitary(u)
    d = u.shape[0]
    n = d.bit_length() - 1
    if 1 << n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    if n == 0:
        raise ValueError("need at least one qubit")

    factors = two_level_decompose(u)
    r1 = float(np.max(np.abs(remultiply(factors, d) - u)))
    if r1 > TOL_TWO_LEVEL:
        raise SynthesisError(f"two-level stage residual {r1:.3e} exceeds {TOL_TWO_LEVEL}")

    # The factor list multiplies left to right as matrices, while circuit
    # gates hit the state first to last, so factors are emitted in reverse.
    mcu_gates = []
    r2 = 0.0
    for f in reversed(factors):
        circ = graycode_lower(f, n)
        r2 = max(r2, float(np.max(np.abs(circuit_to_matrix(circ) - embed_two_level(f)))))
        mcu_gates.extend(circ.gates)
    if r2 > TOL_LOWER:
        raise SynthesisError(f"gray-code stage residual {r2:.3e} exceeds {TOL_LOWER}")

    elem = []
    for g in mcu_gates:
        if isinstance(g, MultiControlled):
            elem.extend(_expand(g.controls, g.target, g.u))
        else:
            elem.append(g)
    circuit = Circuit(n, elem)
    r3 = float(np.max(np.abs(circuit_to_matrix(circuit) - u)))
    if r3 > TOL_ELEMENTARY:
        raise SynthesisError(f"elementary stage residual {r3:.3e} exceeds {TOL_ELEMENTARY}")

    report = circuit_stats(circuit)
    report.two_level_count = len(factors)
    report.multi_controlled_count = sum(1 for g in mcu_gates if isinstance(g, MultiControlled))
    report.max_residual = r3
    report.stages = (
        StageReport("two-level", len(factors), r1),
        StageReport("multi-controlled", report.multi_controlled_count, r2),
        StageReport("elementary", len(elem), r3),
    )
    return circuit, report
