"""Gate and circuit IR with validation, statistics, and text serialization.

Gates are applied to the state left to right in ``Circuit.gates`` order.
Controls are positive polarity only (active on |1>); negative controls are
expressed by conjugating with explicit X gates. Qubit 0 is the most
significant bit of the basis index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .linalg import TAU_UNITARY, format_complex, parse_complex, unitarity_residual


def _freeze(u) -> np.ndarray:
    m = np.array(u, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"gate matrix must be 2x2, got {m.shape}")
    m.setflags(write=False)
    return m


X_MATRIX = _freeze([[0, 1], [1, 0]])
I_MATRIX = _freeze([[1, 0], [0, 1]])
H_MATRIX = _freeze(np.array([[1, 1], [1, -1]]) / np.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class SingleQubit:
    """Arbitrary 2x2 unitary on one qubit. ``label`` is cosmetic only."""

    target: int
    u: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "u", _freeze(self.u))

    def __eq__(self, other):
        return (
            isinstance(other, SingleQubit)
            and self.target == other.target
            and np.array_equal(self.u, other.u)
        )


@dataclass(frozen=True, eq=False)
class MultiControlled:
    """Apply ``u`` to ``target`` iff every control qubit is |1>."""

    controls: tuple
    target: int
    u: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "u", _freeze(self.u))

    def __eq__(self, other):
        return (
            isinstance(other, MultiControlled)
            and self.controls == other.controls
            and self.target == other.target
            and np.array_equal(self.u, other.u)
        )


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


@dataclass(frozen=True)
class GlobalPhase:
    """Multiply the whole state by exp(i*phi)."""

    phi: float


Gate = Union[SingleQubit, MultiControlled, CNOT, GlobalPhase]


@dataclass(eq=False)
class Circuit:
    num_qubits: int
    gates: list

    def __eq__(self, other):
        return (
            isinstance(other, Circuit)
            and self.num_qubits == other.num_qubits
            and len(self.gates) == len(other.gates)
            and all(a == b for a, b in zip(self.gates, other.gates))
        )


@dataclass
class SynthesisReport:
    two_level_count: int = 0
    multi_controlled_count: int = 0
    cnot_count: int = 0
    single_qubit_count: int = 0
    max_residual: float = 0.0
    stages: tuple = ()


class CircuitParseError(ValueError):
    pass


def _gate_violations(g: Gate, n: int, pos: int) -> list:
    out = []
    if isinstance(g, SingleQubit):
        if not 0 <= g.target < n:
            out.append(f"target {g.target} out of range at gate {pos}")
        if unitarity_residual(g.u) > TAU_UNITARY:
            out.append(f"non-unitary matrix at gate {pos}")
    elif isinstance(g, MultiControlled):
        for c in g.controls:
            if not 0 <= c < n:
                out.append(f"control {c} out of range at gate {pos}")
        if len(set(g.controls)) != len(g.controls):
            out.append(f"duplicate controls at gate {pos}")
        if not 0 <= g.target < n:
            out.append(f"target {g.target} out of range at gate {pos}")
        if g.target in g.controls:
            out.append(f"control equals target at gate {pos}")
        if unitarity_residual(g.u) > TAU_UNITARY:
            out.append(f"non-unitary matrix at gate {pos}")
    elif isinstance(g, CNOT):
        if not 0 <= g.control < n:
            out.append(f"control {g.control} out of range at gate {pos}")
        if not 0 <= g.target < n:
            out.append(f"target {g.target} out of range at gate {pos}")
        if g.control == g.target:
            out.append(f"control equals target at gate {pos}")
    elif isinstance(g, GlobalPhase):
        if not np.isfinite(g.phi):
            out.append(f"non-finite phase at gate {pos}")
    else:
        out.append(f"unknown gate type {type(g).__name__} at gate {pos}")
    return out


def validate_circuit(c: Circuit) -> list:
    """Return every invariant violation; the circuit is valid iff empty."""
    if c.num_qubits < 1:
        return [f"num_qubits must be >= 1, got {c.num_qubits}"]
    out = []
    for pos, g in enumerate(c.gates):
        out.extend(_gate_violations(g, c.num_qubits, pos))
    return out


def circuit_stats(c: Circuit) -> SynthesisReport:
    rep = SynthesisReport()
    for g in c.gates:
        if isinstance(g, SingleQubit):
            rep.single_qubit_count += 1
        elif isinstance(g, MultiControlled):
            rep.multi_controlled_count += 1
        elif isinstance(g, CNOT):
            rep.cnot_count += 1
    return rep


# --- text format ---------------------------------------------------------
#
#   qubits <n>
#   CX <c> <t>
#   MCX <c1> <c2> ... ; <t>
#   U <t> [<e00> <e01> <e10> <e11>]
#   MCU <c1> ... ; <t> [<e00> <e01> <e10> <e11>]
#   PHASE <radians>
#
# '#' starts a comment; matrix entries are row-major complex literals.


def _matrix_payload(u: np.ndarray) -> str:
    return "[" + " ".join(format_complex(z) for z in u.reshape(-1)) + "]"


def serialize_circuit(c: Circuit) -> str:
    bad = validate_circuit(c)
    if bad:
        raise ValueError("cannot serialize invalid circuit: " + "; ".join(bad))
    lines = [f"qubits {c.num_qubits}"]
    for g in c.gates:
        if isinstance(g, CNOT):
            lines.append(f"CX {g.control} {g.target}")
        elif isinstance(g, MultiControlled):
            ctrls = " ".join(str(q) for q in g.controls)
            if np.array_equal(g.u, X_MATRIX):
                lines.append(f"MCX {ctrls} ; {g.target}".replace("MCX  ;", "MCX ;"))
            else:
                lines.append(f"MCU {ctrls} ; {g.target} {_matrix_payload(g.u)}".replace("MCU  ;", "MCU ;"))
        elif isinstance(g, SingleQubit):
            lines.append(f"U {g.target} {_matrix_payload(g.u)}")
        elif isinstance(g, GlobalPhase):
            lines.append(f"PHASE {g.phi:.17g}")
    return "\n".join(lines) + "\n"


def _parse_matrix_tokens(toks: list, lineno: int) -> np.ndarray:
    if len(toks) != 6 or toks[0] != "[" or toks[-1] != "]":
        raise CircuitParseError(f"expected [4 complex entries] on line {lineno}")
    try:
        vals = [parse_complex(t) for t in toks[1:5]]
    except ValueError as e:
        raise CircuitParseError(f"{e} on line {lineno}") from None
    u = np.array(vals, dtype=complex).reshape(2, 2)
    res = unitarity_residual(u)
    if res > TAU_UNITARY:
        raise CircuitParseError(f"non-unitary matrix payload (residual {res:.3e}) on line {lineno}")
    return u


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CircuitParseError(f"expected integer, got {tok!r} on line {lineno}") from None


def parse_circuit(text: str) -> Circuit:
    """Inverse of :func:`serialize_circuit`; tolerates whitespace and comments."""
    num_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.replace("[", " [ ").replace("]", " ] ").split()
        op = toks[0]
        if num_qubits is None:
            if op != "qubits" or len(toks) != 2:
                raise CircuitParseError(f"expected 'qubits <n>' header on line {lineno}")
            num_qubits = _parse_int(toks[1], lineno)
            if num_qubits < 1:
                raise CircuitParseError(f"qubit count must be >= 1 on line {lineno}")
            continue

        def check_idx(q):
            if not 0 <= q < num_qubits:
                raise CircuitParseError(f"qubit index out of range line {lineno}")
            return q

        if op == "CX":
            if len(toks) != 3:
                raise CircuitParseError(f"malformed CX on line {lineno}")
            c = check_idx(_parse_int(toks[1], lineno))
            t = check_idx(_parse_int(toks[2], lineno))
            if c == t:
                raise CircuitParseError(f"control equals target on line {lineno}")
            gates.append(CNOT(c, t))
        elif op in ("MCX", "MCU"):
            if ";" not in toks:
                raise CircuitParseError(f"missing ';' separator on line {lineno}")
            sep = toks.index(";")
            ctrls = tuple(check_idx(_parse_int(t, lineno)) for t in toks[1:sep])
            rest = toks[sep + 1 :]
            if not rest:
                raise CircuitParseError(f"missing target on line {lineno}")
            tgt = check_idx(_parse_int(rest[0], lineno))
            if tgt in ctrls:
                raise CircuitParseError(f"control equals target on line {lineno}")
            if len(set(ctrls)) != len(ctrls):
                raise CircuitParseError(f"duplicate controls on line {lineno}")
            if op == "MCX":
                if len(rest) != 1:
                    raise CircuitParseError(f"trailing tokens after MCX target on line {lineno}")
                gates.append(MultiControlled(ctrls, tgt, X_MATRIX))
            else:
                gates.append(MultiControlled(ctrls, tgt, _parse_matrix_tokens(rest[1:], lineno)))
        elif op == "U":
            if len(toks) < 2:
                raise CircuitParseError(f"malformed U on line {lineno}")
            tgt = check_idx(_parse_int(toks[1], lineno))
            gates.append(SingleQubit(tgt, _parse_matrix_tokens(toks[2:], lineno)))
        elif op == "PHASE":
            if len(toks) != 2:
                raise CircuitParseError(f"malformed PHASE on line {lineno}")
            try:
                phi = float(toks[1])
            except ValueError:
                raise CircuitParseError(f"bad phase value on line {lineno}") from None
            gates.append(GlobalPhase(phi))
        else:
            raise CircuitParseError(f"unknown opcode {op!r} on line {lineno}")
    if num_qubits is None:
        raise CircuitParseError("missing 'qubits <n>' header")
    return Circuit(num_qubits, gates)
