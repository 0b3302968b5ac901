import math

import numpy as np
import pytest

from qclone import cloning, synthesis
from qclone.gates import CNOT, Circuit, GlobalPhase, MultiControlled, SingleQubit
from qclone.linalg import random_unitary


def controlled_matrix(n, controls, target, u):
    """Independent oracle for a multi-controlled gate: direct basis enumeration.

    Column ``col`` is the image of basis state ``col``; the 2x2 block acts on
    the target bit only when every control bit of ``col`` is 1. Shares no
    code with the simulator or the synthesis pipeline.
    """
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        if not all((col >> (n - 1 - c)) & 1 for c in controls):
            m[col, col] = 1.0
            continue
        tbit = 1 << (n - 1 - target)
        if col & tbit:
            m[col & ~tbit, col] = u[0, 1]
            m[col, col] = u[1, 1]
        else:
            m[col, col] = u[0, 0]
            m[col | tbit, col] = u[1, 0]
    return m


def random_circuit(rng, num_qubits=None, max_gates=12):
    n = num_qubits or int(rng.integers(1, 7))
    gates = []
    for _ in range(int(rng.integers(0, max_gates + 1))):
        kind = rng.integers(0, 4)
        if kind == 0:
            gates.append(SingleQubit(int(rng.integers(n)), random_unitary(2, rng)))
        elif kind == 1 and n >= 2:
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(CNOT(int(c), int(t)))
        elif kind == 2 and n >= 2:
            k = int(rng.integers(1, n))
            picks = rng.choice(n, size=k + 1, replace=False)
            gates.append(MultiControlled(tuple(int(q) for q in picks[:-1]), int(picks[-1]), random_unitary(2, rng)))
        else:
            gates.append(GlobalPhase(float(rng.normal())))
    return Circuit(n, gates)


# 2x2 real unitary blocks appearing as controlled operations in the
# reference network, written from their exact surd expressions.
def _blk(a, b, c, d):
    return np.array([[a, b], [c, d]], dtype=complex)


R2 = 1.0 / math.sqrt(2.0)

CONTROLLED_BLOCKS = (
    _blk(R2, -R2, -R2, -R2),
    _blk(R2, R2, R2, -R2),
    _blk(1 / math.sqrt(3), math.sqrt(2 / 3), math.sqrt(2 / 3), -1 / math.sqrt(3)),
    _blk(-math.sqrt(2 / 5), -math.sqrt(3 / 5), -math.sqrt(3 / 5), math.sqrt(2 / 5)),
    _blk(math.sqrt(5 / 2) / 2, -math.sqrt(3 / 2) / 2, -math.sqrt(3 / 2) / 2, -math.sqrt(5 / 2) / 2),
    _blk(2 / math.sqrt(11), -math.sqrt(7 / 11), -math.sqrt(7 / 11), -2 / math.sqrt(11)),
    _blk(math.sqrt(11 / 14), -math.sqrt(3 / 14), -math.sqrt(3 / 14), -math.sqrt(11 / 14)),
    _blk(2 * math.sqrt(2 / 11), -math.sqrt(3 / 11), -math.sqrt(3 / 11), -2 * math.sqrt(2 / 11)),
    _blk(3 / math.sqrt(205), 14 / math.sqrt(205), 14 / math.sqrt(205), -3 / math.sqrt(205)),
    _blk(math.sqrt(123 / 131), -2 * math.sqrt(2 / 131), -2 * math.sqrt(2 / 131), -math.sqrt(123 / 131)),
    _blk(-math.sqrt(131 / 203), 6 * math.sqrt(2 / 203), 6 * math.sqrt(2 / 203), math.sqrt(131 / 203)),
    _blk(math.sqrt(29 / 2) / 4, -math.sqrt(3 / 2) / 4, -math.sqrt(3 / 2) / 4, -math.sqrt(29 / 2) / 4),
    _blk(-5 * math.sqrt(131 / 5453), -33 * math.sqrt(2 / 5453), -33 * math.sqrt(2 / 5453), 5 * math.sqrt(131 / 5453)),
    _blk(-math.sqrt(1653 / 1703), 5 * math.sqrt(2 / 1703), 5 * math.sqrt(2 / 1703), math.sqrt(1653 / 1703)),
    _blk(math.sqrt(26 / 29), math.sqrt(3 / 29), math.sqrt(3 / 29), -math.sqrt(26 / 29)),
    _blk(-math.sqrt(13 / 38), -5 / math.sqrt(38), -5 / math.sqrt(38), math.sqrt(13 / 38)),
    _blk(3 / math.sqrt(13), 2 / math.sqrt(13), 2 / math.sqrt(13), -3 / math.sqrt(13)),
    _blk(-1 / math.sqrt(5), 2 / math.sqrt(5), 2 / math.sqrt(5), 1 / math.sqrt(5)),
)


@pytest.fixture(scope="session")
def reference_unitary():
    return cloning.cloning_unitary()


@pytest.fixture(scope="session")
def reference_factors(reference_unitary):
    return synthesis.two_level_decompose(reference_unitary)


@pytest.fixture(scope="session")
def synthesized():
    """(circuit, report) for the full lowering of the published unitary."""
    from qclone import simulator

    return simulator.synthesized_cloning_network()
