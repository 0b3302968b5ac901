"""Probabilistic-cloning network toolkit: construction, verification, lowering, simulation."""

from .linalg import (
    TAU_UNITARY,
    TOL_ANALYTIC,
    TwoLevelUnitary,
    adjoint,
    embed_two_level,
    kron,
    mat_mul,
    matrix_distance,
    matrix_from_text,
    matrix_to_text,
    random_unitary,
    unitarity_residual,
)
from .gates import (
    CNOT,
    Circuit,
    CircuitParseError,
    GlobalPhase,
    MultiControlled,
    SingleQubit,
    SynthesisReport,
    circuit_stats,
    parse_circuit,
    serialize_circuit,
    validate_circuit,
)
from .cloning import (
    CloneState,
    CloningTask,
    CloningVerdict,
    GramMismatchError,
    clone_states,
    cloning_unitary,
    default_task,
    input_state,
    mixing_matrix,
    oracle_cloning_unitary,
    permutation_chain,
    permutation_chain_csv,
    verify_cloning_condition,
)
from .synthesis import (
    StageReport,
    SynthesisError,
    expand_multicontrolled,
    graycode_lower,
    synthesize,
    two_level_decompose,
    zyz_decompose,
)
from .simulator import (
    ExperimentResult,
    apply_gate,
    circuit_to_matrix,
    clone_experiment,
    fidelity,
    postselect,
    run_circuit,
    state_from_text,
    state_to_text,
)

__version__ = "0.1.0"
