"""Exact qudit state-vector simulation of remote state preparation.

Deterministic preparation over arbitrary Schmidt-form entangled channels,
the probabilistic concentration baseline, and the ancilla-assisted
deterministic baseline over a maximal channel, plus exact branch
enumeration, an independent brute-force oracle, simulated single-qubit
tomography, and a reproducible sweep/verification CLI.
"""

from .errors import (
    CapacityExceeded,
    DegenerateState,
    IndexOutOfRange,
    InvalidState,
    MismatchedOutcomeSpace,
    NonUnitaryGate,
    ShapeError,
    SimulationError,
    Unsupported,
)
from .gates import (
    GateMatrix,
    cadd,
    controlled_shift,
    correction_unitary,
    csub,
    cu_concentration,
    encoding_unitary,
    encoding_unitary_literal,
    identity,
    make_gate,
    negation_shift,
    nguyen_bases,
    pauli_x,
    pauli_z,
)
from .linalg import (
    complete_to_unitary,
    dagger,
    fidelity_pure,
    kron,
    kron_all,
    transport_unitary,
    unitarity_defect,
)
from .oracle import (
    BranchDistribution,
    ComparisonReport,
    RunSpec,
    compare_exact,
    compare_sampled,
    enumerate_naive,
    naive_branch_fidelities,
    table_distribution,
)
from .protocols import (
    ChannelSpec,
    OutcomeRow,
    OutcomeTable,
    TargetState,
    Transcript,
    exact_outcome_table,
    run_deterministic_rsp,
    run_nguyen_rsp,
    run_probabilistic_rsp,
    run_protocol,
    success_probability,
)
from .register import (
    DensityMatrix,
    MeasurementRecord,
    StateRegister,
    basis_register,
    channel_register,
    derive_rng,
)
from .tomography import (
    PauliEstimates,
    TomoResult,
    fidelity_mixed,
    reconstruct_qubit,
    sample_pauli_expectations,
    tomograph,
    trace_distance,
)

__version__ = "0.1.0"

__all__ = [
    "BranchDistribution", "CapacityExceeded", "ChannelSpec", "ComparisonReport",
    "DegenerateState", "DensityMatrix", "GateMatrix", "IndexOutOfRange",
    "InvalidState", "MeasurementRecord", "MismatchedOutcomeSpace",
    "NonUnitaryGate", "OutcomeRow", "OutcomeTable", "PauliEstimates",
    "RunSpec", "ShapeError", "SimulationError", "StateRegister", "TargetState",
    "TomoResult", "Transcript", "Unsupported", "basis_register", "cadd",
    "channel_register", "compare_exact", "compare_sampled",
    "complete_to_unitary", "controlled_shift", "correction_unitary", "csub",
    "cu_concentration", "dagger", "derive_rng", "encoding_unitary",
    "encoding_unitary_literal", "enumerate_naive", "exact_outcome_table",
    "fidelity_mixed", "fidelity_pure", "identity", "kron", "kron_all",
    "make_gate", "naive_branch_fidelities", "negation_shift", "nguyen_bases",
    "pauli_x", "pauli_z", "reconstruct_qubit", "run_deterministic_rsp",
    "run_nguyen_rsp", "run_probabilistic_rsp", "run_protocol",
    "sample_pauli_expectations", "success_probability", "table_distribution",
    "tomograph", "trace_distance", "transport_unitary", "unitarity_defect",
]
