"""Variational tuning of idle-window error mitigation for VQE workloads.

The package schedules circuits on an integer-cycle timeline, finds per-qubit
idle windows, simulates noisy evolution with a dense density matrix, and
tunes dynamical-decoupling insertions plus single-qubit gate positions
against the VQE objective, window by window.
"""

from .circuit import (
    DEFAULT_DURATIONS,
    CircuitError,
    DurationTable,
    Gate,
    GateKind,
    IdleWindow,
    TimedCircuit,
    TimedGate,
    extract_idle_windows,
    insert_in_window,
    schedule_alap,
    shift_boundary_gate,
    to_gates,
    trace_fidelity,
    unitary_of,
)
from .mitigation import (
    DDSequenceKind,
    MitigationConfig,
    MitigationError,
    WindowSetting,
    apply_config,
    insert_dd,
    max_rounds,
    mem_calibrate,
    mem_correct,
)
from .noise import NoiseModel, NoiseModelError
from .observables import (
    AnsatzSpec,
    ObservableError,
    PauliHamiltonian,
    exact_ground_energy,
    load_hamiltonian,
    objective,
    su2_ansatz,
    tfim_hamiltonian,
)
from .qasm import QasmError, emit, parse
from .sim import (
    CountsDistribution,
    DensityMatrix,
    SimulationError,
    apply_gate,
    apply_idle,
    evolve,
    hellinger_fidelity,
    measure_distribution,
    pauli_expectation,
    sample_distribution,
)
from .tuner import (
    GridSpec,
    SpsaSettings,
    TuneTrace,
    TunerError,
    run_experiment,
    spsa_minimize,
    tune_windows,
)

__version__ = "0.1.0"
