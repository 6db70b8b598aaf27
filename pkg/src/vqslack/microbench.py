"""Single-qubit micro-benchmark circuits and their sweeps.

``spin_echo_sweep`` reproduces the movable-pulse experiment: H, a long idle
window, an X whose position is swept across the window, a final H (X-basis
readout), and a measurement. ``dd_round_sweep`` fills one large window with
0..max rounds of a DD sequence and tracks Hellinger fidelity against the
noiseless outcome for each count.

Note on geometry: with integer cycle placement, the echo refocuses exactly
only when the idle it must balance splits evenly, i.e. for an even window
length. The default window of 799 cycles matches the historical experiment;
pass an even ``window_cycles`` when exact refocusing at fraction 0.5 matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Gate, GateKind, TimedCircuit, extract_idle_windows, schedule_alap, shift_boundary_gate
from .mitigation import DDSequenceKind, insert_dd, max_rounds
from .noise import NoiseModel
from .sim import CountsDistribution, evolve, hellinger_fidelity, measure_distribution

SPIN_ECHO_WINDOW_CYCLES = 799
DD_SWEEP_WINDOW_CYCLES = 420


def spin_echo_circuit(noise: NoiseModel, window_cycles: int = SPIN_ECHO_WINDOW_CYCLES) -> TimedCircuit:
    gates = [
        Gate(GateKind.H, (0,)),
        Gate(GateKind.DELAY, (0,), delay=window_cycles),
        Gate(GateKind.X, (0,)),
        Gate(GateKind.H, (0,)),
        Gate(GateKind.MEASURE, (0,)),
    ]
    return schedule_alap(gates, 1, noise.durations)


def dd_window_circuit(noise: NoiseModel, window_cycles: int = DD_SWEEP_WINDOW_CYCLES) -> TimedCircuit:
    gates = [
        Gate(GateKind.H, (0,)),
        Gate(GateKind.DELAY, (0,), delay=window_cycles),
        Gate(GateKind.H, (0,)),
        Gate(GateKind.MEASURE, (0,)),
    ]
    return schedule_alap(gates, 1, noise.durations)


def _ideal_distribution(tc: TimedCircuit) -> CountsDistribution:
    noiseless = NoiseModel.noiseless(tc.n_qubits, tc.durations)
    return measure_distribution(evolve(tc, [], noiseless), noiseless)


@dataclass
class SweepResult:
    labels: list[float]  # fraction (spin echo) or round count (DD)
    fidelities: list[float]

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.fidelities))


def spin_echo_sweep(
    noise: NoiseModel,
    positions: int = 9,
    window_cycles: int = SPIN_ECHO_WINDOW_CYCLES,
    seed: int = 0,
) -> SweepResult:
    """Hellinger fidelity vs ideal for each pulse position fraction in [0, 1]."""
    tc = spin_echo_circuit(noise, window_cycles)
    window = extract_idle_windows(tc, 2)[0]
    ideal = _ideal_distribution(tc)
    fractions = [float(x) for x in np.linspace(0.0, 1.0, positions)]
    fids = []
    for f in fractions:
        shifted = shift_boundary_gate(tc, window, f)
        dist = measure_distribution(evolve(shifted, [], noise, seed=seed), noise)
        fids.append(hellinger_fidelity(ideal, dist))
    return SweepResult(fractions, fids)


def dd_round_sweep(
    noise: NoiseModel,
    kind: DDSequenceKind,
    window_cycles: int = DD_SWEEP_WINDOW_CYCLES,
    seed: int = 0,
) -> SweepResult:
    """Hellinger fidelity vs ideal for round counts 0..max (0 = no DD)."""
    tc = dd_window_circuit(noise, window_cycles)
    window = extract_idle_windows(tc, 2)[0]
    ideal = _ideal_distribution(tc)
    rounds = list(range(max_rounds(window, kind, tc) + 1))
    fids = []
    for r in rounds:
        circ = insert_dd(tc, window, kind, r) if r > 0 else tc
        dist = measure_distribution(evolve(circ, [], noise, seed=seed), noise)
        fids.append(hellinger_fidelity(ideal, dist))
    return SweepResult([float(r) for r in rounds], fids)
