"""Shared helpers: randomized circuit soup, dense-matrix oracles, and noise
model fixtures used across the suite."""

from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from vqslack.circuit import (
    DurationTable,
    Gate,
    GateKind,
    TimedCircuit,
    schedule_alap,
)
from vqslack.noise import NoiseModel

ONE_QUBIT_KINDS = (
    GateKind.I,
    GateKind.X,
    GateKind.Y,
    GateKind.Z,
    GateKind.H,
    GateKind.RX,
    GateKind.RY,
    GateKind.RZ,
)


def random_gate_list(
    rng: np.random.Generator,
    n_qubits: int,
    n_gates: int,
    p_cx: float = 0.25,
    p_delay: float = 0.15,
    measured: bool = True,
) -> list[Gate]:
    """Dependency-ordered random circuit; DELAYs open up idle windows."""
    gates: list[Gate] = []
    for _ in range(n_gates):
        r = rng.random()
        if n_qubits >= 2 and r < p_cx:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(Gate(GateKind.CX, (int(a), int(b))))
        elif p_delay > 0 and r < p_cx + p_delay:
            q = int(rng.integers(n_qubits))
            gates.append(Gate(GateKind.DELAY, (q,), delay=int(rng.integers(1, 40))))
        else:
            kind = ONE_QUBIT_KINDS[rng.integers(len(ONE_QUBIT_KINDS))]
            q = int(rng.integers(n_qubits))
            angle = float(rng.uniform(-np.pi, np.pi)) if kind.is_rotation else None
            gates.append(Gate(kind, (q,), angle=angle))
    if measured:
        gates += [Gate(GateKind.MEASURE, (q,)) for q in range(n_qubits)]
    return gates


def random_scheduled(
    rng: np.random.Generator, n_qubits: int, n_gates: int, **kwargs
) -> TimedCircuit:
    gates = random_gate_list(rng, n_qubits, n_gates, **kwargs)
    return schedule_alap(gates, n_qubits)


def brute_force_windows(tc: TimedCircuit, min_len: int) -> list[tuple[int, int, int]]:
    """Timeline-scan oracle: mark every occupied cycle per qubit, then read
    off the free runs between a qubit's first and last operation."""
    total = tc.duration
    out = []
    for q in range(tc.n_qubits):
        busy = np.zeros(total + 1, dtype=bool)
        ops = [g for g in tc.gates if q in g.qubits]
        if not ops:
            continue
        for g in ops:
            busy[g.start : g.end] = True
        first = min(g.start for g in ops)
        last = max(g.end for g in ops)
        start = None
        for t in range(first, last + 1):
            free = t < last and not busy[t]
            if free and start is None:
                start = t
            elif not free and start is not None:
                if t - start >= min_len:
                    out.append((q, start, t))
                start = None
    return sorted(out)


def kron_embed(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    mats = [ops.get(q, np.eye(2, dtype=complex)) for q in range(n)]
    return reduce(np.kron, mats)


def random_density_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    dim = 2**n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return np.ascontiguousarray(rho / np.trace(rho))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fast_durations():
    # short measure keeps brute-force timelines small in property tests
    return DurationTable(single_qubit=1, cx=10, measure=10)


@pytest.fixture
def default_noise_1q():
    return NoiseModel.default(1)


@pytest.fixture
def noiseless_2q():
    return NoiseModel.noiseless(2)
