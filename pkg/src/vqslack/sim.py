"""Dense density-matrix evolution of timed circuits under a noise model.

Evolution walks gates in time order, applying per-gap idle noise (coherent
detuning, amplitude damping, pure dephasing) to each qubit before its next
gate, then the gate unitary, depolarizing error, and idle noise for the gate's
own duration. Quasi-static detuning averages the state over seeded
realizations with a fixed-order reduction, so equal seeds give bit-identical
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .circuit import GateKind, TimedCircuit, TimedGate, gate_unitary
from .noise import NoiseModel

PAULI_CODES = {"I": 0, "X": 1, "Y": 2, "Z": 3}


class SimulationError(ValueError):
    """Raised for dimension overflows or invalid simulation arguments."""


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    data: np.ndarray

    @classmethod
    def ground(cls, n_qubits: int) -> "DensityMatrix":
        if n_qubits > 10:
            raise SimulationError("dense density matrix limited to 10 qubits")
        dim = 2**n_qubits
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = 1.0
        return cls(n_qubits, rho)

    def validate(self, atol: float = 1e-9) -> None:
        rho = self.data
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise SimulationError("density matrix not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise SimulationError("density matrix trace != 1")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise SimulationError("density matrix not PSD")

    def probabilities(self) -> np.ndarray:
        p = np.real(np.diag(self.data)).copy()
        np.clip(p, 0.0, None, out=p)
        return p / p.sum()


@dataclass(frozen=True)
class CountsDistribution:
    """Outcome distribution over n-bit strings (qubit 0 = leftmost bit).

    ``probs`` is dense over all 2^n outcomes; ``shots`` is set when the
    distribution came from sampling rather than exact readout.
    """

    n_qubits: int
    probs: np.ndarray
    shots: int | None = None

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2**self.n_qubits,):
            raise SimulationError(f"expected {2**self.n_qubits} probabilities")
        if abs(p.sum() - 1.0) > 1e-9 or np.any(p < -1e-12):
            raise SimulationError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probs", p)

    def as_dict(self, min_p: float = 0.0) -> dict[str, float]:
        n = self.n_qubits
        return {
            format(i, f"0{n}b"): float(p)
            for i, p in enumerate(self.probs)
            if p > min_p
        }

    @classmethod
    def from_dict(cls, n_qubits: int, d: dict[str, float], shots: int | None = None) -> "CountsDistribution":
        probs = np.zeros(2**n_qubits)
        for key, p in d.items():
            if len(key) != n_qubits or set(key) - {"0", "1"}:
                raise SimulationError(f"bad bitstring key {key!r}")
            probs[int(key, 2)] = p
        return cls(n_qubits, probs, shots)


def _idle_noise(
    rho: np.ndarray, q: int, t: float, noise: NoiseModel, omega: float, n: int
) -> None:
    """In order: coherent RZ(omega*t), amplitude damping, pure dephasing."""
    if t <= 0.0:
        return
    theta = omega * t
    if theta != 0.0:
        kern.rz_phase(rho, q, theta, n)
    t1 = noise.t1[q]
    if not math.isinf(t1):
        gamma = -math.expm1(-t / t1)
        if gamma > 0.0:
            kern.amplitude_damp(rho, q, gamma, n)
    rate_phi = noise.dephasing_rate(q)
    if rate_phi > 0.0:
        lam = -math.expm1(-t * rate_phi)
        if lam > 0.0:
            kern.phase_damp(rho, q, lam, n)


def _apply_gate(
    rho: np.ndarray,
    g: TimedGate,
    noise: NoiseModel,
    omega: np.ndarray,
    bound: dict[str, float],
    n: int,
) -> None:
    kind = g.kind
    if kind is GateKind.CX:
        kern.apply_unitary_2q(rho, gate_unitary(kind), g.qubits[0], g.qubits[1], n)
    elif kind not in (GateKind.I, GateKind.MEASURE):
        angle = g.angle
        if isinstance(angle, str):
            angle = bound[angle]
        kern.apply_unitary_1q(rho, gate_unitary(kind, angle or 0.0), g.qubits[0], n)
    p = noise.p_gate(kind)
    if p > 0.0:
        if kind is GateKind.CX:
            kern.depolarize_2q(rho, g.qubits[0], g.qubits[1], p, n)
        else:
            kern.depolarize_1q(rho, g.qubits[0], p, n)
    dt = noise.durations.seconds(g.duration)
    for q in g.qubits:
        _idle_noise(rho, q, dt, noise, omega[q], n)


def _evolve_once(
    tc: TimedCircuit, bound: dict[str, float], noise: NoiseModel, omega: np.ndarray
) -> np.ndarray:
    n = tc.n_qubits
    rho = DensityMatrix.ground(n).data
    frontier: list[int | None] = [None] * n
    cycle_s = noise.durations.cycle_ns * 1e-9
    for g in tc.gates:
        for q in g.qubits:
            prev = frontier[q]
            if prev is not None and g.start > prev:
                _idle_noise(rho, q, (g.start - prev) * cycle_s, noise, omega[q], n)
        _apply_gate(rho, g, noise, omega, bound, n)
        for q in g.qubits:
            frontier[q] = g.end
    return rho


def evolve(
    tc: TimedCircuit,
    params: Sequence[float],
    noise: NoiseModel,
    realizations: int | None = None,
    seed: int = 0,
) -> DensityMatrix:
    """Noisy evolution of |0...0><0...0| through the scheduled circuit.

    Quasi-static detuning draws one omega per qubit per realization from the
    seeded generator and returns the realization average; the other modes run
    a single pass with fixed omega.
    """
    n = tc.n_qubits
    if n > 10:
        raise SimulationError("dense density matrix limited to 10 qubits")
    if noise.n_qubits != n:
        raise SimulationError(f"noise model is for {noise.n_qubits} qubits, circuit has {n}")
    bound = tc.bind(params)
    if noise.detuning_mode == "quasi-static":
        reps = noise.realizations if realizations is None else realizations
        if reps < 1:
            raise SimulationError("realizations must be >= 1")
        rng = np.random.default_rng(seed)
        omegas = rng.normal(noise.detuning_omega, noise.detuning_sigma, size=(reps, n))
    elif noise.detuning_mode == "systematic":
        omegas = noise.detuning_omega[None, :]
    else:
        omegas = np.zeros((1, n))
    acc = np.zeros((2**n, 2**n), dtype=np.complex128)
    for omega in omegas:
        acc += _evolve_once(tc, bound, noise, omega)
    acc /= len(omegas)
    acc = 0.5 * (acc + acc.conj().T)
    return DensityMatrix(n, acc)


def apply_gate(rho: DensityMatrix, g: TimedGate, noise: NoiseModel) -> DensityMatrix:
    """Single-gate channel: ideal unitary, depolarizing, then idle noise for
    the gate duration (detuning at its per-qubit mean omega)."""
    out = rho.data.copy()
    _apply_gate(out, g, noise, noise.detuning_omega, {}, rho.n_qubits)
    return DensityMatrix(rho.n_qubits, out)


def apply_idle(
    rho: DensityMatrix, qubit: int, t: float, noise: NoiseModel, omega_realized: float = 0.0
) -> DensityMatrix:
    """Idle-noise channel on one qubit for t seconds at a realized detuning."""
    if t < 0:
        raise SimulationError("idle time must be >= 0")
    out = rho.data.copy()
    _idle_noise(out, qubit, t, noise, omega_realized, rho.n_qubits)
    return DensityMatrix(rho.n_qubits, out)


def measure_distribution(
    rho: DensityMatrix, noise: NoiseModel, readout: bool = True
) -> CountsDistribution:
    """Exact (infinite-shot) Z-basis outcome distribution, with the readout
    confusion applied unless disabled."""
    p = rho.probabilities()
    if readout and noise.has_readout_error():
        p = noise.apply_readout(p)
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
    return CountsDistribution(rho.n_qubits, p)


def sample_distribution(dist: CountsDistribution, shots: int, seed: int = 0) -> CountsDistribution:
    """Draw shot counts from an exact distribution with a seeded generator."""
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, dist.probs)
    return CountsDistribution(dist.n_qubits, counts / shots, shots=shots)


def pauli_expectation(rho: DensityMatrix, pauli: str) -> float:
    """Tr[P rho] for a Pauli string over {I, X, Y, Z} (qubit 0 leftmost)."""
    if len(pauli) != rho.n_qubits:
        raise SimulationError(f"pauli string length {len(pauli)} != {rho.n_qubits} qubits")
    try:
        codes = np.array([PAULI_CODES[c] for c in pauli], dtype=np.int64)
    except KeyError as exc:
        raise SimulationError(f"bad pauli letter {exc.args[0]!r} in {pauli!r}") from None
    val = kern.pauli_expectation(rho.data, codes, rho.n_qubits)
    if abs(val.imag) > 1e-9:
        raise SimulationError(f"expectation of {pauli} has imaginary part {val.imag:.3e}")
    return float(val.real)


def hellinger_fidelity(p: CountsDistribution, q: CountsDistribution) -> float:
    """(sum_i sqrt(p_i q_i))^2; 1.0 for equal distributions, 0.0 for disjoint."""
    if p.n_qubits != q.n_qubits:
        raise SimulationError("distributions are over different qubit counts")
    return float(np.sum(np.sqrt(p.probs * q.probs)) ** 2)
