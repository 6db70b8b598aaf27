"""Pauli-sum Hamiltonians, the TFIM builder, the hardware-efficient two-axis
ansatz, objective evaluation, and the dense exact-diagonalization oracle.

The objective has two modes. Exact mode evaluates sum_k c_k Tr[P_k rho] from
one noisy evolution. Sampled mode mimics hardware estimation: terms are
grouped by qubit-wise commuting measurement basis, the final state is rotated
into each group's basis, and term values are read off outcome distributions
(optionally shot-sampled, readout-confused, and MEM-corrected). The basis
rotations are applied as ideal post-rotations so that, at infinite shots with
readout disabled, both modes agree to numerical precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from . import _kernels as kern
from .circuit import Gate, GateKind, TimedCircuit, gate_unitary
from .noise import NoiseModel
from .sim import (
    CountsDistribution,
    DensityMatrix,
    evolve,
    pauli_expectation,
    sample_distribution,
)

COEFF_DROP_THRESHOLD = 1e-12

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ObservableError(ValueError):
    """Raised for malformed Hamiltonians or mismatched dimensions."""


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted Pauli sum; term strings use qubit 0 as the leftmost
    letter. Construction canonicalizes: duplicate strings merge, coefficients
    below 1e-12 in magnitude are dropped."""

    n_qubits: int
    terms: tuple[tuple[float, str], ...]

    @classmethod
    def from_terms(cls, n_qubits: int, terms) -> "PauliHamiltonian":
        merged: dict[str, float] = {}
        for coeff, string in terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ObservableError(f"non-finite coefficient for term {string!r}")
            string = string.upper()
            if len(string) != n_qubits:
                raise ObservableError(
                    f"term {string!r} has length {len(string)}, expected {n_qubits}"
                )
            if set(string) - set("IXYZ"):
                raise ObservableError(f"term {string!r} has letters outside I/X/Y/Z")
            merged[string] = merged.get(string, 0.0) + coeff
        kept = tuple(
            (c, s) for s, c in merged.items() if abs(c) >= COEFF_DROP_THRESHOLD
        )
        return cls(n_qubits, kept)

    def to_matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        h = np.zeros((dim, dim), dtype=complex)
        for coeff, string in self.terms:
            h += coeff * reduce(np.kron, [_PAULI_MATS[c] for c in string])
        return h


def tfim_hamiltonian(n: int, coupling: float = 1.0, field: float = 1.0) -> PauliHamiltonian:
    """Open-boundary transverse-field Ising chain:
    H = -J sum_i Z_i Z_{i+1} - g sum_i X_i."""
    if n < 2:
        raise ObservableError("TFIM chain needs at least 2 qubits")
    terms = []
    for i in range(n - 1):
        s = ["I"] * n
        s[i] = s[i + 1] = "Z"
        terms.append((-coupling, "".join(s)))
    for i in range(n):
        s = ["I"] * n
        s[i] = "X"
        terms.append((-field, "".join(s)))
    return PauliHamiltonian.from_terms(n, terms)


def load_hamiltonian(path: str | Path) -> PauliHamiltonian:
    """Read a Hamiltonian file: one ``coefficient pauli_string`` per line,
    ``#`` starts a comment. Duplicates merge; near-zero terms are dropped
    with a warning."""
    p = Path(path)
    raw: list[tuple[float, str]] = []
    length: int | None = None
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ObservableError(f"{p}:{lineno}: expected 'coefficient pauli_string'")
        coeff_text = parts[0].replace("−", "-")
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise ObservableError(f"{p}:{lineno}: bad coefficient {parts[0]!r}") from None
        string = parts[1].upper()
        if set(string) - set("IXYZ"):
            raise ObservableError(f"{p}:{lineno}: bad pauli string {parts[1]!r}")
        if length is None:
            length = len(string)
        elif len(string) != length:
            raise ObservableError(
                f"{p}:{lineno}: string length {len(string)} differs from earlier {length}"
            )
        if abs(coeff) < COEFF_DROP_THRESHOLD:
            warnings.warn(f"{p}:{lineno}: dropping near-zero term {string}", stacklevel=2)
        raw.append((coeff, string))
    if not raw or length is None:
        raise ObservableError(f"{p}: no terms found")
    return PauliHamiltonian.from_terms(length, raw)


def exact_ground_energy(h: PauliHamiltonian) -> tuple[float, np.ndarray]:
    """Minimal eigenvalue and an eigenvector of the dense Hamiltonian; the
    brute-force oracle for every derived energy in the test suite."""
    if h.n_qubits > 12:
        raise ObservableError("exact diagonalization limited to 12 qubits")
    vals, vecs = np.linalg.eigh(h.to_matrix())
    return float(vals[0]), vecs[:, 0]


@dataclass(frozen=True)
class AnsatzSpec:
    """Hardware-efficient two-axis ansatz geometry."""

    n_qubits: int
    reps: int
    entanglement: str = "circular"

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ObservableError("reps must be >= 1")
        if self.entanglement not in ("full", "circular"):
            raise ObservableError("entanglement must be 'full' or 'circular'")
        if self.n_qubits < 2:
            raise ObservableError("ansatz needs at least 2 qubits")

    @property
    def parameter_count(self) -> int:
        return self.n_qubits * 2 * (self.reps + 1)

    def entangler_pairs(self) -> list[tuple[int, int]]:
        n = self.n_qubits
        if self.entanglement == "full":
            return [(i, j) for i in range(n) for j in range(i + 1, n)]
        if n == 2:  # the ring's wrap-around pair duplicates (0, 1); emit once
            return [(0, 1)]
        return [(i, (i + 1) % n) for i in range(n)]


def su2_ansatz(spec: AnsatzSpec) -> list[Gate]:
    """RY+RZ rotation layers interleaved with CX entanglers, plus a final
    rotation layer; parameter slots named theta0.. in layer-major order."""
    gates: list[Gate] = []
    counter = 0

    def rotation_layer(kind: GateKind) -> None:
        nonlocal counter
        for q in range(spec.n_qubits):
            gates.append(Gate(kind, (q,), angle=f"theta{counter}"))
            counter += 1

    for _ in range(spec.reps):
        rotation_layer(GateKind.RY)
        rotation_layer(GateKind.RZ)
        for a, b in spec.entangler_pairs():
            gates.append(Gate(GateKind.CX, (a, b)))
    rotation_layer(GateKind.RY)
    rotation_layer(GateKind.RZ)
    return gates


# -- sampled-mode machinery ---------------------------------------------------


@dataclass
class MeasurementGroup:
    basis: str  # one of I/X/Y/Z per qubit; I means unconstrained
    terms: list[tuple[float, str]]


def group_qubitwise(h: PauliHamiltonian) -> list[MeasurementGroup]:
    """Greedy first-fit grouping of terms into qubit-wise commuting sets."""
    groups: list[MeasurementGroup] = []
    for coeff, string in h.terms:
        placed = False
        for grp in groups:
            merged = []
            for b, s in zip(grp.basis, string):
                if s == "I" or b == "I" or b == s:
                    merged.append(s if b == "I" else b)
                else:
                    break
            else:
                grp.basis = "".join(merged)
                grp.terms.append((coeff, string))
                placed = True
            if placed:
                break
        if not placed:
            groups.append(MeasurementGroup(string, [(coeff, string)]))
    return groups


_HADAMARD = gate_unitary(GateKind.H)
_Y_BASIS = _HADAMARD @ gate_unitary(GateKind.RZ, -math.pi / 2)


def _rotate_to_basis(rho: DensityMatrix, basis: str) -> np.ndarray:
    """Ideal basis-change rotation of the final state (X -> H, Y -> RZ(-pi/2)
    then H); returns the rotated matrix, input untouched."""
    out = rho.data.copy()
    for q, b in enumerate(basis):
        if b == "X":
            kern.apply_unitary_1q(out, _HADAMARD, q, rho.n_qubits)
        elif b == "Y":
            kern.apply_unitary_1q(out, _Y_BASIS, q, rho.n_qubits)
    return out


def _parity_signs(n: int, string: str) -> np.ndarray:
    idx = np.arange(2**n)
    signs = np.ones(2**n)
    for q, letter in enumerate(string):
        if letter != "I":
            signs *= 1.0 - 2.0 * ((idx >> (n - q - 1)) & 1)
    return signs


def objective(
    tc: TimedCircuit,
    params,
    h: PauliHamiltonian,
    noise: NoiseModel,
    *,
    mode: str = "exact",
    seed: int = 0,
    realizations: int | None = None,
    shots: int | None = None,
    readout: bool = True,
    mem_matrix: np.ndarray | None = None,
) -> float:
    """Expectation of ``h`` after noisy evolution of the bound circuit.

    ``mode='exact'`` returns sum_k c_k Tr[P_k rho]. ``mode='sampled'``
    estimates each qubit-wise-commuting group from its (optionally sampled
    and readout-confused) outcome distribution, MEM-correcting when a
    calibration matrix is supplied.
    """
    if h.n_qubits != tc.n_qubits:
        raise ObservableError(
            f"hamiltonian is over {h.n_qubits} qubits, circuit has {tc.n_qubits}"
        )
    rho = evolve(tc, params, noise, realizations=realizations, seed=seed)
    if mode == "exact":
        return float(sum(c * pauli_expectation(rho, s) for c, s in h.terms))
    if mode != "sampled":
        raise ObservableError(f"unknown objective mode {mode!r}")

    from .mitigation import mem_correct  # local import avoids a module cycle

    n = tc.n_qubits
    total = 0.0
    use_readout = readout and noise.has_readout_error()
    for gi, grp in enumerate(group_qubitwise(h)):
        probs = np.real(np.diag(_rotate_to_basis(rho, grp.basis))).copy()
        np.clip(probs, 0.0, None, out=probs)
        probs /= probs.sum()
        if use_readout:
            probs = noise.apply_readout(probs)
            probs = np.clip(probs, 0.0, None)
            probs /= probs.sum()
        dist = CountsDistribution(n, probs)
        if shots is not None:
            dist = sample_distribution(dist, shots, seed=seed * 7919 + gi)
        if mem_matrix is not None:
            dist = mem_correct(dist, mem_matrix)
        for coeff, string in grp.terms:
            total += coeff * float(dist.probs @ _parity_signs(n, string))
    return total
