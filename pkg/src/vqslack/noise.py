"""Per-qubit noise parameters, readout confusion, and their file format.

The model covers: amplitude damping (T1) and pure dephasing (derived from
T1/T2) during idle time, a coherent Z-rotation detuning that is either fixed
("systematic") or drawn per run ("quasi-static"), depolarizing error per gate
kind, and a readout confusion matrix. Everything is JSON-configurable; gate
durations live here too since they shape the idle windows the noise acts in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .circuit import DEFAULT_DURATIONS, DurationTable, GateKind

DETUNING_MODES = ("none", "systematic", "quasi-static")

DEFAULT_T1_S = 100e-6
DEFAULT_T2_S = 80e-6
DEFAULT_SIGMA_RAD_S = 2 * math.pi * 5e3
DEFAULT_P_1Q = 3e-4
DEFAULT_P_CX = 1e-2
DEFAULT_READOUT_FLIP = 0.02
DEFAULT_REALIZATIONS = 32


class NoiseModelError(ValueError):
    """Raised for invalid noise parameters or unreadable noise files."""


def _per_qubit(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise NoiseModelError(f"{name} must be a scalar or length-{n} array")
    return arr


@dataclass
class NoiseModel:
    n_qubits: int
    t1: np.ndarray
    t2: np.ndarray
    detuning_mode: str = "none"
    detuning_omega: np.ndarray = None
    detuning_sigma: np.ndarray = None
    p_1q: float = 0.0
    p_cx: float = 0.0
    p_measure: float = 0.0
    readout_p01: np.ndarray = None
    readout_p10: np.ndarray = None
    confusion: np.ndarray | None = None
    realizations: int = DEFAULT_REALIZATIONS
    durations: DurationTable = field(default_factory=lambda: DEFAULT_DURATIONS)

    def __post_init__(self) -> None:
        n = self.n_qubits
        self.t1 = _per_qubit(self.t1, n, "t1")
        self.t2 = _per_qubit(self.t2, n, "t2")
        zeros = np.zeros(n)
        self.detuning_omega = zeros if self.detuning_omega is None else _per_qubit(self.detuning_omega, n, "detuning_omega")
        self.detuning_sigma = zeros if self.detuning_sigma is None else _per_qubit(self.detuning_sigma, n, "detuning_sigma")
        self.readout_p01 = zeros if self.readout_p01 is None else _per_qubit(self.readout_p01, n, "readout_p01")
        self.readout_p10 = zeros if self.readout_p10 is None else _per_qubit(self.readout_p10, n, "readout_p10")
        self.validate()

    def validate(self) -> None:
        n = self.n_qubits
        if n < 1:
            raise NoiseModelError("n_qubits must be >= 1")
        if self.detuning_mode not in DETUNING_MODES:
            raise NoiseModelError(f"detuning_mode must be one of {DETUNING_MODES}")
        if np.any(self.t1 <= 0) or np.any(self.t2 <= 0):
            raise NoiseModelError("T1 and T2 must be positive")
        # inf <= 2*inf holds, so fully coherent qubits pass unchanged
        if np.any(self.t2 > 2 * self.t1 * (1 + 1e-12)):
            raise NoiseModelError("T2 must not exceed 2*T1")
        if np.any(self.detuning_sigma < 0):
            raise NoiseModelError("detuning_sigma must be >= 0")
        for name, p in (("p_1q", self.p_1q), ("p_cx", self.p_cx), ("p_measure", self.p_measure)):
            if not 0.0 <= p <= 1.0:
                raise NoiseModelError(f"{name} must be in [0, 1]")
        for name, arr in (("readout_p01", self.readout_p01), ("readout_p10", self.readout_p10)):
            if np.any((arr < 0) | (arr > 1)):
                raise NoiseModelError(f"{name} entries must be in [0, 1]")
        if self.confusion is not None:
            a = np.asarray(self.confusion, dtype=float)
            dim = 2**n
            if a.shape != (dim, dim):
                raise NoiseModelError(f"confusion matrix must be {dim}x{dim}")
            if np.any(a < -1e-12) or np.any(np.abs(a.sum(axis=0) - 1.0) > 1e-9):
                raise NoiseModelError("confusion matrix columns must be stochastic")
            self.confusion = a
        if self.realizations < 1:
            raise NoiseModelError("realizations must be >= 1")

    # -- channel parameter helpers -------------------------------------------------

    def p_gate(self, kind: GateKind) -> float:
        if kind is GateKind.CX:
            return self.p_cx
        if kind is GateKind.MEASURE:
            return self.p_measure
        return self.p_1q

    def dephasing_rate(self, q: int) -> float:
        """1/T_phi from 1/T2 - 1/(2 T1), clamped at zero."""
        t1, t2 = self.t1[q], self.t2[q]
        r1 = 0.0 if math.isinf(t1) else 1.0 / (2.0 * t1)
        r2 = 0.0 if math.isinf(t2) else 1.0 / t2
        return max(0.0, r2 - r1)

    def has_readout_error(self) -> bool:
        return (
            self.confusion is not None
            or bool(np.any(self.readout_p01 > 0))
            or bool(np.any(self.readout_p10 > 0))
        )

    def qubit_confusion(self, q: int) -> np.ndarray:
        p01, p10 = self.readout_p01[q], self.readout_p10[q]
        return np.array([[1.0 - p01, p10], [p01, 1.0 - p10]])

    def full_confusion(self) -> np.ndarray:
        """Dense 2^n column-stochastic matrix (tensor of per-qubit flips
        unless a full override was configured)."""
        if self.confusion is not None:
            return self.confusion
        a = np.array([[1.0]])
        for q in range(self.n_qubits):
            a = np.kron(a, self.qubit_confusion(q))
        return a

    def apply_readout(self, probs: np.ndarray) -> np.ndarray:
        """Confuse an outcome distribution; per-qubit factors are applied
        axis-wise so the full matrix is never materialized."""
        if self.confusion is not None:
            return self.confusion @ probs
        n = self.n_qubits
        p = probs.reshape((2,) * n)
        for q in range(n):
            p = np.tensordot(self.qubit_confusion(q), p, axes=([1], [q]))
            p = np.moveaxis(p, 0, q)
        return p.reshape(-1)

    # -- constructors / serialization ----------------------------------------------

    @classmethod
    def noiseless(cls, n_qubits: int, durations: DurationTable = DEFAULT_DURATIONS) -> "NoiseModel":
        return cls(
            n_qubits=n_qubits,
            t1=np.full(n_qubits, np.inf),
            t2=np.full(n_qubits, np.inf),
            detuning_mode="none",
            realizations=1,
            durations=durations,
        )

    @classmethod
    def default(cls, n_qubits: int, durations: DurationTable = DEFAULT_DURATIONS) -> "NoiseModel":
        return cls(
            n_qubits=n_qubits,
            t1=np.full(n_qubits, DEFAULT_T1_S),
            t2=np.full(n_qubits, DEFAULT_T2_S),
            detuning_mode="quasi-static",
            detuning_omega=np.zeros(n_qubits),
            detuning_sigma=np.full(n_qubits, DEFAULT_SIGMA_RAD_S),
            p_1q=DEFAULT_P_1Q,
            p_cx=DEFAULT_P_CX,
            readout_p01=np.full(n_qubits, DEFAULT_READOUT_FLIP),
            readout_p10=np.full(n_qubits, DEFAULT_READOUT_FLIP),
            realizations=DEFAULT_REALIZATIONS,
            durations=durations,
        )

    def without_readout(self) -> "NoiseModel":
        n = self.n_qubits
        return replace(self, readout_p01=np.zeros(n), readout_p10=np.zeros(n), confusion=None)

    def to_dict(self) -> dict:
        def enc(arr):
            return ["inf" if math.isinf(v) else v for v in arr.tolist()]

        d = {
            "n_qubits": self.n_qubits,
            "t1_s": enc(self.t1),
            "t2_s": enc(self.t2),
            "detuning": {
                "mode": self.detuning_mode,
                "omega_rad_per_s": self.detuning_omega.tolist(),
                "sigma_rad_per_s": self.detuning_sigma.tolist(),
            },
            "gate_error": {"p_1q": self.p_1q, "p_cx": self.p_cx, "p_measure": self.p_measure},
            "readout": {"p01": self.readout_p01.tolist(), "p10": self.readout_p10.tolist()},
            "realizations": self.realizations,
            "durations": {
                "single_qubit": self.durations.single_qubit,
                "cx": self.durations.cx,
                "measure": self.durations.measure,
                "cycle_ns": self.durations.cycle_ns,
            },
        }
        if self.confusion is not None:
            d["readout"] = {"confusion": self.confusion.tolist()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        def dec(v):
            if isinstance(v, list):
                return [math.inf if x == "inf" else float(x) for x in v]
            return math.inf if v == "inf" else float(v)

        try:
            n = int(d["n_qubits"])
        except (KeyError, TypeError, ValueError):
            raise NoiseModelError("noise model requires an integer 'n_qubits'") from None
        det = d.get("detuning", {})
        err = d.get("gate_error", {})
        ro = d.get("readout", {})
        dur = d.get("durations", {})
        durations = DurationTable(
            single_qubit=int(dur.get("single_qubit", DEFAULT_DURATIONS.single_qubit)),
            cx=int(dur.get("cx", DEFAULT_DURATIONS.cx)),
            measure=int(dur.get("measure", DEFAULT_DURATIONS.measure)),
            cycle_ns=float(dur.get("cycle_ns", DEFAULT_DURATIONS.cycle_ns)),
        )
        return cls(
            n_qubits=n,
            t1=np.asarray(dec(d.get("t1_s", "inf"))),
            t2=np.asarray(dec(d.get("t2_s", "inf"))),
            detuning_mode=det.get("mode", "none"),
            detuning_omega=np.asarray(dec(det.get("omega_rad_per_s", 0.0))),
            detuning_sigma=np.asarray(dec(det.get("sigma_rad_per_s", 0.0))),
            p_1q=float(err.get("p_1q", 0.0)),
            p_cx=float(err.get("p_cx", 0.0)),
            p_measure=float(err.get("p_measure", 0.0)),
            readout_p01=np.asarray(dec(ro.get("p01", 0.0))) if "confusion" not in ro else None,
            readout_p10=np.asarray(dec(ro.get("p10", 0.0))) if "confusion" not in ro else None,
            confusion=np.asarray(ro["confusion"], dtype=float) if "confusion" in ro else None,
            realizations=int(d.get("realizations", DEFAULT_REALIZATIONS)),
            durations=durations,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "NoiseModel":
        p = Path(path)
        if not p.exists():
            raise NoiseModelError(f"noise model file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise NoiseModelError(f"invalid JSON in {p}: {exc}") from None
        return cls.from_dict(data)
