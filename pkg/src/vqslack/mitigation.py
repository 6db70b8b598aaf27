"""Idle-window mitigation: DD sequence insertion, boundary-gate repositioning,
and measurement error mitigation by confusion-matrix inversion.

DD pulses are spread periodically: for M pulses the M+1 idle gaps are made
equal, with each pulse offset rounded to the integer cycle grid. Combined
gate-shift + DD first moves the boundary gate, then fills the two residual
slack intervals around it, splitting the round budget proportionally to
interval length.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .circuit import (
    CircuitError,
    Gate,
    GateKind,
    IdleWindow,
    TimedCircuit,
    insert_in_window,
    schedule_alap,
    shift_boundary_gate,
)
from .noise import NoiseModel
from .sim import CountsDistribution, evolve, measure_distribution, sample_distribution

MEM_FULL_CALIBRATION_LIMIT = 6


class MitigationError(ValueError):
    """Raised for ill-fitting insertions or inconsistent configurations."""


class DDSequenceKind(Enum):
    XX = "xx"
    YY = "yy"
    XY4 = "xy4"

    @property
    def pulses(self) -> tuple[GateKind, ...]:
        if self is DDSequenceKind.XX:
            return (GateKind.X, GateKind.X)
        if self is DDSequenceKind.YY:
            return (GateKind.Y, GateKind.Y)
        return (GateKind.X, GateKind.Y, GateKind.X, GateKind.Y)


@dataclass(frozen=True)
class WindowSetting:
    """Tuned knobs for one idle window. ``dd_rounds=0`` means no insertion;
    ``gate_fraction`` is None for windows without a movable boundary gate and
    1.0 at the ALAP baseline."""

    dd_kind: DDSequenceKind | None = None
    dd_rounds: int = 0
    gate_fraction: float | None = None

    def is_baseline(self) -> bool:
        return self.dd_rounds == 0 and self.gate_fraction in (None, 1.0)


def window_key(w: IdleWindow) -> tuple[int, int, int]:
    return (w.qubit, w.start, w.end)


@dataclass
class MitigationConfig:
    """Per-window settings keyed by (qubit, start, end) of the baseline
    circuit's windows; serializes to a flat record list for result files."""

    settings: dict[tuple[int, int, int], WindowSetting] = field(default_factory=dict)

    def to_records(self) -> list[dict]:
        out = []
        for (qubit, start, end), st in sorted(self.settings.items()):
            out.append(
                {
                    "qubit": qubit,
                    "start": start,
                    "end": end,
                    "dd_kind": st.dd_kind.value if st.dd_kind else None,
                    "dd_rounds": st.dd_rounds,
                    "gate_fraction": st.gate_fraction,
                }
            )
        return out

    @classmethod
    def from_records(cls, records: list[dict]) -> "MitigationConfig":
        settings = {}
        for r in records:
            settings[(r["qubit"], r["start"], r["end"])] = WindowSetting(
                dd_kind=DDSequenceKind(r["dd_kind"]) if r.get("dd_kind") else None,
                dd_rounds=int(r.get("dd_rounds", 0)),
                gate_fraction=r.get("gate_fraction"),
            )
        return cls(settings)


def max_rounds(w: IdleWindow, kind: DDSequenceKind, tc: TimedCircuit) -> int:
    """Rounds of ``kind`` that fit when the window is filled completely."""
    pulse = tc.durations.single_qubit
    return w.length // (len(kind.pulses) * pulse)


def _region_capacity(length: int, kind: DDSequenceKind, pulse: int) -> int:
    return length // (len(kind.pulses) * pulse)


def dd_pulse_offsets(length: int, n_pulses: int, pulse_duration: int) -> list[int]:
    """Offsets of M periodically spread pulses in a region: the M+1 gaps are
    equal before rounding each pulse position to the cycle grid."""
    gap = (length - n_pulses * pulse_duration) / (n_pulses + 1)
    if gap < 0:
        raise MitigationError(f"{n_pulses} pulses do not fit in {length} cycles")
    return [round((k + 1) * gap + k * pulse_duration) for k in range(n_pulses)]


def _insert_pulses(
    tc: TimedCircuit, qubit: int, start: int, end: int, kind: DDSequenceKind, rounds: int
) -> TimedCircuit:
    pulse_dur = tc.durations.single_qubit
    pulses = kind.pulses * rounds
    offsets = dd_pulse_offsets(end - start, len(pulses), pulse_dur)
    region = IdleWindow(qubit, start, end, -1, -1)
    return insert_in_window(tc, region, list(zip(pulses, offsets)))


def insert_dd(tc: TimedCircuit, w: IdleWindow, kind: DDSequenceKind, rounds: int) -> TimedCircuit:
    """Insert ``rounds`` repetitions of the DD sequence, periodically spread
    over the window."""
    if rounds < 1:
        raise MitigationError("insert_dd requires rounds >= 1; rounds=0 is the no-op config")
    cap = max_rounds(w, kind, tc)
    if rounds > cap:
        raise MitigationError(
            f"{rounds} rounds of {kind.value} exceed capacity {cap} of window "
            f"[{w.start},{w.end}) on qubit {w.qubit}"
        )
    return _insert_pulses(tc, w.qubit, w.start, w.end, kind, rounds)


def apply_config(
    tc: TimedCircuit, windows: list[IdleWindow], config: MitigationConfig
) -> TimedCircuit:
    """Apply per-window settings to the baseline circuit: boundary-gate shift
    first, then DD fills the residual slack on both sides of the moved gate
    (round budget split proportionally to residual length, clamped to fit)."""
    known = {window_key(w): w for w in windows}
    for key in config.settings:
        if key not in known:
            raise MitigationError(f"config references unknown window {key}")
    out = tc
    pulse = tc.durations.single_qubit
    for w in sorted(windows, key=lambda w: (w.qubit, w.start)):
        st = config.settings.get(window_key(w))
        if st is None:
            continue
        try:
            moved_start: int | None = None
            f = st.gate_fraction
            if f is not None and f != 1.0:
                out = shift_boundary_gate(out, w, f)
                moved_start = w.start + round(f * w.length)
            if st.dd_kind is not None and st.dd_rounds > 0:
                if moved_start is None:
                    regions = [(w.start, w.end)]
                else:
                    gate_dur = pulse  # movable boundary gates are single-qubit
                    regions = [
                        (w.start, moved_start),
                        (moved_start + gate_dur, w.end + gate_dur),
                    ]
                lengths = [b - a for a, b in regions]
                total = sum(lengths)
                r_first = round(st.dd_rounds * lengths[0] / total) if total else 0
                budget = [r_first, st.dd_rounds - r_first]
                for (a, b), r in zip(regions, budget):
                    r = min(r, _region_capacity(b - a, st.dd_kind, pulse))
                    if r > 0:
                        out = _insert_pulses(out, w.qubit, a, b, st.dd_kind, r)
        except CircuitError as exc:
            raise MitigationError(f"window {window_key(w)}: {exc}") from exc
    out.validate()
    return out


# -- measurement error mitigation ----------------------------------------------


def _preparation_circuit(n_qubits: int, bits: int, noise: NoiseModel) -> TimedCircuit:
    gates = [
        Gate(GateKind.X, (q,))
        for q in range(n_qubits)
        if (bits >> (n_qubits - q - 1)) & 1
    ]
    gates += [Gate(GateKind.MEASURE, (q,)) for q in range(n_qubits)]
    return schedule_alap(gates, n_qubits, noise.durations)


def _calibration_column(
    n_qubits: int, bits: int, noise: NoiseModel, shots: int | None, seed: int
) -> np.ndarray:
    tc = _preparation_circuit(n_qubits, bits, noise)
    rho = evolve(tc, [], noise, seed=seed)
    dist = measure_distribution(rho, noise)
    if shots is not None:
        dist = sample_distribution(dist, shots, seed=seed)
    return dist.probs


def mem_calibrate(
    n_qubits: int,
    noise: NoiseModel,
    *,
    shots: int | None = None,
    tensored: bool = False,
    seed: int = 0,
) -> np.ndarray:
    """Measure the readout confusion matrix from basis-state preparations.

    Full mode prepares all 2^n basis states (n <= 6); tensored mode builds a
    per-qubit tensor product from the all-zeros and all-ones preparations.
    ``shots=None`` uses exact infinite-shot distributions.
    """
    if tensored:
        all_on = (1 << n_qubits) - 1
        col0 = _calibration_column(n_qubits, 0, noise, shots, seed)
        col1 = _calibration_column(n_qubits, all_on, noise, shots, seed + 1)
        a = np.array([[1.0]])
        for q in range(n_qubits):
            shape = (2,) * n_qubits
            axes = tuple(i for i in range(n_qubits) if i != q)
            m0 = col0.reshape(shape).sum(axis=axes)
            m1 = col1.reshape(shape).sum(axis=axes)
            a = np.kron(a, np.column_stack([m0, m1]))
        return a
    if n_qubits > MEM_FULL_CALIBRATION_LIMIT:
        raise MitigationError(
            f"full calibration needs 2^{n_qubits} circuits; use tensored=True above "
            f"{MEM_FULL_CALIBRATION_LIMIT} qubits"
        )
    dim = 2**n_qubits
    a = np.zeros((dim, dim))
    for j in range(dim):
        a[:, j] = _calibration_column(n_qubits, j, noise, shots, seed + j)
    return a


def mem_correct(raw: CountsDistribution, a: np.ndarray) -> CountsDistribution:
    """Invert the confusion matrix on a measured distribution; negative
    entries are clipped and the result renormalized."""
    a = np.asarray(a, dtype=float)
    if a.shape != (raw.probs.size, raw.probs.size):
        raise MitigationError(f"calibration matrix shape {a.shape} does not match distribution")
    try:
        x = np.linalg.solve(a, raw.probs)
    except np.linalg.LinAlgError:
        warnings.warn("singular calibration matrix; falling back to least squares", stacklevel=2)
        x, *_ = np.linalg.lstsq(a, raw.probs, rcond=None)
    x = np.clip(x, 0.0, None)
    total = x.sum()
    if total <= 0.0:
        raise MitigationError("correction produced an all-zero distribution")
    return CountsDistribution(raw.n_qubits, x / total, shots=raw.shots)
