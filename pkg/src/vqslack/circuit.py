"""Gate-level circuit IR with integer-cycle timing.

A circuit goes through two forms: an *unscheduled* dependency-ordered list of
:class:`Gate` (what the parser and ansatz builders produce), and a
:class:`TimedCircuit` whose gates carry explicit start times assigned by
as-late-as-possible scheduling. DELAY gates exist only in the unscheduled
form; the scheduler dissolves them into idle time, which is where idle-window
extraction and mitigation operate.

Bit/qubit convention used across the package: qubit 0 is the leftmost
character of Pauli/bit strings and the most significant bit of basis indices.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


class CircuitError(ValueError):
    """Raised for malformed gates, schedules, or transform misuse."""


class GateKind(Enum):
    I = "i"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    DELAY = "delay"
    MEASURE = "measure"

    @property
    def n_qubits(self) -> int:
        return 2 if self is GateKind.CX else 1

    @property
    def is_rotation(self) -> bool:
        return self in (GateKind.RX, GateKind.RY, GateKind.RZ)


@dataclass(frozen=True)
class DurationTable:
    """Gate durations in integer device cycles plus the cycle length.

    ``overrides`` pins specific kinds to a different duration than their
    class default (e.g. a slow H next to fast X pulses).
    """

    single_qubit: int = 1
    cx: int = 10
    measure: int = 100
    cycle_ns: float = 35.56
    overrides: tuple[tuple[GateKind, int], ...] = ()

    def duration_of(self, kind: GateKind, delay: int | None = None) -> int:
        if kind is GateKind.DELAY:
            if delay is None:
                raise CircuitError("DELAY gate without a cycle count")
            return delay
        for k, dur in self.overrides:
            if k is kind:
                return dur
        if kind is GateKind.CX:
            return self.cx
        if kind is GateKind.MEASURE:
            return self.measure
        return self.single_qubit

    def seconds(self, cycles: float) -> float:
        return cycles * self.cycle_ns * 1e-9


DEFAULT_DURATIONS = DurationTable()


@dataclass(frozen=True)
class Gate:
    """One unscheduled gate. ``angle`` is a float, or a parameter name for an
    unbound rotation; ``delay`` is the cycle count of a DELAY gate."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | str | None = None
    delay: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(self.qubits))
        k = self.kind
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"duplicate qubits in {k.name}{self.qubits}")
        if len(self.qubits) != k.n_qubits:
            raise CircuitError(f"{k.name} takes {k.n_qubits} qubit(s), got {self.qubits}")
        if k.is_rotation:
            if self.angle is None:
                raise CircuitError(f"{k.name} requires an angle")
            if isinstance(self.angle, float) and not math.isfinite(self.angle):
                raise CircuitError(f"{k.name} angle must be finite")
        elif self.angle is not None:
            raise CircuitError(f"{k.name} takes no angle")
        if k is GateKind.DELAY:
            if self.delay is None or self.delay < 0 or int(self.delay) != self.delay:
                raise CircuitError("DELAY length must be a non-negative integer")
        elif self.delay is not None:
            raise CircuitError(f"{k.name} takes no delay length")


@dataclass(frozen=True)
class TimedGate:
    kind: GateKind
    qubits: tuple[int, ...]
    start: int
    duration: int
    angle: float | str | None = None

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True)
class TimedCircuit:
    """Scheduled circuit; immutable, every transform returns a new value.

    ``parameters`` lists symbolic angle names in first-appearance order;
    evaluation binds a vector of the same length.
    """

    n_qubits: int
    gates: tuple[TimedGate, ...]
    parameters: tuple[str, ...]
    durations: DurationTable = DEFAULT_DURATIONS

    @property
    def duration(self) -> int:
        return max((g.end for g in self.gates), default=0)

    def gates_on(self, qubit: int) -> list[TimedGate]:
        return [g for g in self.gates if qubit in g.qubits]

    def validate(self) -> None:
        per_qubit: dict[int, list[TimedGate]] = {q: [] for q in range(self.n_qubits)}
        for g in self.gates:
            if g.kind is GateKind.DELAY:
                raise CircuitError("DELAY must not appear in a scheduled circuit")
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"gate {g.kind.name} references qubit {q} >= {self.n_qubits}")
                per_qubit[q].append(g)
        for q, ops in per_qubit.items():
            ops.sort(key=lambda g: g.start)
            for a, b in zip(ops, ops[1:]):
                if a.end > b.start:
                    raise CircuitError(
                        f"overlap on qubit {q}: {a.kind.name}@[{a.start},{a.end}) vs "
                        f"{b.kind.name}@[{b.start},{b.end})"
                    )
                if a.kind is GateKind.MEASURE:
                    raise CircuitError(f"gate after MEASURE on qubit {q}")

    def bind(self, params: Sequence[float]) -> dict[str, float]:
        if len(params) != len(self.parameters):
            raise CircuitError(
                f"expected {len(self.parameters)} parameters, got {len(params)}"
            )
        return dict(zip(self.parameters, (float(p) for p in params)))


@dataclass(frozen=True)
class IdleWindow:
    """Maximal per-qubit gap between two consecutive operations.

    ``preceding``/``following`` are indices into the source circuit's gate
    tuple; transforms locate the boundary gates by (qubit, time) so windows
    stay usable on structurally equal circuits.
    """

    qubit: int
    start: int
    end: int
    preceding: int
    following: int

    @property
    def length(self) -> int:
        return self.end - self.start


def _resolve_angle(angle: float | str | None, bound: dict[str, float]) -> float:
    if angle is None:
        return 0.0
    if isinstance(angle, str):
        try:
            return bound[angle]
        except KeyError:
            raise CircuitError(f"unbound parameter {angle!r}") from None
    return float(angle)


def gate_unitary(kind: GateKind, angle: float = 0.0) -> np.ndarray:
    """Ideal unitary of a gate; 2x2, or 4x4 for CX ordered |control target>."""
    if kind is GateKind.I or kind is GateKind.DELAY or kind is GateKind.MEASURE:
        return np.eye(2, dtype=complex)
    if kind is GateKind.X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind is GateKind.Y:
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if kind is GateKind.Z:
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if kind is GateKind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    half = angle / 2.0
    if kind is GateKind.RX:
        return np.array(
            [[math.cos(half), -1j * math.sin(half)], [-1j * math.sin(half), math.cos(half)]],
            dtype=complex,
        )
    if kind is GateKind.RY:
        return np.array(
            [[math.cos(half), -math.sin(half)], [math.sin(half), math.cos(half)]],
            dtype=complex,
        )
    if kind is GateKind.RZ:
        return np.diag([np.exp(-1j * half), np.exp(1j * half)]).astype(complex)
    if kind is GateKind.CX:
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    raise CircuitError(f"no unitary for {kind}")


def schedule_alap(
    circuit: Sequence[Gate] | TimedCircuit,
    n_qubits: int | None = None,
    durations: DurationTable | None = None,
) -> TimedCircuit:
    """ALAP-schedule a gate list: every gate starts as late as the dependency
    DAG allows, for the total duration fixed by the critical path.

    A TimedCircuit input is first lowered back to a gate list with explicit
    DELAYs for its idle gaps, which makes rescheduling idempotent.
    """
    if isinstance(circuit, TimedCircuit):
        durations = durations or circuit.durations
        n_qubits = circuit.n_qubits
        gates = to_gates(circuit)
    else:
        gates = list(circuit)
        if n_qubits is None:
            raise CircuitError("n_qubits is required for an unscheduled gate list")
    durations = durations or DEFAULT_DURATIONS

    for g in gates:
        for q in g.qubits:
            if not 0 <= q < n_qubits:
                raise CircuitError(f"gate {g.kind.name} references qubit {q} >= {n_qubits}")

    durs = [durations.duration_of(g.kind, g.delay) for g in gates]

    # Forward (ASAP) pass fixes the critical-path length.
    frontier = [0] * n_qubits
    for g, d in zip(gates, durs):
        start = max(frontier[q] for q in g.qubits)
        for q in g.qubits:
            frontier[q] = start + d
    total = max(frontier, default=0)

    # Backward pass places each gate against its successors' deadline.
    deadline = [total] * n_qubits
    starts: list[int] = [0] * len(gates)
    for i in range(len(gates) - 1, -1, -1):
        g = gates[i]
        end = min(deadline[q] for q in g.qubits)
        starts[i] = end - durs[i]
        for q in g.qubits:
            deadline[q] = starts[i]

    params: list[str] = []
    for g in gates:
        if isinstance(g.angle, str) and g.angle not in params:
            params.append(g.angle)

    timed = [
        TimedGate(g.kind, g.qubits, starts[i], durs[i], g.angle)
        for i, g in enumerate(gates)
        if g.kind is not GateKind.DELAY
    ]
    order = sorted(range(len(timed)), key=lambda i: (timed[i].start, timed[i].qubits[0], i))
    tc = TimedCircuit(n_qubits, tuple(timed[i] for i in order), tuple(params), durations)
    tc.validate()
    return tc


def to_gates(tc: TimedCircuit) -> list[Gate]:
    """Lower a TimedCircuit to a dependency-ordered gate list, materializing
    idle gaps (including each qubit's leading idle) as DELAY gates so the
    exact timing survives rescheduling."""
    out: list[Gate] = []
    frontier: dict[int, int] = {q: 0 for q in range(tc.n_qubits)}
    for g in tc.gates:
        for q in g.qubits:
            if frontier[q] < g.start:
                out.append(Gate(GateKind.DELAY, (q,), delay=g.start - frontier[q]))
        out.append(Gate(g.kind, g.qubits, angle=g.angle))
        for q in g.qubits:
            frontier[q] = g.end
    return out


def extract_idle_windows(tc: TimedCircuit, min_len: int = 1) -> list[IdleWindow]:
    """All maximal per-qubit gaps of at least ``min_len`` cycles between
    consecutive operations, sorted by (qubit, start).

    Gaps before a qubit's first gate are not windows: the qubit still holds
    |0>, which none of the modeled idle channels move.
    """
    windows: list[IdleWindow] = []
    for q in range(tc.n_qubits):
        ops = [(i, g) for i, g in enumerate(tc.gates) if q in g.qubits]
        ops.sort(key=lambda ig: ig[1].start)
        for (i_prev, prev), (i_next, nxt) in zip(ops, ops[1:]):
            if nxt.start - prev.end >= min_len:
                windows.append(IdleWindow(q, prev.end, nxt.start, i_prev, i_next))
    windows.sort(key=lambda w: (w.qubit, w.start))
    return windows


def insert_in_window(
    tc: TimedCircuit,
    w: IdleWindow,
    gates: Iterable[tuple],
) -> TimedCircuit:
    """Insert single-qubit gates into an idle window on ``w.qubit``.

    Each entry is ``(kind, offset_cycles)`` or ``(kind, offset_cycles, angle)``
    with the offset relative to ``w.start``. Placement must stay inside
    [w.start, w.end) with no overlaps; violations name the offending gate.
    """
    new: list[TimedGate] = []
    for entry in gates:
        kind, offset = entry[0], entry[1]
        angle = entry[2] if len(entry) > 2 else None
        label = f"{kind.name}@+{offset}"
        if kind in (GateKind.CX, GateKind.MEASURE, GateKind.DELAY):
            raise CircuitError(f"cannot insert {label}: kind not insertable")
        if kind.is_rotation and not isinstance(angle, (int, float)):
            raise CircuitError(f"cannot insert {label}: rotation needs a numeric angle")
        dur = tc.durations.duration_of(kind)
        start = w.start + int(offset)
        if offset < 0 or start + dur > w.end:
            raise CircuitError(
                f"inserted gate {label} does not fit window [{w.start},{w.end}) on qubit {w.qubit}"
            )
        new.append(TimedGate(kind, (w.qubit,), start, dur, float(angle) if angle is not None else None))
    new.sort(key=lambda g: g.start)
    for a, b in zip(new, new[1:]):
        if a.end > b.start:
            raise CircuitError(
                f"inserted gate {b.kind.name}@+{b.start - w.start} overlaps "
                f"{a.kind.name}@+{a.start - w.start}"
            )
    merged = sorted(tc.gates + tuple(new), key=lambda g: (g.start, g.qubits[0]))
    out = dataclasses.replace(tc, gates=tuple(merged))
    out.validate()
    return out


def _following_gate(tc: TimedCircuit, w: IdleWindow) -> tuple[int, TimedGate]:
    for i, g in enumerate(tc.gates):
        if w.qubit in g.qubits and g.start == w.end:
            return i, g
    raise CircuitError(f"no gate starts at cycle {w.end} on qubit {w.qubit}")


def shift_boundary_gate(tc: TimedCircuit, w: IdleWindow, f: float) -> TimedCircuit:
    """Reposition the single-qubit gate that follows ``w`` to start at
    ``w.start + round(f * window_length)``; f=1 keeps the ALAP position and
    f=0 pulls the gate to the window start."""
    if not 0.0 <= f <= 1.0:
        raise CircuitError(f"fraction {f} outside [0, 1]")
    idx, g = _following_gate(tc, w)
    if g.kind in (GateKind.CX, GateKind.MEASURE):
        raise CircuitError(
            f"no movable gate: window [{w.start},{w.end}) on qubit {w.qubit} "
            f"is followed by {g.kind.name}"
        )
    new_start = w.start + round(f * (w.end - w.start))
    if new_start == g.start:
        return tc
    moved = dataclasses.replace(g, start=new_start)
    merged = sorted(
        tc.gates[:idx] + (moved,) + tc.gates[idx + 1 :],
        key=lambda x: (x.start, x.qubits[0]),
    )
    out = dataclasses.replace(tc, gates=tuple(merged))
    out.validate()
    return out


def _embed_1q(u: np.ndarray, q: int, n: int) -> np.ndarray:
    ops = [np.eye(2, dtype=complex)] * n
    ops[q] = u
    return reduce(np.kron, ops)


def _embed_cx(control: int, target: int, n: int) -> np.ndarray:
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    x = gate_unitary(GateKind.X)
    a = [np.eye(2, dtype=complex)] * n
    b = [np.eye(2, dtype=complex)] * n
    a[control] = p0
    b[control] = p1
    b[target] = x
    return reduce(np.kron, a) + reduce(np.kron, b)


def unitary_of(tc: TimedCircuit, params: Sequence[float] = ()) -> np.ndarray:
    """Noiseless unitary of the circuit (MEASURE ignored), gates multiplied
    in time order. Limited to 10 qubits by the dense representation."""
    if tc.n_qubits > 10:
        raise CircuitError("unitary_of is limited to 10 qubits")
    bound = tc.bind(params)
    u = np.eye(2**tc.n_qubits, dtype=complex)
    for g in tc.gates:
        if g.kind is GateKind.MEASURE:
            continue
        if g.kind is GateKind.CX:
            step = _embed_cx(g.qubits[0], g.qubits[1], tc.n_qubits)
        else:
            step = _embed_1q(gate_unitary(g.kind, _resolve_angle(g.angle, bound)), g.qubits[0], tc.n_qubits)
        u = step @ u
    return u


def trace_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U† V)| / dim: 1.0 iff the unitaries agree up to global phase."""
    dim = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) / dim)
