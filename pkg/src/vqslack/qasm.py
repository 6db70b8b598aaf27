"""Deterministic OpenQASM-2 subset: parse and emit.

Supported statements: the OPENQASM header, ``include`` (skipped), one
``qreg``/``creg`` pair, gate applications over {id, x, y, z, h, rx, ry, rz,
cx}, ``measure q[i] -> c[j]``, ``barrier`` (accepted, dropped: it has no IR
correlate), and an opaque ``delay[d] q[i]`` extension for explicit idle time.
Rotation angles take literal arithmetic with ``pi``; a bare identifier in
angle position becomes a named parameter slot, ordered by first appearance.

All errors carry the 1-based line and column of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .circuit import Gate, GateKind

GATE_NAMES = {
    "id": GateKind.I,
    "x": GateKind.X,
    "y": GateKind.Y,
    "z": GateKind.Z,
    "h": GateKind.H,
    "rx": GateKind.RX,
    "ry": GateKind.RY,
    "rz": GateKind.RZ,
    "cx": GateKind.CX,
}

_EMIT_NAMES = {v: k for k, v in GATE_NAMES.items()}

_PI = 3.141592653589793


class QasmError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>//[^\n]*)
      | (?P<newline>\n)
      | (?P<real>(\d+\.\d*|\.\d+)([eE][+-]?\d+)?|\d+[eE][+-]?\d+)
      | (?P<int>\d+)
      | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<string>"[^"\n]*")
      | (?P<arrow>->)
      | (?P<sym>[()\[\],;+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    type: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.gates: list[Gate] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise QasmError(message, tok.line, tok.col)

    def expect(self, type_: str, value: str | None = None) -> _Token:
        tok = self.peek()
        if tok.type != type_ or (value is not None and tok.value != value):
            want = value if value is not None else type_
            self.error(f"expected {want!r}, found {tok.value!r}")
        return self.advance()

    # -- statements ------------------------------------------------------------

    def parse(self) -> tuple[list[Gate], int]:
        if self.peek().type == "id" and self.peek().value == "OPENQASM":
            self.advance()
            self.expect("real")
            self.expect("sym", ";")
        while self.peek().type != "eof":
            self.statement()
        if self.qreg is None:
            tok = self.tokens[-1]
            raise QasmError("no qreg declaration found", tok.line, tok.col)
        return self.gates, self.qreg[1]

    def statement(self) -> None:
        tok = self.peek()
        if tok.type != "id":
            self.error(f"expected a statement, found {tok.value!r}")
        name = tok.value
        if name == "include":
            self.advance()
            self.expect("string")
            self.expect("sym", ";")
        elif name in ("qreg", "creg"):
            self.reg_decl(name)
        elif name == "measure":
            self.measure()
        elif name == "barrier":
            self.barrier()
        elif name == "delay":
            self.delay()
        elif name in GATE_NAMES:
            self.gate_stmt()
        else:
            self.error(f"unknown gate or statement {name!r}", tok)

    def reg_decl(self, which: str) -> None:
        tok = self.advance()
        name = self.expect("id").value
        self.expect("sym", "[")
        size = int(self.expect("int").value)
        self.expect("sym", "]")
        self.expect("sym", ";")
        if which == "qreg":
            if self.qreg is not None:
                self.error("only one qreg declaration is supported", tok)
            self.qreg = (name, size)
        else:
            if self.creg is not None:
                self.error("only one creg declaration is supported", tok)
            self.creg = (name, size)

    def qubit_arg(self) -> int:
        tok = self.expect("id")
        if self.qreg is None or tok.value != self.qreg[0]:
            self.error(f"unknown quantum register {tok.value!r}", tok)
        self.expect("sym", "[")
        itok = self.expect("int")
        self.expect("sym", "]")
        index = int(itok.value)
        if index >= self.qreg[1]:
            self.error(f"qubit index {index} out of range for qreg of size {self.qreg[1]}", itok)
        return index

    def measure(self) -> None:
        self.advance()
        q = self.qubit_arg()
        self.expect("arrow")
        tok = self.expect("id")
        if self.creg is None or tok.value != self.creg[0]:
            self.error(f"unknown classical register {tok.value!r}", tok)
        self.expect("sym", "[")
        itok = self.expect("int")
        self.expect("sym", "]")
        if int(itok.value) >= self.creg[1]:
            self.error(f"bit index {itok.value} out of range for creg of size {self.creg[1]}", itok)
        self.expect("sym", ";")
        self.gates.append(Gate(GateKind.MEASURE, (q,)))

    def barrier(self) -> None:
        self.advance()
        self.qubit_arg()
        while self.peek().type == "sym" and self.peek().value == ",":
            self.advance()
            self.qubit_arg()
        self.expect("sym", ";")

    def delay(self) -> None:
        self.advance()
        self.expect("sym", "[")
        dtok = self.expect("int")
        self.expect("sym", "]")
        q = self.qubit_arg()
        self.expect("sym", ";")
        self.gates.append(Gate(GateKind.DELAY, (q,), delay=int(dtok.value)))

    def gate_stmt(self) -> None:
        tok = self.advance()
        kind = GATE_NAMES[tok.value]
        angle: float | str | None = None
        if self.peek().type == "sym" and self.peek().value == "(":
            if not kind.is_rotation:
                self.error(f"gate {tok.value!r} takes no parameters", tok)
            self.advance()
            angle = self.angle_expr()
            self.expect("sym", ")")
        elif kind.is_rotation:
            self.error(f"gate {tok.value!r} requires an angle", tok)
        qubits = [self.qubit_arg()]
        while self.peek().type == "sym" and self.peek().value == ",":
            self.advance()
            qubits.append(self.qubit_arg())
        etok = self.peek()
        self.expect("sym", ";")
        if len(qubits) != kind.n_qubits:
            self.error(f"gate {tok.value!r} takes {kind.n_qubits} qubit(s), got {len(qubits)}", etok)
        if kind is GateKind.CX and qubits[0] == qubits[1]:
            self.error("cx control and target must differ", etok)
        self.gates.append(Gate(kind, tuple(qubits), angle=angle))

    # -- angle expressions -------------------------------------------------------
    # expr := term (("+"|"-") term)* ; term := factor (("*"|"/") factor)*
    # factor := ["-"] (number | "pi" | "(" expr ")")
    # A bare identifier is a parameter slot and must be the whole expression.

    def angle_expr(self) -> float | str:
        tok = self.peek()
        if tok.type == "id" and tok.value != "pi":
            nxt = self.tokens[self.pos + 1]
            if nxt.type == "sym" and nxt.value == ")":
                self.advance()
                return tok.value
            self.error("symbolic parameter must stand alone in angle position", tok)
        return self.expr()

    def expr(self) -> float:
        val = self.term()
        while self.peek().type == "sym" and self.peek().value in "+-":
            op = self.advance().value
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self) -> float:
        val = self.factor()
        while self.peek().type == "sym" and self.peek().value in "*/":
            op = self.advance().value
            tok = self.peek()
            rhs = self.factor()
            if op == "/":
                if rhs == 0:
                    self.error("division by zero in angle expression", tok)
                val = val / rhs
            else:
                val = val * rhs
        return val

    def factor(self) -> float:
        tok = self.peek()
        if tok.type == "sym" and tok.value == "-":
            self.advance()
            return -self.factor()
        if tok.type in ("real", "int"):
            self.advance()
            return float(tok.value)
        if tok.type == "id" and tok.value == "pi":
            self.advance()
            return _PI
        if tok.type == "sym" and tok.value == "(":
            self.advance()
            val = self.expr()
            self.expect("sym", ")")
            return val
        if tok.type == "id":
            self.error("symbolic parameter must stand alone in angle position", tok)
        self.error(f"expected a number, 'pi', or '(', found {tok.value!r}")


def parse(text: str) -> tuple[list[Gate], int]:
    """Parse QASM source into an unscheduled gate list and the qubit count."""
    return _Parser(text).parse()


def _format_angle(angle: float | str) -> str:
    # 15 significant digits keep bound angles within 1e-12 across round trips
    if isinstance(angle, str):
        return angle
    return f"{angle:.15g}"


def emit(gates: Sequence[Gate], n_qubits: int) -> str:
    """Canonical QASM text: one statement per line, angles at 12 significant
    digits; ``emit(parse(emit(x)))`` is a fixed point."""
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";', f"qreg q[{n_qubits}];"]
    if any(g.kind is GateKind.MEASURE for g in gates):
        lines.append(f"creg c[{n_qubits}];")
    for g in gates:
        if g.kind is GateKind.MEASURE:
            q = g.qubits[0]
            lines.append(f"measure q[{q}] -> c[{q}];")
        elif g.kind is GateKind.DELAY:
            lines.append(f"delay[{g.delay}] q[{g.qubits[0]}];")
        elif g.kind is GateKind.CX:
            lines.append(f"cx q[{g.qubits[0]}], q[{g.qubits[1]}];")
        elif g.kind.is_rotation:
            lines.append(f"{_EMIT_NAMES[g.kind]}({_format_angle(g.angle)}) q[{g.qubits[0]}];")
        else:
            lines.append(f"{_EMIT_NAMES[g.kind]} q[{g.qubits[0]}];")
    return "\n".join(lines) + "\n"
