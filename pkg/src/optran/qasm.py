"""OpenQASM-2 subset parser and emitter.

Supported statements: OPENQASM/include headers, one qreg, at most one creg,
the gates id/x/sx/h/s/z/rz(expr)/cx/ccx/swap, delay(n), measure, barrier.
Angle expressions use pi, numeric literals and + - * / ( ). Scheduling
annotations are emitted as comments and ignored on re-parse.
"""

from __future__ import annotations

import ast
import math
import re

from .ir import Circuit, CircuitError, Instruction, canonical_angle

GATE_NAMES = {
    "id": "I",
    "i": "I",
    "x": "X",
    "sx": "SX",
    "h": "H",
    "s": "S",
    "z": "Z",
    "rz": "RZ",
    "cx": "CX",
    "ccx": "CCX",
    "swap": "SWAP",
}

_EMIT_NAMES = {v: k for k, v in GATE_NAMES.items() if k != "i"}


class QasmError(CircuitError):
    """Parse or structural error with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


_OPERAND_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$")


def _eval_angle(text: str, line: int, col: int) -> float:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise QasmError(f"bad angle expression {text!r}", line, col) from exc

    def go(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return go(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = go(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(
            node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)
        ):
            a, b = go(node.left), go(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if b == 0.0:
                raise QasmError("division by zero in angle", line, col)
            return a / b
        raise QasmError(f"unsupported term in angle expression {text!r}", line, col)

    return go(tree)


def _statements(text: str):
    """Yield (statement, line, col) with comments stripped."""
    buf: list[str] = []
    start: tuple[int, int] | None = None
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "/" and text[i : i + 2] == "//":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                yield stmt, start[0], start[1]
            buf = []
            start = None
        elif ch == "\n":
            buf.append(" ")
            line += 1
            col = 0
        else:
            if not ch.isspace() and start is None:
                start = (line, col)
            buf.append(ch)
        col += 1
        i += 1
    tail = "".join(buf).strip()
    if tail:
        raise QasmError("missing ';' at end of input", start[0], start[1])


def parse_qasm(text: str) -> Circuit:
    """Parse the documented OpenQASM-2 subset into a Circuit."""
    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    instructions: list[Instruction] = []

    def qubit_of(tok: str, line: int, col: int) -> int:
        m = _OPERAND_RE.match(tok.strip())
        if not m or qreg is None or m.group(1) != qreg[0]:
            raise QasmError(f"bad qubit operand {tok.strip()!r}", line, col)
        idx = int(m.group(2))
        if idx >= qreg[1]:
            raise QasmError(f"qubit index {idx} out of range", line, col)
        return idx

    for stmt, line, col in _statements(text):
        if stmt.startswith("OPENQASM") or stmt.startswith("include"):
            continue
        m = re.match(r"^(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$", stmt)
        if m:
            kind, name, size = m.group(1), m.group(2), int(m.group(3))
            if kind == "qreg":
                if qreg is not None:
                    raise QasmError("multiple qreg declarations", line, col)
                qreg = (name, size)
            else:
                if creg is not None:
                    raise QasmError("multiple creg declarations", line, col)
                creg = (name, size)
            continue
        if qreg is None:
            raise QasmError("statement before qreg declaration", line, col)

        m = re.match(r"^measure\s+(\S+)\s*->\s*(\S+)$", stmt)
        if m:
            q = qubit_of(m.group(1), line, col)
            cm = _OPERAND_RE.match(m.group(2).strip())
            if not cm or creg is None or cm.group(1) != creg[0]:
                raise QasmError(f"bad classical operand {m.group(2)!r}", line, col)
            cb = int(cm.group(2))
            if cb >= creg[1]:
                raise QasmError(f"clbit index {cb} out of range", line, col)
            instructions.append(Instruction("MEASURE", (q,), clbit=cb))
            continue

        if stmt == "barrier" or re.match(rf"^barrier\s+{qreg[0]}$", stmt):
            instructions.append(
                Instruction("BARRIER", tuple(range(qreg[1])))
            )
            continue
        m = re.match(r"^barrier\s+(.+)$", stmt)
        if m:
            qs = tuple(qubit_of(t, line, col) for t in m.group(1).split(","))
            _append_checked(instructions, "BARRIER", qs, line, col)
            continue

        m = re.match(r"^delay\s*\(([^)]*)\)\s+(.+)$", stmt)
        if m:
            try:
                dur = int(m.group(1).strip())
            except ValueError as exc:
                raise QasmError(f"bad delay duration {m.group(1)!r}", line, col) from exc
            q = qubit_of(m.group(2), line, col)
            instructions.append(Instruction("DELAY", (q,), duration=dur))
            continue

        m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(\(([^)]*)\))?\s+(.+)$", stmt)
        if not m:
            raise QasmError(f"unparseable statement {stmt!r}", line, col)
        name, param_src, operands = m.group(1), m.group(3), m.group(4)
        if name not in GATE_NAMES:
            raise QasmError(f"unknown gate {name!r}", line, col)
        kind = GATE_NAMES[name]
        if (param_src is not None) != (kind == "RZ"):
            raise QasmError(f"{name} parameter mismatch", line, col)
        qs = tuple(qubit_of(t, line, col) for t in operands.split(","))
        param = None
        if kind == "RZ":
            param = canonical_angle(_eval_angle(param_src, line, col))
        _append_checked(instructions, kind, qs, line, col, param=param)

    if qreg is None:
        raise QasmError("no qreg declaration", 1, 1)
    try:
        return Circuit(
            num_qubits=qreg[1],
            num_clbits=creg[1] if creg else 0,
            instructions=tuple(instructions),
        )
    except CircuitError as exc:
        raise QasmError(str(exc), 1, 1) from exc


def _append_checked(out, kind, qubits, line, col, param=None):
    try:
        out.append(Instruction(kind, qubits, param=param))
    except CircuitError as exc:
        raise QasmError(str(exc), line, col) from exc


def emit_qasm(c: Circuit) -> str:
    """Emit QASM that re-parses to a structurally equal circuit.

    Start times are emitted as trailing comments; the layout, when present,
    as a header comment. Both are ignored by parse_qasm.
    """
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";']
    if c.layout is not None:
        lines.append("// layout: " + ",".join(f"{v}:{p}" for v, p in enumerate(c.layout)))
    lines.append(f"qreg q[{c.num_qubits}];")
    if c.num_clbits:
        lines.append(f"creg c[{c.num_clbits}];")
    for ins in c.instructions:
        if ins.kind == "MEASURE":
            body = f"measure q[{ins.qubits[0]}] -> c[{ins.clbit}]"
        elif ins.kind == "BARRIER":
            body = "barrier " + ",".join(f"q[{q}]" for q in ins.qubits)
        elif ins.kind == "DELAY":
            body = f"delay({ins.duration}) q[{ins.qubits[0]}]"
        elif ins.kind == "RZ":
            body = f"rz({ins.param!r}) q[{ins.qubits[0]}]"
        else:
            ops = ",".join(f"q[{q}]" for q in ins.qubits)
            body = f"{_EMIT_NAMES[ins.kind]} {ops}"
        suffix = f" // t={ins.start_time}" if ins.start_time is not None else ""
        lines.append(f"{body};{suffix}")
    return "\n".join(lines) + "\n"
