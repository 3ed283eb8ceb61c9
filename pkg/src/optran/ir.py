"""Circuit intermediate representation: instructions, circuits, distributions.

All IR values are immutable after construction and safe to share across
parallel workers. Angles are stored in radians, canonicalized to [0, 2pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

TWO_PI = 2.0 * math.pi
HALF_PI = math.pi / 2.0

# Gate tags and their operand counts. BARRIER takes any number of qubits.
GATE_ARITY = {
    "I": 1,
    "X": 1,
    "SX": 1,
    "H": 1,
    "S": 1,
    "Z": 1,
    "RZ": 1,
    "CX": 2,
    "CCX": 3,
    "SWAP": 2,
    "MEASURE": 1,
    "DELAY": 1,
    "BARRIER": None,
}

ONE_QUBIT_GATES = frozenset({"I", "X", "SX", "H", "S", "Z", "RZ"})
CLIFFORD_BASIS = frozenset({"I", "X", "SX", "RZ", "CX"})
NON_GATE_KINDS = frozenset({"MEASURE", "DELAY", "BARRIER"})

# "multiple of pi/2" tolerance used for the Clifford/non-Clifford split
CLIFFORD_ANGLE_TOL = 1e-12


class CircuitError(ValueError):
    """Structural violation in a circuit or instruction."""


def canonical_angle(theta: float) -> float:
    """Reduce an angle to [0, 2pi)."""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # fmod rounding at the boundary
        r -= TWO_PI
    return r


def is_clifford_angle(theta: float, tol: float = CLIFFORD_ANGLE_TOL) -> bool:
    """True if theta is a multiple of pi/2 (mod 2pi) within tol."""
    r = canonical_angle(theta)
    k = round(r / HALF_PI)
    return abs(r - k * HALF_PI) <= tol


@dataclass(frozen=True, slots=True)
class Instruction:
    """One operation on qubits.

    param is the RZ rotation angle; duration is the length of a DELAY (and
    is filled in for other kinds by scheduling); clbit is the classical
    target of a MEASURE; start_time is filled in by scheduling.
    """

    kind: str
    qubits: tuple[int, ...]
    param: float | None = None
    duration: int | None = None
    clbit: int | None = None
    start_time: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_ARITY:
            raise CircuitError(f"unknown instruction kind {self.kind!r}")
        arity = GATE_ARITY[self.kind]
        if arity is not None and len(self.qubits) != arity:
            raise CircuitError(
                f"{self.kind} takes {arity} qubit(s), got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"duplicate qubit operand in {self.kind}")
        if (self.param is not None) != (self.kind == "RZ"):
            raise CircuitError("param is present iff kind is RZ")
        if self.kind == "DELAY" and self.duration is None:
            raise CircuitError("DELAY requires a duration")
        if self.kind == "MEASURE" and self.clbit is None:
            raise CircuitError("MEASURE requires a classical bit")

    @property
    def is_gate(self) -> bool:
        return self.kind not in NON_GATE_KINDS

    def end_time(self) -> int:
        if self.start_time is None or self.duration is None:
            raise CircuitError("instruction is not scheduled")
        return self.start_time + self.duration


def rz(qubit: int, theta: float, **kw) -> Instruction:
    return Instruction("RZ", (qubit,), param=canonical_angle(theta), **kw)


def measure(qubit: int, clbit: int, **kw) -> Instruction:
    return Instruction("MEASURE", (qubit,), clbit=clbit, **kw)


@dataclass(frozen=True, slots=True)
class Circuit:
    """Ordered instruction list over virtual or physical qubits.

    layout, when present, is the final virtual -> physical map produced by
    mapping/routing (index = virtual qubit).
    """

    num_qubits: int
    num_clbits: int
    instructions: tuple[Instruction, ...]
    layout: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise CircuitError("negative register size")
        seen_clbits: set[int] = set()
        measured: set[int] = set()
        for ins in self.instructions:
            for q in ins.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(
                        f"qubit index {q} out of range for {self.num_qubits} qubits"
                    )
            if ins.kind == "MEASURE":
                if not 0 <= ins.clbit < self.num_clbits:
                    raise CircuitError(f"clbit index {ins.clbit} out of range")
                if ins.clbit in seen_clbits:
                    raise CircuitError(f"clbit {ins.clbit} measured twice")
                seen_clbits.add(ins.clbit)
                measured.add(ins.qubits[0])
            elif ins.is_gate and measured & set(ins.qubits):
                raise CircuitError("gate after measurement on the same qubit")
        if self.layout is not None:
            if len(set(self.layout)) != len(self.layout):
                raise CircuitError("layout is not injective")

    def with_instructions(self, instructions) -> Circuit:
        return replace(self, instructions=tuple(instructions))

    @property
    def measured_pairs(self) -> tuple[tuple[int, int], ...]:
        """(qubit, clbit) pairs in clbit order."""
        pairs = [(i.qubits[0], i.clbit) for i in self.instructions if i.kind == "MEASURE"]
        return tuple(sorted(pairs, key=lambda p: p[1]))

    def used_qubits(self) -> tuple[int, ...]:
        used: set[int] = set()
        for ins in self.instructions:
            used.update(ins.qubits)
        return tuple(sorted(used))


@dataclass(frozen=True, slots=True)
class Distribution:
    """Map from measured bitstring to probability.

    Keys are fixed-width strings over the classical register; string
    position i holds classical bit i (clbit 0 is the most significant,
    leftmost character).
    """

    entries: dict[str, float]
    width: int = field(default=-1)

    def __post_init__(self) -> None:
        width = self.width
        if width < 0:
            if not self.entries:
                raise CircuitError("cannot infer width of empty distribution")
            width = len(next(iter(self.entries)))
            object.__setattr__(self, "width", width)
        for key in self.entries:
            if len(key) != width or set(key) - {"0", "1"}:
                raise CircuitError(f"malformed bitstring key {key!r}")
        total = sum(self.entries.values())
        if abs(total - 1.0) > 1e-9:
            raise CircuitError(f"probabilities sum to {total}, not 1")

    def support(self) -> frozenset[str]:
        return frozenset(self.entries)

    def sorted_items(self) -> list[tuple[str, float]]:
        return sorted(self.entries.items())


@dataclass(frozen=True, slots=True)
class CircuitStats:
    depth: int
    total_gates: int
    cx_count: int
    non_clifford: int


def circuit_stats(c: Circuit) -> CircuitStats:
    """Depth (longest dependency chain ignoring barriers), gate counts.

    Non-Clifford counts RZ gates whose angle is not a multiple of pi/2.
    """
    level: dict[int, int] = {}
    depth = 0
    total = 0
    cx = 0
    non_clifford = 0
    for ins in c.instructions:
        if ins.kind == "BARRIER":
            continue
        total += 1
        if ins.kind == "CX":
            cx += 1
        if ins.kind == "RZ" and not is_clifford_angle(ins.param):
            non_clifford += 1
        lv = 1 + max((level.get(q, 0) for q in ins.qubits), default=0)
        for q in ins.qubits:
            level[q] = lv
        depth = max(depth, lv)
    return CircuitStats(depth=depth, total_gates=total, cx_count=cx, non_clifford=non_clifford)


@dataclass(frozen=True, slots=True)
class Violation:
    index: int
    kind: str
    qubits: tuple[int, ...]
    reason: str  # "uncoupled-edge" or "non-basis"


@dataclass(frozen=True, slots=True)
class ValidityReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(c: Circuit, device) -> ValidityReport:
    """Report two-qubit gates on uncoupled edges and non-basis gates.

    Qubit indices are interpreted as physical. MEASURE/DELAY/BARRIER are
    not gates and are always allowed.
    """
    out: list[Violation] = []
    for idx, ins in enumerate(c.instructions):
        if not ins.is_gate:
            continue
        if ins.kind not in device.basis:
            out.append(Violation(idx, ins.kind, ins.qubits, "non-basis"))
        if len(ins.qubits) == 2:
            a, b = ins.qubits
            if (min(a, b), max(a, b)) not in device.coupling:
                out.append(Violation(idx, ins.kind, ins.qubits, "uncoupled-edge"))
    return ValidityReport(tuple(out))
