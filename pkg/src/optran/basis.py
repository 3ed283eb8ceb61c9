"""Basis-gate decomposition and single-qubit resynthesis.

The hardware basis is {I, X, SX, RZ, CX}. Toffoli expansion has two forms:
the textbook 6-CX circuit (needs all three qubit pairs coupled) and an
8-CX phase-polynomial form that only needs a center qubit coupled to the
two ends, used after routing when the physical triple sits on a line.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .ir import Circuit, CircuitError, Instruction, canonical_angle

PI = math.pi
T_ANGLE = PI / 4.0
TDG_ANGLE = 7.0 * PI / 4.0

_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
}


def gate_matrix(kind: str, param: float | None = None) -> np.ndarray:
    """2x2 matrix of a single-qubit gate."""
    if kind == "RZ":
        return np.array(
            [[cmath.exp(-0.5j * param), 0], [0, cmath.exp(0.5j * param)]], dtype=complex
        )
    try:
        return _FIXED_MATRICES[kind]
    except KeyError:
        raise CircuitError(f"{kind} is not a single-qubit gate") from None


def _phase_aligned(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    """True if u equals v up to a global phase."""
    k = np.argmax(np.abs(v))
    vf = v.flat[k]
    uf = u.flat[k]
    if abs(uf) < tol:
        return False
    return bool(np.allclose(u * (vf / uf), v, atol=tol))


def synthesize_1q(u: np.ndarray) -> list[tuple[str, float | None]]:
    """Rewrite a 2x2 unitary over {I, X, SX, RZ, H, S, Z}, shortest form first.

    Returns (kind, param) pairs in application order; empty for identity.
    """
    if _phase_aligned(u, np.eye(2)):
        return []
    for kind in ("X", "H", "S", "Z", "SX"):
        if _phase_aligned(u, _FIXED_MATRICES[kind]):
            return [(kind, None)]
    if abs(u[0, 1]) < 1e-9 and abs(u[1, 0]) < 1e-9:
        theta = canonical_angle(cmath.phase(u[1, 1] / u[0, 0]))
        return [("RZ", theta)]
    if abs(u[0, 0]) < 1e-9 and abs(u[1, 1]) < 1e-9:
        # anti-diagonal: X after a frame rotation
        theta = canonical_angle(cmath.phase(u[0, 1] / u[1, 0]))
        return [("RZ", theta), ("X", None)]
    theta, phi, lam = _zyz_angles(u)
    return [
        ("RZ", canonical_angle(lam)),
        ("SX", None),
        ("RZ", canonical_angle(theta + PI)),
        ("SX", None),
        ("RZ", canonical_angle(phi + PI)),
    ]


def _zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Euler angles with u ~ [[cos(t/2), -e^il sin(t/2)], [e^ip sin(t/2), e^i(l+p) cos(t/2)]]."""
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    su = u / cmath.sqrt(det)
    theta = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[0, 0]) < 1e-9:
        return theta, 0.0, cmath.phase(-su[0, 1] / su[1, 0])
    if abs(su[1, 0]) < 1e-9:
        return theta, 0.0, cmath.phase(su[1, 1] / su[0, 0])
    phase = su[0, 0] / abs(su[0, 0])
    phi = cmath.phase(su[1, 0] / phase)
    lam = cmath.phase(-su[0, 1] / phase)
    return theta, phi, lam


def ccx_textbook(a: int, b: int, t: int) -> list[Instruction]:
    """Standard 6-CX Toffoli over {H, RZ(+-pi/4), CX}. Needs all three pairs."""
    T, TDG = T_ANGLE, TDG_ANGLE
    seq = [
        ("H", (t,), None),
        ("CX", (b, t), None),
        ("RZ", (t,), TDG),
        ("CX", (a, t), None),
        ("RZ", (t,), T),
        ("CX", (b, t), None),
        ("RZ", (t,), TDG),
        ("CX", (a, t), None),
        ("RZ", (b,), T),
        ("RZ", (t,), T),
        ("H", (t,), None),
        ("CX", (a, b), None),
        ("RZ", (a,), T),
        ("RZ", (b,), TDG),
        ("CX", (a, b), None),
    ]
    return [Instruction(k, q, param=p) for k, q, p in seq]


def ccz_line(end1: int, center: int, end2: int) -> list[Instruction]:
    """CCZ as an 8-CX phase polynomial using only (center, end) pairs.

    Walks the parities a+b, a+c, a+b+c, b+c through the end/center wires,
    phasing each with RZ(+-pi/4), and restores the wires.
    """
    T, TDG = T_ANGLE, TDG_ANGLE
    u, m, v = end1, center, end2
    seq = [
        ("RZ", (u,), T),
        ("RZ", (m,), T),
        ("RZ", (v,), T),
        ("CX", (m, u), None),
        ("RZ", (u,), TDG),
        ("CX", (v, m), None),
        ("RZ", (m,), TDG),
        ("CX", (m, u), None),
        ("RZ", (u,), TDG),
        ("CX", (v, m), None),
        ("CX", (m, u), None),
        ("RZ", (u,), T),
        ("CX", (v, m), None),
        ("CX", (m, u), None),
        ("CX", (v, m), None),
    ]
    return [Instruction(k, q, param=p) for k, q, p in seq]


def ccx_line(a: int, b: int, t: int, center: int) -> list[Instruction]:
    """Toffoli on a physical line through `center` (one of a, b, t)."""
    ends = [q for q in (a, b, t) if q != center]
    out = [Instruction("H", (t,))]
    out.extend(ccz_line(ends[0], center, ends[1]))
    out.append(Instruction("H", (t,)))
    return out


def swap_as_cx(a: int, b: int) -> list[Instruction]:
    return [
        Instruction("CX", (a, b)),
        Instruction("CX", (b, a)),
        Instruction("CX", (a, b)),
    ]


_SIMPLE_EXPANSIONS: dict[str, list[tuple[str, float | None]]] = {
    "H": [("RZ", PI / 2), ("SX", None), ("RZ", PI / 2)],
    "S": [("RZ", PI / 2)],
    "Z": [("RZ", PI)],
}


def _expand_one(ins: Instruction, basis: frozenset[str], keep_ccx: bool) -> list[Instruction]:
    if not ins.is_gate or ins.kind in basis:
        return [ins]
    if ins.kind == "CCX":
        if keep_ccx:
            return [ins]
        return ccx_textbook(*ins.qubits)
    if ins.kind == "SWAP":
        if "CX" not in basis:
            raise CircuitError("cannot decompose SWAP without CX in basis")
        return swap_as_cx(*ins.qubits)
    if ins.kind in _SIMPLE_EXPANSIONS:
        if not {"RZ", "SX"} <= basis and ins.kind == "H":
            raise CircuitError(f"cannot decompose H into basis {sorted(basis)}")
        if "RZ" not in basis:
            raise CircuitError(f"cannot decompose {ins.kind} into basis {sorted(basis)}")
        q = ins.qubits[0]
        return [
            Instruction(k, (q,), param=canonical_angle(p) if p is not None else None)
            for k, p in _SIMPLE_EXPANSIONS[ins.kind]
        ]
    raise CircuitError(f"gate {ins.kind} not decomposable into basis {sorted(basis)}")


def decompose_to_basis(c: Circuit, basis: frozenset[str] | set[str],
                       keep_ccx: bool = False) -> Circuit:
    """Rewrite every gate into the given basis tags (plus CCX iff keep_ccx).

    Unitary-equivalent up to global phase; CCX expands to the textbook
    6-CX form.
    """
    basis = frozenset(basis)
    out: list[Instruction] = []
    for ins in c.instructions:
        pending = [ins]
        for _ in range(4):  # CCX -> H -> RZ/SX bottoms out in two rounds
            nxt: list[Instruction] = []
            dirty = False
            for p in pending:
                exp = _expand_one(p, basis, keep_ccx)
                dirty = dirty or (len(exp) != 1 or exp[0] is not p)
                nxt.extend(exp)
            pending = nxt
            if not dirty:
                break
        else:
            raise CircuitError(f"expansion of {ins.kind} did not terminate")
        out.extend(pending)
    return c.with_instructions(out)


def expand_multi_qubit(c: Circuit, keep_ccx: bool) -> Circuit:
    """Expand 3+ qubit gates only (pipeline stage before mapping)."""
    out: list[Instruction] = []
    for ins in c.instructions:
        if ins.kind == "CCX" and not keep_ccx:
            out.extend(ccx_textbook(*ins.qubits))
        else:
            out.append(ins)
    return c.with_instructions(out)


def translate_for_device(c: Circuit, device) -> Circuit:
    """Translate a routed physical circuit into the device basis.

    Deferred CCX gates are expanded with the form matching the coupling of
    their physical triple: textbook when the triple is a triangle, the
    line form through a center otherwise.
    """
    out: list[Instruction] = []
    for ins in c.instructions:
        if ins.kind == "CCX":
            a, b, t = ins.qubits
            pairs = [(a, b), (a, t), (b, t)]
            coupled = {p for p in pairs
                       if (min(p), max(p)) in device.coupling}
            if len(coupled) == 3:
                expanded = ccx_textbook(a, b, t)
            else:
                center = _triple_center(ins.qubits, device)
                if center is None:
                    raise CircuitError(
                        f"CCX on {ins.qubits} has no coupled center; routing failed"
                    )
                expanded = ccx_line(a, b, t, center)
            out.extend(decompose_to_basis(
                Circuit(c.num_qubits, 0, tuple(expanded)), device.basis).instructions)
        else:
            out.extend(_expand_one(ins, device.basis, keep_ccx=False))
    return c.with_instructions(out)


def _triple_center(qubits: tuple[int, ...], device) -> int | None:
    for center in sorted(qubits):
        others = [q for q in qubits if q != center]
        if all((min(center, o), max(center, o)) in device.coupling for o in others):
            return center
    return None
