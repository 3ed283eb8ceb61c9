"""Dense statevector simulation for small circuits.

Supplies the exact noiseless distribution for arbitrary-gate circuits.
Only qubits touched by instructions are materialized, so wide device
circuits with few active qubits stay cheap.
"""

from __future__ import annotations

import numpy as np

from .basis import gate_matrix
from .ir import Circuit, CircuitError, Distribution

PROB_CUTOFF = 1e-16


class TooManyQubits(CircuitError):
    pass


def _measured_pairs(c: Circuit) -> tuple[tuple[tuple[int, int], ...], int]:
    """(qubit, clbit) pairs and register width; no measures = measure all."""
    pairs = c.measured_pairs
    if pairs:
        return pairs, c.num_clbits
    return tuple((q, q) for q in range(c.num_qubits)), c.num_qubits


def _apply_1q(state: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    state = np.moveaxis(state, axis, 0)
    shape = state.shape
    state = u @ state.reshape(2, -1)
    return np.moveaxis(state.reshape(shape), 0, axis)


def _apply_controlled_flip(state: np.ndarray, controls: list[int], target: int) -> None:
    """In-place X on target where all control axes are 1."""
    idx: list = [slice(None)] * state.ndim
    for cax in controls:
        idx[cax] = 1
    sub = state[tuple(idx)]
    t_ax = target - sum(1 for cax in controls if cax < target)
    state[tuple(idx)] = np.flip(sub, axis=t_ax).copy()


def statevector_simulate(c: Circuit, max_qubits: int = 20) -> Distribution:
    """Exact measurement distribution by dense state evolution.

    Keys cover the classical register, clbit 0 leftmost; clbits that are
    never measured read 0. Circuits without measurements are measured on
    every qubit (clbit i = qubit i).
    """
    active = c.used_qubits()
    axis_of = {q: i for i, q in enumerate(active)}
    m = len(active)
    if m > max_qubits:
        raise TooManyQubits(f"{m} active qubits exceeds the {max_qubits}-qubit cap")

    state = np.zeros((2,) * m if m else (1,), dtype=complex)
    state.flat[0] = 1.0
    for ins in c.instructions:
        kind = ins.kind
        if kind in ("BARRIER", "DELAY", "MEASURE", "I"):
            continue
        if kind == "CX":
            _apply_controlled_flip(state, [axis_of[ins.qubits[0]]], axis_of[ins.qubits[1]])
        elif kind == "CCX":
            a, b, t = (axis_of[q] for q in ins.qubits)
            _apply_controlled_flip(state, [a, b], t)
        elif kind == "SWAP":
            a, b = (axis_of[q] for q in ins.qubits)
            state = np.swapaxes(state, a, b).copy()
        elif kind == "X":
            state = np.flip(state, axis=axis_of[ins.qubits[0]]).copy()
        else:
            state = _apply_1q(state, gate_matrix(kind, ins.param), axis_of[ins.qubits[0]])

    pairs, width = _measured_pairs(c)
    probs = np.abs(state) ** 2 if m else np.array([1.0])

    active_measown = [(q, cb) for q, cb in pairs if q in axis_of]
    keep_axes = sorted(axis_of[q] for q, _ in active_measown)
    drop_axes = tuple(ax for ax in range(m) if ax not in keep_axes)
    if drop_axes:
        probs = probs.sum(axis=drop_axes)
    # axis order after the sum follows ascending active-qubit index
    axis_rank = {ax: i for i, ax in enumerate(keep_axes)}
    pos_of_clbit = {cb: axis_rank[axis_of[q]] for q, cb in active_measown}

    entries: dict[str, float] = {}
    flat = probs.reshape(-1)
    k = len(keep_axes)
    for code in np.flatnonzero(flat > PROB_CUTOFF):
        bits = [(int(code) >> (k - 1 - i)) & 1 for i in range(k)]
        key = "".join(
            str(bits[pos_of_clbit[cb]]) if cb in pos_of_clbit else "0"
            for cb in range(width)
        )
        entries[key] = entries.get(key, 0.0) + float(flat[code])
    return Distribution(entries=entries, width=width)
