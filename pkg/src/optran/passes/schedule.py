"""ASAP/ALAP scheduling and dynamical-decoupling insertion."""

from __future__ import annotations

from dataclasses import replace

from ..device import DeviceModel
from ..ir import Circuit, CircuitError, Instruction


def schedule(c: Circuit, d: DeviceModel, policy: str) -> Circuit:
    """Assign start times respecting dependencies and per-qubit exclusivity.

    ASAP places every instruction at its earliest feasible time; ALAP at
    the latest feasible time given the ASAP makespan, so both policies
    share one makespan.
    """
    if policy not in ("asap", "alap"):
        raise CircuitError(f"unknown scheduling policy {policy!r}")
    durations = [d.duration_of(ins.kind, ins.duration) for ins in c.instructions]

    avail: dict[int, int] = {}
    asap_starts: list[int] = []
    for ins, dur in zip(c.instructions, durations):
        t0 = max((avail.get(q, 0) for q in ins.qubits), default=0)
        asap_starts.append(t0)
        for q in ins.qubits:
            avail[q] = t0 + dur
    makespan = max(avail.values(), default=0)

    if policy == "asap":
        starts = asap_starts
    else:
        deadline: dict[int, int] = {}
        starts = [0] * len(c.instructions)
        for i in range(len(c.instructions) - 1, -1, -1):
            ins, dur = c.instructions[i], durations[i]
            t_end = min((deadline.get(q, makespan) for q in ins.qubits),
                        default=makespan)
            starts[i] = t_end - dur
            for q in ins.qubits:
                deadline[q] = starts[i]

    stamped = [
        replace(ins, start_time=starts[i], duration=durations[i])
        for i, ins in enumerate(c.instructions)
    ]
    order = sorted(range(len(stamped)), key=lambda i: (stamped[i].start_time, i))
    return c.with_instructions(stamped[i] for i in order)


def makespan(c: Circuit) -> int:
    ends = [ins.end_time() for ins in c.instructions]
    return max(ends, default=0)


def apply_dd(c: Circuit, d: DeviceModel) -> Circuit:
    """Pad idle windows with a centered X-delay-X-delay echo block.

    Only windows between a qubit's first and last operation qualify, and
    only when long enough for two X pulses plus one delay unit each side.
    """
    d1q = d.durations["1q"]
    threshold = 2 * d1q + 2
    per_qubit: dict[int, list[Instruction]] = {}
    for ins in c.instructions:
        if ins.start_time is None:
            raise CircuitError("apply_dd requires a scheduled circuit")
        if ins.kind == "BARRIER":
            continue
        for q in ins.qubits:
            per_qubit.setdefault(q, []).append(ins)

    inserted: list[Instruction] = []
    for q, ops in per_qubit.items():
        ops.sort(key=lambda i: i.start_time)
        for prev, nxt in zip(ops, ops[1:]):
            gap_start = prev.end_time()
            gap = nxt.start_time - gap_start
            if gap < threshold:
                continue
            rest = gap - 2 * d1q
            g1 = rest - rest // 2
            g2 = rest // 2
            t = gap_start
            inserted.append(Instruction("X", (q,), duration=d1q, start_time=t))
            t += d1q
            inserted.append(Instruction("DELAY", (q,), duration=g1, start_time=t))
            t += g1
            inserted.append(Instruction("X", (q,), duration=d1q, start_time=t))
            t += d1q
            inserted.append(Instruction("DELAY", (q,), duration=g2, start_time=t))

    merged = list(c.instructions) + inserted
    order = sorted(range(len(merged)), key=lambda i: (merged[i].start_time, i))
    return c.with_instructions(merged[i] for i in order)
