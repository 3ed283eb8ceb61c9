"""SWAP routing: basic (shortest path + mirror), stochastic, and heuristic.

All routers emit circuits over physical qubits, relabel measurements so
bitstrings stay in virtual-qubit order, and record the final
virtual -> physical map on the output circuit's layout field.
"""

from __future__ import annotations

import numpy as np

from ..device import DeviceModel, edge_key
from ..ir import Circuit, CircuitError, Instruction
from .layout import Layout


class RoutingError(CircuitError):
    pass


class _Tracker:
    """Live virtual/physical correspondence while swaps are inserted."""

    def __init__(self, layout: Layout, num_phys: int):
        self.phys_of = list(layout.mapping)
        self.virt_at: list[int | None] = [None] * num_phys
        for v, p in enumerate(self.phys_of):
            self.virt_at[p] = v
        self.out: list[Instruction] = []
        self.swap_count = 0

    def swap(self, p: int, q: int) -> None:
        self.out.append(Instruction("SWAP", (min(p, q), max(p, q))))
        self.swap_count += 1
        self._swap_silent(p, q)

    def _swap_silent(self, p: int, q: int) -> None:
        vp, vq = self.virt_at[p], self.virt_at[q]
        self.virt_at[p], self.virt_at[q] = vq, vp
        if vp is not None:
            self.phys_of[vp] = q
        if vq is not None:
            self.phys_of[vq] = p

    def emit(self, ins: Instruction) -> None:
        self.out.append(
            Instruction(
                ins.kind,
                tuple(self.phys_of[v] for v in ins.qubits),
                param=ins.param,
                duration=ins.duration,
                clbit=ins.clbit,
            )
        )

    def finish(self, c: Circuit, d: DeviceModel) -> Circuit:
        return Circuit(
            num_qubits=d.num_qubits,
            num_clbits=c.num_clbits,
            instructions=tuple(self.out),
            layout=tuple(self.phys_of),
        )


def _executable(ins: Instruction, tr: _Tracker, d: DeviceModel) -> bool:
    if not ins.is_gate or len(ins.qubits) == 1:
        return True
    phys = [tr.phys_of[v] for v in ins.qubits]
    if len(phys) == 2:
        return edge_key(*phys) in d.coupling
    return _ccx_center(phys, d) is not None


def _ccx_center(phys: list[int], d: DeviceModel) -> int | None:
    for center in sorted(phys):
        others = [p for p in phys if p != center]
        if all(edge_key(center, o) in d.coupling for o in others):
            return center
    return None


def _lex_shortest_path(src: int, dst: int, d: DeviceModel,
                       blocked: set[int] | None = None) -> list[int] | None:
    """Lexicographically smallest shortest path src -> dst, avoiding blocked."""
    if src == dst:
        return [src]
    n = d.num_qubits
    blocked = blocked or set()
    dist = {dst: 0}
    frontier = [dst]
    while frontier:
        nxt = []
        for u in frontier:
            for v in d.neighbors(u):
                if v not in dist and v not in blocked:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    if src not in dist:
        return None
    path = [src]
    cur = src
    while cur != dst:
        cur = min(v for v in d.neighbors(cur)
                  if v in dist and dist[v] == dist[path[-1]] - 1 and v not in blocked)
        path.append(cur)
    return path


def _gate_distance(ins: Instruction, phys_of, d: DeviceModel) -> int:
    qs = [phys_of[v] for v in ins.qubits]
    if len(qs) == 2:
        return d.distance(qs[0], qs[1])
    return (d.distance(qs[0], qs[1]) + d.distance(qs[0], qs[2])
            + d.distance(qs[1], qs[2]))


def _swaps_toward(tr: _Tracker, src_virt: int, dst_phys: int, d: DeviceModel,
                  blocked: set[int] | None = None, stop_short: int = 1) -> list[tuple[int, int]] | None:
    """Swap plan moving a virtual qubit to within stop_short of a node."""
    path = _lex_shortest_path(tr.phys_of[src_virt], dst_phys, d, blocked)
    if path is None:
        return None
    plan = []
    for i in range(len(path) - 1 - stop_short):
        plan.append((path[i], path[i + 1]))
    return plan


def _ccx_meet_plan(tr: _Tracker, ins: Instruction, d: DeviceModel) -> list[tuple[int, int]]:
    """Swaps (applied to tr) that give the CCX triple a coupled center."""
    applied: list[tuple[int, int]] = []

    def run(plan: list[tuple[int, int]]) -> None:
        for p, q in plan:
            tr.swap(p, q)
            applied.append((p, q))

    va, vb, vt = ins.qubits
    for _round in range(6):
        phys = [tr.phys_of[v] for v in ins.qubits]
        if _ccx_center(phys, d) is not None:
            return applied
        pa, pb = tr.phys_of[va], tr.phys_of[vb]
        if d.distance(pa, pb) > 1:
            run(_swaps_toward(tr, va, pb, d) or [])
            continue
        # a and b adjacent: walk t next to either, avoiding their nodes
        pa, pb = tr.phys_of[va], tr.phys_of[vb]
        targets = sorted(
            (set(d.neighbors(pa)) | set(d.neighbors(pb))) - {pa, pb}
        )
        best: list[tuple[int, int]] | None = None
        for node in targets:
            plan = _swaps_toward(tr, vt, node, d, blocked={pa, pb}, stop_short=0)
            if plan is not None and (best is None or len(plan) < len(best)):
                best = plan
        if best is None:
            for node in targets:
                plan = _swaps_toward(tr, vt, node, d, stop_short=0)
                if plan is not None and (best is None or len(plan) < len(best)):
                    best = plan
        if best is None:
            break
        run(best)
    phys = [tr.phys_of[v] for v in ins.qubits]
    if _ccx_center(phys, d) is None:
        raise RoutingError(f"could not co-locate CCX operands {ins.qubits}")
    return applied


def route_basic(c: Circuit, layout: Layout, d: DeviceModel) -> Circuit:
    """Shortest-path routing with mirrored restore after every gate.

    Positions return to the initial layout after each routed gate, so the
    final permutation equals the input layout.
    """
    tr = _Tracker(layout, d.num_qubits)
    for ins in c.instructions:
        if _executable(ins, tr, d):
            tr.emit(ins)
            continue
        if len(ins.qubits) == 2:
            ctrl, tgt = ins.qubits
            plan = _swaps_toward(tr, ctrl, tr.phys_of[tgt], d)
            for p, q in plan:
                tr.swap(p, q)
            applied = plan
        else:
            applied = _ccx_meet_plan(tr, ins, d)
        tr.emit(ins)
        for p, q in reversed(applied):
            tr.swap(p, q)
    return tr.finish(c, d)


def _dag_edges(c: Circuit) -> tuple[list[list[int]], list[int]]:
    """Successor lists and in-degrees from per-qubit program order."""
    last: dict[int, int] = {}
    succ: list[list[int]] = [[] for _ in c.instructions]
    indeg = [0] * len(c.instructions)
    for i, ins in enumerate(c.instructions):
        deps = {last[q] for q in ins.qubits if q in last}
        for dep in deps:
            succ[dep].append(i)
            indeg[i] += 1
        for q in ins.qubits:
            last[q] = i
    return succ, indeg


class _DagWalk:
    def __init__(self, c: Circuit):
        self.instructions = c.instructions
        self.succ, self.indeg = _dag_edges(c)
        self.ready = sorted(i for i, deg in enumerate(self.indeg) if deg == 0)
        self.done = [False] * len(c.instructions)
        self.remaining_multi = [
            i for i, ins in enumerate(c.instructions)
            if ins.is_gate and len(ins.qubits) >= 2
        ]

    def complete(self, idx: int) -> None:
        self.done[idx] = True
        self.ready.remove(idx)
        for s in self.succ[idx]:
            self.indeg[s] -= 1
            if self.indeg[s] == 0:
                self.ready.append(s)
        self.ready.sort()

    @property
    def finished(self) -> bool:
        return all(self.done)


def _drain_executable(walk: _DagWalk, tr: _Tracker, d: DeviceModel) -> bool:
    """Emit every ready executable instruction; True if anything ran."""
    progressed = False
    moved = True
    while moved:
        moved = False
        for idx in list(walk.ready):
            ins = walk.instructions[idx]
            if _executable(ins, tr, d):
                tr.emit(ins)
                walk.complete(idx)
                moved = True
                progressed = True
    return progressed


def route_stochastic(c: Circuit, layout: Layout, d: DeviceModel, seed: int,
                     max_trials: int = 64) -> Circuit:
    """Randomized routing: best of max_trials seeded trials by SWAP count.

    Each trial samples random swaps on edges touching blocked operands
    until the whole front layer is simultaneously executable; a trial that
    exceeds its step cap is abandoned.
    """
    seeds = np.random.SeedSequence((seed, 0x570C)).spawn(max_trials)
    step_cap = 20 * d.num_qubits + 64
    best: tuple[int, int, Circuit] | None = None
    for trial in range(max_trials):
        rng = np.random.default_rng(seeds[trial])
        result = _stochastic_trial(c, layout, d, rng, step_cap)
        if result is None:
            continue
        swaps, routed = result
        if best is None or swaps < best[0]:
            best = (swaps, trial, routed)
    if best is None:
        raise RoutingError(
            f"stochastic routing exhausted {max_trials} trials"
        )
    return best[2]


def _stochastic_trial(c: Circuit, layout: Layout, d: DeviceModel,
                      rng: np.random.Generator, step_cap: int):
    tr = _Tracker(layout, d.num_qubits)
    walk = _DagWalk(c)
    steps = 0
    while not walk.finished:
        _drain_executable(walk, tr, d)
        if walk.finished:
            break
        blocked = [walk.instructions[i] for i in walk.ready]
        while True:
            if all(_executable(b, tr, d) for b in blocked):
                break
            if steps >= step_cap:
                return None
            steps += 1
            operand_nodes = sorted(
                {tr.phys_of[v] for b in blocked for v in b.qubits}
            )
            candidates = sorted({
                edge_key(p, nb)
                for p in operand_nodes for nb in d.neighbors(p)
            })
            total = sum(_gate_distance(b, tr.phys_of, d) for b in blocked)

            def dist_after(edge: tuple[int, int]) -> int:
                tr._swap_silent(*edge)
                val = sum(_gate_distance(b, tr.phys_of, d) for b in blocked)
                tr._swap_silent(*edge)
                return val

            improving = [e for e in candidates if dist_after(e) < total]
            pool = improving if (improving and rng.random() < 0.6) else candidates
            tr.swap(*pool[rng.integers(len(pool))])
    return tr.swap_count, tr.finish(c, d)


def sabre_route_core(c: Circuit, layout: Layout, d: DeviceModel,
                     rng: np.random.Generator, lookahead: int = 20,
                     weight: float = 0.5, decay_factor: float = 0.9,
                     stall_window: int = 10):
    """Front-layer heuristic routing; returns (instructions, final map, swaps)."""
    tr = _Tracker(layout, d.num_qubits)
    walk = _DagWalk(c)
    decay = np.ones(d.num_qubits)
    stall = 0
    while not walk.finished:
        if _drain_executable(walk, tr, d):
            decay[:] = 1.0
            stall = 0
            continue
        front = [walk.instructions[i] for i in walk.ready]
        if stall >= 2 * stall_window:
            # forced escape: shortest-path the oldest blocked gate
            idx = walk.ready[0]
            ins = walk.instructions[idx]
            if len(ins.qubits) == 2:
                for p, q in _swaps_toward(tr, ins.qubits[0],
                                          tr.phys_of[ins.qubits[1]], d) or []:
                    tr.swap(p, q)
            else:
                _ccx_meet_plan(tr, ins, d)
            tr.emit(ins)
            walk.complete(idx)
            decay[:] = 1.0
            stall = 0
            continue
        if stall == stall_window:
            decay[:] = 1.0

        future = []
        for i in walk.remaining_multi:
            if not walk.done[i] and i not in walk.ready:
                future.append(walk.instructions[i])
                if len(future) >= lookahead:
                    break
        operand_nodes = sorted({tr.phys_of[v] for b in front for v in b.qubits})
        candidates = sorted({
            edge_key(p, nb) for p in operand_nodes for nb in d.neighbors(p)
        })

        def score(edge: tuple[int, int]) -> float:
            tr._swap_silent(*edge)
            s = float(sum(_gate_distance(b, tr.phys_of, d) for b in front))
            if future:
                s += weight * sum(_gate_distance(b, tr.phys_of, d) for b in future)
            tr._swap_silent(*edge)
            return s * max(decay[edge[0]], decay[edge[1]])

        scores = [score(e) for e in candidates]
        lo = min(scores)
        ties = [e for e, s in zip(candidates, scores) if s <= lo + 1e-12]
        pick = ties[rng.integers(len(ties))] if len(ties) > 1 else ties[0]
        tr.swap(*pick)
        decay[pick[0]] /= decay_factor
        decay[pick[1]] /= decay_factor
        stall += 1
    return tr.out, tuple(tr.phys_of), tr.swap_count


def route_sabre(c: Circuit, layout: Layout, d: DeviceModel, seed: int,
                lookahead: int = 20, weight: float = 0.5,
                decay_factor: float = 0.9) -> Circuit:
    """Heuristic lookahead routing, deterministic for a fixed seed."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5AB3)))
    out, final, _ = sabre_route_core(c, layout, d, rng, lookahead, weight,
                                     decay_factor)
    return Circuit(
        num_qubits=d.num_qubits,
        num_clbits=c.num_clbits,
        instructions=tuple(out),
        layout=final,
    )


ROUTERS = {
    "basic": route_basic,
    "stochastic": route_stochastic,
    "sabre": route_sabre,
}
