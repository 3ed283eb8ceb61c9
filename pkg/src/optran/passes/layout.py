"""Initial placement of virtual qubits on physical qubits."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..device import DeviceModel, edge_key
from ..ir import Circuit, CircuitError


class LayoutError(CircuitError):
    pass


@dataclass(frozen=True, slots=True)
class Layout:
    """Injective virtual -> physical map (index = virtual qubit)."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.mapping)) != len(self.mapping):
            raise LayoutError("layout is not injective")

    def __getitem__(self, virtual: int) -> int:
        return self.mapping[virtual]

    def __len__(self) -> int:
        return len(self.mapping)


def _check_fits(c: Circuit, d: DeviceModel) -> None:
    if c.num_qubits > d.num_qubits:
        raise LayoutError(
            f"circuit needs {c.num_qubits} qubits, device has {d.num_qubits}"
        )


def interaction_pairs(c: Circuit) -> Counter:
    """Virtual qubit pairs weighted by shared multi-qubit gate count."""
    pairs: Counter = Counter()
    for ins in c.instructions:
        if not ins.is_gate or len(ins.qubits) < 2:
            continue
        qs = ins.qubits
        for i in range(len(qs)):
            for j in range(i + 1, len(qs)):
                pairs[edge_key(qs[i], qs[j])] += 1
    return pairs


def _interaction_degree(c: Circuit) -> Counter:
    deg: Counter = Counter()
    for pair, count in interaction_pairs(c).items():
        deg[pair[0]] += count
        deg[pair[1]] += count
    return deg


def map_trivial(c: Circuit, d: DeviceModel) -> Layout:
    """Virtual qubit i on physical qubit i."""
    _check_fits(c, d)
    return Layout(tuple(range(c.num_qubits)))


def map_dense(c: Circuit, d: DeviceModel) -> Layout:
    """Greedy densest connected subgraph, heavy virtual qubits on dense nodes.

    Seeds at the max-degree node and repeatedly adds the neighbor that
    maximizes the internal edge count (ties to the lowest index).
    """
    _check_fits(c, d)
    k = c.num_qubits
    if k == 0:
        return Layout(())
    degree = [len(d.neighbors(q)) for q in range(d.num_qubits)]
    seed = max(range(d.num_qubits), key=lambda q: (degree[q], -q))
    chosen = [seed]
    chosen_set = {seed}
    while len(chosen) < k:
        frontier = sorted(
            {nb for q in chosen for nb in d.neighbors(q)} - chosen_set
        )
        if not frontier:
            raise LayoutError("device graph ran out of connected nodes")
        best = max(
            frontier,
            key=lambda v: (sum(1 for nb in d.neighbors(v) if nb in chosen_set), -v),
        )
        chosen.append(best)
        chosen_set.add(best)

    internal_deg = {
        v: sum(1 for nb in d.neighbors(v) if nb in chosen_set) for v in chosen
    }
    nodes = sorted(chosen, key=lambda v: (-internal_deg[v], v))
    idegree = _interaction_degree(c)
    virtuals = sorted(range(k), key=lambda v: (-idegree.get(v, 0), v))
    mapping = [0] * k
    for virt, node in zip(virtuals, nodes):
        mapping[virt] = node
    return Layout(tuple(mapping))


def map_noise_adaptive(c: Circuit, d: DeviceModel) -> Layout:
    """Greedy placement on the most reliable links and readout nodes.

    The heaviest interacting pair goes on the lowest-error edge; later
    qubits extend along the lowest-error free edges adjacent to what is
    already placed; leftovers take the best-readout free nodes.
    """
    _check_fits(c, d)
    k = c.num_qubits
    pairs = sorted(interaction_pairs(c).items(), key=lambda kv: (-kv[1], kv[0]))
    phys_of: dict[int, int] = {}
    used: set[int] = set()

    def place(virt: int, node: int) -> None:
        phys_of[virt] = node
        used.add(node)

    def best_adjacent_free(anchors: set[int]) -> tuple[int, int] | None:
        """(free node, anchor) with the lowest cx_error edge into anchors."""
        cands = []
        for (a, b), err in d.cx_error.items():
            for anchor, free in ((a, b), (b, a)):
                if anchor in anchors and free not in used:
                    cands.append((err, free, anchor))
        if not cands:
            return None
        err, free, anchor = min(cands)
        return free, anchor

    for (va, vb), _count in pairs:
        pa, pb = phys_of.get(va), phys_of.get(vb)
        if pa is not None and pb is not None:
            continue
        if pa is None and pb is None:
            anchors = used if used else None
            if anchors:
                pick = best_adjacent_free(anchors)
                if pick is not None:
                    place(va, pick[0])
                    pa = pick[0]
            if va not in phys_of:
                edge, _err = min(
                    ((e, err) for e, err in d.cx_error.items()
                     if e[0] not in used and e[1] not in used),
                    key=lambda kv: (kv[1], kv[0]),
                    default=(None, None),
                )
                if edge is not None:
                    place(va, edge[0])
                    place(vb, edge[1])
                    continue
                place(va, _best_free_readout(d, used))
                pa = phys_of[va]
        anchored, dangling = (va, vb) if vb not in phys_of else (vb, va)
        if dangling in phys_of:
            continue
        pick = best_adjacent_free({phys_of[anchored]})
        if pick is None:
            pick2 = best_adjacent_free(set(used))
            node = pick2[0] if pick2 is not None else _best_free_readout(d, used)
        else:
            node = pick[0]
        place(dangling, node)

    for virt in range(k):
        if virt not in phys_of:
            place(virt, _best_free_readout(d, used))
    return Layout(tuple(phys_of[v] for v in range(k)))


def _best_free_readout(d: DeviceModel, used: set[int]) -> int:
    free = [q for q in range(d.num_qubits) if q not in used]
    if not free:
        raise LayoutError("no free physical qubits left")
    return min(free, key=lambda q: (d.readout_error[q], q))


def map_sabre(c: Circuit, d: DeviceModel, seed: int, iterations: int = 3) -> Layout:
    """Bidirectional routing-cost refinement from a seeded random layout."""
    from .routing import sabre_route_core

    _check_fits(c, d)
    k = c.num_qubits
    if k == 0:
        return Layout(())
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5AB2E)))
    gates = [i for i in c.instructions if i.is_gate and len(i.qubits) >= 2]
    forward = c.with_instructions(gates)
    backward = c.with_instructions(tuple(reversed(gates)))

    current = Layout(tuple(int(q) for q in rng.permutation(d.num_qubits)[:k]))
    candidates = [current]
    for _ in range(iterations):
        _, final, _ = sabre_route_core(forward, current, d, rng)
        _, final_back, _ = sabre_route_core(backward, Layout(final), d, rng)
        current = Layout(final_back)
        candidates.append(current)

    def swap_cost(layout: Layout) -> int:
        _, _, swaps = sabre_route_core(forward, layout, d,
                                       np.random.default_rng(np.random.SeedSequence((seed, 0xC057))))
        return swaps

    costs = [swap_cost(layout) for layout in candidates]
    best = min(range(len(candidates)), key=lambda i: (costs[i], i))
    return candidates[best]


MAPPERS = {
    "trivial": map_trivial,
    "dense": map_dense,
    "noise_adaptive": map_noise_adaptive,
    "sabre": map_sabre,
}
