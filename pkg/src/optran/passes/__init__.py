"""Transpiler passes and the seed-controlled pipeline runner."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..basis import (
    expand_multi_qubit,
    gate_matrix,
    synthesize_1q,
    translate_for_device,
)
from ..device import DeviceModel
from ..ir import (
    ONE_QUBIT_GATES,
    Circuit,
    CircuitError,
    Instruction,
    canonical_angle,
    validate,
)
from .layout import MAPPERS, Layout, LayoutError, map_dense, map_noise_adaptive, map_sabre, map_trivial
from .routing import ROUTERS, RoutingError, route_basic, route_sabre, route_stochastic
from .schedule import apply_dd, makespan, schedule

MAPPER_OPTIONS = ("dense", "noise_adaptive", "sabre", "trivial")
ROUTER_OPTIONS = ("basic", "stochastic", "sabre", "lookahead")
SCHEDULER_OPTIONS = ("alap", "asap")

# trivial mapping and lookahead routing exist but stay out of the default
# search space
DEFAULT_MAPPERS = ("dense", "noise_adaptive", "sabre")
DEFAULT_ROUTERS = ("basic", "stochastic", "sabre")


class PipelineError(CircuitError):
    pass


@dataclass(frozen=True, slots=True)
class PassCombination:
    """One choice per pipeline stage."""

    mapper: str
    router: str
    scheduler: str
    trios: bool
    dd: bool

    def __post_init__(self) -> None:
        if self.mapper not in MAPPER_OPTIONS:
            raise PipelineError(f"unknown mapper {self.mapper!r}")
        if self.router not in ROUTER_OPTIONS:
            raise PipelineError(f"unknown router {self.router!r}")
        if self.router == "lookahead":
            raise PipelineError("lookahead routing is not implemented")
        if self.scheduler not in SCHEDULER_OPTIONS:
            raise PipelineError(f"unknown scheduler {self.scheduler!r}")

    def label(self) -> str:
        flags = ("trios" if self.trios else "notrios",
                 "dd" if self.dd else "nodd")
        return "-".join((self.mapper, self.router, self.scheduler) + flags)


DEFAULT_COMBINATION = PassCombination("sabre", "sabre", "alap", False, False)


@dataclass(frozen=True)
class PipelineConfig:
    """Tunables that the pipeline exposes; defaults match the search space."""

    sabre_lookahead: int = 20
    sabre_extended_weight: float = 0.5
    sabre_decay: float = 0.9
    sabre_iterations: int = 3
    stochastic_max_trials: int = 64
    dd_sequence: str = "xx"
    mappers: tuple[str, ...] = DEFAULT_MAPPERS
    routers: tuple[str, ...] = DEFAULT_ROUTERS
    schedulers: tuple[str, ...] = SCHEDULER_OPTIONS
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        kwargs = {}
        for name in ("sabre_lookahead", "sabre_iterations", "stochastic_max_trials", "seed"):
            if name in data:
                kwargs[name] = int(data[name])
        for name in ("sabre_extended_weight", "sabre_decay"):
            if name in data:
                kwargs[name] = float(data[name])
        if "dd_sequence" in data:
            kwargs["dd_sequence"] = str(data["dd_sequence"])
        for name in ("mappers", "routers", "schedulers"):
            if name in data:
                kwargs[name] = tuple(str(x) for x in data[name])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def derive_seed(*parts) -> int:
    """Stable child seed from mixed int/str parts."""
    ints = []
    for p in parts:
        if isinstance(p, str):
            ints.extend(p.encode())
        else:
            ints.append(int(p) & 0xFFFFFFFF)
    return int(np.random.SeedSequence(ints).generate_state(1)[0])


def fuse_1q(c: Circuit) -> Circuit:
    """Merge runs of single-qubit gates; never increases the 1q gate count."""
    pending: dict[int, list[tuple[int, Instruction]]] = {}
    slots: list[list[Instruction] | None] = [None] * len(c.instructions)

    def flush(q: int) -> None:
        run = pending.pop(q, None)
        if not run:
            return
        u = np.eye(2, dtype=complex)
        for _, ins in run:
            u = gate_matrix(ins.kind, ins.param) @ u
        fused = synthesize_1q(u)
        if len(fused) > len(run):
            for pos, ins in run:
                slots[pos] = [ins]
            return
        head = run[0][0]
        slots[head] = [
            Instruction(kind, (q,), param=param) for kind, param in fused
        ]
        for pos, _ in run[1:]:
            slots[pos] = []

    for idx, ins in enumerate(c.instructions):
        if ins.is_gate and len(ins.qubits) == 1:
            pending.setdefault(ins.qubits[0], []).append((idx, ins))
        else:
            for q in ins.qubits:
                flush(q)
            slots[idx] = [ins]
    for q in list(pending):
        flush(q)
    out: list[Instruction] = []
    for slot in slots:
        if slot:
            out.extend(slot)
    return c.with_instructions(out)


def _mapper_for(name: str, seed: int, config: PipelineConfig):
    if name == "sabre":
        return lambda c, d: map_sabre(c, d, seed=seed,
                                      iterations=config.sabre_iterations)
    return MAPPERS[name]


def _route(name: str, c: Circuit, layout: Layout, d: DeviceModel, seed: int,
           config: PipelineConfig) -> Circuit:
    if name == "basic":
        return route_basic(c, layout, d)
    if name == "stochastic":
        return route_stochastic(c, layout, d, seed=seed,
                                max_trials=config.stochastic_max_trials)
    if name == "sabre":
        return route_sabre(c, layout, d, seed=seed,
                           lookahead=config.sabre_lookahead,
                           weight=config.sabre_extended_weight,
                           decay_factor=config.sabre_decay)
    raise PipelineError(f"unknown router {name!r}")


def run_pipeline(c: Circuit, d: DeviceModel, combo: PassCombination, seed: int,
                 config: PipelineConfig | None = None) -> Circuit:
    """Full transpilation under one pass combination.

    Stages: 1q fusion, multi-qubit decomposition (deferring Toffolis when
    trios is set), mapping, routing, basis translation (expanding deferred
    Toffolis), scheduling, then DD padding when requested. Deterministic
    for a fixed seed; the output is device-legal.
    """
    config = config or PipelineConfig()
    fused = fuse_1q(c)
    expanded = expand_multi_qubit(fused, keep_ccx=combo.trios)
    layout = _mapper_for(combo.mapper, derive_seed(seed, "map"), config)(expanded, d)
    routed = _route(combo.router, expanded, layout, d,
                    derive_seed(seed, "route"), config)
    translated = translate_for_device(routed, d)
    scheduled = schedule(translated, d, combo.scheduler)
    final = apply_dd(scheduled, d) if combo.dd else scheduled
    report = validate(final, d)
    if not report.ok:
        raise PipelineError(
            f"pipeline produced an illegal circuit: {report.violations[:3]}"
        )
    return final


__all__ = [
    "DEFAULT_COMBINATION",
    "DEFAULT_MAPPERS",
    "DEFAULT_ROUTERS",
    "Layout",
    "LayoutError",
    "MAPPERS",
    "PassCombination",
    "PipelineConfig",
    "PipelineError",
    "ROUTERS",
    "RoutingError",
    "apply_dd",
    "derive_seed",
    "fuse_1q",
    "makespan",
    "map_dense",
    "map_noise_adaptive",
    "map_sabre",
    "map_trivial",
    "route_basic",
    "route_sabre",
    "route_stochastic",
    "run_pipeline",
    "schedule",
]
