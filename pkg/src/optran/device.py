"""Device model: coupling graph, calibration data, durations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DeviceError(ValueError):
    """Malformed or physically inconsistent device model."""


def edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, slots=True)
class TrueRates:
    """Ground-truth error overlay invisible to the calibration-based predictors."""

    cx_error: dict[tuple[int, int], float]
    readout_error: tuple[float, ...]


@dataclass(frozen=True)
class DeviceModel:
    """Calibration view of a device.

    cx_error is keyed by sorted physical edge. t1/t2 and durations share one
    abstract integer time unit (dt). Treated as immutable.
    """

    num_qubits: int
    coupling: frozenset[tuple[int, int]]
    cx_error: dict[tuple[int, int], float]
    readout_error: tuple[float, ...]
    t1: tuple[float, ...]
    t2: tuple[float, ...]
    durations: dict[str, int]
    basis: frozenset[str]
    true_rates: TrueRates | None = None
    _neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _dist: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.num_qubits
        if n <= 0:
            raise DeviceError("device needs at least one qubit")
        if not self.coupling and n > 1:
            raise DeviceError("empty coupling graph")
        for (a, b) in self.coupling:
            if not (0 <= a < n and 0 <= b < n) or a >= b:
                raise DeviceError(f"bad edge ({a}, {b})")
        for e in self.coupling:
            if e not in self.cx_error:
                raise DeviceError(f"missing cx_error for edge {e}")
        for name, probs in (("cx_error", self.cx_error.values()),
                            ("readout_error", self.readout_error)):
            for p in probs:
                if not 0.0 <= p < 1.0:
                    raise DeviceError(f"{name} value {p} outside [0, 1)")
        if len(self.readout_error) != n or len(self.t1) != n or len(self.t2) != n:
            raise DeviceError("per-qubit arrays must have num_qubits entries")
        for q in range(n):
            if self.t1[q] <= 0 or self.t2[q] <= 0:
                raise DeviceError("t1 and t2 must be positive")
            if self.t2[q] > 2.0 * self.t1[q] + 1e-12:
                raise DeviceError(f"t2 > 2*t1 on qubit {q}")
        for key in ("1q", "cx", "measure"):
            if key not in self.durations:
                raise DeviceError(f"missing duration for {key!r}")
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for (a, b) in self.coupling:
            nbrs[a].append(b)
            nbrs[b].append(a)
        object.__setattr__(self, "_neighbors", tuple(tuple(sorted(x)) for x in nbrs))
        object.__setattr__(self, "_dist", _bfs_all_pairs(n, self._neighbors))
        if n > 1 and int(self._dist.max()) >= n + 1:
            raise DeviceError("coupling graph is disconnected")

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self._neighbors[q]

    def distance(self, a: int, b: int) -> int:
        return int(self._dist[a, b])

    @property
    def distance_matrix(self) -> np.ndarray:
        return self._dist

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.coupling)

    def duration_of(self, kind: str, instruction_duration: int | None = None) -> int:
        if kind == "DELAY":
            return int(instruction_duration or 0)
        if kind == "BARRIER":
            return 0
        if kind == "MEASURE":
            return self.durations["measure"]
        if kind == "CX":
            return self.durations["cx"]
        if kind == "SWAP":
            return 3 * self.durations["cx"]
        if kind == "CCX":
            # deferred Toffolis are expanded before scheduling; fallback only
            return 6 * self.durations["cx"] + 8 * self.durations["1q"]
        return self.durations["1q"]


def _bfs_all_pairs(n: int, neighbors) -> np.ndarray:
    dist = np.full((n, n), n + 1, dtype=np.int32)
    for src in range(n):
        dist[src, src] = 0
        frontier = [src]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in neighbors[u]:
                    if dist[src, v] > d:
                        dist[src, v] = d
                        nxt.append(v)
            frontier = nxt
    return dist


def _parse_cx_error(raw: dict, coupling) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for key, val in raw.items():
        try:
            a, b = (int(x) for x in key.split("-"))
        except ValueError as exc:
            raise DeviceError(f"bad cx_error key {key!r}") from exc
        out[edge_key(a, b)] = float(val)
    return out


def device_from_dict(data: dict) -> DeviceModel:
    required = ["num_qubits", "coupling", "cx_error", "readout_error", "t1", "t2",
                "durations", "basis"]
    for key in required:
        if key not in data:
            raise DeviceError(f"missing field {key!r}")
    coupling = frozenset(edge_key(int(a), int(b)) for a, b in data["coupling"])
    true_rates = None
    if "true_rates" in data:
        tr = data["true_rates"]
        true_rates = TrueRates(
            cx_error=_parse_cx_error(tr.get("cx_error", {}), coupling),
            readout_error=tuple(float(x) for x in tr.get("readout_error", [])),
        )
    return DeviceModel(
        num_qubits=int(data["num_qubits"]),
        coupling=coupling,
        cx_error=_parse_cx_error(data["cx_error"], coupling),
        readout_error=tuple(float(x) for x in data["readout_error"]),
        t1=tuple(float(x) for x in data["t1"]),
        t2=tuple(float(x) for x in data["t2"]),
        durations={k: int(v) for k, v in data["durations"].items()},
        basis=frozenset(str(t).upper() for t in data["basis"]),
        true_rates=true_rates,
    )


def load_device_model(path: str | Path) -> DeviceModel:
    """Load and validate a device model JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DeviceError(f"{path}: not valid JSON ({exc})") from exc
    return device_from_dict(data)


def line_device(n: int, cx_error: float = 0.012, readout_error: float = 0.026,
                t1: float = 20000.0, t2: float = 15000.0) -> DeviceModel:
    """Uniform n-qubit line, handy for tests and small experiments."""
    edges = [(i, i + 1) for i in range(n - 1)]
    return DeviceModel(
        num_qubits=n,
        coupling=frozenset(edges),
        cx_error={e: cx_error for e in edges},
        readout_error=(readout_error,) * n,
        t1=(t1,) * n,
        t2=(t2,) * n,
        durations={"1q": 1, "cx": 5, "measure": 20},
        basis=frozenset({"I", "X", "SX", "RZ", "CX"}),
    )
