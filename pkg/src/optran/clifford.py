"""Exact stabilizer simulation and Clifford proxy-circuit construction.

The tableau is the binary symplectic representation with a phase column
(destabilizer rows first, stabilizer rows second). Gates reduce to the
H/S/CX generators; the final measurement distribution of a stabilizer
state is uniform over an affine subspace, which is extracted exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ir import (
    Circuit,
    CircuitError,
    Distribution,
    Instruction,
    canonical_angle,
)

PEAK_THRESHOLD = 1e-6
QUARTER_PI = math.pi / 4.0
HALF_PI = math.pi / 2.0

CLIFFORDIZABLE_KINDS = frozenset(
    {"I", "X", "SX", "RZ", "CX", "MEASURE", "DELAY", "BARRIER"}
)


class NonCliffordGate(CircuitError):
    pass


class StabilizerTableau:
    """CHP-style tableau: 2n x 2n symplectic bits plus 2n phase bits."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1          # destabilizer X_i
            self.z[n + i, i] = 1      # stabilizer Z_i

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cx(self, a: int, b: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, b] & (self.x[:, b] ^ self.z[:, a] ^ 1)
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    def x_gate(self, q: int) -> None:
        self.r ^= self.z[:, q]

    def sx(self, q: int) -> None:
        # S' H S' up to global phase
        for _ in range(3):
            self.s(q)
        self.h(q)
        for _ in range(3):
            self.s(q)

    def swap(self, a: int, b: int) -> None:
        self.x[:, [a, b]] = self.x[:, [b, a]]
        self.z[:, [a, b]] = self.z[:, [b, a]]

    def apply(self, ins: Instruction) -> None:
        kind = ins.kind
        if kind in ("I", "BARRIER", "DELAY", "MEASURE"):
            return
        if kind == "CX":
            self.cx(*ins.qubits)
        elif kind == "H":
            self.h(*ins.qubits)
        elif kind == "S":
            self.s(*ins.qubits)
        elif kind == "X":
            self.x_gate(*ins.qubits)
        elif kind == "Z":
            self.s(ins.qubits[0])
            self.s(ins.qubits[0])
        elif kind == "SX":
            self.sx(*ins.qubits)
        elif kind == "SWAP":
            self.swap(*ins.qubits)
        elif kind == "RZ":
            k = round(ins.param / HALF_PI)
            if abs(ins.param - k * HALF_PI) > 1e-12:
                raise NonCliffordGate(f"RZ({ins.param}) is not a Clifford angle")
            for _ in range(k % 4):
                self.s(ins.qubits[0])
        else:
            raise NonCliffordGate(f"{kind} is not a Clifford gate")


def _g_exponents(x1, z1, x2, z2):
    """i-exponent of single-qubit Pauli product (x1,z1)*(x2,z2), vectorized."""
    x1 = x1.astype(np.int16)
    z1 = z1.astype(np.int16)
    x2 = x2.astype(np.int16)
    z2 = z2.astype(np.int16)
    out = np.zeros_like(x1)
    both = (x1 == 1) & (z1 == 1)
    out[both] = (z2 - x2)[both]
    xonly = (x1 == 1) & (z1 == 0)
    out[xonly] = (z2 * (2 * x2 - 1))[xonly]
    zonly = (x1 == 0) & (z1 == 1)
    out[zonly] = (x2 * (1 - 2 * z2))[zonly]
    return out


def _row_multiply(xs, zs, rs, dst: int, src: int) -> None:
    """Row dst := row src * row dst with exact sign tracking."""
    phase = 2 * int(rs[dst]) + 2 * int(rs[src])
    phase += int(_g_exponents(xs[src], zs[src], xs[dst], zs[dst]).sum())
    rs[dst] = (phase % 4) // 2
    xs[dst] ^= xs[src]
    zs[dst] ^= zs[src]


@dataclass(frozen=True)
class AffineSupport:
    """Uniform support {offset + c @ basis (mod 2)} over measured bits."""

    offset: np.ndarray        # (width,) uint8
    basis: np.ndarray         # (k, width) uint8, independent rows
    width: int

    @property
    def size(self) -> int:
        return 1 << self.basis.shape[0]


def _gf2_row_reduce(rows: np.ndarray) -> np.ndarray:
    """Independent rows spanning the same GF(2) row space."""
    m = rows.copy() % 2
    out = []
    pivots: list[int] = []
    for row in m:
        row = row.copy()
        for prow, pc in zip(out, pivots):
            if row[pc]:
                row ^= prow
        nz = np.flatnonzero(row)
        if nz.size:
            out.append(row)
            pivots.append(int(nz[0]))
    return np.array(out, dtype=np.uint8) if out else np.zeros((0, m.shape[1]), np.uint8)


def tableau_support(tab: StabilizerTableau, measured: list[tuple[int, int]],
                    width: int) -> AffineSupport:
    """Affine support of Z-measurements on the given (qubit, clbit) pairs."""
    n = tab.n
    xs = tab.x[n:].copy()
    zs = tab.z[n:].copy()
    rs = tab.r[n:].copy()

    # Gauss-Jordan on the X block; leftover rows are the Z-only subgroup.
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, n) if xs[i, col]), None)
        if pivot is None:
            continue
        for arr in (xs, zs):
            arr[[rank, pivot]] = arr[[pivot, rank]]
        rs[[rank, pivot]] = rs[[pivot, rank]]
        for i in range(n):
            if i != rank and xs[i, col]:
                _row_multiply(xs, zs, rs, i, rank)
        rank += 1

    v = zs[rank:]          # constraints v . z = s over all n qubits
    s = rs[rank:].astype(np.uint8)

    # Solve V z = s: particular solution plus nullspace basis.
    aug = np.concatenate([v % 2, s[:, None]], axis=1).astype(np.uint8)
    pivots: list[int] = []
    row = 0
    for col in range(n):
        pivot = next((i for i in range(row, aug.shape[0]) if aug[i, col]), None)
        if pivot is None:
            continue
        aug[[row, pivot]] = aug[[pivot, row]]
        for i in range(aug.shape[0]):
            if i != row and aug[i, col]:
                aug[i] ^= aug[row]
        pivots.append(col)
        row += 1

    z0 = np.zeros(n, dtype=np.uint8)
    for r_i, col in enumerate(pivots):
        z0[col] = aug[r_i, n]
    free_cols = [c for c in range(n) if c not in pivots]
    null_basis = np.zeros((len(free_cols), n), dtype=np.uint8)
    for bi, fc in enumerate(free_cols):
        null_basis[bi, fc] = 1
        for r_i, col in enumerate(pivots):
            null_basis[bi, col] = aug[r_i, fc]

    # Project the full-space affine set onto the measured clbits.
    offset = np.zeros(width, dtype=np.uint8)
    proj = np.zeros((null_basis.shape[0], width), dtype=np.uint8)
    for q, cb in measured:
        offset[cb] = z0[q]
        proj[:, cb] = null_basis[:, q]
    return AffineSupport(offset=offset, basis=_gf2_row_reduce(proj), width=width)


def _run_tableau(c: Circuit) -> tuple[StabilizerTableau, list[tuple[int, int]], int]:
    tab = StabilizerTableau(c.num_qubits)
    for ins in c.instructions:
        tab.apply(ins)
    pairs = list(c.measured_pairs)
    width = c.num_clbits
    if not pairs:
        pairs = [(q, q) for q in range(c.num_qubits)]
        width = c.num_qubits
    return tab, pairs, width


def circuit_support(c: Circuit) -> AffineSupport:
    """Affine measurement support of a Clifford circuit."""
    tab, pairs, width = _run_tableau(c)
    return tableau_support(tab, pairs, width)


def support_peaks(sup: AffineSupport) -> int:
    """Support size under the peak threshold (huge flat supports count 0)."""
    k = sup.basis.shape[0]
    return sup.size if 2.0 ** (-k) >= PEAK_THRESHOLD else 0


def stabilizer_simulate(c: Circuit) -> Distribution:
    """Exact measurement distribution of a Clifford circuit.

    The support is an affine subspace and every support element has equal
    probability. Circuits without measures are measured on every qubit.
    """
    sup = circuit_support(c)
    k = sup.basis.shape[0]
    if k > 26:
        raise CircuitError(f"support of size 2^{k} is too large to enumerate")
    prob = 2.0 ** (-k)
    entries: dict[str, float] = {}
    for code in range(1 << k):
        coeffs = np.array([(code >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
        bits = (sup.offset + coeffs @ sup.basis) % 2 if k else sup.offset
        entries["".join("1" if b else "0" for b in bits)] = prob
    return Distribution(entries=entries, width=sup.width)


def count_peaks(dist: Distribution) -> int:
    """Outcomes with probability at or above the peak threshold."""
    return sum(1 for p in dist.entries.values() if p >= PEAK_THRESHOLD)


@dataclass(frozen=True)
class CliffordizeConfig:
    delta: float = math.pi / 100.0
    max_attempts: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < QUARTER_PI:
            raise CircuitError("delta must lie in (0, pi/4)")
        if self.max_attempts < 1:
            raise CircuitError("max_attempts must be positive")


def _round_angle(theta: float, delta: float) -> tuple[float, tuple[float, float] | None]:
    """Deterministic rounding, or the two flanking choices inside the delta band.

    Angles strictly within delta of an odd multiple of pi/4 are randomized
    between the two neighbouring pi/2 multiples; everything else rounds to
    the nearest multiple of pi/2.
    """
    theta = canonical_angle(theta)
    for n in (1, 3, 5, 7):
        center = n * QUARTER_PI
        if abs(theta - center) < delta:
            lo = canonical_angle((n - 1) * QUARTER_PI)
            hi = canonical_angle((n + 1) * QUARTER_PI)
            return theta, (lo, hi)
    k = round(theta / HALF_PI) % 4
    return canonical_angle(k * HALF_PI), None


def cliffordize(c: Circuit, target_peaks: int, cfg: CliffordizeConfig) -> Circuit:
    """Clifford proxy of a transpiled circuit.

    Every RZ angle becomes a multiple of pi/2; all other instructions are
    untouched. Seeded attempts re-randomize only the angles inside the
    delta band, returning the first attempt whose exact support size equals
    target_peaks, else the attempt closest to it (ties go to the earliest).
    """
    bad = {ins.kind for ins in c.instructions} - CLIFFORDIZABLE_KINDS
    if bad:
        raise CircuitError(f"non-basis gate(s) present: {sorted(bad)}")

    fixed_angles: dict[int, float] = {}
    random_slots: list[tuple[int, tuple[float, float]]] = []
    for idx, ins in enumerate(c.instructions):
        if ins.kind != "RZ":
            continue
        rounded, choices = _round_angle(ins.param, cfg.delta)
        if choices is None:
            fixed_angles[idx] = rounded
        else:
            random_slots.append((idx, choices))

    def build(choice_bits: np.ndarray) -> Circuit:
        repl = dict(fixed_angles)
        for (idx, (lo, hi)), bit in zip(random_slots, choice_bits):
            repl[idx] = hi if bit else lo
        new = [
            Instruction(i.kind, i.qubits, param=repl[n], duration=i.duration,
                        clbit=i.clbit, start_time=i.start_time)
            if n in repl else i
            for n, i in enumerate(c.instructions)
        ]
        return c.with_instructions(new)

    attempts = cfg.max_attempts if random_slots else 1
    seeds = np.random.SeedSequence(cfg.seed).spawn(attempts)
    best: tuple[int, int, Circuit] | None = None
    for attempt in range(attempts):
        rng = np.random.default_rng(seeds[attempt])
        bits = rng.integers(0, 2, size=len(random_slots), dtype=np.uint8)
        candidate = build(bits)
        peaks = support_peaks(circuit_support(candidate))
        miss = abs(peaks - target_peaks)
        if miss == 0:
            return candidate
        if best is None or miss < best[0]:
            best = (miss, attempt, candidate)
    return best[2]
