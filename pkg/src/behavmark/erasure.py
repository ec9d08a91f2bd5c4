"""Rateless random linear coding of the payload over GF(2).

Rows and payloads are Python ints used as packed bit vectors: for length
``L``, column ``j`` (0-based, in stream order) is bit ``L - 1 - j``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainError
from .keyed import Label, RandomStream, StepKey


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def int_to_bits(value: int, length: int) -> str:
    return format(value, f"0{length}b") if length else ""


def dot(row: int, m: int) -> int:
    return (row & m).bit_count() & 1


@dataclass(frozen=True)
class PayloadMessage:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("payload length must be >= 1")
        if self.value < 0 or self.value >> self.length:
            raise ValueError("payload does not fit in its length")

    @classmethod
    def from_bits(cls, bits: str) -> PayloadMessage:
        return cls(bits_to_int(bits), len(bits))

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> PayloadMessage:
        text = text.strip().lower().removeprefix("0x")
        if length is None:
            length = 4 * len(text)
        if len(text) != -(-length // 4):
            raise ValueError(f"{len(text)} hex digits do not match a {length}-bit payload")
        return cls(int(text, 16), length)

    @property
    def bits(self) -> str:
        return int_to_bits(self.value, self.length)

    def hex(self) -> str:
        return format(self.value, f"0{-(-self.length // 4)}x")


class Status(str, enum.Enum):
    UNIQUE = "UNIQUE"
    UNDERDETERMINED = "UNDERDETERMINED"
    INCONSISTENT = "INCONSISTENT"


@dataclass
class GF2System:
    length: int
    rows: list[int] = field(default_factory=list)
    observations: list[int] = field(default_factory=list)

    def add(self, row: int, y: int) -> None:
        if row >> self.length:
            raise ValueError("row wider than the system")
        if y not in (0, 1):
            raise ValueError(f"observation must be 0 or 1, got {y!r}")
        self.rows.append(row)
        self.observations.append(int(y))

    def extend(self, rows: Iterable[int], ys: Iterable[int]) -> None:
        for r, y in zip(rows, ys, strict=True):
            self.add(r, y)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class SolveResult:
    status: Status
    rank: int
    solution: int | None = None


class _Echelon:
    """Incremental XOR basis over augmented rows ``(a << 1) | y``."""

    def __init__(self):
        self.pivots: dict[int, int] = {}
        self.inconsistent = False

    def insert(self, aug: int) -> None:
        pivots = self.pivots
        while aug > 1:
            lead = aug.bit_length() - 1
            p = pivots.get(lead)
            if p is None:
                pivots[lead] = aug
                return
            aug ^= p
        if aug == 1:
            self.inconsistent = True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _echelon(sys: GF2System) -> _Echelon:
    ech = _Echelon()
    for a, y in zip(sys.rows, sys.observations):
        ech.insert((a << 1) | y)
    return ech


def rank(rows: Sequence[int]) -> int:
    # same reduction as _Echelon.insert, inlined: this is the Monte Carlo hot loop
    pivots: dict[int, int] = {}
    get = pivots.get
    for r in rows:
        while r:
            lead = r.bit_length()
            p = get(lead)
            if p is None:
                pivots[lead] = r
                break
            r ^= p
    return len(pivots)


def solve(sys: GF2System) -> SolveResult:
    ech = _echelon(sys)
    if ech.inconsistent:
        return SolveResult(Status.INCONSISTENT, ech.rank)
    if ech.rank < sys.length:
        return SolveResult(Status.UNDERDETERMINED, ech.rank)
    # back substitution: clear every pivot column from the other rows, low to high
    piv = ech.pivots
    leads = sorted(piv)
    for i, lead in enumerate(leads):
        row = piv[lead]
        for hi in leads[i + 1:]:
            if (piv[hi] >> lead) & 1:
                piv[hi] ^= row
    m = 0
    for lead, row in piv.items():
        if row & 1:
            m |= 1 << (lead - 1)
    return SolveResult(Status.UNIQUE, ech.rank, m)


def consistency_check(sys: GF2System) -> bool:
    return not _echelon(sys).inconsistent


def satisfies(sys: GF2System, m: int) -> bool:
    return all(dot(a, m) == y for a, y in zip(sys.rows, sys.observations))


def coefficient_rows(key: StepKey, length: int, count: int) -> list[int]:
    stream = RandomStream.open(key, Label.COEF)
    return [stream.next_coefficient_row(length) for _ in range(count)]


def emit_equations(m: PayloadMessage, key: StepKey, count: int) -> str:
    return "".join(str(dot(r, m.value)) for r in coefficient_rows(key, m.length, count))


def success_lower_bound(received: int, length: int) -> float:
    """1 - 2^-(r - L): lower bound on full rank for r dense random rows."""
    if received < length:
        raise DomainError(f"received bits {received} < payload length {length}")
    return 1.0 - 2.0 ** -(received - length)


def full_rank_probability(rows: int, length: int) -> float:
    """Exact probability that ``rows`` uniform rows span GF(2)^length."""
    if rows < length:
        return 0.0
    p = 1.0
    for i in range(length):
        p *= 1.0 - 2.0 ** (i - rows)
    return p


# Repetition baseline ---------------------------------------------------------


def repetition_encode(m: PayloadMessage, step_capacities: Sequence[int]) -> list[str]:
    """Fill each step's capacity with the payload bits, cycling through the payload."""
    bits, L = m.bits, m.length
    out, slot = [], 0
    for c in step_capacities:
        out.append("".join(bits[(slot + i) % L] for i in range(c)))
        slot += c
    return out


def repetition_blind_decode(
    surviving: Sequence[tuple[int, str]],
    length: int,
    step_capacities: Sequence[int],
) -> str | None:
    """Recover an intact payload copy from the surviving steps, or ``None``.

    ``surviving`` holds ``(original_index, bits)`` pairs (0-based indices).
    The indices are never used to realign bits; they only decide whether a
    copy came through contiguously, which is the condition under which a
    blind decoder can read it. Copy ``c`` spans payload slots
    ``[c*L, (c+1)*L)``; it is intact when every step carrying one of those
    slots survived.
    """
    starts, pos = [], 0
    for c in step_capacities:
        starts.append(pos)
        pos += c
    alive = {i: bits for i, bits in surviving}
    for i, bits in alive.items():
        if len(bits) != step_capacities[i]:
            raise ValueError(f"step {i} carries {len(bits)} bits, capacity {step_capacities[i]}")
    for copy_start in range(0, pos - length + 1, length):
        copy_end = copy_start + length
        steps = [
            i for i, s in enumerate(starts)
            if step_capacities[i] and s < copy_end and s + step_capacities[i] > copy_start
        ]
        if all(i in alive for i in steps):
            stream = "".join(alive[i] for i in steps)
            off = copy_start - starts[steps[0]]
            return stream[off:off + length]
    return None
