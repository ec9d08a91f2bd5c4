"""Keyed per-step randomness.

A step key is a SHA-256 digest of the master secret and a length-prefixed
serialization of the step context. Each step key opens four labeled streams
(BIN, SHIFT, PAD, COEF); a stream is SHA-256 in counter mode over
``sha256(step_key || label)``.
"""

from __future__ import annotations

import copy
import enum
import hashlib
import secrets
from dataclasses import dataclass
from pathlib import Path

KEY_BYTES = 32
_BLOCK_BITS = 256
_UNIT_BITS = 53


class Label(enum.IntEnum):
    BIN = 1
    SHIFT = 2
    PAD = 3
    COEF = 4


@dataclass(frozen=True)
class MasterKey:
    secret: bytes

    def __post_init__(self):
        if len(self.secret) != KEY_BYTES:
            raise ValueError(f"master key must be {KEY_BYTES} bytes, got {len(self.secret)}")

    def __repr__(self):
        return "MasterKey(<redacted>)"

    @classmethod
    def generate(cls) -> MasterKey:
        return cls(secrets.token_bytes(KEY_BYTES))

    @classmethod
    def from_hex(cls, text: str) -> MasterKey:
        text = text.strip()
        if len(text) != 2 * KEY_BYTES:
            raise ValueError(f"key must be {2 * KEY_BYTES} hex characters")
        return cls(bytes.fromhex(text))

    def hex(self) -> str:
        return self.secret.hex()


def load_key(path) -> MasterKey:
    """Read a key file: one line of 64 hex characters."""
    return MasterKey.from_hex(Path(path).read_text(encoding="ascii"))


def save_key(key: MasterKey, path) -> None:
    Path(path).write_text(key.hex() + "\n", encoding="ascii")


@dataclass(frozen=True)
class StepContext:
    trajectory_id: bytes
    step_index: int
    context_payload: bytes = b""

    def __post_init__(self):
        if self.step_index < 1:
            raise ValueError("step_index must be >= 1")

    def serialize(self) -> bytes:
        return (
            _lp(self.trajectory_id)
            + self.step_index.to_bytes(8, "big")
            + _lp(self.context_payload)
        )


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(8, "big") + data


@dataclass(frozen=True)
class StepKey:
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != KEY_BYTES:
            raise ValueError("step key must be 32 bytes")


def derive_step_key(master: MasterKey, ctx: StepContext) -> StepKey:
    return StepKey(hashlib.sha256(master.secret + ctx.serialize()).digest())


class RandomStream:
    """Counter-mode bit stream. Bits are consumed MSB-first from each block.

    Single-owner and mutable; use :meth:`copy` to fork the current state.
    """

    def __init__(self, seed: bytes, label: Label | None = None):
        self.seed = seed
        self.label = label
        self.counter = 0  # next block index
        self._buf = 0
        self._nbuf = 0

    @classmethod
    def open(cls, key: StepKey, label: Label) -> RandomStream:
        label = Label(label)
        seed = hashlib.sha256(key.digest + bytes([label])).digest()
        return cls(seed, label)

    def copy(self) -> RandomStream:
        return copy.copy(self)

    def _take(self, count: int) -> int:
        while self._nbuf < count:
            block = hashlib.sha256(self.seed + self.counter.to_bytes(8, "big")).digest()
            self.counter += 1
            self._buf = (self._buf << _BLOCK_BITS) | int.from_bytes(block, "big")
            self._nbuf += _BLOCK_BITS
        self._nbuf -= count
        out = self._buf >> self._nbuf
        self._buf &= (1 << self._nbuf) - 1
        return out

    def next_unit(self) -> float:
        return self._take(_UNIT_BITS) / (1 << _UNIT_BITS)

    def next_int(self, count: int) -> int:
        """Next ``count`` bits packed into an int, first bit most significant."""
        if count < 0:
            raise ValueError("count must be non-negative")
        return self._take(count) if count else 0

    def next_bits(self, count: int) -> str:
        if count == 0:
            return ""
        return format(self.next_int(count), f"0{count}b")

    def next_coefficient_row(self, length: int) -> int:
        if self.label is not None and self.label != Label.COEF:
            raise ValueError("coefficient rows must come from a COEF stream")
        return self.next_int(length)


def open_stream(key: StepKey, label: Label) -> RandomStream:
    return RandomStream.open(key, label)


class ScriptedStream:
    """Stand-in stream replaying fixed draws; used for golden transcripts.

    ``units`` are returned by :meth:`next_unit` in order and ``bits`` is a
    0/1 string consumed by the bit methods.
    """

    def __init__(self, units=(), bits: str = "", label: Label | None = None):
        self.units = list(units)
        self.bits = bits
        self.label = label
        self._ui = 0
        self._bi = 0

    def copy(self) -> ScriptedStream:
        return copy.copy(self)

    def next_unit(self) -> float:
        if self._ui >= len(self.units):
            raise RuntimeError("scripted stream ran out of unit draws")
        u = self.units[self._ui]
        self._ui += 1
        return u

    def next_bits(self, count: int) -> str:
        if self._bi + count > len(self.bits):
            raise RuntimeError("scripted stream ran out of bits")
        out = self.bits[self._bi:self._bi + count]
        self._bi += count
        return out

    def next_int(self, count: int) -> int:
        return int(self.next_bits(count), 2) if count else 0

    def next_coefficient_row(self, length: int) -> int:
        return self.next_int(length)


@dataclass
class StepStreams:
    """The four per-step streams, in their fixed roles."""

    bin: RandomStream
    shift: RandomStream
    pad: RandomStream
    coef: RandomStream

    @classmethod
    def for_key(cls, key: StepKey) -> StepStreams:
        return cls(*(RandomStream.open(key, lab) for lab in Label))
