"""One watermarked decision: bin sampling, masking and cyclic-shift placement.

Per-step randomness is consumed in a fixed order from the four labeled
streams of the step key: one BIN unit, one SHIFT unit (bins larger than 1),
``c`` PAD bits and, for rateless sources, ``c`` COEF rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cyclic import BinCode, decode_in_bin, draw_shift, encode_in_bin
from .errors import BehaviorOutsideBin
from .keyed import MasterKey, StepContext, StepStreams, derive_step_key
from .recombination import SCALE, BinDecomposition, decompose


def xor_bits(a: str, b: str) -> str:
    if len(a) != len(b):
        raise ValueError("bit strings differ in length")
    return "".join("1" if x != y else "0" for x, y in zip(a, b))


def sample_bin(decomp: BinDecomposition, stream) -> int:
    """Inverse-CDF over bins in increasing size; returns the bin size.

    ``u`` picks bin K iff cum_{K-1} <= u < cum_K, compared exactly.
    """
    num, den = stream.next_unit().as_integer_ratio()
    target = num * SCALE
    cum = 0
    for k, q in decomp.bins:
        cum += q
        if target < cum * den:
            return k
    raise AssertionError("unit draw outside [0, 1)")


class RawBitSource:
    """Finite payload bitstring read through a pointer.

    With ``filler`` set, reads past the end return that bit forever so the
    source never runs short.
    """

    def __init__(self, bits: str, filler: str | None = None):
        self.bits = bits
        self.filler = filler
        self.pointer = 0

    def peek(self, streams: StepStreams, count: int) -> str:
        out = self.bits[self.pointer:self.pointer + count]
        if self.filler is not None and len(out) < count:
            out += self.filler * (count - len(out))
        return out

    def commit(self, streams: StepStreams, count: int) -> None:
        self.pointer += count
        if self.filler is None:
            self.pointer = min(self.pointer, len(self.bits))

    @property
    def exhausted(self) -> bool:
        return self.filler is None and self.pointer >= len(self.bits)


class RatelessBitSource:
    """Produces GF(2) equation bits <a_j, m> from the step's COEF stream."""

    def __init__(self, payload: int, length: int):
        if length < 1:
            raise ValueError("payload length must be >= 1")
        if payload >> length:
            raise ValueError("payload does not fit in the stated length")
        self.payload = payload
        self.length = length
        self.equations = 0

    def _bits(self, coef, count: int) -> str:
        return "".join(
            str((coef.next_coefficient_row(self.length) & self.payload).bit_count() & 1)
            for _ in range(count)
        )

    def peek(self, streams: StepStreams, count: int) -> str:
        return self._bits(streams.coef.copy(), count)

    def commit(self, streams: StepStreams, count: int) -> None:
        for _ in range(count):
            streams.coef.next_coefficient_row(self.length)
        self.equations += count


class CyclicBitSource(RawBitSource):
    """Repeats a payload forever (the repetition-code baseline)."""

    def __init__(self, bits: str):
        if not bits:
            raise ValueError("empty payload")
        super().__init__(bits)

    def peek(self, streams, count):
        n = len(self.bits)
        return "".join(self.bits[(self.pointer + i) % n] for i in range(count))

    def commit(self, streams, count):
        self.pointer += count


@dataclass(frozen=True)
class StepEncodeOutcome:
    behavior: str
    embedded: str  # masked bits as placed in the channel
    consumed: int
    source_bits: str  # the unmasked source bits those channel bits carry
    bin_size: int
    index: int
    shift: int | None


def encode_step(
    dist,
    ctx: StepContext,
    master: MasterKey,
    source,
    streams: StepStreams | None = None,
) -> StepEncodeOutcome:
    if streams is None:
        streams = StepStreams.for_key(derive_step_key(master, ctx))
    decomp = decompose(dist)
    n = sample_bin(decomp, streams.bin)
    members = decomp.members(n)
    if n == 1:
        return StepEncodeOutcome(members[0], "", 0, "", 1, 0, None)

    code = BinCode(n)
    raw = source.peek(streams, code.k + 1)
    pad = streams.pad.copy().next_bits(len(raw))
    masked = xor_bits(raw, pad)
    shift = draw_shift(n, streams.shift.copy())
    j, s = encode_in_bin(masked, n, streams.shift)
    carried = xor_bits(s, streams.pad.next_bits(len(s)))
    source.commit(streams, len(s))
    return StepEncodeOutcome(members[j], s, len(s), carried, n, j, shift)


def locate(behavior: str, decomp: BinDecomposition, streams: StepStreams) -> tuple[int, int]:
    """Reproduce the bin and return ``(bin_size, index_in_bin)``."""
    n = sample_bin(decomp, streams.bin)
    members = decomp.members(n)
    try:
        j = members.index(behavior)
    except ValueError:
        if behavior not in decomp.ordered_behaviors:
            raise ValueError(f"behavior {behavior!r} is not a candidate") from None
        raise BehaviorOutsideBin(
            f"behavior {behavior!r} outside reproduced bin of size {n}"
        ) from None
    return n, j


def decode_step(
    behavior: str,
    dist,
    ctx: StepContext,
    master: MasterKey,
    streams: StepStreams | None = None,
) -> str:
    """Channel (masked) bits carried by ``behavior`` at this step."""
    if streams is None:
        streams = StepStreams.for_key(derive_step_key(master, ctx))
    n, j = locate(behavior, decompose(dist), streams)
    return decode_in_bin(j, n, streams.shift)


def unmask(
    bits: str,
    ctx: StepContext | None = None,
    master: MasterKey | None = None,
    streams: StepStreams | None = None,
) -> str:
    """XOR channel bits with the step's PAD prefix."""
    if streams is None:
        if ctx is None or master is None:
            raise ValueError("need either streams or (ctx, master)")
        streams = StepStreams.for_key(derive_step_key(master, ctx))
    return xor_bits(bits, streams.pad.next_bits(len(bits)))
