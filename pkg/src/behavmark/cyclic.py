"""Cyclic-shift embedding of a bit prefix into a uniform choice among n items.

With ``n = 2**k + surplus``, the shifted codebook has ``2**k - surplus``
codewords of k bits and ``2 * surplus`` of k+1 bits. Bit strings are
``str`` of '0'/'1'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BinCode:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("bin size must be >= 1")

    @property
    def k(self) -> int:
        return self.n.bit_length() - 1

    @property
    def surplus(self) -> int:
        return self.n - (1 << self.k)

    @property
    def n_short(self) -> int:
        """Number of k-bit codewords."""
        return (1 << self.k) - self.surplus


def scaled_floor(u: float, n: int) -> int:
    """Exact ``floor(u * n)`` for a float ``u`` in [0, 1)."""
    num, den = u.as_integer_ratio()
    return (num * n) // den


def draw_shift(n: int, stream) -> int:
    return scaled_floor(stream.next_unit(), n)


def place(prefix: str, code: BinCode, shift: int) -> tuple[int, str]:
    """Map the leading bits of ``prefix`` to a bin index under a fixed shift.

    ``prefix`` must hold at least k bits; a missing (k+1)-th bit reads as 0.
    """
    k, n = code.k, code.n
    x = int(prefix[:k], 2) if k else 0
    if x < code.n_short:
        return (x + shift) % n, prefix[:k]
    r = prefix[k] if len(prefix) > k else "0"
    j = (2 * (x - code.n_short) + code.n_short + shift + int(r)) % n
    return j, prefix[:k] + r


def read(j: int, code: BinCode, shift: int) -> str:
    k, n = code.k, code.n
    idx = (j - shift) % n
    if idx < code.n_short:
        return format(idx, f"0{k}b") if k else ""
    u = idx - code.n_short
    x = u // 2 + code.n_short
    return format(x, f"0{k}b") + str(u % 2)


def encode_in_bin(payload: str, n: int, shift_source) -> tuple[int, str]:
    """Return ``(index, embedded_bits)``; draws one unit from ``shift_source`` when n > 1."""
    if n == 1:
        return 0, ""
    code = BinCode(n)
    shift = draw_shift(n, shift_source)
    if len(payload) < code.k:
        return shift, ""
    return place(payload[: code.k + 1], code, shift)


def decode_in_bin(j: int, n: int, shift_source) -> str:
    if not 0 <= j < n:
        raise ValueError("index outside bin")
    if n == 1:
        return ""
    return read(j, BinCode(n), draw_shift(n, shift_source))


def codebook(n: int) -> list[str]:
    """Codewords in unshifted index order (index i carries codebook[i])."""
    code = BinCode(n)
    return [read(i, code, 0) for i in range(n)]


def expected_capacity(n: int) -> float:
    """Mean embedded length when payload bits are uniform: k + surplus / 2**k."""
    if n < 1:
        raise ValueError("bin size must be >= 1")
    code = BinCode(n)
    return code.k + code.surplus / (1 << code.k)


# max of log2(1+x) - x over [0, 1)
CAPACITY_GAP = math.log2(1 / math.log(2)) - (1 / math.log(2) - 1)
