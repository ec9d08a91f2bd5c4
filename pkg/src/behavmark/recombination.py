"""Quantization, canonical ordering and differential recombination.

Quantized probabilities are integers in units of ``1 / SCALE``; every
identity in this module is exact in those units.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateDistribution

SCALE = 1_000_000  # precision 1e-6
SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BehaviorDistribution:
    behaviors: tuple[str, ...]
    probs: tuple[float, ...]

    def __init__(self, behaviors: Sequence[str], probs: Sequence[float]):
        object.__setattr__(self, "behaviors", tuple(behaviors))
        object.__setattr__(self, "probs", tuple(probs))
        if not self.behaviors:
            raise ValueError("distribution needs at least one behavior")
        if len(self.behaviors) != len(self.probs):
            raise ValueError("behaviors and probs differ in length")
        if len(set(self.behaviors)) != len(self.behaviors):
            raise ValueError("behavior identifiers must be distinct")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(self.probs) - 1) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {float(sum(self.probs))!r}, not 1")

    def __len__(self):
        return len(self.behaviors)


@dataclass(frozen=True)
class QuantizedDistribution:
    """Behaviors with integer masses summing to exactly ``SCALE``."""

    behaviors: tuple[str, ...]
    units: tuple[int, ...]

    def __init__(self, behaviors: Sequence[str], units: Sequence[int]):
        object.__setattr__(self, "behaviors", tuple(behaviors))
        object.__setattr__(self, "units", tuple(int(u) for u in units))
        if not self.behaviors or len(self.behaviors) != len(self.units):
            raise ValueError("behaviors and units must be non-empty and equal length")
        if len(set(self.behaviors)) != len(self.behaviors):
            raise ValueError("behavior identifiers must be distinct")
        if any(u < 0 for u in self.units):
            raise ValueError("units must be non-negative")
        if sum(self.units) != SCALE:
            raise ValueError(f"units sum to {sum(self.units)}, expected {SCALE}")

    def __len__(self):
        return len(self.behaviors)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(u, SCALE) for u in self.units)


@dataclass(frozen=True)
class BinDecomposition:
    """Mixture of uniform bins over the top-k behaviors.

    ``bins`` holds ``(k, weight_units)`` pairs with strictly increasing ``k``
    and positive weights; bin ``k`` is ``ordered_behaviors[:k]``.
    """

    ordered_behaviors: tuple[str, ...]
    ordered_units: tuple[int, ...]
    bins: tuple[tuple[int, int], ...]

    def members(self, k: int) -> tuple[str, ...]:
        return self.ordered_behaviors[:k]

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(q, SCALE) for _, q in self.bins)


def quantize(dist: BehaviorDistribution | QuantizedDistribution) -> QuantizedDistribution:
    """Round to multiples of 1e-6; the rounding residual goes to the largest entry.

    The largest entry is judged on the unrounded probabilities, first
    occurrence on ties.
    """
    if isinstance(dist, QuantizedDistribution):
        return dist
    units = [round(p * SCALE) for p in dist.probs]
    if not any(units):
        raise DegenerateDistribution("every probability quantizes to zero")
    top = max(range(len(units)), key=lambda i: (dist.probs[i], -i))
    units[top] += SCALE - sum(units)
    if units[top] < 0:
        raise DegenerateDistribution("rounding residual exceeds the largest entry")
    return QuantizedDistribution(dist.behaviors, units)


def canonical_order(dist: QuantizedDistribution) -> QuantizedDistribution:
    """Stable sort by quantized mass, non-increasing."""
    order = sorted(range(len(dist)), key=lambda i: -dist.units[i])
    return QuantizedDistribution(
        [dist.behaviors[i] for i in order], [dist.units[i] for i in order]
    )


def diff_recombine(dist: QuantizedDistribution) -> BinDecomposition:
    """Decompose a canonically ordered distribution into uniform top-k bins."""
    p = dist.units
    if any(p[i] < p[i + 1] for i in range(len(p) - 1)):
        raise ValueError("distribution is not in canonical (non-increasing) order")
    bins = []
    for k in range(1, len(p) + 1):
        d = p[k - 1] - (p[k] if k < len(p) else 0)
        if d > 0:
            bins.append((k, k * d))
    return BinDecomposition(dist.behaviors, p, tuple(bins))


def decompose(dist: BehaviorDistribution | QuantizedDistribution) -> BinDecomposition:
    """quantize -> canonical_order -> diff_recombine."""
    return diff_recombine(canonical_order(quantize(dist)))


def marginal_of(decomp: BinDecomposition, rank: int) -> Fraction:
    """Probability that the bin mixture selects the behavior at 1-based ``rank``."""
    if not 1 <= rank <= len(decomp.ordered_behaviors):
        raise ValueError("rank out of range")
    return sum(
        (Fraction(q, k * SCALE) for k, q in decomp.bins if k >= rank), Fraction(0)
    )


def slice_heights(dist: QuantizedDistribution) -> tuple[int, ...]:
    """Per-rank differences p_k - p_{k+1} in units, including zero slices."""
    p = dist.units
    return tuple(p[k] - (p[k + 1] if k + 1 < len(p) else 0) for k in range(len(p)))
