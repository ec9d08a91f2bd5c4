import random
from fractions import Fraction

import pytest

from behavmark.errors import BehaviorOutsideBin
from behavmark.keyed import MasterKey, ScriptedStream, StepContext, StepStreams, derive_step_key
from behavmark.recombination import BehaviorDistribution, decompose, quantize
from behavmark.step import (
    CyclicBitSource,
    RatelessBitSource,
    RawBitSource,
    decode_step,
    encode_step,
    locate,
    sample_bin,
    unmask,
    xor_bits,
)
from behavmark.erasure import dot


def scripted(u_bin, u_shift, pad):
    return StepStreams(ScriptedStream([u_bin]), ScriptedStream([u_shift]), ScriptedStream(bits=pad), ScriptedStream())


def test_ticket_example(ticket_dist, master):
    ctx = StepContext(b"ticket", 7, b"")
    out = encode_step(ticket_dist, ctx, master, RawBitSource("01"), scripted(0.62, 0.27, "11"))
    assert (out.bin_size, out.shift, out.index) == (5, 1, 3)
    assert out.behavior == "Check-in"
    assert out.embedded == "10" and out.source_bits == "01" and out.consumed == 2
    dec = scripted(0.62, 0.27, "11")
    s = decode_step("Check-in", ticket_dist, ctx, master, dec)
    assert s == "10"
    assert unmask(s, streams=dec) == "01"


@pytest.mark.parametrize("u,k", [(0.0, 1), (0.1499, 1), (0.15000001, 2), (0.34999, 2), (0.35000001, 3), (0.60000001, 5), (0.9999, 5)])
def test_sample_bin_boundaries(ticket_dist, u, k):
    assert sample_bin(decompose(ticket_dist), ScriptedStream([u])) == k


def test_sample_bin_compares_the_stored_double(ticket_dist):
    # the double nearest 0.6 is slightly below it, so it stays in bin 4
    assert Fraction(0.6) < Fraction(3, 5)
    assert sample_bin(decompose(ticket_dist), ScriptedStream([0.6])) == 4


def test_point_mass_embeds_nothing(master):
    dist = BehaviorDistribution(["only"], [1.0])
    src = RawBitSource("1010")
    out = encode_step(dist, StepContext(b"x", 1), master, src)
    assert out.behavior == "only" and out.embedded == "" and src.pointer == 0


def test_xor_bits():
    assert xor_bits("0110", "1100") == "1010"
    with pytest.raises(ValueError):
        xor_bits("0", "01")


def test_random_roundtrips():
    rng = random.Random(11)
    for i in range(10_000):
        master = MasterKey(rng.randbytes(32))
        n = rng.randint(1, 12)
        w = [rng.random() + 1e-3 for _ in range(n)]
        dist = BehaviorDistribution([f"c{j}" for j in range(n)], [x / sum(w) for x in w])
        ctx = StepContext(b"rt", rng.randint(1, 50), rng.randbytes(4))
        bits = format(rng.getrandbits(8), "08b")
        out = encode_step(dist, ctx, master, RawBitSource(bits))
        s = decode_step(out.behavior, dist, ctx, master)
        assert s == out.embedded
        assert unmask(s, ctx, master) == bits[: len(s)] == out.source_bits


def test_rateless_source_carries_inner_products(master):
    dist = BehaviorDistribution("abcdefgh", [0.125] * 8)
    ctx = StepContext(b"r", 3)
    m, L = 0b1011_0110, 8
    out = encode_step(dist, ctx, master, RatelessBitSource(m, L))
    assert out.consumed == 3
    streams = StepStreams.for_key(derive_step_key(master, ctx))
    rows = [streams.coef.next_coefficient_row(L) for _ in range(3)]
    assert out.source_bits == "".join(str(dot(r, m)) for r in rows)


def test_cyclic_source_wraps():
    src = CyclicBitSource("101")
    assert src.peek(None, 5) == "10110"
    src.commit(None, 4)
    assert src.peek(None, 3) == "011"


def test_raw_source_filler_and_clamp():
    src = RawBitSource("1", filler="0")
    assert src.peek(None, 3) == "100"
    plain = RawBitSource("1")
    plain.commit(None, 3)
    assert plain.exhausted and plain.peek(None, 2) == ""


def test_desync_detected(ticket_dist, master):
    # bin 1 holds only "Search"; any other logged behavior is outside it
    decomp = decompose(ticket_dist)
    with pytest.raises(BehaviorOutsideBin):
        locate("Pay", decomp, scripted(0.01, 0.0, ""))
    with pytest.raises(ValueError):
        locate("Refund", decomp, scripted(0.01, 0.0, ""))


def test_quantized_input_accepted(ticket_dist, master):
    ctx = StepContext(b"q", 2)
    a = encode_step(ticket_dist, ctx, master, RawBitSource("110"))
    b = encode_step(quantize(ticket_dist), ctx, master, RawBitSource("110"))
    assert a == b
