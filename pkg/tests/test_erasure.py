import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from behavmark.erasure import (
    GF2System,
    PayloadMessage,
    Status,
    consistency_check,
    coefficient_rows,
    dot,
    emit_equations,
    full_rank_probability,
    rank,
    repetition_blind_decode,
    repetition_encode,
    satisfies,
    solve,
    success_lower_bound,
)
from behavmark.errors import DomainError
from behavmark.keyed import StepKey


def to_matrix(rows, length):
    return [[(r >> (length - 1 - j)) & 1 for j in range(length)] for r in rows]


def naive_rank(matrix):
    """Textbook Gaussian elimination over lists of 0/1."""
    m = [row[:] for row in matrix]
    if not m:
        return 0
    r = 0
    for c in range(len(m[0])):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                m[i] = [a ^ b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def system(length, rows, ys):
    s = GF2System(length)
    s.extend(rows, ys)
    return s


def test_payload_message_forms():
    m = PayloadMessage.from_hex("a5")
    assert m.bits == "10100101" and m.length == 8
    assert PayloadMessage.from_bits("0101").hex() == "5"
    assert PayloadMessage.from_hex("1f", 5).bits == "11111"
    with pytest.raises(ValueError):
        PayloadMessage.from_hex("1f", 12)
    with pytest.raises(ValueError):
        PayloadMessage(4, 2)


def test_identity_system_is_unique():
    L = 6
    rows = [1 << (L - 1 - j) for j in range(L)]
    m = 0b101101
    res = solve(system(L, rows, [dot(r, m) for r in rows]))
    assert res.status == Status.UNIQUE and res.solution == m and res.rank == L


def test_inconsistent_duplicate_row():
    res = solve(system(3, [0b101, 0b101], [0, 1]))
    assert res.status == Status.INCONSISTENT
    assert not consistency_check(system(3, [0b101, 0b101], [0, 1]))


def test_zero_row_with_one_is_inconsistent():
    assert solve(system(4, [0], [1])).status == Status.INCONSISTENT
    assert solve(system(4, [0], [0])).status == Status.UNDERDETERMINED


def test_underdetermined_reports_rank():
    res = solve(system(4, [0b1100, 0b0110], [1, 0]))
    assert res.status == Status.UNDERDETERMINED and res.rank == 2 and res.solution is None


def test_empty_system():
    res = solve(GF2System(3))
    assert res.status == Status.UNDERDETERMINED and res.rank == 0


def test_system_validation():
    s = GF2System(3)
    with pytest.raises(ValueError):
        s.add(0b1000, 0)
    with pytest.raises(ValueError):
        s.add(0b1, 2)


def test_rank_against_naive_oracle():
    rng = random.Random(3)
    for _ in range(300):
        L = rng.randint(1, 40)
        rows = [rng.getrandbits(L) for _ in range(rng.randint(0, 50))]
        assert rank(rows) == naive_rank(to_matrix(rows, L))


def test_random_full_systems_solve():
    rng = random.Random(4)
    L = 128
    for _ in range(1000):
        m = rng.getrandbits(L)
        rows = [rng.getrandbits(L) for _ in range(L + 20)]
        res = solve(system(L, rows, [dot(r, m) for r in rows]))
        assert res.status == Status.UNIQUE and res.solution == m


@given(st.integers(2, 24).flatmap(lambda L: st.tuples(
    st.just(L),
    st.integers(0, 2**L - 1),
    st.lists(st.integers(0, 2**L - 1), min_size=0, max_size=40),
)))
def test_soundness_of_consistent_systems(args):
    L, m, rows = args
    sys = system(L, rows, [dot(r, m) for r in rows])
    assert consistency_check(sys) and satisfies(sys, m)
    res = solve(sys)
    assert res.rank == naive_rank(to_matrix(rows, L))
    if res.status == Status.UNIQUE:
        assert res.solution == m
    else:
        assert res.status == Status.UNDERDETERMINED and res.rank < L


@given(st.lists(st.integers(0, 2**16 - 1), max_size=30), st.integers(0, 2**16 - 1))
def test_rank_monotone_under_added_rows(rows, extra):
    assert rank(rows) <= rank(rows + [extra]) <= rank(rows) + 1


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_inner_product_is_linear(a, m1, m2):
    assert dot(a, m1 ^ m2) == dot(a, m1) ^ dot(a, m2)


def test_emit_equations_uses_coefficient_stream():
    key = StepKey(bytes(32))
    m = PayloadMessage(0xBEEF, 16)
    rows = coefficient_rows(key, 16, 10)
    assert emit_equations(m, key, 10) == "".join(str(dot(r, m.value)) for r in rows)


def test_success_bound_values():
    assert success_lower_bound(136, 128) == 0.99609375
    assert success_lower_bound(128, 128) == 0.0
    with pytest.raises(DomainError):
        success_lower_bound(127, 128)


def test_full_rank_probability_dominates_bound():
    for delta in range(0, 12):
        assert full_rank_probability(128 + delta, 128) >= success_lower_bound(128 + delta, 128)
    assert full_rank_probability(5, 8) == 0.0
    # 1 x 1: a single uniform bit is nonzero half the time
    assert full_rank_probability(1, 1) == 0.5


def test_repetition_encode_cycles():
    m = PayloadMessage.from_bits("1011")
    assert repetition_encode(m, [3, 0, 2, 3]) == ["101", "", "11", "011"]


def test_repetition_blind_decode():
    m = PayloadMessage.from_bits("1011")
    caps = [3, 0, 2, 3, 1]
    chunks = repetition_encode(m, caps)
    everything = [(i, c) for i, c in enumerate(chunks)]
    assert repetition_blind_decode(everything, 4, caps) == "1011"
    # losing step 0 breaks the first copy; the second spans steps 2..3
    assert repetition_blind_decode(everything[1:], 4, caps) == "1011"
    assert repetition_blind_decode([everything[2], everything[4]], 4, caps) is None
    with pytest.raises(ValueError):
        repetition_blind_decode([(0, "1")], 4, caps)
