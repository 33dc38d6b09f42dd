import random
from fractions import Fraction

import pytest

from anskit.rans import (
    QuantizedDist,
    audit_inaccuracy,
    rans_decode,
    rans_encode,
    rans_inaccuracy,
    rans_stream_config,
    rans_stream_decode,
    rans_stream_encode,
)
from anskit.stream import DigitStack, DigitUnderflowError, StreamConfig
from anskit.uabs import STATE_BOUND, StateOverflowError

from oracles import enumerate_appearances

D13 = QuantizedDist((1, 3))
D1052 = QuantizedDist((10, 5, 2))


class TestQuantizedDist:
    def test_derived_fields(self):
        assert D1052.total == 17
        assert D1052.cumul == (0, 10, 15)
        assert D1052.symbol_of == (0,) * 10 + (1,) * 5 + (2,) * 2
        assert D13.prob(1) == Fraction(3, 4)

    def test_rejects_zero_frequency(self):
        with pytest.raises(ValueError):
            QuantizedDist((3, 0, 1))
        with pytest.raises(ValueError):
            QuantizedDist(())


class TestFormulas:
    def test_encode_examples(self):
        assert rans_encode(0, 2, D13) == 8
        assert rans_encode(1, 5, D13) == 7
        assert rans_encode(0, 10, D1052) == 17

    def test_decode_examples(self):
        assert rans_decode(7, D13) == (1, 5)
        assert rans_decode(8, D13) == (0, 2)

    def test_cycle_start_carries_symbol_zero(self):
        for d in (D13, D1052, QuantizedDist((4, 4))):
            for k in range(1, 50):
                assert rans_decode(k * d.total, d) == (0, d.freqs[0] * k)

    def test_bijection_against_enumeration_oracle(self):
        for d in (D13, D1052, QuantizedDist((7,)), QuantizedDist((31, 17, 11, 5))):
            symbols, indices = enumerate_appearances(d.freqs, 10_000)
            for x in range(10_000):
                s, xs = rans_decode(x, d)
                assert (s, xs) == (symbols[x], indices[x])
                assert rans_encode(s, xs, d) == x

    def test_encode_then_decode(self):
        rnd = random.Random(3)
        for d in (D13, D1052, QuantizedDist((9, 9, 9, 9, 9, 9))):
            for _ in range(2000):
                s = rnd.randrange(d.n)
                x = rnd.randrange(10_000)
                assert rans_decode(rans_encode(s, x, d), d) == (s, x)

    def test_overflow_guard(self):
        with pytest.raises(StateOverflowError):
            rans_encode(2, STATE_BOUND, D1052)


class TestInaccuracy:
    def test_bound_all_small_states(self):
        for d in (D13, D1052):
            m = d.total
            for x in range(1, 10_000):
                assert abs(rans_inaccuracy(x, d)) < Fraction(m, x)

    def test_audit_report_invariant(self):
        report = audit_inaccuracy(range(17, 340), D1052)
        assert report.max_abs_epsilon < report.bound


class TestStream:
    def test_empty_sequence(self):
        cfg = rans_stream_config(D1052)
        state, stack = rans_stream_encode([], D1052, cfg)
        assert state == cfg.l and len(stack) == 0

    def test_round_trip_large(self):
        cfg = StreamConfig(17 * 2**10, 2)
        rnd = random.Random(4)
        symbols = rnd.choices(range(3), weights=D1052.freqs, k=10_000)
        state, stack = rans_stream_encode(symbols, D1052, cfg)
        assert rans_stream_decode(state, stack, len(symbols), D1052, cfg) == symbols[::-1]

    def test_round_trip_wide_digits(self):
        cfg = rans_stream_config(D13)
        rnd = random.Random(5)
        symbols = rnd.choices(range(2), weights=D13.freqs, k=5000)
        state, stack = rans_stream_encode(symbols, D13, cfg)
        assert stack.base == 1 << 16
        assert rans_stream_decode(state, stack, len(symbols), D13, cfg) == symbols[::-1]

    def test_visited_states_obey_bound(self):
        cfg = StreamConfig(17 * 2**6, 2)
        rnd = random.Random(6)
        symbols = rnd.choices(range(3), weights=D1052.freqs, k=20_000)
        visited = []
        state, stack = rans_stream_encode(symbols, D1052, cfg, visited=visited)
        m = D1052.total
        for x in set(visited):
            assert abs(rans_inaccuracy(x, D1052)) < Fraction(m, x)
        report = audit_inaccuracy(set(visited), D1052)
        assert report.max_abs_epsilon < report.bound

    def test_rejects_unaligned_interval(self):
        with pytest.raises(ValueError):
            rans_stream_encode([0], D1052, StreamConfig(100, 2))
        with pytest.raises(ValueError):
            rans_stream_decode(100, DigitStack(2), 1, D1052, StreamConfig(100, 2))

    def test_single_symbol_alphabet_produces_no_digits(self):
        d = QuantizedDist((5,))
        cfg = StreamConfig(5 * 2**8, 2)
        state, stack = rans_stream_encode([0] * 1000, d, cfg)
        assert len(stack) == 0 and state == cfg.l

    def test_wrong_table_fails_loudly_or_differs(self):
        cfg = StreamConfig(16 * 2**8, 2)
        good = QuantizedDist((8, 4, 4))
        bad = QuantizedDist((4, 8, 4))
        rnd = random.Random(7)
        symbols = rnd.choices(range(3), weights=good.freqs, k=3000)
        state, stack = rans_stream_encode(symbols, good, cfg)
        try:
            back = rans_stream_decode(state, stack, len(symbols), bad, cfg)
            assert back != symbols[::-1]
        except DigitUnderflowError:
            pass

    def test_underflow_on_truncated_digits(self):
        cfg = StreamConfig(17 * 2**4, 2)
        symbols = [2, 1, 0, 2, 1, 0, 2, 2, 1, 0] * 20
        state, stack = rans_stream_encode(symbols, D1052, cfg)
        truncated = DigitStack(2, stack.digits[len(stack.digits) // 2 :])
        with pytest.raises(DigitUnderflowError):
            rans_stream_decode(state, truncated, len(symbols), D1052, cfg)
