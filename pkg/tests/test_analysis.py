import csv
import math

import numpy as np
import pytest

from anskit.analysis import (
    AutomatonSpec,
    batch_stationary,
    delta_H,
    emit_csv,
    inverse_x_fit,
    kl_distance,
    rans_bound,
    simulate,
    stationary_distribution,
    tans_bound,
    uabs_bound,
)
from anskit.rans import QuantizedDist
from anskit.stream import StreamConfig
from anskit.tans import build_tables, precise_init
from anskit.uabs import BinaryProb, UabsCodec

from oracles import gaussian_stationary, kl_bits

P3 = BinaryProb(3, 10)
CFG9 = StreamConfig(9, 2)

REFERENCE_STATIONARY = (0.1534, 0.1240, 0.1360, 0.1212, 0.0980, 0.1074, 0.0868, 0.0780, 0.0952)


@pytest.fixture(scope="module")
def uabs_automaton():
    return AutomatonSpec.from_codec(UabsCodec(P3), CFG9, (0.7, 0.3))


@pytest.fixture(scope="module")
def four_state():
    enc, _ = build_tables(precise_init(QuantizedDist((3, 1)), StreamConfig(4, 2)))
    return AutomatonSpec.from_encoding_table(enc)


class TestStationary:
    def test_reference_row(self, uabs_automaton):
        st = stationary_distribution(uabs_automaton)
        for x, expect in zip(CFG9.states(), REFERENCE_STATIONARY):
            assert st.prob(x) == pytest.approx(expect, abs=5e-4)
        assert st.residual < 1e-12
        assert not st.reducible

    def test_four_state_values(self, four_state):
        st = stationary_distribution(four_state)
        assert st.prob(6) == pytest.approx(0.241, abs=2e-3)
        assert st.prob(7) == pytest.approx(0.1875, abs=2e-3)

    def test_switched_binary_is_uniform(self):
        auto = AutomatonSpec.from_codec(UabsCodec(BinaryProb(1, 2)), StreamConfig(2, 2), (0.5, 0.5))
        st = stationary_distribution(auto)
        assert st.prob(2) == pytest.approx(0.5, abs=1e-12)
        assert st.prob(3) == pytest.approx(0.5, abs=1e-12)

    def test_sums_to_one_and_balances(self, uabs_automaton):
        st = stationary_distribution(uabs_automaton)
        assert st.probs.sum() == pytest.approx(1.0, abs=1e-12)
        probs = np.asarray(uabs_automaton.probs)
        inflow = np.zeros_like(st.probs)
        for s in range(2):
            np.add.at(inflow, uabs_automaton.next_slots[s], probs[s] * st.probs)
        assert np.max(np.abs(inflow - st.probs)) < 1e-10

    def test_matches_gaussian_oracle(self):
        for freqs, l in (((3, 1), 4), ((10, 5, 2), 17), ((5, 4, 3, 2, 1, 1), 16), ((7, 9), 16)):
            d = QuantizedDist(freqs)
            cfg = StreamConfig(l, 2)
            enc, _ = build_tables(precise_init(d, cfg))
            auto = AutomatonSpec.from_encoding_table(enc)
            st = stationary_distribution(auto)
            transitions = {
                (y, s): int(auto.next_slots[s, y - l]) + l
                for y in cfg.states()
                for s in range(len(freqs))
            }
            oracle = gaussian_stationary(transitions, auto.probs, cfg.states())
            for x in cfg.states():
                assert st.prob(x) == pytest.approx(oracle[x], abs=1e-9)

    def test_reducible_chain_restricts_and_flags(self):
        # state l+2 never re-enters from l: two absorbing-ish components
        cfg = StreamConfig(3, 2)
        nxt = np.array([[1, 0, 2]])
        digs = np.zeros((1, 3), dtype=np.int64)
        auto = AutomatonSpec(cfg, (1.0,), nxt, digs)
        st = stationary_distribution(auto)
        assert st.reducible
        assert st.prob(5) == pytest.approx(0.0, abs=1e-12)
        assert st.prob(3) + st.prob(4) == pytest.approx(1.0, abs=1e-12)

    def test_periodic_chain_converges_with_damping(self):
        # two-class bipartite walk whose classes have unequal sizes
        cfg = StreamConfig(3, 2)
        nxt = np.array([[1, 0, 1], [1, 2, 1]])
        digs = np.zeros((2, 3), dtype=np.int64)
        auto = AutomatonSpec(cfg, (0.7, 0.3), nxt, digs)
        st = stationary_distribution(auto)
        assert st.residual < 1e-12
        assert st.prob(4) == pytest.approx(0.5, abs=1e-9)

    def test_batch_agrees_with_power_iteration(self):
        rng = np.random.default_rng(11)
        d = QuantizedDist((10, 5, 2))
        cfg = StreamConfig(17, 2)
        from anskit.tans import SpreadFunction, iter_spreads

        seqs = []
        for i, seq in enumerate(iter_spreads(d, cfg)):
            if i % 40_000 == 0:
                seqs.append(list(seq))
        batch_next = []
        singles = []
        for seq in seqs:
            spread = SpreadFunction(cfg, d.freqs, tuple(seq))
            enc, _ = build_tables(spread)
            auto = AutomatonSpec.from_encoding_table(enc)
            singles.append(stationary_distribution(auto).probs)
            batch_next.append(auto.next_slots)
        pi = batch_stationary(np.array(batch_next), np.array([10 / 17, 5 / 17, 2 / 17]))
        assert np.max(np.abs(pi - np.array(singles))) < 1e-9


class TestDeltaH:
    def test_reference_rate(self, uabs_automaton):
        rep = delta_H(uabs_automaton)
        assert rep.expected_bits_per_symbol == pytest.approx(0.88658, abs=5e-4)
        assert rep.delta_h == pytest.approx(0.00529, abs=5e-4)
        assert rep.shannon_entropy == pytest.approx(0.881291, abs=1e-5)

    def test_four_state_rate(self, four_state):
        rep = delta_H(four_state)
        assert rep.expected_bits_per_symbol == pytest.approx(0.82, abs=0.01)
        assert rep.delta_h == pytest.approx(0.01, abs=3e-3)

    def test_nonnegative(self, uabs_automaton, four_state):
        for auto in (uabs_automaton, four_state):
            assert delta_H(auto).delta_h >= -1e-12

    def test_inaccuracies_recorded(self, uabs_automaton):
        rep = delta_H(uabs_automaton)
        assert rep.inaccuracies is not None
        assert rep.inaccuracies[(1, 13)] == pytest.approx(4 / 13 - 0.3)
        for (s, x), eps in rep.inaccuracies.items():
            assert abs(eps) < 1 / x

    def test_digit_weight_scales_with_base(self):
        d = QuantizedDist((2, 1, 1))
        cfg = StreamConfig(4, 4)
        enc, _ = build_tables(precise_init(d, cfg))
        rep = delta_H(AutomatonSpec.from_encoding_table(enc))
        assert rep.expected_bits_per_symbol >= rep.shannon_entropy
        assert rep.delta_h < 0.2


class TestKL:
    def test_zero_for_identical(self):
        assert kl_distance((0.25, 0.75), (0.25, 0.75)).exact == pytest.approx(0.0, abs=1e-15)

    def test_closed_form_value(self):
        res = kl_distance((0.75, 0.25), (0.5, 0.5))
        assert res.exact == pytest.approx(0.18872, abs=1e-5)
        assert res.exact == pytest.approx(kl_bits((0.75, 0.25), (0.5, 0.5)), abs=1e-12)

    def test_quadratic_matches_small_deviations(self):
        for eps in np.linspace(-0.02, 0.02, 21):
            if abs(eps) < 1e-4:
                continue
            p = (0.4, 0.6)
            q = (0.4 + eps, 0.6 - eps)
            res = kl_distance(p, q)
            assert res.quadratic == pytest.approx(res.exact, rel=0.15)

    def test_zero_coder_mass_rejected(self):
        with pytest.raises(ValueError):
            kl_distance((0.5, 0.5), (1.0, 0.0))


class TestBounds:
    def test_uabs_bound_value(self):
        b = uabs_bound(P3, 9)
        assert b == pytest.approx((10 / 3 + 10 / 7) / (81 * math.log(4)), abs=1e-12)
        assert 0.00529 <= b

    def test_symmetric_case(self):
        for l in (4, 16, 64):
            assert uabs_bound(BinaryProb(1, 2), l) == pytest.approx(4 / (l * l * math.log(4)))

    def test_rans_scaling(self):
        d = QuantizedDist((1, 3))
        assert rans_bound(d, 64) == pytest.approx(4 * uabs_bound(BinaryProb(3, 4), 64))

    def test_tans_bound_uniform_simplifies(self):
        # uniform alphabet: every slack term is 1, so the sum collapses to n^2
        for n, l in ((2, 2), (4, 4), (8, 64)):
            d = QuantizedDist((1,) * n)
            assert tans_bound(d, l) == pytest.approx(n * n / (l * l * math.log(4)))

    def test_single_symbol(self):
        d = QuantizedDist((4,))
        enc, _ = build_tables(precise_init(d, StreamConfig(4, 2)))
        rep = delta_H(AutomatonSpec.from_encoding_table(enc))
        assert rep.delta_h == pytest.approx(0.0, abs=1e-15)
        assert rep.delta_h <= tans_bound(d, 4)


class TestInverseXFit:
    def test_reference_fit(self, uabs_automaton):
        st = stationary_distribution(uabs_automaton)
        fit = inverse_x_fit(st)
        assert fit.scale == pytest.approx(1.3856, abs=5e-4)
        assert fit.scale / 9 == pytest.approx(0.1540, abs=5e-4)
        assert fit.max_deviation <= 0.02

    def test_reports_without_asserting_uniformity(self):
        auto = AutomatonSpec.from_codec(UabsCodec(BinaryProb(1, 2)), StreamConfig(2, 2), (0.5, 0.5))
        fit = inverse_x_fit(stationary_distribution(auto))
        assert fit.scale > 0 and fit.max_deviation >= 0


class TestEmitCsv:
    def test_sorted_deterministic_output(self, tmp_path):
        rows = [
            {"l": 20, "delta_H": 0.002, "bound": 0.004},
            {"l": 10, "delta_H": 0.0052910491, "bound": 0.0424},
        ]
        path = tmp_path / "sweep.csv"
        emit_csv(rows, path, ["l", "delta_H", "bound"])
        text = path.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == "l,delta_H,bound"
        assert lines[1].startswith("10,")
        assert "0.0052910491" in lines[1]
        emit_csv(rows[::-1], tmp_path / "again.csv", ["l", "delta_H", "bound"])
        assert (tmp_path / "again.csv").read_text() == text

    def test_twelve_significant_digits(self, tmp_path):
        path = tmp_path / "digits.csv"
        emit_csv([{"v": 1 / 3}], path, ["v"])
        assert path.read_text().strip().split("\n")[1] == "0.333333333333"

    def test_header_only_for_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path, ["state", "prob", "c_over_x"])
        assert path.read_text().strip() == "state,prob,c_over_x"
        with pytest.raises(ValueError):
            emit_csv([], tmp_path / "x.csv")

    def test_stationary_schema(self, tmp_path, uabs_automaton):
        st = stationary_distribution(uabs_automaton)
        fit = inverse_x_fit(st)
        rows = [
            {"state": x, "prob": st.prob(x), "c_over_x": fit.scale / x}
            for x in CFG9.states()
        ]
        path = tmp_path / "stationary.csv"
        emit_csv(rows, path, ["state", "prob", "c_over_x"])
        with open(path) as fh:
            got = list(csv.DictReader(fh))
        assert len(got) == 9
        assert got[0]["state"] == "9"


class TestSimulation:
    def test_monte_carlo_matches_stationary(self, uabs_automaton):
        rep = delta_H(uabs_automaton)
        sim = simulate(uabs_automaton, 1_000_000, seed=2024)
        n = sim.symbols
        for j, x in enumerate(CFG9.states()):
            pi = rep.stationary.prob(x)
            se = math.sqrt(pi * (1 - pi) / n)
            assert abs(sim.frequency(j) - pi) <= 3 * se, x
        assert abs(sim.bits_per_symbol - rep.expected_bits_per_symbol) <= 1e-3
