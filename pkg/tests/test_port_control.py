"""Port interleaving, training schedules, selection, and stage machine tests."""

import math

import numpy as np
import pytest

from ofdm_fama.port_control import (
    RUNNING,
    SENTINEL,
    TRAINING,
    PortMap,
    SinrTable,
    interleave_ports,
    select_running,
    step_stage,
    strategy_a_schedule,
    strategy_b_schedule,
    training_length,
)

# (N, N_RF) sweep used by several property tests; covers odd N_RF and
# non-divisible N up to the 256-port limit.
SWEEP = [(n, n_rf)
         for n in (2, 4, 6, 9, 16, 36, 49, 64, 100, 144, 196, 256)
         for n_rf in (2, 3, 4, 5, 8, 16)
         if n_rf <= n]

# ============================================================================
# INTERLEAVING
# ============================================================================


class TestInterleavePorts:
    def test_delta_one_is_identity(self):
        assert np.array_equal(interleave_ports(4, 4, "A"), np.arange(4))

    def test_n64_nrf4_first_block(self):
        """Delta=16: schedule entries k=0..3 land on ports {0,4,8,12}."""
        kappa = interleave_ports(64, 4, "A")
        assert kappa[:4].tolist() == [0, 4, 8, 12]

    def test_bijection_over_sweep(self):
        for n, n_rf in SWEEP:
            for strategy in ("A", "B"):
                kappa = interleave_ports(n, n_rf, strategy)
                assert sorted(kappa.tolist()) == list(range(n))

    def test_strategy_b_requires_two_chains(self):
        with pytest.raises(ValueError):
            interleave_ports(8, 1, "B")

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            interleave_ports(0, 1, "A")
        with pytest.raises(ValueError):
            interleave_ports(4, 2, "C")


# ============================================================================
# TRAINING LENGTHS
# ============================================================================


class TestTrainingLength:
    def test_pinned_64_4(self):
        assert training_length(64, 4, "A") == 16
        assert training_length(64, 4, "B") == 31

    def test_formulas_over_grid(self):
        """ceil(N/N_RF) and ceil((N - ceil(N_RF/2)) / floor(N_RF/2))."""
        for n in range(1, 257):
            for n_rf in range(1, n + 1):
                assert training_length(n, n_rf, "A") == math.ceil(n / n_rf)
                if n_rf >= 2:
                    expect = math.ceil((n - math.ceil(n_rf / 2)) / (n_rf // 2))
                    assert training_length(n, n_rf, "B") == expect


# ============================================================================
# STRATEGY A
# ============================================================================


class TestStrategyA:
    def test_covers_all_ports_divisible(self):
        seen = set()
        for sf in range(training_length(64, 4, "A")):
            seen.update(strategy_a_schedule(64, 4, sf).tolist())
        assert seen == set(range(64))

    def test_wraparound_when_not_divisible(self):
        """N=6, N_RF=4: two subframes, the second revisits 2 ports mod N."""
        assert training_length(6, 4, "A") == 2
        sf0 = strategy_a_schedule(6, 4, 0)
        sf1 = strategy_a_schedule(6, 4, 1)
        assert set(sf0) | set(sf1) == set(range(6))
        assert len(set(sf0) & set(sf1)) == 2

    def test_coverage_over_sweep(self):
        for n, n_rf in SWEEP:
            seen = set()
            for sf in range(training_length(n, n_rf, "A")):
                seen.update(strategy_a_schedule(n, n_rf, sf).tolist())
            assert seen == set(range(n))

    def test_out_of_range_subframe(self):
        with pytest.raises(ValueError):
            strategy_a_schedule(64, 4, 16)


# ============================================================================
# STRATEGY B
# ============================================================================


class TestStrategyB:
    def test_first_subframe_ignores_table(self):
        """No SINRs known yet: all chains take the earliest interleaved ports."""
        kappa = interleave_ports(64, 4, "B")
        sf0 = strategy_b_schedule(64, 4, 0, SinrTable.empty(64))
        explore = kappa[[2, 3]]  # exploring half starts at index ceil(N_RF/2)
        exploit = kappa[[0, 1]]
        assert set(sf0) == set(explore) | set(exploit)

    def test_assignments_distinct_each_subframe(self):
        rng = np.random.default_rng(0)
        table = SinrTable.empty(36)
        for sf in range(training_length(36, 5, "B")):
            ports = strategy_b_schedule(36, 5, sf, table)
            assert len(set(ports.tolist())) == 5
            table.update(ports, rng.uniform(0.1, 10.0, 5))

    def test_exploiting_half_takes_best_measured(self):
        table = SinrTable.empty(16)
        table.update(np.arange(8), [0.1, 9.0, 0.2, 7.0, 0.3, 0.4, 0.5, 0.6])
        # subframe 1 explorers sit on ports 8 and 10, away from the best two
        ports = strategy_b_schedule(16, 4, 1, table)
        assert set(ports[2:].tolist()) == {1, 3}  # the two largest SINRs

    def test_full_coverage_over_sweep(self):
        """Every port measured at least once within the training length."""
        rng = np.random.default_rng(1)
        for n, n_rf in SWEEP:
            table = SinrTable.empty(n)
            for sf in range(training_length(n, n_rf, "B")):
                ports = strategy_b_schedule(n, n_rf, sf, table)
                table.update(ports, rng.uniform(0.1, 10.0, n_rf))
            assert table.measured.all(), (n, n_rf)

    def test_mean_assignment_sinr_trends_up(self):
        """Exploiting static i.i.d. SINRs improves the subframe mean (rank
        correlation over 1000 trials is positive)."""
        rng = np.random.default_rng(2)
        n, n_rf = 25, 4
        length = training_length(n, n_rf, "B")
        mean_curve = np.zeros(length)
        for _ in range(1000):
            truth = rng.exponential(1.0, n)
            table = SinrTable.empty(n)
            for sf in range(length):
                ports = strategy_b_schedule(n, n_rf, sf, table)
                table.update(ports, truth[ports])
                mean_curve[sf] += truth[ports].mean()
        mean_curve /= 1000
        ranks_x = np.argsort(np.argsort(np.arange(length)))
        ranks_y = np.argsort(np.argsort(mean_curve))
        rho = np.corrcoef(ranks_x, ranks_y)[0, 1]
        assert rho > 0


# ============================================================================
# RUNNING SELECTION
# ============================================================================


def _measured_table(gamma):
    gamma = np.asarray(gamma, dtype=float)
    return SinrTable(gamma=gamma, measured=np.ones(gamma.size, dtype=bool))


class TestSelectRunning:
    def test_all_ports_when_nrf_equals_n(self):
        table = _measured_table([0.5, 1.5, 0.7])
        assert sorted(select_running(table, 3).tolist()) == [0, 1, 2]

    def test_tie_breaks_to_lower_index(self):
        table = _measured_table([0.1, 3.0, 2.0, 2.0])
        assert set(select_running(table, 2).tolist()) == {1, 2}

    def test_matches_sort_oracle_1000_tables(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            n = int(rng.integers(4, 40))
            n_rf = int(rng.integers(1, n + 1))
            gamma = rng.choice([0.25, 0.5, 1.0, 2.0, 4.0], n)  # forces ties
            oracle = sorted(range(n), key=lambda k: (-gamma[k], k))[:n_rf]
            got = select_running(_measured_table(gamma), n_rf)
            assert got.tolist() == oracle

    def test_requires_full_measurement(self):
        table = SinrTable.empty(4)
        table.update([0, 1, 2], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            select_running(table, 2)


# ============================================================================
# STAGE MACHINE
# ============================================================================


class TestStepStage:
    def _trained_map(self, truth, n=8, n_rf=2):
        pm = PortMap(n_ports=n, n_rf=n_rf, strategy="A")
        for _ in range(training_length(n, n_rf, "A")):
            pm = step_stage(pm, truth[pm.assignment])
        return pm

    def test_training_runs_full_length_then_flips(self):
        truth = np.linspace(1.0, 2.0, 8)
        pm = PortMap(n_ports=8, n_rf=2, strategy="A")
        for sf in range(4):
            assert pm.stage == TRAINING
            pm = step_stage(pm, truth[pm.assignment])
        assert pm.stage == RUNNING
        assert sorted(pm.assignment.tolist()) == [6, 7]

    def test_constant_channel_never_retrains(self):
        truth = np.linspace(1.0, 2.0, 8)
        pm = self._trained_map(truth)
        for _ in range(50):
            pm = step_stage(pm, truth[pm.assignment])
            assert pm.stage == RUNNING

    def test_threshold_rule(self):
        """Stored 10.0, new 4.0 at threshold 2x: re-train."""
        truth = np.full(8, 10.0)
        pm = self._trained_map(truth)
        pm = step_stage(pm, np.array([10.0, 4.0]), drift_threshold=2.0)
        assert pm.stage == TRAINING
        assert pm.subframe_counter == 0
        assert not pm.table.measured.any()

    def test_threshold_is_two_sided(self):
        truth = np.full(8, 10.0)
        pm = self._trained_map(truth)
        pm = step_stage(pm, np.array([10.0, 25.0]), drift_threshold=2.0)
        assert pm.stage == TRAINING

    def test_within_threshold_updates_table_only(self):
        truth = np.full(8, 10.0)
        pm = self._trained_map(truth)
        pm = step_stage(pm, np.array([12.0, 8.0]), drift_threshold=2.0)
        assert pm.stage == RUNNING
        assert pm.table.gamma[pm.assignment].tolist() == [12.0, 8.0]

    def test_block_fading_redraw_retrains_quickly(self):
        """Independent redraw per subframe: re-train within 2 running
        subframes with probability > 0.9 over 1000 trials."""
        rng = np.random.default_rng(4)
        n, n_rf = 8, 2
        hits = 0
        for _ in range(1000):
            truth = rng.exponential(1.0, n)
            pm = PortMap(n_ports=n, n_rf=n_rf, strategy="A")
            while pm.stage == TRAINING:
                pm = step_stage(pm, rng.exponential(1.0, n_rf))
            for _ in range(2):
                pm = step_stage(pm, rng.exponential(1.0, n_rf))
                if pm.stage == TRAINING:
                    hits += 1
                    break
        assert hits / 1000 > 0.9

    def test_rejects_nrf_above_ports(self):
        with pytest.raises(ValueError):
            PortMap(n_ports=4, n_rf=5, strategy="A")


class TestSinrTable:
    def test_sentinel_tracks_measured(self):
        table = SinrTable.empty(4)
        assert (table.gamma == SENTINEL).all()
        table.update([2], [1.5])
        assert table.measured.tolist() == [False, False, True, False]
        assert table.gamma[2] == 1.5
