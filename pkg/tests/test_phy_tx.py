"""Transmit chain tests: MCS table, codec, scrambler, mapper, grid, OFDM."""

import numpy as np
import pytest

from ofdm_fama.coding import decode, encode
from ofdm_fama.mcs import load_mcs_table, mcs_entry
from ofdm_fama.modulation import demap_hard, map_qam, scheme_for_qm, soft_demap
from ofdm_fama.phy_tx import (
    assemble_grid,
    default_numerology,
    extract_data,
    ofdm_modulate,
    pilot_values,
    transmit_subframe,
)
from ofdm_fama.phy_rx import ofdm_demodulate
from ofdm_fama.scrambling import gold_sequence, scramble

NUM = default_numerology()

# ============================================================================
# MCS TABLE
# ============================================================================


class TestMcsTable:
    # (index, qm, cr_x1024, tbs, se) anchor rows
    ANCHORS = [
        (0, 2, 120, 224, 0.2222),
        (3, 2, 251, 456, 0.4524),
        (7, 2, 526, 984, 0.9762),
        (13, 4, 490, 1800, 1.7857),
    ]

    def test_anchor_rows(self):
        for index, qm, cr, tbs, se in self.ANCHORS:
            e = mcs_entry(index)
            assert (e.qm, e.cr_x1024, e.tbs) == (qm, cr, tbs)
            assert e.se == pytest.approx(se, abs=1e-4)

    def test_all_rows_satisfy_se_identity(self):
        """se = tbs/1008 within 1e-4 on every row."""
        for e in load_mcs_table():
            assert abs(e.se - e.tbs / NUM.n_re_total) < 1e-4

    def test_all_rows_satisfy_code_rate_identity(self):
        """cr/1024 tracks tbs/(936*qm) within the TBS-grid rounding."""
        for e in load_mcs_table():
            assert abs(e.code_rate - e.tbs / (NUM.n_data * e.qm)) < 0.02

    def test_table_shape(self):
        table = load_mcs_table()
        assert len(table) == 29
        assert all(e.qm in (2, 4, 6) for e in table)

    def test_index_bounds(self):
        with pytest.raises(ValueError):
            mcs_entry(29)
        with pytest.raises(ValueError):
            mcs_entry(-1)


# ============================================================================
# CODEC
# ============================================================================


class TestCodec:
    def test_uncoded_is_identity(self):
        bits = np.random.default_rng(0).integers(0, 2, 64).astype(np.uint8)
        assert np.array_equal(encode("uncoded", bits, 64), bits)

    def test_uncoded_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            encode("uncoded", np.zeros(10, dtype=np.uint8), 20)

    def test_coded_round_trip_100_blocks(self):
        """decode(encode(b)) = b with no noise for 100 random blocks."""
        rng = np.random.default_rng(1)
        n_info, n_out = 224, 1872
        for _ in range(100):
            bits = rng.integers(0, 2, n_info).astype(np.uint8)
            coded = encode("coded", bits, n_out)
            llrs = 1.0 - 2.0 * coded.astype(float)  # hard LLRs, positive = 0
            assert np.array_equal(decode("coded", llrs, n_info), bits)

    def test_coded_round_trip_across_rates(self):
        rng = np.random.default_rng(2)
        for index in (0, 7, 13, 20, 28):
            e = mcs_entry(index)
            bits = rng.integers(0, 2, e.tbs).astype(np.uint8)
            coded = encode("coded", bits, NUM.n_data * e.qm)
            llrs = 1.0 - 2.0 * coded.astype(float)
            assert np.array_equal(decode("coded", llrs, e.tbs), bits)

    def test_coded_beats_uncoded_on_awgn(self):
        """CR=120/1024 QPSK at Es/N0 = 0 dB: coded BER < uncoded BER."""
        rng = np.random.default_rng(3)
        noise_var = 1.0  # Es/N0 = 0 dB with unit-energy symbols
        n_info, qm = 224, 2
        n_out = NUM.n_data * qm

        def awgn(symbols):
            noise = rng.standard_normal((2, symbols.size))
            return symbols + np.sqrt(noise_var / 2) * (noise[0] + 1j * noise[1])

        coded_errs = 0
        for _ in range(30):
            bits = rng.integers(0, 2, n_info).astype(np.uint8)
            tx = map_qam(encode("coded", bits, n_out), qm)
            llr = soft_demap(awgn(tx), qm, np.full(tx.size, 1.0 / noise_var))
            coded_errs += int(np.sum(decode("coded", llr, n_info) != bits))
        coded_ber = coded_errs / (30 * n_info)

        bits = rng.integers(0, 2, 40_000).astype(np.uint8)
        rx = awgn(map_qam(bits, qm))
        uncoded_ber = np.mean(demap_hard(rx, qm) != bits)

        assert uncoded_ber > 0.1  # sanity: the channel is genuinely noisy
        assert coded_ber < uncoded_ber

    def test_unknown_codec_rejected(self):
        with pytest.raises(ValueError):
            encode("turbo", np.zeros(8, dtype=np.uint8), 16)


# ============================================================================
# SCRAMBLING
# ============================================================================


class TestScrambling:
    def test_involution(self):
        bits = np.random.default_rng(4).integers(0, 2, 1872).astype(np.uint8)
        assert np.array_equal(scramble(scramble(bits, 5), 5), bits)

    def test_distinct_users_differ(self):
        bits = np.random.default_rng(5).integers(0, 2, 1872).astype(np.uint8)
        assert not np.array_equal(scramble(bits, 1), scramble(bits, 2))

    def test_sequence_balance(self):
        """Ones fraction of a length-1e4 sequence is 0.5 +- 0.02."""
        seq = gold_sequence(3, 10_000)
        assert abs(seq.mean() - 0.5) < 0.02

    def test_deterministic_per_user(self):
        assert np.array_equal(gold_sequence(9, 512), gold_sequence(9, 512))


# ============================================================================
# QAM MAPPING
# ============================================================================


class TestMapQam:
    def test_qpsk_00_corner(self):
        sym = map_qam(np.array([0, 0], dtype=np.uint8), 2)
        assert sym[0] == pytest.approx((1 + 1j) / np.sqrt(2), abs=1e-12)

    def test_unit_mean_energy(self):
        for qm in (2, 4, 6):
            points = scheme_for_qm(qm).points
            assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_hard_demap_round_trip_exhaustive(self):
        """All 2^qm labels survive map -> demap_hard for each qm."""
        for qm in (2, 4, 6):
            n = 1 << qm
            bits = ((np.arange(n)[:, None] >> np.arange(qm - 1, -1, -1)) & 1)
            sym = map_qam(bits.reshape(-1).astype(np.uint8), qm)
            assert np.array_equal(demap_hard(sym, qm), bits.reshape(-1))

    def test_rejects_unsupported_order(self):
        with pytest.raises(ValueError):
            map_qam(np.zeros(8, dtype=np.uint8), 3)

    def test_rejects_ragged_length(self):
        with pytest.raises(ValueError):
            map_qam(np.zeros(5, dtype=np.uint8), 2)


# ============================================================================
# RESOURCE GRID
# ============================================================================


class TestResourceGrid:
    def test_mask_census(self):
        """936 data REs, 72 pilots, nothing empty."""
        grid = assemble_grid(np.zeros(NUM.n_data, dtype=complex), 0, NUM)
        counts = np.bincount(grid.mask.reshape(-1), minlength=3)
        assert counts[1] == 936 and counts[2] == 72
        assert counts.sum() == NUM.n_re_total == 1008

    def test_extract_inverts_assemble(self):
        rng = np.random.default_rng(6)
        data = rng.standard_normal(NUM.n_data) + 1j * rng.standard_normal(NUM.n_data)
        assert np.array_equal(extract_data(assemble_grid(data, 0, NUM), NUM), data)

    def test_pilot_seed_changes_values_not_mask(self):
        a = assemble_grid(np.zeros(NUM.n_data, dtype=complex), 1, NUM)
        b = assemble_grid(np.zeros(NUM.n_data, dtype=complex), 2, NUM)
        assert np.array_equal(a.mask, b.mask)
        assert not np.array_equal(a.symbols[NUM.pilot_symbol],
                                  b.symbols[NUM.pilot_symbol])

    def test_rejects_wrong_data_count(self):
        with pytest.raises(ValueError):
            assemble_grid(np.zeros(935, dtype=complex), 0, NUM)

    def test_pilots_are_unit_energy_qpsk(self):
        vals = pilot_values(11, NUM)
        assert vals.size == NUM.n_used
        assert np.allclose(np.abs(vals), 1.0, atol=1e-12)


# ============================================================================
# OFDM MODULATION
# ============================================================================


def _random_grid(seed):
    rng = np.random.default_rng(seed)
    data = (rng.standard_normal(NUM.n_data) + 1j * rng.standard_normal(NUM.n_data))
    return assemble_grid(data / np.sqrt(2), seed, NUM)


class TestOfdm:
    def test_output_length(self):
        assert ofdm_modulate(_random_grid(7), NUM).size == 1920

    def test_round_trip(self):
        grid = _random_grid(8)
        rx = ofdm_demodulate(ofdm_modulate(grid, NUM), NUM)
        assert np.max(np.abs(rx.symbols - grid.symbols)) < 1e-10

    def test_parseval(self):
        """CP-stripped time energy equals grid energy (unitary transform)."""
        grid = _random_grid(9)
        t = ofdm_modulate(grid, NUM)
        energy = 0.0
        pos = 0
        for n in range(NUM.n_symb):
            pos += NUM.cp_lengths[n]
            energy += float(np.sum(np.abs(t[pos:pos + NUM.nfft]) ** 2))
            pos += NUM.nfft
        assert energy == pytest.approx(float(np.sum(np.abs(grid.symbols) ** 2)),
                                       abs=1e-9)

    def test_cyclic_prefix_copies_tail(self):
        t = ofdm_modulate(_random_grid(10), NUM)
        starts = NUM.symbol_start_samples()
        for n in range(NUM.n_symb):
            cp = NUM.cp_lengths[n]
            body = t[starts[n] + cp:starts[n] + cp + NUM.nfft]
            assert np.array_equal(t[starts[n]:starts[n] + cp], body[-cp:])


# ============================================================================
# FULL TX CHAIN
# ============================================================================


class TestTransmitSubframe:
    def test_qpsk_grid_has_unit_energy_per_re(self):
        """Every RE (data and pilot) carries a unit-energy symbol at qm=2."""
        e = mcs_entry(3)
        bits = np.random.default_rng(11).integers(0, 2, e.tbs).astype(np.uint8)
        grid = transmit_subframe(bits, e, "coded", 0, NUM)
        assert np.max(np.abs(np.abs(grid.symbols) - 1.0)) < 1e-9

    def test_deterministic(self):
        e = mcs_entry(7)
        bits = np.random.default_rng(12).integers(0, 2, e.tbs).astype(np.uint8)
        a = ofdm_modulate(transmit_subframe(bits, e, "coded", 2, NUM), NUM)
        b = ofdm_modulate(transmit_subframe(bits, e, "coded", 2, NUM), NUM)
        assert np.array_equal(a, b)

    def test_uncoded_payload_is_full_grid(self):
        e = mcs_entry(3)
        bits = np.random.default_rng(13).integers(0, 2, NUM.n_data * e.qm)
        grid = transmit_subframe(bits.astype(np.uint8), e, "uncoded", 1, NUM)
        recovered = demap_hard(extract_data(grid, NUM), e.qm)
        assert np.array_equal(scramble(recovered, 1), bits)
