"""Configuration validation and command-line driver tests."""

import json

import pytest

from ofdm_fama.cli import main
from ofdm_fama.config import load_config, validate_config
from ofdm_fama.harness import SimConfig

MINIMAL = {"users": 4, "geometry": [4, 4, 2.0, 2.0], "n_rf": 4, "mcs_index": 3}


def _text(overrides=None, drop=()):
    raw = dict(MINIMAL)
    raw.update(overrides or {})
    for name in drop:
        raw.pop(name, None)
    return json.dumps(raw, indent=1)  # one field per line for anchoring


# ============================================================================
# VALIDATION
# ============================================================================


class TestValidateConfig:
    def test_minimal_config_parses_with_defaults(self):
        config, diagnostics = validate_config(_text())
        assert diagnostics == []
        assert config == SimConfig(users=4, geometry=(4, 4, 2.0, 2.0),
                                   n_rf=4, mcs_index=3)
        assert config.channel == "block" and config.codec == "coded"

    def test_full_config_coerces_numbers(self):
        config, diagnostics = validate_config(_text({
            "channel": "tdl", "doppler_hz": 40, "snr_db": 20,
            "channel_estimation": "least_squares", "cov_mode": "dynamic",
            "codec": "uncoded", "strategy": "B", "port_selection": "trained",
            "num_subframes": 10, "master_seed": 7}))
        assert diagnostics == []
        assert config.snr_db == 20.0 and isinstance(config.snr_db, float)
        assert config.doppler_hz == 40.0

    def test_rf_chains_cannot_exceed_ports(self):
        config, diagnostics = validate_config(
            _text({"geometry": [2, 2, 1.0, 1.0], "n_rf": 5}))
        assert config is None
        assert len(diagnostics) == 1
        assert "n_rf exceeds port count" in diagnostics[0]

    def test_diagnostics_carry_line_numbers(self):
        text = _text({"n_rf": 0})
        line = next(i for i, row in enumerate(text.splitlines(), start=1)
                    if '"n_rf"' in row)
        _, diagnostics = validate_config(text)
        assert diagnostics == [f"line {line}: n_rf must be >= 1"]

    def test_unknown_field_is_named(self):
        _, diagnostics = validate_config(_text({"userz": 4}))
        assert any("unknown field 'userz'" in d for d in diagnostics)

    def test_missing_required_fields_reported(self):
        _, diagnostics = validate_config(_text(drop=("mcs_index", "users")))
        joined = "\n".join(diagnostics)
        assert "missing required field 'mcs_index'" in joined
        assert "missing required field 'users'" in joined

    def test_multiple_violations_all_collected(self):
        _, diagnostics = validate_config(_text(
            {"users": "four", "mcs_index": 99, "channel": "awgn"}))
        assert len(diagnostics) == 3

    def test_booleans_are_not_integers(self):
        _, diagnostics = validate_config(_text({"users": True}))
        assert any("users must be an integer" in d for d in diagnostics)

    def test_geometry_shape_and_signs(self):
        _, diagnostics = validate_config(_text({"geometry": [4, 4, 2.0]}))
        assert any("geometry must be [N1, N2, W1, W2]" in d for d in diagnostics)
        _, diagnostics = validate_config(_text({"geometry": [4, 0, 2.0, -1.0]}))
        assert any("N2 must be a positive integer" in d for d in diagnostics)
        assert any("W2 must be a nonnegative number" in d for d in diagnostics)

    def test_strategy_b_training_needs_two_chains(self):
        _, diagnostics = validate_config(_text(
            {"n_rf": 1, "strategy": "B", "port_selection": "trained"}))
        assert any("at least 2 RF chains" in d for d in diagnostics)

    def test_invalid_json_and_non_object(self):
        config, diagnostics = validate_config('{"users": 4,,}')
        assert config is None
        assert "invalid JSON" in diagnostics[0]
        _, diagnostics = validate_config("[1, 2]")
        assert diagnostics == ["config: top level must be a JSON object"]


class TestLoadConfig:
    def test_reads_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(_text())
        config, diagnostics = load_config(str(path))
        assert diagnostics == [] and config.users == 4


# ============================================================================
# CLI
# ============================================================================


def _write_config(tmp_path, overrides=None):
    path = tmp_path / "cfg.json"
    path.write_text(_text(dict({"geometry": [2, 2, 2.0, 2.0], "n_rf": 2,
                                "users": 2, "num_subframes": 4},
                               **(overrides or {}))))
    return str(path)


class TestCliSimulate:
    def test_quick_run_writes_artifacts(self, tmp_path, capsys):
        config = _write_config(tmp_path)
        code = main(["simulate", "--config", config, "--quick",
                     "--out-dir", str(tmp_path / "runs"), "--runid", "t"])
        out = capsys.readouterr().out.splitlines()
        assert code == 0
        assert out[0].startswith("blocks=2 bler=")
        assert out[1].endswith(".csv") and out[2].endswith(".json")

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        config = _write_config(tmp_path, {"n_rf": 9})
        code = main(["simulate", "--config", config])
        assert code == 2
        assert "n_rf exceeds port count" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = main(["simulate", "--config", str(tmp_path / "nope.json")])
        assert code == 2
        assert "cannot read config" in capsys.readouterr().err


class TestCliRates:
    def test_cutoff_writes_csv(self, tmp_path, capsys):
        code = main(["rates", "--criterion", "cutoff", "--u", "2",
                     "--samples", "200", "--mc", "16",
                     "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "cutoff_rate=" in out and "stderr=" in out
        header = (tmp_path / "rates_cutoff_rate.csv").read_text().splitlines()[0]
        assert header == "criterion,w1,w2,n1,n2,n_rf,users,value,stderr,seed"

    def test_outage_needs_target_arguments(self, capsys):
        code = main(["rates", "--criterion", "outage"])
        assert code == 2
        assert "--gamma-db and --tbs" in capsys.readouterr().err

    def test_outage_runs_with_target(self, capsys):
        code = main(["rates", "--criterion", "outage", "--gamma-db", "5",
                     "--tbs", "1872", "--u", "2", "--samples", "300"])
        assert code == 0
        assert "outage_rate=" in capsys.readouterr().out


class TestCliOptimizeN:
    def test_search_prints_history(self, tmp_path, capsys):
        code = main(["optimize-n", "--criterion", "cutoff", "--u", "2",
                     "--samples", "100", "--eps", "0.2",
                     "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("n_star=")
        rows = (tmp_path / "optimize_n.csv").read_text().splitlines()
        assert rows[0] == "n1,n2,rate,is_n_star"
        assert sum(row.endswith(",1") for row in rows[1:]) == 1


class TestCliTrainDemo:
    def test_trace_reports_stage_flip(self, tmp_path, capsys):
        code = main(["train-demo", "--strategy", "A", "--n", "4,4",
                     "--u", "2", "--subframes", "6",
                     "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "running stage starts at subframe 4" in out
        assert (tmp_path / "train_demo_A.csv").exists()

    def test_strategy_b_rejects_single_chain(self, capsys):
        code = main(["train-demo", "--strategy", "B", "--nrf", "1"])
        assert code == 2
        assert "at least 2 RF chains" in capsys.readouterr().err


class TestCliRecipes:
    def test_list_names_every_recipe(self, capsys):
        assert main(["recipes", "list"]) == 0
        out = capsys.readouterr().out
        for name in ("covariance_fidelity", "structural_checks",
                     "oracle_equivalence", "training_lengths",
                     "outage_anchor", "table2_nstar", "rate_bounds",
                     "fig2_rate_surface", "fig4_bler_vs_n", "fig6_gain_vs_se",
                     "mobility_gain", "fig11_training"):
            assert name in out

    def test_run_needs_name(self, capsys):
        assert main(["recipes", "run"]) == 2
        assert "needs a recipe name" in capsys.readouterr().err

    def test_unknown_recipe_exits_2(self, capsys):
        assert main(["recipes", "run", "fig99"]) == 2
        assert "unknown recipe 'fig99'" in capsys.readouterr().err

    def test_training_lengths_is_byte_stable(self, tmp_path, capsys):
        assert main(["recipes", "run", "training_lengths",
                     "--out-dir", str(tmp_path)]) == 0
        path = capsys.readouterr().out.strip()
        first = open(path, "rb").read()
        assert main(["recipes", "run", "training_lengths",
                     "--out-dir", str(tmp_path)]) == 0
        assert open(path, "rb").read() == first
        assert first.splitlines()[0] == b"n_ports,n_rf,strategy,length"

    def test_covariance_fidelity_quick_meets_tolerance(self, tmp_path, capsys):
        assert main(["recipes", "run", "covariance_fidelity", "--quick",
                     "--out-dir", str(tmp_path)]) == 0
        path = capsys.readouterr().out.strip()
        header, row = open(path).read().splitlines()
        values = dict(zip(header.split(","), row.split(",")))
        assert float(values["max_abs_err"]) <= float(values["tol"])

    def test_structural_checks_all_pass(self, tmp_path, capsys):
        assert main(["recipes", "run", "structural_checks",
                     "--out-dir", str(tmp_path)]) == 0
        path = capsys.readouterr().out.strip()
        rows = open(path).read().splitlines()[1:]
        for row in rows:
            check, value, threshold = row.split(",")
            if check in ("sigma_min_eigenvalue",):
                assert float(value) >= float(threshold)
            elif check == "grid_data_re_count":
                assert float(value) == float(threshold)
            else:
                assert float(value) <= float(threshold)


class TestCliParser:
    def test_no_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
