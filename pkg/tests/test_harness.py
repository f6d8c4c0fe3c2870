"""Scenario schema, seeded BER sweeps, focusing experiment, CLI contract."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from trlink.channel import CavityParams, SoundingConfig, export_ensemble
from trlink.cli import main as cli_main
from trlink.errors import ConfigurationError
from trlink.harness import (
    BER_CSV_HEADER,
    BerRecord,
    Scenario,
    derive_seed,
    grid_positions,
    load_scenario,
    run_ber_sweep,
    run_focusing_experiment,
    run_sounding_study,
    run_validation_suite,
)
from trlink.modem import PilotThreshold, RsmConfig, Scheme


def scenario_dict(**overrides):
    base = {
        "version": 1,
        "cavity": {"num_taps": 64, "bandwidth_hz": 4.0e9, "carrier_freq_hz": 2.736e11},
        "grid_mm": {"start": -6.3, "stop": 6.3, "step": 0.3},
        "targets_mm": [-2.7, -1.8],
        "rsm": {
            "scheme": "both",
            "num_rx": 2,
            "threshold": {"policy": "pilot", "num_pilots": 16},
        },
        "d_values": [15],
        "snr_grid_db": [10.0],
        "bits_per_point": 400,
        "trials": 2,
        "sounding": "genie",
        "master_seed": 1234,
    }
    base.update(overrides)
    return base


def write_scenario(tmp_path: Path, name: str = "scenario.json", **overrides) -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(scenario_dict(**overrides)), encoding="utf-8")
    return path


def small_scenario(**overrides) -> Scenario:
    from trlink.harness import scenario_from_dict

    return scenario_from_dict(scenario_dict(**overrides))


class TestGridPositions:
    def test_inclusive_endpoint(self):
        positions = grid_positions(-6.3, 6.3, 0.3)
        assert positions.size == 43
        assert positions[0] == pytest.approx(-6.3)
        assert positions[-1] == pytest.approx(6.3)

    def test_off_lattice_stop_truncates(self):
        assert grid_positions(-6.2, 6.2, 0.3).size == 42

    def test_rejects_bad_step(self):
        with pytest.raises(ConfigurationError):
            grid_positions(0.0, 1.0, 0.0)


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(7, 1, 2, 3) == derive_seed(7, 1, 2, 3)

    def test_paths_are_distinct(self):
        seeds = {derive_seed(7, a, b) for a in range(4) for b in range(4)}
        assert len(seeds) == 16


class TestScenarioLoading:
    def test_golden_scenario_resolves(self, tmp_path):
        scenario = load_scenario(write_scenario(tmp_path))
        assert scenario.positions_mm.size == 43
        assert scenario.target_indices == (12, 15)
        assert scenario.target_positions_mm == (pytest.approx(-2.7), pytest.approx(-1.8))
        assert scenario.schemes == (Scheme.RASK, Scheme.ERASK)
        assert scenario.sounding is None
        assert isinstance(scenario.rsm.threshold_policy, PilotThreshold)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_scenario(tmp_path / "absent.json")

    def test_unknown_top_level_key_rejected(self, tmp_path):
        path = write_scenario(tmp_path, typo_key=1)
        with pytest.raises(ConfigurationError, match="typo_key"):
            load_scenario(path)

    def test_unknown_nested_key_rejected(self, tmp_path):
        override = {"num_taps": 64, "bandwidth_hz": 4e9, "carrier_freq_hz": 2.7e11, "oops": 1}
        path = write_scenario(tmp_path, cavity=override)
        with pytest.raises(ConfigurationError, match="oops"):
            load_scenario(path)

    def test_bad_version_rejected(self, tmp_path):
        path = write_scenario(tmp_path, version=2)
        with pytest.raises(ConfigurationError, match="version"):
            load_scenario(path)

    def test_off_grid_target_rejected(self, tmp_path):
        path = write_scenario(tmp_path, targets_mm=[-2.71, -1.8])
        with pytest.raises(ConfigurationError, match="not on the position grid"):
            load_scenario(path)

    def test_erask_without_threshold_rejected(self, tmp_path):
        path = write_scenario(tmp_path, rsm={"scheme": "erask", "num_rx": 2})
        with pytest.raises(ConfigurationError, match="threshold"):
            load_scenario(path)

    def test_sounding_object_parses(self, tmp_path):
        path = write_scenario(tmp_path, sounding={"duration_s": 6.4e-8, "snr_db": 25.0})
        scenario = load_scenario(path)
        assert scenario.sounding == SoundingConfig(duration_s=6.4e-8, probe_snr_db=25.0)

    def test_grid_and_positions_are_exclusive(self, tmp_path):
        extra = {"positions_mm": [-2.7, -1.8]}
        path = write_scenario(tmp_path, **extra)
        with pytest.raises(ConfigurationError, match="exactly one"):
            load_scenario(path)

    def test_ensemble_file_scenario(self, tmp_path):
        params = CavityParams(num_taps=32, rng_seed=4)
        from trlink.channel import synth_cavity_ensemble

        ensemble = synth_cavity_ensemble(params, [-2.7, -1.8])
        export_ensemble(ensemble, tmp_path / "measured.json")
        base = scenario_dict(ensemble_file="measured.json")
        del base["cavity"]
        del base["grid_mm"]
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(base), encoding="utf-8")
        scenario = load_scenario(path)
        assert scenario.imported_ensemble is not None
        assert scenario.positions_mm.size == 2
        # imported channels are fixed across trials
        first = scenario.ensemble_for_trial(0)
        second = scenario.ensemble_for_trial(1)
        assert first is second


class TestBerRecord:
    def test_consistency_enforced(self):
        with pytest.raises(Exception):
            BerRecord("rask", 15, 10.0, 100, 5, 0.5, 1)

    def test_zero_error_count_is_reported(self):
        record = BerRecord("rask", 15, 10.0, 100, 0, 0.0, 1)
        assert record.ber == 0.0


class TestBerSweep:
    def test_record_grid_and_reproducibility(self):
        scenario = small_scenario()
        records = run_ber_sweep(scenario)
        assert len(records) == 2 * 1 * 1 * 2  # schemes x D x SNR x trials
        for record in records:
            assert record.ber == record.bit_errors / record.bits_sent
        again = run_ber_sweep(scenario)
        assert records == again

    def test_csv_schema_and_rows(self, tmp_path):
        scenario = small_scenario()
        records = run_ber_sweep(scenario, out_dir=tmp_path)
        for scheme in ("rask", "erask"):
            path = tmp_path / f"ber_{scheme}_D15.csv"
            lines = path.read_text(encoding="utf-8").splitlines()
            assert lines[0] == ",".join(BER_CSV_HEADER)
            assert len(lines) - 1 == 2  # one row per (snr, trial)
        assert len(records) == 4

    def test_pure_noise_rask_is_coin_flip(self):
        scenario = small_scenario(
            rsm={"scheme": "rask", "num_rx": 2},
            snr_grid_db=[-60.0],
            bits_per_point=10_000,
            trials=1,
        )
        (record,) = run_ber_sweep(scenario)
        assert 0.45 <= record.ber <= 0.55

    def test_ber_non_increasing_in_snr(self):
        scenario = small_scenario(
            rsm={"scheme": "rask", "num_rx": 2},
            snr_grid_db=[0.0, 10.0, 20.0, 30.0],
            bits_per_point=2000,
            trials=7,
            cavity={"num_taps": 128, "bandwidth_hz": 4.0e9, "carrier_freq_hz": 2.736e11},
        )
        records = run_ber_sweep(scenario)
        medians = []
        for snr in scenario.snr_grid_db:
            medians.append(np.median([r.ber for r in records if r.snr_db == snr]))
        for lower, higher in zip(medians[1:], medians[:-1]):
            assert lower <= higher + 1e-12

    def test_erask_never_beats_rask_on_paired_runs(self):
        scenario = small_scenario(bits_per_point=2000, trials=5)
        records = run_ber_sweep(scenario)
        rask = np.median([r.ber for r in records if r.scheme == "rask"])
        erask = np.median([r.ber for r in records if r.scheme == "erask"])
        assert erask >= rask

    def test_high_tb_noiseless_sounding_matches_genie(self):
        genie = small_scenario(bits_per_point=2000, trials=3)
        sounded = small_scenario(
            bits_per_point=2000,
            trials=3,
            sounding={"duration_s": 512 / 4.0e9},
        )
        genie_records = run_ber_sweep(genie)
        sounded_records = run_ber_sweep(sounded)
        for g, s in zip(genie_records, sounded_records):
            assert abs(g.ber - s.ber) <= 5 / g.bits_sent

    def test_interference_free_limit_is_error_free(self):
        scenario = small_scenario(
            snr_grid_db=[60.0],
            d_values=[64],
            bits_per_point=10_000,
            trials=1,
        )
        records = run_ber_sweep(scenario)
        assert all(r.ber == 0.0 for r in records)


class TestFocusingExperiment:
    def test_reports_and_csv_layout(self, tmp_path):
        scenario = small_scenario(d_values=[15, 30])
        reports = run_focusing_experiment(scenario, out_dir=tmp_path)
        # 2 single-user + 2 spacings x 2 role assignments
        assert len(reports) == 2 + 2 * 2
        single = tmp_path / "focus_single_t0.csv"
        lines = single.read_text(encoding="utf-8").splitlines()
        data_rows = [line for line in lines if not line.startswith("#")]
        assert data_rows[0] == "position_mm,peak_abs"
        assert len(data_rows) - 1 == 43
        for spacing in (15, 30):
            for role in (0, 1):
                assert (tmp_path / f"focus_two_user_D{spacing}_t{role}.csv").exists()

    def test_single_position_flagged_undefined(self, tmp_path):
        scenario = Scenario(
            cavity=CavityParams(num_taps=32),
            positions_mm=np.array([0.0]),
            target_indices=(0,),
            rsm=RsmConfig(Scheme.ERASK, num_rx=1, threshold_policy=PilotThreshold(8)),
            schemes=(Scheme.ERASK,),
            d_values=(15,),
            snr_grid_db=(10.0,),
            bits_per_point=100,
            trials=1,
            sounding=None,
            master_seed=5,
        )
        run_focusing_experiment(scenario, out_dir=tmp_path)
        text = (tmp_path / "focus_single_t0.csv").read_text(encoding="utf-8")
        assert "# spatial_fwhm_defined=0" in text
        assert "# spatial_fwhm_mm=nan" in text


class TestSoundingStudy:
    def test_rows_and_csv(self, tmp_path):
        scenario = small_scenario(
            trials=3, sounding={"duration_s": 6.4e-8, "snr_db": 20.0}
        )
        rows = run_sounding_study(scenario, out_dir=tmp_path, tb_values=(100, 1000))
        assert (tmp_path / "sounding_error.csv").exists()
        noiseless = {tb: err for tb, snr, err in rows if math.isinf(snr)}
        noisy = sorted((tb, err) for tb, snr, err in rows if not math.isinf(snr))
        assert all(err <= 1e-9 for err in noiseless.values())
        assert noisy[0][1] > noisy[1][1]


class TestValidationSuite:
    def test_all_checks_pass(self):
        results = run_validation_suite(0)
        assert results
        assert all(ok for _, ok, _ in results)


class TestCli:
    def test_missing_scenario_file_exits_2(self, tmp_path, capsys):
        code = cli_main(["ber", "--scenario", str(tmp_path / "nope.json")])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_unknown_flag_exits_2(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        code = cli_main(["ber", "--scenario", str(path), "--bogus"])
        assert code == 2

    def test_unknown_command_exits_2(self, capsys):
        assert cli_main(["frobnicate"]) == 2

    def test_ber_writes_expected_csvs(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        out = tmp_path / "results"
        code = cli_main(["ber", "--scenario", str(path), "--out", str(out)])
        assert code == 0
        assert (out / "ber_rask_D15.csv").exists()
        assert (out / "ber_erask_D15.csv").exists()

    def test_focus_writes_profiles(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        out = tmp_path / "results"
        code = cli_main(["focus", "--scenario", str(path), "--out", str(out)])
        assert code == 0
        assert (out / "focus_single_t0.csv").exists()

    def test_synth_exports_loadable_ensemble(self, tmp_path, capsys):
        from trlink.channel import load_ensemble

        path = write_scenario(tmp_path)
        out = tmp_path / "results"
        code = cli_main(["synth", "--scenario", str(path), "--out", str(out)])
        assert code == 0
        ensemble = load_ensemble(out / "ensemble.json")
        assert len(ensemble) == 43

    def test_seed_override_changes_output(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert cli_main(["ber", "--scenario", str(path), "--out", str(out_a), "--seed", "1"]) == 0
        assert cli_main(["ber", "--scenario", str(path), "--out", str(out_b), "--seed", "2"]) == 0
        a = (out_a / "ber_rask_D15.csv").read_text(encoding="utf-8")
        b = (out_b / "ber_rask_D15.csv").read_text(encoding="utf-8")
        assert a != b

    def test_validate_passes(self, capsys):
        assert cli_main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "all" in out and "checks passed" in out
