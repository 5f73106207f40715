import csv
import json
import os

import numpy as np
import pytest

from splinedpd import cli
from splinedpd.experiment import ConfigError, ExperimentConfig, initial_model
from splinedpd.io import (OUTPUT_ENV, FileFormatError, atomic_write, load_model, read_csv,
                          read_signal, save_model, sidecar_path, write_csv, write_signal)
from splinedpd.models import SmpModel
from splinedpd.numerics import ComplexSignal
from splinedpd.spline_lut import SplineConfig

# a short run keeps the CLI tests quick; structure follows the SMP preset
FAST = ["--samples-per-iteration", "20000", "--ila-iterations", "2"]


def _run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert _run("generate", "--out", root / "eval.iq", *FAST) == 0
    assert _run("train", "--out-dir", root / "run", *FAST) == 0
    return root


class TestSignalFiles:
    """Raw I/Q files with JSON sidecars."""

    def test_round_trip(self, tmp_path):
        x = ComplexSignal(np.array([1 + 2j, -0.5j, 3.25]), 7.5e6)
        write_signal(tmp_path / "a.iq", x, {"config_hash": "abc", "seed": 4})
        raw = (tmp_path / "a.iq").read_bytes()
        np.testing.assert_array_equal(np.frombuffer(raw, "<f8"), [1, 2, 0, -0.5, 3.25, 0])
        y, meta = read_signal(tmp_path / "a.iq")
        np.testing.assert_array_equal(y.samples, x.samples)
        assert y.sample_rate_hz == 7.5e6
        assert meta == {"config_hash": "abc", "seed": 4, "sample_rate_hz": 7.5e6, "length": 3}

    def test_metadata_needs_hash(self, tmp_path):
        with pytest.raises(ValueError):
            write_signal(tmp_path / "a.iq", ComplexSignal([1], 1.0), {})

    def test_length_mismatch(self, tmp_path):
        write_signal(tmp_path / "a.iq", ComplexSignal([1, 2], 1.0), {"config_hash": "x"})
        meta = json.loads(sidecar_path(tmp_path / "a.iq").read_text())
        meta["length"] = 3
        sidecar_path(tmp_path / "a.iq").write_text(json.dumps(meta))
        with pytest.raises(FileFormatError):
            read_signal(tmp_path / "a.iq")

    def test_truncated_file(self, tmp_path):
        write_signal(tmp_path / "a.iq", ComplexSignal([1, 2], 1.0), {"config_hash": "x"})
        (tmp_path / "a.iq").write_bytes(b"\0" * 20)
        with pytest.raises(FileFormatError):
            read_signal(tmp_path / "a.iq")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.iq"):
            read_signal(tmp_path / "nope.iq")


class TestAtomicWrite:
    def test_no_leftovers(self, tmp_path):
        atomic_write(tmp_path / "out.txt", "hello")
        assert os.listdir(tmp_path) == ["out.txt"]

    def test_failed_rename_keeps_original(self, tmp_path, monkeypatch):
        target = tmp_path / "out.txt"
        target.write_text("old")

        def boom(*args):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            atomic_write(target, "new")
        assert target.read_text() == "old"
        assert os.listdir(tmp_path) == ["out.txt"]


class TestModelAndCsvFiles:
    def test_model_round_trip(self, tmp_path):
        model = SmpModel.identity(SplineConfig.from_points(3, 7), 2)
        model.luts[1].control_points[3] = 0.1 - 0.2j
        save_model(tmp_path / "m.json", model, "h1", {"kind": "smp"})
        back, doc = load_model(tmp_path / "m.json")
        assert doc["config_hash"] == "h1"
        np.testing.assert_array_equal(back.luts[1].control_points, model.luts[1].control_points)

    def test_not_a_model(self, tmp_path):
        (tmp_path / "m.json").write_text('{"config_hash": "x"}')
        with pytest.raises(FileFormatError):
            load_model(tmp_path / "m.json")

    def test_csv_floats_round_trip(self, tmp_path):
        rows = [{"a": 0.1 + 0.2, "b": np.float64(1 / 3)}]
        write_csv(tmp_path / "t.csv", ("a", "b"), rows)
        back = read_csv(tmp_path / "t.csv")
        assert float(back[0]["a"]) == 0.1 + 0.2
        assert float(back[0]["b"]) == 1 / 3


class TestExperimentConfig:
    """Flat key-value experiment files."""

    def test_ini_round_trip(self):
        cfg = ExperimentConfig.preset("sph", train_seed=7)
        back = ExperimentConfig.from_ini(cfg.to_ini())
        assert back == cfg
        assert back.config_hash() == cfg.config_hash()

    def test_hash_tracks_content(self):
        a = ExperimentConfig()
        assert a.config_hash() != ExperimentConfig(eval_seed=5).config_hash()

    def test_branch_steps_list(self):
        cfg = ExperimentConfig.from_mapping({"mu_q": "0.1, 0.05, 0.02, 0.01"})
        assert cfg.learning.mu_q == (0.1, 0.05, 0.02, 0.01)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="colour"):
            ExperimentConfig.from_ini("[experiment]\ncolour = red\n")

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_ini("[experiment]\n[extra]\nkind = sph\n")

    def test_bad_values(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"order": "three"})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"kind": "gmp"})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"fft_size": "1000"})

    def test_presets(self):
        for kind in ("sph", "smp", "mp"):
            cfg = ExperimentConfig.preset(kind)
            assert initial_model(cfg).kind == kind
        assert ExperimentConfig.preset("sph").memory == 3
        assert ExperimentConfig.preset("smp").spline.n_points == 7


class TestCli:
    """End-to-end command line behaviour."""

    def test_generate_is_deterministic(self, tmp_path):
        assert _run("generate", "--out", tmp_path / "a.iq") == 0
        assert _run("generate", "--out", tmp_path / "b.iq") == 0
        assert (tmp_path / "a.iq").read_bytes() == (tmp_path / "b.iq").read_bytes()
        meta = json.loads(sidecar_path(tmp_path / "a.iq").read_text())
        assert meta["config_hash"] == ExperimentConfig().config_hash()

    def test_generate_papr(self, tmp_path, capsys):
        _run("generate", "--out", tmp_path / "a.iq")
        papr = float(capsys.readouterr().out.split("PAPR ")[1].split()[0])
        assert papr <= 7.3

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
        assert _run("generate", "--out", "sub/x.iq") == 0
        assert (tmp_path / "sub" / "x.iq").exists()

    def test_train_outputs(self, trained):
        run = trained / "run"
        assert {"model.json", "training_log.csv", "config.ini"} <= set(os.listdir(run))
        rows = read_csv(run / "training_log.csv")
        assert list(rows[0]) == ["iteration", "mean_sq_error", "aclr_db_left",
                                 "aclr_db_right", "evm_pct"]
        assert [int(r["iteration"]) for r in rows] == [0, 1, 2]
        cfg = ExperimentConfig.from_ini((run / "config.ini").read_text())
        _, doc = load_model(run / "model.json")
        assert doc["config_hash"] == cfg.config_hash()

    def test_evaluate_matches_training_log(self, trained):
        out = trained / "eval"
        assert _run("evaluate", "--signal", trained / "eval.iq", "--out-dir", out,
                    "--tag", "raw_") == 0
        assert _run("evaluate", "--signal", trained / "eval.iq", "--model",
                    trained / "run" / "model.json", "--out-dir", out, "--tag", "dpd_") == 0
        raw = read_csv(out / "raw_metrics.csv")[0]
        dpd = read_csv(out / "dpd_metrics.csv")[0]
        log = read_csv(trained / "run" / "training_log.csv")
        worst = lambda r: min(float(r["aclr_db_left"]), float(r["aclr_db_right"]))  # noqa: E731
        assert abs((worst(dpd) - worst(raw)) - (worst(log[-1]) - worst(log[0]))) < 0.2
        assert worst(dpd) > worst(raw) + 10
        psd = read_csv(out / "dpd_psd.csv")
        assert len(psd) == 4096 and set(psd[0]) == {"freq_hz", "psd_db_per_hz"}
        assert raw["config_hash"] == ExperimentConfig.from_ini(
            (trained / "run" / "config.ini").read_text()).config_hash()

    def test_identity_model_equals_no_dpd(self, trained, tmp_path):
        save_model(tmp_path / "id.json", initial_model(ExperimentConfig()), "x")
        _run("evaluate", "--signal", trained / "eval.iq", "--out-dir", tmp_path, "--tag", "a")
        _run("evaluate", "--signal", trained / "eval.iq", "--model", tmp_path / "id.json",
             "--out-dir", tmp_path, "--tag", "b")
        a = read_csv(tmp_path / "ametrics.csv")[0]
        b = read_csv(tmp_path / "bmetrics.csv")[0]
        for key in ("evm_pct", "aclr_db_left", "aclr_db_right", "papr_db_at_1e4"):
            assert abs(float(a[key]) - float(b[key])) < 1e-6

    def test_linear_pa_training(self, tmp_path):
        assert _run("train", "--out-dir", tmp_path, "--pa", "linear", *FAST) == 0
        rows = read_csv(tmp_path / "training_log.csv")
        assert float(rows[-2]["mean_sq_error"]) < 1e-10

    def test_divergence_exit_code(self, tmp_path, capsys):
        assert _run("train", "--out-dir", tmp_path, "--mu-q", "10", *FAST) == cli.EXIT_DIVERGED
        assert "mu_q=10" in capsys.readouterr().err

    def test_config_errors(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[experiment]\nwaveform_colour = blue\n")
        assert _run("train", "--out-dir", tmp_path, "--config", bad) == cli.EXIT_CONFIG
        assert _run("generate", "--out", tmp_path / "x.iq", "--order", "x") == cli.EXIT_CONFIG

    def test_io_error(self, tmp_path):
        assert _run("evaluate", "--signal", tmp_path / "missing.iq",
                    "--out-dir", tmp_path) == cli.EXIT_IO

    def test_complexity_table(self, capsys):
        assert _run("complexity", "--format", "csv") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        rows = list(csv.DictReader(lines))
        got = {(r["kind"], int(r["order"]), int(r["memory"])): r for r in rows}
        assert got["sph", 3, 4]["main_path_published"] == "40"
        assert got["smp", 3, 4]["learning_published"] == "119"
        assert got["mp", 11, 4]["learning_published"] == "2514"
        assert got["mp", 11, 4]["flops_main"] == "255"

    def test_complexity_single_and_uncalibrated(self, capsys):
        assert _run("complexity", "--kind", "smp", "--order", "3", "--memory", "4") == 0
        assert "63" in capsys.readouterr().out
        assert _run("complexity", "--kind", "sph", "--order", "5", "--memory", "3") == \
            cli.EXIT_CONFIG

    def test_selftest(self, capsys):
        assert _run("selftest") == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") >= 8
