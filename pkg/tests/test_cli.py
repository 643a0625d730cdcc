"""End-to-end CLI contract: files, determinism, exit codes, printed summaries.

All invocations are in-process through main(argv) so exit codes and stdout
are asserted directly.
"""

import json
import os

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from pmugan.cli import main
from pmugan.io import read_dataset, read_loss_history

FAST_TRAIN = {
    "train": {
        "batch_size": 8,
        "critic_steps": 2,
        "noise_dim": 4,
        "generator_hidden": [8],
        "critic_hidden": [8],
    }
}


def write_config(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return str(path)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One simulated dataset plus a tiny trained checkpoint, shared read-only."""
    root = tmp_path_factory.mktemp("cli")
    cfg = write_config(root / "cfg.json", FAST_TRAIN)
    data_dir = root / "data"
    assert main(["simulate", "--samples", "10", "--seed", "7", "--out", str(data_dir)]) == 0
    run_dir = root / "run"
    assert (
        main(
            [
                "train", "--config", cfg, "--data", str(data_dir / "dataset.csv"),
                "--iterations", "4", "--seed", "0", "--out", str(run_dir),
            ]
        )
        == 0
    )
    return {
        "root": root,
        "config": cfg,
        "data": str(data_dir / "dataset.csv"),
        "checkpoint": str(run_dir / "checkpoint.json"),
        "run_dir": str(run_dir),
    }


class TestSimulate:
    def test_writes_dataset_and_sidecar(self, tmp_path, capsys):
        out = tmp_path / "d"
        assert main(["simulate", "--samples", "3", "--seed", "1", "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "3 samples" in printed and str(out / "dataset.csv") in printed
        records, meta = read_dataset(str(out / "dataset.csv"))
        assert len(records) == 3
        assert meta["steps_per_sample"] == 200
        assert meta["dt"] == pytest.approx(1.0 / 60.0)
        assert meta["filter"] is None
        assert meta["source_tag"] == "simulated"

    def test_zero_samples_is_usage_error(self, tmp_path):
        assert main(["simulate", "--samples", "0", "--out", str(tmp_path)]) == 2

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["simulate", "--samples", "4", "--seed", "9", "--out", str(out)]) == 0
        assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()
        assert (a / "dataset.meta.json").read_bytes() == (b / "dataset.meta.json").read_bytes()

    def test_seed_flag_equivalent_to_config_seed(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"seed": 11})
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--samples", "2", "--config", cfg, "--out", str(a)]) == 0
        assert main(["simulate", "--samples", "2", "--seed", "11", "--out", str(b)]) == 0
        assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()

    def test_ninebus_system(self, tmp_path):
        out = tmp_path / "nb"
        assert main(
            ["simulate", "--system", "ninebus", "--samples", "2", "--seed", "3", "--out", str(out)]
        ) == 0
        records, meta = read_dataset(str(out / "dataset.csv"))
        assert meta["system"] == "ninebus"
        assert records[0].n_steps == 200


class TestTrain:
    def test_single_iteration_single_loss_row(self, tmp_path, workspace):
        out = tmp_path / "t1"
        assert (
            main(
                [
                    "train", "--config", workspace["config"], "--data", workspace["data"],
                    "--iterations", "1", "--out", str(out),
                ]
            )
            == 0
        )
        lines = (out / "loss_critic.csv").read_text().splitlines()
        assert lines[0] == "iteration,value"
        assert len(lines) == 2

    def test_checkpoint_echoes_default_hyperparameters(self, tmp_path, workspace):
        # Shrink only the layer sizes; the adversarial schedule keeps defaults.
        doc = {"train": dict(FAST_TRAIN["train"])}
        del doc["train"]["critic_steps"]
        cfg = write_config(tmp_path / "c.json", doc)
        out = tmp_path / "t"
        assert (
            main(
                [
                    "train", "--config", cfg, "--data", workspace["data"],
                    "--iterations", "1", "--out", str(out),
                ]
            )
            == 0
        )
        echoed = json.loads((out / "checkpoint.json").read_text())["config"]
        assert echoed["critic_steps"] == 5
        assert echoed["learning_rate"] == 1e-4
        assert echoed["clip"] == 0.01

    def test_missing_data_flag_is_usage_error(self, tmp_path):
        assert main(["train", "--out", str(tmp_path)]) == 2

    def test_resume_splices_bitwise(self, tmp_path, workspace):
        args = ["train", "--config", workspace["config"], "--data", workspace["data"]]
        full = tmp_path / "full"
        assert main(args + ["--iterations", "6", "--seed", "0", "--out", str(full)]) == 0
        part = tmp_path / "part"
        assert main(args + ["--iterations", "4", "--seed", "0", "--out", str(part)]) == 0
        assert (
            main(
                args
                + [
                    "--iterations", "6", "--resume", str(part / "checkpoint.json"),
                    "--out", str(part),
                ]
            )
            == 0
        )
        for name in ("checkpoint.json", "loss_critic.csv", "loss_generator.csv"):
            assert (full / name).read_bytes() == (part / name).read_bytes(), name

    def test_resume_with_conflicting_config_is_usage_error(self, tmp_path, workspace):
        doc = {"train": dict(FAST_TRAIN["train"], clip=0.5)}
        cfg = write_config(tmp_path / "c.json", doc)
        assert (
            main(
                [
                    "train", "--config", cfg, "--data", workspace["data"],
                    "--iterations", "6", "--resume", workspace["checkpoint"],
                    "--out", str(tmp_path),
                ]
            )
            == 2
        )

    def test_dataset_smaller_than_batch_is_usage_error(self, tmp_path, workspace):
        assert (
            main(
                ["train", "--data", workspace["data"], "--iterations", "1", "--out", str(tmp_path)]
            )
            == 2
        )  # default batch 64 > 10 samples


class TestGenerate:
    def test_filter_metadata_and_determinism(self, tmp_path, workspace):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert (
                main(
                    [
                        "generate", "--checkpoint", workspace["checkpoint"],
                        "--samples", "5", "--seed", "11",
                        "--filter-cutoff", "4.0", "--out", str(out),
                    ]
                )
                == 0
            )
        assert (a / "synthetic.csv").read_bytes() == (b / "synthetic.csv").read_bytes()
        meta = json.loads((a / "synthetic.meta.json").read_text())
        assert meta["filter"]["cutoff_hz"] == 4.0
        assert meta["source_tag"] == "synthetic"
        records, _ = read_dataset(str(a / "synthetic.csv"))
        assert len(records) == 5 and records[0].n_steps == 200

    def test_no_filter_records_null(self, tmp_path, workspace):
        out = tmp_path / "raw"
        assert (
            main(
                [
                    "generate", "--checkpoint", workspace["checkpoint"],
                    "--samples", "2", "--no-filter", "--out", str(out),
                ]
            )
            == 0
        )
        assert json.loads((out / "synthetic.meta.json").read_text())["filter"] is None

    def test_missing_checkpoint_is_runtime_error(self, tmp_path):
        assert (
            main(
                [
                    "generate", "--checkpoint", str(tmp_path / "nope.json"),
                    "--samples", "2", "--out", str(tmp_path),
                ]
            )
            == 3
        )

    def test_nyquist_violating_cutoff_is_usage_error(self, tmp_path, workspace):
        assert (
            main(
                [
                    "generate", "--checkpoint", workspace["checkpoint"],
                    "--samples", "2", "--filter-cutoff", "40.0", "--out", str(tmp_path),
                ]
            )
            == 2
        )


class TestValidate:
    def test_simulated_data_scores_clean(self, tmp_path, workspace, capsys):
        out = tmp_path / "v"
        assert main(["validate", "--data", workspace["data"], "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "realistic_fraction" in printed
        report = json.loads((out / "report.json").read_text())
        assert report["threshold"] == 0.09
        assert report["realistic_fraction"] >= 0.95
        assert report["n_samples"] == 10
        # clean data: every sample lands in the histogram
        assert sum(report["histogram"]["counts"]) == report["n_samples"]
        hist_lines = (out / "error_histogram.csv").read_text().splitlines()
        assert hist_lines[0] == "bin_lo,bin_hi,count"
        assert len(hist_lines) == 21

    def test_threshold_flag_echoed(self, tmp_path, workspace):
        out = tmp_path / "v"
        assert (
            main(
                ["validate", "--data", workspace["data"], "--threshold", "0.02", "--out", str(out)]
            )
            == 0
        )
        assert json.loads((out / "report.json").read_text())["threshold"] == 0.02

    def test_missing_dataset_is_runtime_error(self, tmp_path):
        assert main(["validate", "--data", str(tmp_path / "no.csv"), "--out", str(tmp_path)]) == 3


class TestWdist:
    def test_self_distance_zero(self, tmp_path, workspace, capsys):
        out = tmp_path / "w"
        assert (
            main(
                ["wdist", "--data-a", workspace["data"], "--data-b", workspace["data"],
                 "--out", str(out)]
            )
            == 0
        )
        printed = capsys.readouterr().out
        assert "mean_w1 0.0" in printed and "max_w1 0.0" in printed
        doc = json.loads((out / "wdist.json").read_text())
        assert doc["mean_w1"] == 0.0 and doc["max_w1"] == 0.0

    def test_shifted_channel_translation(self, tmp_path, workspace):
        from pmugan.io import write_dataset
        from pmugan.swing import PmuRecord

        records, meta = read_dataset(workspace["data"])
        shifted = [
            PmuRecord(dt=r.dt, i_mag=r.i_mag + 0.5, i_phase=r.i_phase, source_tag=r.source_tag)
            for r in records
        ]
        shifted_path = tmp_path / "shifted.csv"
        write_dataset(str(shifted_path), shifted, dict(meta))
        out = tmp_path / "w"
        assert (
            main(
                ["wdist", "--data-a", workspace["data"], "--data-b", str(shifted_path),
                 "--out", str(out)]
            )
            == 0
        )
        doc = json.loads((out / "wdist.json").read_text())
        mag = doc["channels"]["i_mag_pu"]
        phase = doc["channels"]["i_phase_rad"]
        assert mag["mean_w1"] == pytest.approx(0.5, abs=1e-12)
        assert phase["max_w1"] == 0.0
        assert doc["max_w1"] == pytest.approx(0.5, abs=1e-12)

    def test_matches_assignment_oracle_per_column(self, tmp_path, workspace):
        # Optimal transport on a line is the sorted pairing; cross-check a few
        # columns against a Hungarian-assignment solution.
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--samples", "10", "--seed", "1", "--out", str(a_dir)]) == 0
        assert main(["simulate", "--samples", "10", "--seed", "2", "--out", str(b_dir)]) == 0
        out = tmp_path / "w"
        assert (
            main(
                ["wdist", "--data-a", str(a_dir / "dataset.csv"),
                 "--data-b", str(b_dir / "dataset.csv"), "--out", str(out)]
            )
            == 0
        )
        doc = json.loads((out / "wdist.json").read_text())
        recs_a, _ = read_dataset(str(a_dir / "dataset.csv"))
        recs_b, _ = read_dataset(str(b_dir / "dataset.csv"))
        for t in (0, 57, 199):
            col_a = np.array([r.i_mag[t] for r in recs_a])
            col_b = np.array([r.i_mag[t] for r in recs_b])
            cost = np.abs(col_a[:, None] - col_b[None, :])
            rows, cols = linear_sum_assignment(cost)
            expected = cost[rows, cols].mean()
            got = doc["channels"]["i_mag_pu"]["per_timestep"][t]
            assert got == pytest.approx(expected, abs=1e-12)

    def test_shape_mismatch_is_usage_error(self, tmp_path, workspace):
        other = tmp_path / "other"
        assert main(["simulate", "--samples", "3", "--seed", "1", "--out", str(other)]) == 0
        assert (
            main(
                ["wdist", "--data-a", workspace["data"],
                 "--data-b", str(other / "dataset.csv"), "--out", str(tmp_path)]
            )
            == 2
        )


class TestGradcheck:
    SPECS = {
        "generator": {"layer_sizes": [4, 6, 5], "activations": ["relu", "sigmoid"]},
        "critic": {"layer_sizes": [5, 6, 1], "activations": ["relu", "linear"]},
    }

    def test_small_specs_pass(self, tmp_path, capsys):
        spec = write_config(tmp_path / "specs.json", self.SPECS)
        out = tmp_path / "gc"
        assert main(["gradcheck", "--spec", spec, "--seed", "0", "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "PASS" in printed and "worst_rel_err" in printed
        doc = json.loads((out / "gradcheck.json").read_text())
        assert doc["pass"] is True
        assert len(doc["per_layer"]["generator"]) == 2
        assert doc["max_rel_err"] < 1e-4

    def test_corrupted_backward_fails(self, tmp_path, monkeypatch, capsys):
        import pmugan.network as network

        true_prime = network._activate_prime

        def broken(z, post, act):
            grad = true_prime(z, post, act)
            return grad * 1.05 if act == "relu" else grad

        monkeypatch.setattr(network, "_activate_prime", broken)
        spec = write_config(tmp_path / "specs.json", self.SPECS)
        assert main(["gradcheck", "--spec", spec, "--seed", "0", "--out", str(tmp_path)]) == 3
        assert "FAIL" in capsys.readouterr().out

    def test_bad_spec_file_is_usage_error(self, tmp_path):
        bad = write_config(tmp_path / "bad.json", {"generator": {"layer_sizes": [4, 5]}})
        assert main(["gradcheck", "--spec", bad, "--out", str(tmp_path)]) == 2


class TestPlumbing:
    def test_unknown_flag_is_usage_error(self, workspace):
        assert main(["train", "--data", workspace["data"], "--frobnicate"]) == 2

    def test_missing_command_is_usage_error(self):
        assert main([]) == 2

    def test_help_exits_zero(self):
        assert main(["--help"]) == 0

    def test_unknown_config_key_is_usage_error(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"trian": {}})
        assert main(["simulate", "--samples", "1", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_invalid_config_json_is_usage_error(self, tmp_path):
        bad = tmp_path / "c.json"
        bad.write_text("{nope")
        assert main(["simulate", "--samples", "1", "--config", str(bad), "--out", str(tmp_path)]) == 2

    def test_loss_history_round_trip(self, workspace):
        history = read_loss_history(workspace["run_dir"])
        assert len(history.critic) == 4 and len(history.generator) == 4
        assert all(np.isfinite(v) for v in history.critic)
