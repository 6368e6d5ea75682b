"""
Command-line tests
Every subcommand run in-process through main()
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.main import main


def _write_config(path, out_dir, **extra):
    values = {
        "generator": "illustrative4d",
        "encoder_layers": "3,2",
        "rff_features": "10",
        "nu": "0.2",
        "alpha": "10",
        "epochs": "1",
        "batch_size": "100",
        "seed": "2",
        "out_dir": str(out_dir),
    }
    values.update({k: str(v) for k, v in extra.items()})
    path.write_text("".join(f"{k}={v}\n" for k, v in values.items()))
    return path


@pytest.fixture
def trained_run(tmp_path):
    """A small trained model on the illustrative set"""
    out_dir = tmp_path / "run"
    config = _write_config(tmp_path / "run.env", out_dir)
    assert main(["train", str(config)]) == 0
    return out_dir


class TestGenerate:
    """Test the generate command"""

    def test_gaussian_file(self, tmp_path, capsys):
        """Test 1000 rows x 513 columns (512 features + label)"""
        out = tmp_path / "d.csv"
        assert main(["generate", "gaussian", "--seed", "1", "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert frame.shape == (1000, 513)
        assert "1000 rows x 513 columns" in capsys.readouterr().out

    def test_illustrative_file(self, tmp_path):
        """Test 2000 rows x 5 columns"""
        out = tmp_path / "i.csv"
        assert main(["generate", "illustrative4d", "--seed", "1", "--out", str(out)]) == 0
        assert pd.read_csv(out).shape == (2000, 5)

    def test_same_seed_same_bytes(self, tmp_path):
        """Test regeneration is byte-identical"""
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["generate", "illustrative4d", "--seed", "5", "--out", str(a)])
        main(["generate", "illustrative4d", "--seed", "5", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_generator(self, tmp_path):
        """Test an unknown generator exits with 2"""
        assert main(["generate", "spiral", "--out", str(tmp_path / "x.csv")]) == 2


class TestTrain:
    """Test the train command"""

    def test_outputs(self, trained_run):
        """Test model, report, effective config and split files"""
        for name in ("model.npz", "train_report.json", "effective_config.env", "train.csv", "test.csv"):
            assert (trained_run / name).is_file()
        report = json.loads((trained_run / "train_report.json").read_text())
        assert len(report["epoch_objectives"]) == 1
        assert report["n_train"] == 1000

    def test_zero_epochs(self, tmp_path):
        """Test epochs=0 still writes a model with an empty objective list"""
        config = _write_config(tmp_path / "c.env", tmp_path / "out", epochs=0)
        assert main(["train", str(config)]) == 0
        report = json.loads((tmp_path / "out" / "train_report.json").read_text())
        assert report["epoch_objectives"] == []

    def test_rerun_is_byte_identical(self, trained_run, tmp_path):
        """Test the same config and seed reproduce the model file"""
        config = _write_config(tmp_path / "again.env", tmp_path / "again")
        assert main(["train", str(config)]) == 0
        assert (tmp_path / "again" / "model.npz").read_bytes() == (trained_run / "model.npz").read_bytes()

    def test_effective_config_reproduces(self, trained_run):
        """Test re-running from the effective config rewrites the same model"""
        before = (trained_run / "model.npz").read_bytes()
        assert main(["train", str(trained_run / "effective_config.env")]) == 0
        assert (trained_run / "model.npz").read_bytes() == before

    def test_set_overrides_file(self, tmp_path):
        """Test --set wins over the config file"""
        config = _write_config(tmp_path / "c.env", tmp_path / "out", epochs=3)
        assert main(["train", str(config), "--set", "epochs=2", "--set", "mode=two-stage"]) == 0
        report = json.loads((tmp_path / "out" / "train_report.json").read_text())
        assert report["mode"] == "two-stage"
        assert len(report["pretrain_objectives"]) == 2

    def test_invalid_config(self, tmp_path, capsys):
        """Test config violations exit with 2 and a JSON error body"""
        config = _write_config(tmp_path / "c.env", tmp_path / "out", nu=5, bogus=1)
        assert main(["train", str(config)]) == 2
        body = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert body["error"] == "INVALID_CONFIG"
        assert len(body["details"]["violations"]) == 2

    def test_missing_dataset(self, tmp_path):
        """Test an unreadable dataset exits with 3"""
        config = tmp_path / "c.env"
        config.write_text(f"dataset={tmp_path / 'absent.csv'}\nout_dir={tmp_path / 'out'}\n")
        assert main(["train", str(config)]) == 3


class TestScore:
    """Test the score command"""

    def test_scores_file(self, trained_run, tmp_path):
        """Test one row per sample with the sign rule as decision"""
        out = tmp_path / "scores.csv"
        assert main(["score", str(trained_run / "model.npz"), str(trained_run / "test.csv"), "--out", str(out)]) == 0
        frame = pd.read_csv(out, float_precision="round_trip")
        assert list(frame.columns) == ["row_index", "score", "decision"]
        assert frame["row_index"].tolist() == list(range(1000))
        assert np.array_equal(frame["decision"].to_numpy(), np.where(frame["score"] >= 0, 1, -1))
        assert out.with_suffix(".meta.json").is_file()

    def test_scoring_twice_is_identical(self, trained_run, tmp_path):
        """Test repeated scoring gives identical files"""
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            main(["score", str(trained_run / "model.npz"), str(trained_run / "train.csv"), "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_width_mismatch(self, trained_run, tmp_path, capsys):
        """Test data of another width exits with 3 naming both widths"""
        data = tmp_path / "g.csv"
        main(["generate", "gaussian", "--out", str(data)])
        capsys.readouterr()
        code = main(["score", str(trained_run / "model.npz"), str(data), "--out", str(tmp_path / "s.csv")])
        assert code == 3
        body = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert body["details"] == {"expected": 4, "found": 512}


class TestExplain:
    """Test the explain command"""

    def test_gradient_files(self, trained_run, tmp_path):
        """Test per-row gradient CSVs and rankings"""
        out = tmp_path / "explain"
        code = main(["explain", str(trained_run / "model.npz"), str(trained_run / "test.csv"),
                     "--rows", "0,2-3", "--out-dir", str(out)])
        assert code == 0
        for idx in (0, 2, 3):
            frame = pd.read_csv(out / f"gradient_row{idx}.csv")
            assert frame.shape == (4, 4)
            assert np.allclose(frame["gradient"], frame["positive"] - frame["negative"])
        rankings = json.loads((out / "rankings.json").read_text())
        assert set(rankings) == {"0", "2", "3"}

    def test_image_maps(self, trained_run, tmp_path):
        """Test a 2x2 shape writes grids and PGM images for every kind"""
        out = tmp_path / "maps"
        code = main(["explain", str(trained_run / "model.npz"), str(trained_run / "test.csv"),
                     "--rows", "1", "--shape", "2x2", "--out-dir", str(out)])
        assert code == 0
        for kind in ("positive", "negative", "full"):
            assert np.loadtxt(out / f"row1_{kind}.csv", delimiter=",").shape == (2, 2)
            assert (out / f"row1_{kind}.pgm").read_bytes().startswith(b"P5")

    def test_bad_shape(self, trained_run, tmp_path):
        """Test a shape that does not hold the row exits with 2"""
        code = main(["explain", str(trained_run / "model.npz"), str(trained_run / "test.csv"),
                     "--rows", "0", "--shape", "3x3", "--out-dir", str(tmp_path / "x")])
        assert code == 2

    def test_row_out_of_range(self, trained_run, tmp_path):
        """Test an index past the end exits with 2"""
        code = main(["explain", str(trained_run / "model.npz"), str(trained_run / "test.csv"),
                     "--rows", "5000", "--out-dir", str(tmp_path / "x")])
        assert code == 2


class TestEval:
    """Test the eval command"""

    def test_metrics_bundle(self, trained_run, tmp_path):
        """Test metrics JSON, curves and histogram from a scored test split"""
        scores = tmp_path / "scores.csv"
        main(["score", str(trained_run / "model.npz"), str(trained_run / "test.csv"), "--out", str(scores)])
        out = tmp_path / "eval"
        code = main(["eval", str(scores), str(trained_run / "test.csv"), "--out-dir", str(out),
                     "--train-report", str(trained_run / "train_report.json")])
        assert code == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) == {"auroc", "auprc", "n_train", "n_test", "train_seconds", "score_seconds"}
        assert 0.0 <= metrics["auroc"] <= 1.0
        assert metrics["n_test"] == 1000 and metrics["n_train"] == 1000
        for name in ("roc.csv", "pr.csv", "histogram.csv"):
            assert (out / name).is_file()

    def test_missing_labels(self, trained_run, tmp_path):
        """Test a labels file without the label column exits with 3"""
        scores = tmp_path / "scores.csv"
        main(["score", str(trained_run / "model.npz"), str(trained_run / "test.csv"), "--out", str(scores)])
        unlabeled = tmp_path / "unlabeled.csv"
        pd.read_csv(trained_run / "test.csv").drop(columns=["label"]).to_csv(unlabeled, index=False)
        assert main(["eval", str(scores), str(unlabeled), "--out-dir", str(tmp_path / "e")]) == 3


@pytest.fixture
def custom_run(tmp_path):
    """A model trained on a CSV with a text label column and a categorical column"""
    rng = np.random.default_rng(3)
    n = 40
    frame = pd.DataFrame({
        "x1": rng.normal(size=n).round(6),
        "proto": np.where(np.arange(n) % 3 == 0, "udp", "tcp"),
        "x2": rng.normal(size=n).round(6),
        "class": np.where(np.arange(n) % 10 == 0, "attack", "normal"),
    })
    raw = tmp_path / "raw.csv"
    frame.to_csv(raw, index=False)
    out_dir = tmp_path / "custom"
    config = tmp_path / "custom.env"
    config.write_text(
        f"dataset={raw}\nlabel_column=class\npositive_label_values=normal\n"
        f"negative_label_values=attack\ncategorical_columns=proto\nencoder_layers=3,2\n"
        f"rff_features=10\nnu=0.2\nalpha=10\nepochs=1\nbatch_size=10\nseed=2\nout_dir={out_dir}\n"
    )
    assert main(["train", str(config)]) == 0
    return raw, out_dir


class TestCustomSchemaRun:
    """Test score, explain and eval on files with the trained model's own layout"""

    def test_score_raw_file(self, custom_run, tmp_path):
        """Test the raw file with text labels and categories scores every row"""
        raw, out_dir = custom_run
        out = tmp_path / "scores.csv"
        assert main(["score", str(out_dir / "model.npz"), str(raw), "--out", str(out)]) == 0
        assert pd.read_csv(out).shape[0] == 40

    def test_score_split_file(self, custom_run, tmp_path):
        """Test the test split written by train scores with the same model"""
        _, out_dir = custom_run
        out = tmp_path / "scores.csv"
        assert main(["score", str(out_dir / "model.npz"), str(out_dir / "test.csv"), "--out", str(out)]) == 0
        assert pd.read_csv(out).shape[0] == 20
        assert set(pd.read_csv(out_dir / "test.csv")["class"]) == {"normal", "attack"}

    def test_scores_match_between_raw_and_encoded_rows(self, custom_run, tmp_path):
        """Test a row scores the same from the raw file and from the split file"""
        raw, out_dir = custom_run
        model = str(out_dir / "model.npz")
        main(["score", model, str(raw), "--out", str(tmp_path / "raw.csv")])
        main(["score", model, str(out_dir / "train.csv"), "--out", str(tmp_path / "train.csv")])
        raw_scores = pd.read_csv(tmp_path / "raw.csv", float_precision="round_trip")["score"].to_numpy()
        train_scores = pd.read_csv(tmp_path / "train.csv", float_precision="round_trip")["score"].to_numpy()
        train_rows = pd.read_csv(out_dir / "train.csv", float_precision="round_trip")["x1"].to_numpy()
        raw_rows = pd.read_csv(raw, float_precision="round_trip")["x1"].to_numpy()
        for x1, value in zip(train_rows, train_scores):
            assert value in raw_scores[raw_rows == x1]

    def test_explain_raw_file(self, custom_run, tmp_path):
        """Test gradients are reported per encoded feature"""
        raw, out_dir = custom_run
        out = tmp_path / "explain"
        assert main(["explain", str(out_dir / "model.npz"), str(raw), "--rows", "0", "--out-dir", str(out)]) == 0
        frame = pd.read_csv(out / "gradient_row0.csv")
        assert frame["feature"].tolist() == ["x1", "proto=tcp", "proto=udp", "x2"]

    def test_eval_with_model_schema(self, custom_run, tmp_path):
        """Test eval decodes text labels through the model's stored schema"""
        raw, out_dir = custom_run
        scores = tmp_path / "scores.csv"
        main(["score", str(out_dir / "model.npz"), str(raw), "--out", str(scores)])
        code = main(["eval", str(scores), str(raw), "--out-dir", str(tmp_path / "eval"),
                     "--model", str(out_dir / "model.npz")])
        assert code == 0
        metrics = json.loads((tmp_path / "eval" / "metrics.json").read_text())
        assert metrics["n_test"] == 40

    def test_eval_without_schema_rejects_text_labels(self, custom_run, tmp_path):
        """Test the default 1/-1 label values do not decode text labels"""
        raw, out_dir = custom_run
        scores = tmp_path / "scores.csv"
        main(["score", str(out_dir / "model.npz"), str(raw), "--out", str(scores)])
        code = main(["eval", str(scores), str(raw), "--out-dir", str(tmp_path / "eval"),
                     "--label-column", "class"])
        assert code == 3


class TestBenchmark:
    """Test the benchmark command"""

    def test_modes_summary(self, tmp_path):
        """Test per-run rows and per-mode means"""
        out_dir = tmp_path / "bench"
        config = _write_config(tmp_path / "b.env", out_dir)
        assert main(["benchmark", str(config), "--runs", "2", "--modes", "joint,raw"]) == 0
        rows = pd.read_csv(out_dir / "benchmark.csv")
        assert rows.shape[0] == 4
        assert sorted(rows["seed"].unique().tolist()) == [2, 3]
        summary = json.loads((out_dir / "benchmark_summary.json").read_text())
        assert set(summary) == {"joint", "raw"}
        assert summary["joint"]["runs"] == 2

    def test_unknown_mode(self, tmp_path):
        """Test an unknown mode exits with 2"""
        config = _write_config(tmp_path / "b.env", tmp_path / "bench")
        assert main(["benchmark", str(config), "--modes", "joint,magic"]) == 2
