"""Tests for the command-line entry point and its exit codes."""
import json

import pytest

from app.cli import EXIT_ACCEPTANCE, EXIT_DATA, EXIT_OK, EXIT_USAGE, build_parser, main
from app.synthetic import write_synthetic

FAST_CONFIG = {"hyperparameters": {"n_trees": 5, "mlp_max_iters": 40, "linear_max_iters": 300}}


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "fast.json"
    path.write_text(json.dumps(FAST_CONFIG), encoding="utf-8")
    return path


def test_parser_lists_commands():
    parser = build_parser()
    args = parser.parse_args(["train", "--model", "svm", "--features", "tfidf", "--seed", "4"])
    assert (args.command, args.model, args.features, args.seed) == ("train", "svm", "tfidf", 4)
    assert parser.parse_args(["reproduce", "--jobs", "3"]).jobs == 3


def test_missing_command_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unknown_model_is_usage_error():
    assert main(["train", "--model", "knn"]) == EXIT_USAGE


def test_invalid_pairing_is_usage_error(isolated_settings, tmp_path):
    code = main(["train", "--model", "nb", "--features", "subword", "--run-dir", str(tmp_path)])
    assert code == EXIT_USAGE


def test_missing_config_file_is_usage_error(isolated_settings, tmp_path):
    assert main(["stats", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE


def test_stats_prints_table(isolated_settings, tmp_path, capsys):
    assert main(["stats", "--run-dir", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "informative" in out
    assert (tmp_path / "stats.json").exists()


def test_malformed_data_exits_with_data_code(isolated_settings, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("Id\tText\tLabel\n1\ttext\tMAYBE\n", encoding="utf-8")
    code = main(["stats", "--train", str(bad), "--valid", str(bad), "--run-dir", str(tmp_path)])
    assert code == EXIT_DATA


def test_missing_model_artifact_exits_with_data_code(isolated_settings, tmp_path):
    code = main(
        ["eval", "--model-path", str(tmp_path / "none.json"), "--run-dir", str(tmp_path / "r")]
    )
    assert code == EXIT_DATA


def test_train_then_eval(isolated_settings, tmp_path, fast_config, capsys):
    train_dir = tmp_path / "train"
    args = ["--config", str(fast_config), "--model", "logreg", "--features", "tfidf"]
    assert main(["train", *args, "--run-dir", str(train_dir)]) == EXIT_OK
    assert "f1" in capsys.readouterr().out
    model_path = train_dir / "model.json"
    assert model_path.exists()

    eval_dir = tmp_path / "eval"
    code = main(["eval", "--model-path", str(model_path), "--run-dir", str(eval_dir)])
    assert code == EXIT_OK
    trained = json.loads((train_dir / "report.json").read_text(encoding="utf-8"))
    evaluated = json.loads((eval_dir / "report.json").read_text(encoding="utf-8"))
    assert evaluated == trained


def test_reproduce_on_synthetic_data_passes(isolated_settings, tmp_path, fast_config, capsys):
    code = main(
        ["reproduce", "--config", str(fast_config), "--skip-encoder", "--run-dir", str(tmp_path)]
    )
    assert code == EXIT_OK
    assert "acceptance skipped" in capsys.readouterr().out


@pytest.mark.slow
def test_reproduce_on_unrelated_files_fails_acceptance(isolated_settings, tmp_path, fast_config):
    # files given explicitly are held to the reference numbers
    train, valid = write_synthetic(tmp_path / "files")
    code = main(
        [
            "reproduce",
            "--config",
            str(fast_config),
            "--skip-encoder",
            "--train",
            str(train),
            "--valid",
            str(valid),
            "--run-dir",
            str(tmp_path / "run"),
        ]
    )
    assert code == EXIT_ACCEPTANCE


def test_encoder_train_then_eval(isolated_settings, tmp_path):
    config = tmp_path / "encoder.json"
    config.write_text(
        json.dumps(
            {
                "model": "encoder",
                "hyperparameters": {
                    "encoder": {
                        "d_model": 16,
                        "n_heads": 2,
                        "n_layers": 1,
                        "d_ffn": 32,
                        "vocab_size": 150,
                        "max_len": 32,
                        "epochs": 1,
                        "lr": 1e-3,
                    }
                },
            }
        ),
        encoding="utf-8",
    )
    train_dir, eval_dir = tmp_path / "train", tmp_path / "eval"
    assert main(["train", "--config", str(config), "--run-dir", str(train_dir)]) == EXIT_OK
    checkpoint = train_dir / "encoder.pt"
    assert checkpoint.exists()

    code = main(["eval", "--model-path", str(checkpoint), "--run-dir", str(eval_dir)])
    assert code == EXIT_OK
    trained = json.loads((train_dir / "report.json").read_text(encoding="utf-8"))
    evaluated = json.loads((eval_dir / "report.json").read_text(encoding="utf-8"))
    assert evaluated == trained

    unlabeled = tmp_path / "test.tsv"
    unlabeled.write_text("Id\tText\nc1\tnew confirmed cases in ohio\n", encoding="utf-8")
    apply_dir = tmp_path / "apply"
    code = main(
        [
            "eval",
            "--model-path",
            str(checkpoint),
            "--predict",
            str(unlabeled),
            "--run-dir",
            str(apply_dir),
        ]
    )
    assert code == EXIT_OK
    lines = (apply_dir / "predictions.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "Id\tLabel" and lines[1].startswith("c1\t")


def test_binary_model_file_exits_with_data_code(isolated_settings, tmp_path):
    garbage = tmp_path / "model.json"
    garbage.write_bytes(b"\x80\x02\xff\xfe not a model")
    code = main(["eval", "--model-path", str(garbage), "--run-dir", str(tmp_path / "r")])
    assert code == EXIT_DATA
