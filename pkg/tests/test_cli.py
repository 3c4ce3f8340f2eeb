"""End-to-end CLI runs: every subcommand, exit codes, emitted files."""

import subprocess
import sys
from pathlib import Path

import pytest

from maskmatch.cli import main

FIXTURES = Path(__file__).parent / "fixtures" / "datasets"

TINY_CONFIG = """\
paradigm=mm
layers=1
hidden_dim=16
heads=2
ffn_dim=24
max_positions=64
max_input_length=64
batch_size=4
grad_accum=1
peak_lr=0.003
epochs=2
seed=0
"""

SYNTH_SPEC = """\
n_classes=3
vocab_size=120
examples_per_class=20
informativeness=1.0
noise=0.0
tokens_per_example=10
seed=3
"""


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    spec_path = root / "spec.txt"
    spec_path.write_text(SYNTH_SPEC)
    assert main(["gen-synthetic", "--spec", str(spec_path),
                 "--out", str(root / "data")]) == 0
    return root


@pytest.fixture(scope="module")
def config_path(synth_dir):
    path = synth_dir / "run.cfg"
    path.write_text(TINY_CONFIG)
    return path


class TestGenSynthetic:
    def test_writes_all_files(self, synth_dir):
        data = synth_dir / "data"
        for name in ("manifest.txt", "train.tsv", "dev.tsv", "test.tsv"):
            assert (data / name).exists()

    def test_bad_spec_exits_2(self, tmp_path, capsys):
        spec = tmp_path / "bad.txt"
        spec.write_text("n_classes=1\n")
        assert main(["gen-synthetic", "--spec", str(spec), "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err


class TestTrainEval:
    def test_train_writes_checkpoint_and_results(self, synth_dir, config_path, capsys):
        out = synth_dir / "run1"
        code = main(["train", "--config", str(config_path),
                     "--data", str(synth_dir / "data" / "manifest.txt"),
                     "--seed", "1", "--out", str(out)])
        captured = capsys.readouterr()
        assert code == 0, captured.err
        assert "dev accuracy:" in captured.out
        for name in ("model.ckpt", "vocab.txt", "results.csv", "results.json"):
            assert (out / name).exists()

    def test_eval_checkpoint(self, synth_dir, config_path, capsys):
        out = synth_dir / "run1"
        preds = synth_dir / "preds.txt"
        code = main(["eval", "--checkpoint", str(out / "model.ckpt"),
                     "--data", str(synth_dir / "data" / "manifest.txt"),
                     "--split", "test", "--predictions", str(preds)])
        captured = capsys.readouterr()
        assert code == 0, captured.err
        assert "test accuracy:" in captured.out
        lines = preds.read_text().splitlines()
        manifest_labels = set()
        for line in (synth_dir / "data" / "manifest.txt").read_text().splitlines():
            if line.startswith("labels="):
                manifest_labels = set(line[len("labels="):].split("|"))
        assert lines and set(lines) <= manifest_labels

    def test_missing_data_exits_3(self, config_path, capsys):
        code = main(["train", "--config", str(config_path),
                     "--data", "/nonexistent/manifest.txt"])
        assert code == 3
        assert "data error" in capsys.readouterr().err

    def test_bad_config_exits_2(self, synth_dir, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("unknown_option=1\n")
        code = main(["train", "--config", str(bad),
                     "--data", str(synth_dir / "data" / "manifest.txt")])
        assert code == 2
        assert "config error" in capsys.readouterr().err


class TestCompare:
    def test_compare_two_paradigms(self, synth_dir, config_path, capsys):
        out = synth_dir / "cmp"
        code = main(["compare", "--paradigms", "pt,mm", "--seeds", "0,1",
                     "--config", str(config_path),
                     "--data", str(synth_dir / "data" / "manifest.txt"),
                     "--out", str(out)])
        captured = capsys.readouterr()
        assert code == 0, captured.err
        assert "prompt_tune" in captured.out and "mask_match" in captured.out
        csv_lines = (out / "results.csv").read_text().splitlines()
        assert len(csv_lines) == 1 + 4  # header + 2 paradigms x 2 seeds

    def test_bad_seed_list_exits_2(self, synth_dir, config_path, capsys):
        code = main(["compare", "--paradigms", "mm", "--seeds", "one,two",
                     "--config", str(config_path),
                     "--data", str(synth_dir / "data" / "manifest.txt")])
        assert code == 2


class TestSweepTemplates:
    def test_sweep_two_templates(self, synth_dir, config_path, capsys):
        code = main(["sweep-templates", "--templates", "P1,P3", "--seeds", "0",
                     "--config", str(config_path),
                     "--data", str(synth_dir / "data" / "manifest.txt")])
        captured = capsys.readouterr()
        assert code == 0, captured.err
        assert "P1" in captured.out and "(default)" in captured.out
        assert "max-min spread" in captured.out


def test_fixture_dataset_trains_via_cli(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(TINY_CONFIG)
    code = main(["train", "--config", str(config),
                 "--data", str(FIXTURES / "nli" / "manifest.txt")])
    captured = capsys.readouterr()
    assert code == 0, captured.err
    assert "dev accuracy" in captured.out


def test_module_entry_point_runs():
    result = subprocess.run([sys.executable, "-m", "maskmatch", "--help"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    for command in ("train", "eval", "compare", "sweep-templates", "gen-synthetic"):
        assert command in result.stdout
