"""End-to-end command line checks, run in-process through cli.main."""

import json
import os

import numpy as np
import pytest

from nonparanormal import cli
from nonparanormal.dataio import read_data_csv, read_predictions_csv

MANIFEST = """\
# tiny logistic scenario for the command line tests
transform = logistic
p = 2
n_star = 10
n_l_star = 4
seed = 7
n_test_per_class = 25
"""


def run(*argv) -> int:
    return cli.main(list(argv))


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """simulate -> fit -> predict -> evaluate, sharing one directory."""
    root = tmp_path_factory.mktemp("cli")
    manifest = root / "scenario.txt"
    manifest.write_text(MANIFEST)
    sim_dir = root / "sim"
    assert run("simulate", str(manifest), str(sim_dir)) == 0

    train = sim_dir / "train.csv"
    test = sim_dir / "test.csv"
    model = root / "model.json"
    code = run(
        "fit", str(train), "--out", str(model),
        "--sizes", "8", "--pilot-iters", "20", "--final-iters", "40",
        "--seed", "3",
    )
    assert code == 0

    pred = root / "pred.csv"
    assert run("predict", str(model), str(test), "--out", str(pred)) == 0

    metrics = root / "metrics.csv"
    assert run("evaluate", str(pred), str(test), "--out", str(metrics)) == 0
    return {
        "root": root, "manifest": manifest, "sim": sim_dir, "train": train,
        "test": test, "model": model, "pred": pred, "metrics": metrics,
    }


class TestPipeline:
    def test_simulate_outputs(self, workspace):
        sim = workspace["sim"]
        assert (sim / "params.txt").exists()
        train = read_data_csv(str(sim / "train.csv"))
        test = read_data_csv(str(sim / "test.csv"))
        assert train.n == 20 and train.p == 2
        assert int((train.labels >= 0).sum()) == 8
        assert test.n == 50
        assert np.all(test.labels >= 0)

    def test_model_file(self, workspace):
        with open(workspace["model"]) as fh:
            doc = json.load(fh)
        assert doc["basis_size"] == 8
        assert len(doc["preprocess"]["mean"]) == 2

    def test_predictions(self, workspace):
        labels, p1 = read_predictions_csv(str(workspace["pred"]))
        assert labels.size == 50
        assert np.all((p1 >= 0) & (p1 <= 1))

    def test_metrics_file(self, workspace):
        lines = workspace["metrics"].read_text().splitlines()
        assert lines[0] == "fpr,fnr,error,mcc"
        values = [float(v) for v in lines[1].split(",")]
        assert len(values) == 4
        assert 0.0 <= values[2] <= 1.0

    def test_evaluate_prints_counts(self, workspace, capsys):
        assert run("evaluate", str(workspace["pred"]), str(workspace["test"])) == 0
        out = capsys.readouterr().out
        assert "counts: tp=" in out
        assert "error" in out

    def test_simulate_deterministic(self, workspace, tmp_path):
        again = tmp_path / "again"
        assert run("simulate", str(workspace["manifest"]), str(again)) == 0
        first = (workspace["sim"] / "train.csv").read_bytes()
        assert (again / "train.csv").read_bytes() == first

    def test_simulate_replication_dirs(self, tmp_path):
        manifest = tmp_path / "m.txt"
        manifest.write_text(MANIFEST + "replications = 2\n")
        out = tmp_path / "out"
        assert run("simulate", str(manifest), str(out)) == 0
        assert (out / "rep000" / "train.csv").exists()
        assert (out / "rep001" / "test.csv").exists()


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert run("frobnicate") == 1
        assert "error" in capsys.readouterr().err

    def test_bad_manifest(self, tmp_path, capsys):
        manifest = tmp_path / "bad.txt"
        manifest.write_text("transform = logistic\np = 2\n")  # missing keys
        assert run("simulate", str(manifest), str(tmp_path / "o")) == 1
        assert "manifest error" in capsys.readouterr().err

    def test_missing_train_file(self, tmp_path, capsys):
        code = run("fit", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "m.json"))
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_corrupt_model_file(self, tmp_path, workspace):
        bad = tmp_path / "model.json"
        bad.write_text("not json at all")
        code = run("predict", str(bad), str(workspace["test"]), "--out", str(tmp_path / "p.csv"))
        assert code == 2

    def test_predict_dimension_mismatch(self, tmp_path, workspace):
        wide = tmp_path / "wide.csv"
        wide.write_text("a,b,c,label\n0.1,0.2,0.3,0\n0.4,0.5,0.6,1\n")
        code = run("predict", str(workspace["model"]), str(wide), "--out", str(tmp_path / "p.csv"))
        assert code == 2

    def test_constant_column_fit(self, tmp_path, capsys):
        path = tmp_path / "flat.csv"
        rows = ["x1,x2,label"] + [f"{v},5.0,{v % 2}" for v in range(12)]
        path.write_text("\n".join(rows) + "\n")
        assert run("fit", str(path), "--out", str(tmp_path / "m.json")) == 3
        assert "numeric error" in capsys.readouterr().err

    def test_evaluate_rejects_unlabeled_truth(self, tmp_path, workspace):
        holey = tmp_path / "holey.csv"
        holey.write_text("x1,x2,label\n0.1,0.2,?\n")
        assert run("evaluate", str(workspace["pred"]), str(holey)) == 2

    def test_evaluate_length_mismatch(self, tmp_path, workspace):
        short = tmp_path / "short.csv"
        short.write_text("x1,x2,label\n0.1,0.2,1\n")
        assert run("evaluate", str(workspace["pred"]), str(short)) == 2


class TestArgumentValidation:
    def test_size_below_minimum(self, workspace, tmp_path):
        code = run("fit", str(workspace["train"]), "--out", str(tmp_path / "m.json"),
                   "--sizes", "4")
        assert code == 1

    def test_size_range_backwards(self, workspace, tmp_path):
        code = run("fit", str(workspace["train"]), "--out", str(tmp_path / "m.json"),
                   "--sizes", "12..9")
        assert code == 1

    def test_lambda_out_of_range(self, workspace, tmp_path):
        code = run("fit", str(workspace["train"]), "--out", str(tmp_path / "m.json"),
                   "--lambda", "1.5")
        assert code == 1

    def test_lambda_gibberish(self, workspace, tmp_path):
        code = run("fit", str(workspace["train"]), "--out", str(tmp_path / "m.json"),
                   "--lambda", "half")
        assert code == 1

    def test_replicate_real_needs_data(self, tmp_path):
        assert run("replicate", "real", str(tmp_path / "o")) == 1

    def test_replicate_synthetic_rejects_data(self, tmp_path, workspace):
        code = run("replicate", "logistic", str(tmp_path / "o"),
                   "--data", str(workspace["train"]))
        assert code == 1

    def test_replicate_reps_bounds(self, tmp_path):
        assert run("replicate", "logistic", str(tmp_path / "o"), "--reps", "0") == 1

    def test_replicate_empty_cell_filter(self, tmp_path):
        code = run("replicate", "logistic", str(tmp_path / "o"),
                   "--p", "5", "--n-star", "999")
        assert code == 1

    def test_replicate_bad_table(self, tmp_path):
        assert run("replicate", "cauchy", str(tmp_path / "o")) == 1

    def test_bad_train_fraction(self, tmp_path, workspace):
        code = run("replicate", "real", str(tmp_path / "o"),
                   "--data", str(workspace["train"]), "--train-frac", "1.2")
        assert code == 1
