import re

import pytest

from flowsvm.cli import main
from flowsvm.dataset import save_csv

from test_model_selection import clustered


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "data.csv"
    assert main(["synth", "--seed", "7", "--n", "5676", "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "small.csv"
    assert main(["synth", "--seed", "3", "--n", "300", "--out", str(path)]) == 0
    return path


def accuracy_line(text):
    return float(re.search(r"Accuracy: ([0-9.]+)", text).group(1))


def test_synth_deterministic_and_tallies(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["synth", "--seed", "5", "--n", "500", "--out", str(a)]) == 0
    out = capsys.readouterr().out
    assert main(["synth", "--seed", "5", "--n", "500", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    tallies = dict(line.split("\t") for line in out.strip().splitlines())
    assert int(tallies.pop("total")) == 500
    assert sum(map(int, tallies.values())) == 500


def test_synth_too_small(tmp_path, capsys):
    assert main(["synth", "--n", "10", "--out", str(tmp_path / "x.csv")]) != 0
    assert "at least" in capsys.readouterr().err


def test_synth_unwritable(tmp_path, capsys):
    assert main(["synth", "--n", "100", "--out", str(tmp_path / "no" / "dir" / "x.csv")]) != 0
    assert "error" in capsys.readouterr().err


def test_train_test1(data_csv, tmp_path, capsys):
    model, rep = tmp_path / "m.fpsvm", tmp_path / "report.txt"
    code = main(["train", "--data", str(data_csv), "--scheme", "test1", "--c", "100", "--gamma", "10",
                 "--test-fraction", "0.2", "--seed", "7", "--model-out", str(model), "--report-out", str(rep)])
    out = capsys.readouterr().out
    assert code == 0
    assert accuracy_line(out) >= 0.93
    assert rep.read_text() == out
    assert (tmp_path / "report_metrics.csv").exists() and (tmp_path / "report_confusion.csv").exists()
    assert model.read_text().startswith("fpsvm-model 1")


def test_train_test3(small_csv, capsys):
    assert main(["train", "--data", str(small_csv), "--scheme", "test3", "--c", "1000", "--gamma", "10"]) == 0
    out = capsys.readouterr().out
    for name in ("Dispersed", "Segregated", "Intermittent"):
        assert name in out
    assert "Annular" not in out and "\nDB " not in out


def test_train_missing_file(tmp_path, capsys):
    path = tmp_path / "missing.csv"
    assert main(["train", "--data", str(path)]) != 0
    assert str(path) in capsys.readouterr().err


def test_train_bad_parameter(small_csv):
    with pytest.raises(SystemExit):
        main(["train", "--data", str(small_csv), "--c", "-1"])


def test_grid_single_cell_and_deterministic(small_csv, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["grid", "--data", str(small_csv), "--c-grid", "10", "--gamma-grid", "1", "--folds", "3"]
    assert main(args + ["--out", str(a), "--jobs", "1"]) == 0
    assert "selected C=10 gamma=1" in capsys.readouterr().out
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 3 + 1


def test_eval_matches_training_run(tmp_path, capsys):
    path = tmp_path / "sep.csv"
    save_csv(clustered(2), path)
    model = tmp_path / "m.fpsvm"
    assert main(["train", "--data", str(path), "--scheme", "test3", "--gamma", "1", "--model-out", str(model)]) == 0
    capsys.readouterr()
    assert main(["eval", "--model", str(model), "--data", str(path)]) == 0
    assert accuracy_line(capsys.readouterr().out) >= 0.99


def test_eval_truncated_model(small_csv, tmp_path, capsys):
    model = tmp_path / "m.fpsvm"
    assert main(["train", "--data", str(small_csv), "--scheme", "test3", "--model-out", str(model)]) == 0
    text = model.read_text()
    model.write_text(text[: len(text) // 3])
    capsys.readouterr()
    assert main(["eval", "--model", str(model), "--data", str(small_csv)]) != 0
    assert "checksum" in capsys.readouterr().err


def test_eval_label_outside_model(tmp_path, capsys):
    # a model trained without B cannot score data labelled B
    from flowsvm.dataset import Dataset
    from flowsvm.synthetic import synth_generate

    data = synth_generate(3, 300)
    no_b = Dataset(tuple(s for s in data.samples if s.label.value != "B"))
    train_path, eval_path, model = tmp_path / "t.csv", tmp_path / "e.csv", tmp_path / "m.fpsvm"
    save_csv(no_b, train_path)
    save_csv(data, eval_path)
    assert main(["train", "--data", str(train_path), "--model-out", str(model)]) == 0
    capsys.readouterr()
    assert main(["eval", "--model", str(model), "--data", str(eval_path)]) != 0
    assert "'B'" in capsys.readouterr().err


def test_report_from_confusion_csv(tmp_path, capsys):
    from oracles import REF_TEST_COUNTS, TEST1_CLASSES

    rows = ["true\\predicted," + ",".join(TEST1_CLASSES)]
    rows += [name + "," + ",".join(map(str, r)) for name, r in zip(TEST1_CLASSES, REF_TEST_COUNTS)]
    src = tmp_path / "cm.csv"
    src.write_text("\n".join(rows) + "\n")
    out_csv = tmp_path / "rep.csv"
    assert main(["report", "--data", str(src), "--out", str(out_csv)]) == 0
    out = capsys.readouterr().out
    assert "Accuracy: 0.95" in out
    assert out_csv.read_text().splitlines()[-1].endswith(",1135")
