import csv
import json

import pytest

from lmnet.cli import main

import synth

FAST = ["--max-order", "3", "--trials", "2", "--jobs", "1"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_summary(capsys, synthetic_csv):
    code, out, _ = run(capsys, "summary", "--data", synthetic_csv)
    assert code == 0
    assert "704" in out and "424/140/140" in out
    doc = json.loads(out[out.index("{"):])
    assert [s["subset"] for s in doc["subsets"]] == ["training", "selection", "testing"]
    assert set(doc["subsets"][0]) == {"subset", "n", "n_positive", "n_negative",
                                      "n_missing_dropped"}


def test_reproduce_outputs_and_determinism(capsys, synthetic_csv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "reproduce", "--data", synthetic_csv, "--out", a, "--seed", 1, *FAST)[0] == 0
    assert run(capsys, "reproduce", "--data", synthetic_csv, "--out", b, "--seed", 1, *FAST)[0] == 0
    names = {"report.json", "report.txt", "roc.csv", "gain.csv", "lift.csv",
             "order_history.csv", "model.lmnet.json", "train_log.csv"}
    assert names <= {p.name for p in a.iterdir()}
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n
    report = json.loads((a / "report.json").read_text())
    for key in ("partition", "class_weights", "order_selection", "training", "errors",
                "confusion", "roc", "gain", "lift"):
        assert key in report
    assert set(report["errors"]) == {"training", "selection", "testing"}
    assert report["accuracy_percent"] >= 95


def test_reproduce_svg(capsys, synthetic_csv, tmp_path):
    out = tmp_path / "o"
    assert run(capsys, "reproduce", "--data", synthetic_csv, "--out", out, "--svg", *FAST)[0] == 0
    for n in ("roc.svg", "gain.svg", "lift.svg", "order_history.svg"):
        assert (out / n).read_text().lstrip().startswith("<?xml")


def test_missing_data_file(capsys, tmp_path):
    out = tmp_path / "never"
    code, _, err = run(capsys, "reproduce", "--data", tmp_path / "nope.csv", "--out", out)
    assert code == 2
    assert "nope.csv" in err
    assert not out.exists()


def test_single_class_training_is_data_error(capsys, tmp_path):
    rows = synth.make_rows(30, seed=0)
    for r in rows:
        r[-1] = "NO"
    p = tmp_path / "neg.csv"
    with p.open("w", newline="") as fh:
        csv.writer(fh).writerows([synth.HEADER] + rows)
    assert run(capsys, "reproduce", "--data", p, "--out", tmp_path / "o")[0] == 2


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["summary", "--bogus"])
    assert exc.value.code == 64


def test_train_then_evaluate_matches_reproduce(capsys, synthetic_csv, tmp_path):
    model = tmp_path / "m.lmnet.json"
    code, out, _ = run(capsys, "train", "--data", synthetic_csv, "--order", 1, "--seed", 1,
                       "--model", model, "--train-log", tmp_path / "log.csv")
    assert code == 0 and model.exists() and (tmp_path / "log.csv").exists()
    code, out, _ = run(capsys, "evaluate", "--data", synthetic_csv, "--model", model,
                       "--out", tmp_path / "ev")
    assert code == 0
    ev = json.loads(out)
    assert (tmp_path / "ev" / "roc.csv").exists()

    code, _, _ = run(capsys, "reproduce", "--data", synthetic_csv, "--out", tmp_path / "r",
                     "--seed", 1, "--min-order", 1, "--max-order", 1, "--trials", 1, "--jobs", 1)
    rep = json.loads((tmp_path / "r" / "report.json").read_text())
    assert ev["accuracy_percent"] == rep["accuracy_percent"]
    assert ev["errors"] == rep["errors"]


def test_train_with_order_selection_writes_history(capsys, synthetic_csv, tmp_path):
    code, out, _ = run(capsys, "train", "--data", synthetic_csv, "--order-select",
                       "--model", tmp_path / "m.json", "--order-history", tmp_path / "h.csv", *FAST)
    assert code == 0
    assert len((tmp_path / "h.csv").read_text().splitlines()) == 4


def test_score_rows(capsys, synthetic_csv, tmp_path):
    model = tmp_path / "m.json"
    run(capsys, "train", "--data", synthetic_csv, "--order", 1, "--model", model)
    rows = synth.make_rows(3, seed=11, missing_frac=0.0)
    rows[1][12] = "?"
    header = synth.HEADER[:-1]
    p = tmp_path / "rows.csv"
    with p.open("w", newline="") as fh:
        csv.writer(fh).writerows([header] + [r[:-1] for r in rows])
    code, out, _ = run(capsys, "score", "--model", model, "--rows", p)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "row,probability,prediction"
    assert lines[2] == "2,,REFUSED(missing)"
    assert lines[1].split(",")[2] in ("YES", "NO")


def test_no_result_feature(capsys, synthetic_csv, tmp_path):
    out = tmp_path / "nr"
    assert run(capsys, "reproduce", "--data", synthetic_csv, "--out", out,
               "--no-result-feature", *FAST)[0] == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["dataset"]["include_result_feature"] is False
