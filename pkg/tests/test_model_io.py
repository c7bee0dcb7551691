import json

import numpy as np
import pytest

from lmnet import dataset, model_io
from lmnet.dataset import DEFAULT_SCHEMA, DataError, Subset
from lmnet.loss import class_weights
from lmnet.network import Architecture, init, predict
from lmnet.trainer import train


@pytest.fixture(scope="module")
def fitted(synthetic_csv):
    raw = dataset.parse_csv(synthetic_csv)
    data = dataset.encode(raw, DEFAULT_SCHEMA, dataset.split(len(raw.rows), 1))
    cw = class_weights(data.rows(Subset.TRAINING)[1])
    net, log = train(init(Architecture(data.X.shape[1], 1), 1), data, cw)
    bundle = model_io.ModelBundle(data.encoder, net, cw,
                                  {"final_loss": log.final_loss, "optimal_order": 1,
                                   "stopping_reason": log.stopping_reason.value})
    return raw, data, bundle


def test_round_trip_bit_exact(fitted, tmp_path):
    _, _, bundle = fitted
    path = tmp_path / ("m" + model_io.SUFFIX)
    model_io.save(bundle, path)
    back = model_io.load(path)
    assert np.array_equal(back.w, bundle.w)
    assert back.w.tobytes() == bundle.w.tobytes()
    assert back.arch == bundle.arch
    assert back.class_weights == bundle.class_weights
    assert back.encoder.scaling == bundle.encoder.scaling
    assert back.encoder.categories == bundle.encoder.categories
    assert back.schema == bundle.schema
    assert back.training_summary == bundle.training_summary
    doc = json.loads(path.read_text())
    assert doc["format_version"] == 1
    assert all(isinstance(v, str) for v in doc["w"])


def test_unknown_version_rejected(fitted, tmp_path):
    _, _, bundle = fitted
    path = tmp_path / "m.json"
    d = bundle.to_dict()
    d["format_version"] = 2
    path.write_text(json.dumps(d))
    with pytest.raises(DataError, match="format_version"):
        model_io.load(path)


def test_weight_length_mismatch_rejected(fitted, tmp_path):
    _, _, bundle = fitted
    d = bundle.to_dict()
    d["w"] = d["w"][:-1]
    path = tmp_path / "m.json"
    path.write_text(json.dumps(d))
    with pytest.raises(DataError, match="weights"):
        model_io.load(path)


def test_scoring_parity_every_complete_row(fitted, tmp_path):
    raw, data, bundle = fitted
    path = tmp_path / "m.json"
    model_io.save(bundle, path)
    loaded = model_io.load(path)
    complete = [i for i in range(len(raw.rows)) if not raw.has_missing(i)]
    pipeline = predict(bundle.net, data.X[complete])
    scored = np.array([model_io.score_record(loaded, raw.rows[i])[0] for i in complete])
    assert np.max(np.abs(scored - pipeline)) == 0.0


def test_known_positive_scores_yes(fitted):
    raw, data, bundle = fitted
    i = next(i for i in range(len(raw.rows))
             if data.subset[i] == Subset.TRAINING and data.y[i] == 1)
    p, label = model_io.score_record(bundle, raw.rows[i])
    assert p > 0.5 and label == "YES"
    assert model_io.score_record(bundle, raw.rows[i]) == (p, label)


def test_missing_value_refused(fitted):
    raw, _, bundle = fitted
    row = list(raw.rows[0])
    row[DEFAULT_SCHEMA.names.index("ethnicity")] = "?"
    with pytest.raises(model_io.MissingValueError):
        model_io.score_record(bundle, row)


def _complete(raw):
    return next(list(r) for i, r in enumerate(raw.rows) if not raw.has_missing(i))


def test_unseen_category_named(fitted):
    raw, _, bundle = fitted
    row = _complete(raw)
    row[DEFAULT_SCHEMA.names.index("country_of_res")] = "Atlantis"
    with pytest.raises(DataError, match="country_of_res.*Atlantis"):
        model_io.score_record(bundle, row)


def test_row_without_target_and_threshold(fitted):
    raw, _, bundle = fitted
    full = _complete(raw)
    row = [c for j, c in enumerate(full) if DEFAULT_SCHEMA.names[j] != "Class/ASD"]
    p, _ = model_io.score_record(bundle, row)
    assert p == model_io.score_record(bundle, full)[0]
    assert model_io.score_record(bundle, row, threshold=p)[1] == "YES"
    with pytest.raises(DataError):
        model_io.score_record(bundle, row[:-2])
