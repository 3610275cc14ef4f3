import json
import logging

import numpy as np
import pytest

from app.errors import FingerprintMismatchError, ModelFormatError
from app.model import TreeEnsemble, check_fingerprint, deserialize, load_model, save_model, serialize


def test_round_trip_is_exact(random_ensemble, rng):
    model = random_ensemble(rng, feature_count=6)
    restored = deserialize(serialize(model))
    assert restored.structurally_equal(model)
    for x in rng.normal(size=(20, 6)):
        assert restored.predict_margin(x) == model.predict_margin(x)


def test_save_and_load(tmp_path, stump):
    path = tmp_path / "model.json"
    model = stump(feature_count=3, base_margin=0.25)
    save_model(model, path)
    assert load_model(path).structurally_equal(model)
    document = json.loads(path.read_text())
    assert document["version"] == 1
    assert document["trees"][0]["nodes"][1] == {
        "feature": -1, "threshold": 0.0, "left": -1, "right": -1, "cover": 1.0, "leaf_value": 0.0}


def test_unsupported_version(stump):
    document = json.loads(serialize(stump()))
    document["version"] = 2
    with pytest.raises(ModelFormatError, match="version"):
        deserialize(json.dumps(document))


@pytest.mark.parametrize("text", ["not json", "[1, 2]", '{"version": 1, "trees": "x"}'])
def test_malformed_files(text):
    with pytest.raises(ModelFormatError):
        deserialize(text)


def test_bad_tree_in_file(stump):
    document = json.loads(serialize(stump()))
    document["trees"][0]["nodes"][0]["left"] = 7
    with pytest.raises(ModelFormatError):
        deserialize(json.dumps(document))


def test_split_feature_beyond_feature_count(stump):
    document = json.loads(serialize(stump(feature=2, feature_count=3)))
    document["feature_count"] = 2
    with pytest.raises(ModelFormatError):
        deserialize(json.dumps(document))


def _fingerprinted(model: TreeEnsemble, fingerprint: str) -> TreeEnsemble:
    return TreeEnsemble(model.trees, model.base_margin, model.feature_count, fingerprint)


def test_fingerprint_mismatch_warns(stump, caplog):
    text = serialize(_fingerprinted(stump(), "a" * 64))
    with caplog.at_level(logging.WARNING):
        model = deserialize(text, expected_fingerprint="b" * 64)
    assert model.schema_fingerprint == "a" * 64
    assert "trained on schema" in caplog.text


def test_fingerprint_mismatch_strict(stump):
    text = serialize(_fingerprinted(stump(), "a" * 64))
    with pytest.raises(FingerprintMismatchError):
        deserialize(text, expected_fingerprint="b" * 64, strict=True)
    assert deserialize(text, expected_fingerprint="a" * 64, strict=True).schema_fingerprint == "a" * 64


def test_missing_fingerprint_is_accepted(stump):
    assert check_fingerprint(stump(), "b" * 64, strict=True)
    assert not check_fingerprint(_fingerprinted(stump(), "a"), "b", strict=False)


def test_floats_survive_text(stump):
    model = stump(low=0.1 + 0.2, high=np.nextafter(1.0, 2.0))
    restored = deserialize(serialize(model))
    assert restored.trees[0].values.tolist() == model.trees[0].values.tolist()
