import json
import os
import pathlib

import pytest

import transagent

DATA = pathlib.Path(os.environ.get("TRANSAGENT_TEST_DATA", pathlib.Path(__file__).parents[1] / "data"))


def test_normalize_and_tokenize():
    assert transagent.normalize_text("Ça alors!") == "ca alors !"
    assert transagent.tokenize("  Hello,   World. ") == ["hello", "world", "."]
    once = transagent.normalize_text("Où est-ce?")
    assert transagent.normalize_text(once) == once


def test_bleu_papineni_case():
    r = transagent.bleu([["the"] * 7], [["the", "cat", "is", "on", "the", "mat"]], 1)
    assert r["precision"][0] == pytest.approx(2 / 7)
    same = transagent.bleu([["a", "b", "c", "d"]], [["a", "b", "c", "d"]])
    assert same["score"] == [1.0, 1.0, 1.0, 1.0]


def test_train_translate_save_load(tmp_path):
    pairs = transagent.load_pairs(DATA / "toy_en_fr.tsv")
    assert len(pairs) == 10
    h = transagent.Hyperparams()
    h.hidden_size = 64
    h.embedding_size = 64
    h.iterations = 3000
    model = transagent.Model(pairs, h)
    checkpoints = model.train(pairs)
    assert checkpoints[-1][0] == 3000
    assert checkpoints[-1][1] < checkpoints[0][1]

    text, attention = model.translate("Go.")
    assert text == "va !"
    for row in attention["weights"]:
        assert sum(row) == pytest.approx(1.0, abs=1e-9)
    assert attention["source_tokens"] == ["go", ".", "<EOS>"]

    path = tmp_path / "model.json"
    model.save(path)
    assert transagent.Model.load(path) == model
    with pytest.raises(transagent.ModelError):
        transagent.Model.load(tmp_path / "missing.json")
    with pytest.raises(transagent.OverLengthError):
        model.translate("a b c d e f g h i j k")


def test_language_and_intent():
    assert transagent.analyze_language("こんにちは") == "JP"
    assert transagent.analyze_language("où est la gare") == "FR"
    assert transagent.analyze_language("hello") == "EN"
    assert transagent.determine_intent("to:fr hello") == ("FR", "hello")
    assert transagent.determine_intent("bonjour", "en") == ("EN", "bonjour")
    with pytest.raises(transagent.IntentError):
        transagent.determine_intent("bonjour")


def test_route_with_mock():
    script = json.dumps({"entries": [{"text": "hello", "target": "FR", "output": "bonjour"}]})
    r = transagent.route("to:fr hello", script)
    assert r["output"] == "bonjour"
    assert r["nodes"] == ["analyze_language", "determine_intent", "translateToFrench"]
    assert r["intent"] == "FR"
    assert transagent.route("to:fr hello", script) == r
    assert transagent.route("good night", default_target="JP")["output"] == "[JP] good night"
    with pytest.raises(transagent.IntentError):
        transagent.route("bonjour", script)
