import json

import pytest

from usagekit.corpus_io import (
    SCHEMA_VERSION,
    build_corpus,
    format_report_table,
    read_predictions,
    read_references,
    report_document,
    write_predictions,
    write_references,
)
from usagekit.corpus_stats import score_corpus
from usagekit.errors import ContractViolation
from usagekit.similarity import exact_match_similarity


def test_predictions_round_trip(tmp_path):
    path = tmp_path / "preds.jsonl"
    predictions = {"r1": ("a", "b"), "r2": ()}
    write_predictions(predictions, path)
    assert read_predictions(path) == predictions


def test_references_round_trip(tmp_path):
    path = tmp_path / "refs.jsonl"
    references = {"r1": (("a",), ()), "r2": ((),)}
    write_references(references, path)
    assert read_references(path) == references


def test_duplicate_ids_rejected(tmp_path):
    path = tmp_path / "preds.jsonl"
    line = json.dumps({"review_id": "r1", "usage_options": ["a"]})
    path.write_text(line + "\n" + line + "\n")
    with pytest.raises(ContractViolation, match="duplicate"):
        read_predictions(path)


def test_string_usage_options_rejected_with_location(tmp_path):
    path = tmp_path / "preds.jsonl"
    path.write_text(json.dumps({"review_id": "r1", "usage_options": "oops"}) + "\n")
    with pytest.raises(ContractViolation, match=":1:"):
        read_predictions(path)


def test_reference_record_needs_sets(tmp_path):
    path = tmp_path / "refs.jsonl"
    path.write_text(json.dumps({"review_id": "r1", "reference_sets": []}) + "\n")
    with pytest.raises(ContractViolation, match="no reference sets"):
        read_references(path)


def test_build_corpus_pairs_by_id():
    predictions = {"r1": ("a",), "r2": ()}
    references = {"r1": (("a",),), "r2": ((),)}
    corpus = build_corpus(predictions, references)
    assert [ex.review_id for ex in corpus] == ["r1", "r2"]
    with pytest.raises(ContractViolation, match="unknown"):
        build_corpus({**predictions, "ghost": ()}, references)
    with pytest.raises(ContractViolation, match="missing"):
        build_corpus({"r1": ("a",)}, references)


def test_report_document_carries_schema_and_config():
    corpus = build_corpus({"r1": ("a",)}, {"r1": (("a",),)})
    report = score_corpus(corpus, exact_match_similarity())
    doc = report_document(report, {"backend": {"kind": "exact-match"}}, {"corpus_size": 1})
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["config"]["backend"]["kind"] == "exact-match"
    assert doc["corpus_size"] == 1
    assert doc["scores"]["hams4"] == 1.0
    # NaN-valued fields serialize as null
    assert doc["scores"]["empty_class_mean"] is None
    json.dumps(doc)  # the whole document is JSON-serializable


def test_table_renders_nan_as_na():
    corpus = build_corpus({"r1": ()}, {"r1": (("a",),)})
    report = score_corpus(corpus, exact_match_similarity())
    table = format_report_table(report)
    assert "Mean MS4 (TP)" in table
    assert "n/a" in table
