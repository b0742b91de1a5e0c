"""Readers and writers for the corpus file formats.

Predictions:  JSON Lines, {"review_id": str, "usage_options": [str]}
References:   JSON Lines, {"review_id": str, "reference_sets": [[str]]}
              (an empty inner list means "no usage options")
Reports:      a JSON document carrying a schema version, the effective
              configuration and the corpus scores.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus_stats import CorpusReport, LabeledExample
from .errors import ContractViolation
from .set_metrics import UsageOptionSet, option_set

SCHEMA_VERSION = 1


def _read_jsonl(path):
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ContractViolation(f"{path}:{lineno}: malformed JSON line ({exc.msg})") from exc


def read_predictions(path) -> dict[str, UsageOptionSet]:
    """review_id -> usage-option set."""
    out: dict[str, UsageOptionSet] = {}
    for lineno, record in _read_jsonl(path):
        try:
            rid = str(record["review_id"])
            options = option_set(record["usage_options"])
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise ContractViolation(f"{path}:{lineno}: bad prediction record ({exc})") from exc
        if rid in out:
            raise ContractViolation(f"{path}:{lineno}: duplicate review_id {rid!r}")
        out[rid] = options
    return out


def read_references(path) -> dict[str, tuple[UsageOptionSet, ...]]:
    """review_id -> tuple of reference sets (at least one per review)."""
    out: dict[str, tuple[UsageOptionSet, ...]] = {}
    for lineno, record in _read_jsonl(path):
        try:
            rid = str(record["review_id"])
            sets = tuple(option_set(ref) for ref in record["reference_sets"])
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise ContractViolation(f"{path}:{lineno}: bad reference record ({exc})") from exc
        if not sets:
            raise ContractViolation(f"{path}:{lineno}: review {rid!r} has no reference sets")
        if rid in out:
            raise ContractViolation(f"{path}:{lineno}: duplicate review_id {rid!r}")
        out[rid] = sets
    return out


def write_predictions(predictions: dict[str, UsageOptionSet], path):
    with open(path, "w", encoding="utf-8") as fh:
        for rid, options in predictions.items():
            fh.write(json.dumps({"review_id": rid, "usage_options": list(options)}) + "\n")


def write_references(references: dict[str, tuple[UsageOptionSet, ...]], path):
    with open(path, "w", encoding="utf-8") as fh:
        for rid, sets in references.items():
            fh.write(
                json.dumps({"review_id": rid, "reference_sets": [list(s) for s in sets]}) + "\n"
            )


def build_corpus(
    predictions: dict[str, UsageOptionSet],
    references: dict[str, tuple[UsageOptionSet, ...]],
) -> list[LabeledExample]:
    """Pair predictions with references by review_id; both directions must
    cover exactly the same ids."""
    unknown = sorted(set(predictions) - set(references))
    if unknown:
        raise ContractViolation(f"predictions for unknown review_ids: {unknown}")
    missing = sorted(set(references) - set(predictions))
    if missing:
        raise ContractViolation(f"missing predictions for review_ids: {missing}")
    return [
        LabeledExample(rid, predictions[rid], references[rid]) for rid in sorted(references)
    ]


def report_document(report: CorpusReport, config: dict, extras: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "scores": report.to_dict(),
    }
    if extras:
        doc.update(extras)
    return doc


def format_report_table(report: CorpusReport, wms_score: float | None = None) -> str:
    def fmt(x: float) -> str:
        return "n/a" if x != x else f"{x:.4f}"  # NaN-safe

    rows = [
        ("HAMS4", fmt(report.hams4)),
        ("Classification F1", fmt(report.classification_f1)),
        ("Precision", fmt(report.precision)),
        ("Recall", fmt(report.recall)),
        ("Mean MS4 (TP)", fmt(report.mean_ms4_tp)),
        ("Empty-class mean", f"{fmt(report.empty_class_mean)} (n={report.empty_class_count})"),
        ("Usage-class mean", f"{fmt(report.usage_class_mean)} (n={report.usage_class_count})"),
        ("Confusion tp/fp/fn/tn", f"{report.tp}/{report.fp}/{report.fn}/{report.tn}"),
    ]
    if wms_score is not None:
        rows.insert(1, ("WMS", fmt(wms_score)))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)
