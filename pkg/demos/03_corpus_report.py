#!/usr/bin/env python3
"""Score a small corpus end to end: build predictions/references files, load
them back, and print the full report (HAMS4, classification F1, mean MS4 over
true positives).
"""

import json
import tempfile
from pathlib import Path

from usagekit import exact_match_similarity, score_corpus
from usagekit.corpus_io import build_corpus, format_report_table, read_predictions, read_references

workdir = Path(tempfile.mkdtemp(prefix="usagekit-demo-"))

# Four reviews covering all four outcomes: correct empty, false positive,
# true positive, false negative.
references = [
    {"review_id": "r1", "reference_sets": [[]]},
    {"review_id": "r2", "reference_sets": [[]]},
    {"review_id": "r3", "reference_sets": [["smoke vegetables"]]},
    {"review_id": "r4", "reference_sets": [["charge phones"]]},
]
predictions = [
    {"review_id": "r1", "usage_options": []},
    {"review_id": "r2", "usage_options": ["decorating"]},
    {"review_id": "r3", "usage_options": ["smoke vegetables"]},
    {"review_id": "r4", "usage_options": []},
]

refs_path = workdir / "references.jsonl"
preds_path = workdir / "predictions.jsonl"
refs_path.write_text("".join(json.dumps(r) + "\n" for r in references))
preds_path.write_text("".join(json.dumps(r) + "\n" for r in predictions))

corpus = build_corpus(read_predictions(preds_path), read_references(refs_path))
report = score_corpus(corpus, exact_match_similarity())

print(format_report_table(report))
print()
print("per example:")
for review_id, score, cls in report.per_example:
    print(f"  {review_id}: MS4 {score:.2f} ({cls} class)")

print()
print("same thing via the CLI:")
print(f"  usagekit evaluate --predictions {preds_path} --references {refs_path} "
      "--backend exact-match")
