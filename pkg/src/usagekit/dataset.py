"""Raw review ingestion, filtering and splitting.

Readers accept the public review-dump TSV layout (header row, optionally
gzipped) or JSON Lines with the Review field names. Bodies are HTML-stripped
at parse time. The filter pipeline drops excluded categories, too-short
bodies, bot-like customers (too many reviews on one day) and unverified
non-vine reviews, and truncates long bodies; each drop is attributed to the
first rule that rejects the review.
"""

from __future__ import annotations

import datetime as dt
import gzip
import html.parser
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation

log = logging.getLogger(__name__)

SPLIT_SIZES = {"prompt_selection": 252, "evaluation": 2000, "train": 1800, "validation": 200}
REQUIRED_REVIEWS = sum(SPLIT_SIZES.values())  # 4252

# Category groups excluded from sampling: media, gift cards, and health /
# personal care. The dump's taxonomy strings vary, so matching happens on a
# normalized form and the list is configurable.
DEFAULT_EXCLUDED_CATEGORIES = frozenset(
    {
        "books",
        "digital ebook purchase",
        "digital music purchase",
        "digital software",
        "digital video download",
        "digital video games",
        "gift card",
        "health personal care",
        "mobile apps",
        "music",
        "personal care appliances",
        "software",
        "video",
        "video dvd",
        "video games",
    }
)


def normalize_category(name: str) -> str:
    """Canonical category form: lowercase, alphanumeric words only."""
    return " ".join("".join(ch if ch.isalnum() else " " for ch in name.lower()).split())


@dataclass(frozen=True)
class Review:
    review_id: str
    customer_id: str
    product_title: str
    product_category: str
    review_headline: str
    review_body: str
    review_date: dt.date
    verified_purchase: bool
    vine: bool


@dataclass
class FilterConfig:
    excluded_categories: frozenset[str] = DEFAULT_EXCLUDED_CATEGORIES
    min_words: int = 5
    max_words: int = 400
    bot_threshold: int = 30  # reviews per customer per day

    def __post_init__(self):
        if self.min_words < 1 or self.max_words <= self.min_words:
            raise ContractViolation("need min_words >= 1 and max_words > min_words")
        self.excluded_categories = frozenset(
            normalize_category(c) for c in self.excluded_categories
        )


@dataclass
class FilterStats:
    input_count: int = 0
    output_count: int = 0
    malformed: int = 0
    excluded_category: int = 0
    too_short: int = 0
    truncated: int = 0
    bot_customer: int = 0
    unverified: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class _TextExtractor(html.parser.HTMLParser):
    _SKIP = {"script", "style"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data):
        if not self._skip_depth:
            self.chunks.append(data)


def strip_html(body: str) -> str:
    """Remove markup, decode entities and collapse whitespace. Malformed
    markup is handled permissively; plain text passes through."""
    extractor = _TextExtractor()
    extractor.feed(body)
    extractor.close()
    return " ".join(" ".join(extractor.chunks).split())


_BOOL_TRUE = {"y", "yes", "true", "1"}
_BOOL_FALSE = {"n", "no", "false", "0", ""}


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _BOOL_TRUE:
        return True
    if text in _BOOL_FALSE:
        return False
    raise ValueError(f"not a boolean flag: {value!r}")


def _parse_date(value) -> dt.date:
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value).strip())


def review_from_mapping(record: dict) -> Review:
    review_id = str(record["review_id"]).strip()
    if not review_id:
        raise ValueError("empty review_id")
    return Review(
        review_id=review_id,
        customer_id=str(record["customer_id"]).strip(),
        product_title=str(record.get("product_title", "")),
        product_category=str(record.get("product_category", "")),
        review_headline=str(record.get("review_headline", "")),
        review_body=strip_html(str(record.get("review_body", ""))),
        review_date=_parse_date(record["review_date"]),
        verified_purchase=_parse_bool(record.get("verified_purchase", False)),
        vine=_parse_bool(record.get("vine", False)),
    )


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def read_reviews(path, stats: FilterStats | None = None) -> list[Review]:
    """Read reviews from TSV (.tsv/.tsv.gz, header row) or JSON Lines.

    Malformed records are skipped, logged with their line number, and
    counted in ``stats.malformed`` when a stats object is given. Duplicate
    review_ids are treated as malformed (first occurrence wins).
    """
    path = Path(path)
    is_tsv = ".tsv" in path.suffixes or path.suffix == ".tsv"
    reviews: list[Review] = []
    seen_ids: set[str] = set()

    def _note_bad(lineno: int, reason):
        log.warning("%s:%d: skipping malformed record (%s)", path, lineno, reason)
        if stats is not None:
            stats.malformed += 1

    with _open_text(path) as fh:
        header: list[str] | None = None
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                if is_tsv:
                    if header is None:
                        header = line.split("\t")
                        continue
                    cells = line.split("\t")
                    if len(cells) != len(header):
                        raise ValueError(f"expected {len(header)} columns, got {len(cells)}")
                    review = review_from_mapping(dict(zip(header, cells)))
                else:
                    review = review_from_mapping(json.loads(line))
            except (ValueError, KeyError) as exc:
                _note_bad(lineno, exc)
                continue
            if review.review_id in seen_ids:
                _note_bad(lineno, f"duplicate review_id {review.review_id!r}")
                continue
            seen_ids.add(review.review_id)
            reviews.append(review)
    return reviews


def write_reviews_jsonl(reviews: Iterable[Review], path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in reviews:
            record = {
                "review_id": r.review_id,
                "customer_id": r.customer_id,
                "product_title": r.product_title,
                "product_category": r.product_category,
                "review_headline": r.review_headline,
                "review_body": r.review_body,
                "review_date": r.review_date.isoformat(),
                "verified_purchase": r.verified_purchase,
                "vine": r.vine,
            }
            fh.write(json.dumps(record) + "\n")


def preprocess(
    reviews: Iterable[Review], cfg: FilterConfig | None = None
) -> tuple[list[Review], FilterStats]:
    """Apply the filter rules; returns kept reviews plus per-rule counts.

    Rule order: category, minimum length, truncation (keeps the review),
    bot customers, unverified non-vine. The bot rule needs a counting
    pre-pass, so the input is materialized. Idempotent: the output passes
    through unchanged.
    """
    cfg = cfg or FilterConfig()
    reviews = list(reviews)
    stats = FilterStats(input_count=len(reviews))

    per_day = Counter((r.customer_id, r.review_date) for r in reviews)

    kept: list[Review] = []
    for review in reviews:
        if normalize_category(review.product_category) in cfg.excluded_categories:
            stats.excluded_category += 1
            continue
        words = review.review_body.split()
        if len(words) < cfg.min_words:
            stats.too_short += 1
            continue
        if len(words) > cfg.max_words:
            review = replace(review, review_body=" ".join(words[: cfg.max_words]))
            stats.truncated += 1
        if per_day[(review.customer_id, review.review_date)] > cfg.bot_threshold:
            stats.bot_customer += 1
            continue
        if not review.verified_purchase and not review.vine:
            stats.unverified += 1
            continue
        kept.append(review)
    stats.output_count = len(kept)
    return kept, stats


def split_reviews(reviews: Sequence[Review], seed: int) -> dict[str, list[Review]]:
    """Disjoint uniform random splits: 252 prompt-selection, 2,000
    evaluation, and a 2,000-review training pool whose fixed 10% tail is the
    validation set. Deterministic for a given seed."""
    if len(reviews) < REQUIRED_REVIEWS:
        raise ContractViolation(
            f"splitting needs at least {REQUIRED_REVIEWS} reviews, got {len(reviews)}"
        )
    order = np.random.default_rng(seed).permutation(len(reviews))
    shuffled = [reviews[i] for i in order]
    n_prompt = SPLIT_SIZES["prompt_selection"]
    n_eval = SPLIT_SIZES["evaluation"]
    n_train = SPLIT_SIZES["train"]
    n_val = SPLIT_SIZES["validation"]
    pool = shuffled[n_prompt + n_eval : n_prompt + n_eval + n_train + n_val]
    return {
        "prompt_selection": shuffled[:n_prompt],
        "evaluation": shuffled[n_prompt : n_prompt + n_eval],
        "train": pool[:n_train],
        "validation": pool[n_train:],
    }
