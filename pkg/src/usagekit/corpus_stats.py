"""Corpus-level aggregation and significance testing.

HAMS4 splits a corpus into reviews without usage options and reviews with
them, scores each class by its mean MS4 and combines the two means
harmonically, weighting both kinds of review equally. Reviews whose
reference sets disagree about emptiness are assigned to a class by the
prediction. On top sit the emptiness-classification F1, the mean MS4 over
true positives, a paired permutation test for comparing two systems, and
mean pairwise inter-annotator agreement.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractViolation
from .set_metrics import SimFn, UsageOptionSet, ms4, s4

EMPTY_CLASS = "empty"
USAGE_CLASS = "usage"


@dataclass(frozen=True)
class LabeledExample:
    """One review: a prediction set and one or more reference sets."""

    review_id: str
    prediction: UsageOptionSet
    references: tuple[UsageOptionSet, ...]

    def __post_init__(self):
        if not self.references:
            raise ContractViolation(f"review {self.review_id!r} has no reference sets")


@dataclass
class SignificanceConfig:
    resamples: int = 10_000
    alpha: float = 0.05
    corrections: int = 7
    seed: int = 0

    def __post_init__(self):
        if self.resamples < 1:
            raise ContractViolation("resamples must be at least 1")
        if not 0.0 < self.alpha < 1.0 or self.corrections < 1:
            raise ContractViolation("alpha must lie in (0, 1) and corrections be >= 1")

    @property
    def alpha_corrected(self) -> float:
        return self.alpha / self.corrections


class ClassificationScores(NamedTuple):
    f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass
class CorpusReport:
    hams4: float
    empty_class_mean: float
    usage_class_mean: float
    empty_class_count: int
    usage_class_count: int
    classification_f1: float
    precision: float
    recall: float
    mean_ms4_tp: float
    tp: int
    fp: int
    fn: int
    tn: int
    per_example: list[tuple[str, float, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        def _json_float(x: float):
            return None if math.isnan(x) else x

        return {
            "hams4": self.hams4,
            "empty_class_mean": _json_float(self.empty_class_mean),
            "usage_class_mean": _json_float(self.usage_class_mean),
            "empty_class_count": self.empty_class_count,
            "usage_class_count": self.usage_class_count,
            "classification_f1": self.classification_f1,
            "precision": self.precision,
            "recall": self.recall,
            "mean_ms4_tp": _json_float(self.mean_ms4_tp),
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "per_example": [
                {"review_id": rid, "ms4": score, "class": cls}
                for rid, score, cls in self.per_example
            ],
        }


def classify_example(ex: LabeledExample) -> str:
    """Class of a review: decided by the references when they agree about
    emptiness, by the prediction when they do not."""
    emptiness = {len(ref) == 0 for ref in ex.references}
    if emptiness == {True}:
        return EMPTY_CLASS
    if emptiness == {False}:
        return USAGE_CLASS
    return EMPTY_CLASS if not ex.prediction else USAGE_CLASS


def harmonic_aggregate(scores: Sequence[float], classes: Sequence[str]) -> float:
    """Harmonic mean of the two class means; a missing class leaves the
    other class mean, a zero class mean collapses the result to 0."""
    if not scores:
        raise ContractViolation("cannot aggregate an empty corpus")
    empty = [s for s, c in zip(scores, classes) if c == EMPTY_CLASS]
    usage = [s for s, c in zip(scores, classes) if c == USAGE_CLASS]
    if not usage:
        return float(np.mean(empty))
    if not empty:
        return float(np.mean(usage))
    e, u = float(np.mean(empty)), float(np.mean(usage))
    if e + u == 0.0:
        return 0.0
    return 2.0 * e * u / (e + u)


def _check_unique_ids(corpus: Sequence[LabeledExample]):
    ids = [ex.review_id for ex in corpus]
    if len(set(ids)) != len(ids):
        dupes = sorted({rid for rid in ids if ids.count(rid) > 1})
        raise ContractViolation(f"duplicate review_ids in corpus: {dupes}")


def ms4_scores(corpus: Sequence[LabeledExample], sim: SimFn, *, jobs: int = 1):
    """Per-example (review_id, ms4, class) triples."""
    if not corpus:
        raise ContractViolation("corpus must be non-empty")
    _check_unique_ids(corpus)

    def one(ex: LabeledExample):
        return ex.review_id, ms4(ex.prediction, ex.references, sim), classify_example(ex)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, corpus))
    return [one(ex) for ex in corpus]


def classification_scores(corpus: Sequence[LabeledExample]) -> ClassificationScores:
    """Emptiness classification quality.

    A prediction is positive iff non-empty. The ground truth of a review is
    the set of emptiness classes over its reference sets, so on mixed
    references either prediction counts as correct, mirroring the
    prediction-based class assignment of HAMS4.
    """
    if not corpus:
        raise ContractViolation("corpus must be non-empty")
    tp = fp = fn = tn = 0
    for ex in corpus:
        positive = bool(ex.prediction)
        truth = {bool(ref) for ref in ex.references}
        if positive in truth:
            if positive:
                tp += 1
            else:
                tn += 1
        elif positive:
            fp += 1
        else:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassificationScores(f1, precision, recall, tp, fp, fn, tn)


def mean_ms4_tp(corpus: Sequence[LabeledExample], sim: SimFn) -> float:
    """Mean MS4 over true-positive reviews (non-empty prediction, at least
    one non-empty reference set), scored against the non-empty reference
    sets only. NaN when no review qualifies."""
    values = []
    for ex in corpus:
        nonempty_refs = tuple(ref for ref in ex.references if ref)
        if ex.prediction and nonempty_refs:
            values.append(ms4(ex.prediction, nonempty_refs, sim))
    return float(np.mean(values)) if values else float("nan")


def score_corpus(corpus: Sequence[LabeledExample], sim: SimFn, *, jobs: int = 1) -> CorpusReport:
    """Full corpus report: HAMS4, class means and counts, classification
    scores, mean MS4 (TP), per-example breakdown."""
    triples = ms4_scores(corpus, sim, jobs=jobs)
    scores = [t[1] for t in triples]
    classes = [t[2] for t in triples]
    empty_scores = [s for s, c in zip(scores, classes) if c == EMPTY_CLASS]
    usage_scores = [s for s, c in zip(scores, classes) if c == USAGE_CLASS]
    cls = classification_scores(corpus)
    return CorpusReport(
        hams4=harmonic_aggregate(scores, classes),
        empty_class_mean=float(np.mean(empty_scores)) if empty_scores else float("nan"),
        usage_class_mean=float(np.mean(usage_scores)) if usage_scores else float("nan"),
        empty_class_count=len(empty_scores),
        usage_class_count=len(usage_scores),
        classification_f1=cls.f1,
        precision=cls.precision,
        recall=cls.recall,
        mean_ms4_tp=mean_ms4_tp(corpus, sim),
        tp=cls.tp,
        fp=cls.fp,
        fn=cls.fn,
        tn=cls.tn,
        per_example=triples,
    )


def hams4(corpus: Sequence[LabeledExample], sim: SimFn, *, jobs: int = 1) -> float:
    """HAMS4 of a corpus (scalar convenience over score_corpus)."""
    triples = ms4_scores(corpus, sim, jobs=jobs)
    return harmonic_aggregate([t[1] for t in triples], [t[2] for t in triples])


class PermutationResult(NamedTuple):
    p_value: float
    observed_diff: float
    significant: bool


def _hams4_rows(scores: np.ndarray, usage_mask: np.ndarray) -> np.ndarray:
    """Row-wise HAMS4 for resampled corpora (scores and class masks are
    (resamples, n) arrays)."""
    usage_count = usage_mask.sum(axis=1)
    empty_count = usage_mask.shape[1] - usage_count
    with np.errstate(invalid="ignore", divide="ignore"):
        usage_mean = (scores * usage_mask).sum(axis=1) / usage_count
        empty_mean = (scores * ~usage_mask).sum(axis=1) / empty_count
        denom = usage_mean + empty_mean
        h = np.where(denom > 0.0, 2.0 * usage_mean * empty_mean / denom, 0.0)
    h = np.where(usage_count == 0, empty_mean, h)
    h = np.where(empty_count == 0, usage_mean, h)
    return h


def permutation_test(
    corpus_a: Sequence[LabeledExample],
    corpus_b: Sequence[LabeledExample],
    cfg: SignificanceConfig,
    sim: SimFn,
    *,
    jobs: int = 1,
) -> PermutationResult:
    """Paired permutation test on the HAMS4 difference of two systems.

    Both corpora must cover the same reviews with identical references; only
    the predictions differ. Each resample independently swaps the two
    systems' predictions per review with probability 1/2. Swapping moves the
    per-review (MS4, class) pair wholesale, so per-example scores are
    computed once and only re-aggregated per resample. The two-sided p-value
    uses the add-one estimator (1 + hits) / (resamples + 1), and per-resample
    seeds are derived from (seed, resample index) so the result does not
    depend on any batching of the loop.
    """
    by_id_b = {ex.review_id: ex for ex in corpus_b}
    if len(by_id_b) != len(corpus_b):
        raise ContractViolation("duplicate review_ids in corpus B")
    if {ex.review_id for ex in corpus_a} != set(by_id_b):
        only_a = sorted({ex.review_id for ex in corpus_a} - set(by_id_b))[:5]
        only_b = sorted(set(by_id_b) - {ex.review_id for ex in corpus_a})[:5]
        raise ContractViolation(
            f"corpora are not paired; ids only in A: {only_a}, only in B: {only_b}"
        )
    pairs_b = [by_id_b[ex.review_id] for ex in corpus_a]
    for ea, eb in zip(corpus_a, pairs_b):
        if ea.references != eb.references:
            raise ContractViolation(
                f"references differ between systems for review {ea.review_id!r}"
            )

    triples_a = ms4_scores(corpus_a, sim, jobs=jobs)
    triples_b = ms4_scores(pairs_b, sim, jobs=jobs)
    score_a = np.array([t[1] for t in triples_a])
    score_b = np.array([t[1] for t in triples_b])
    usage_a = np.array([t[2] == USAGE_CLASS for t in triples_a])
    usage_b = np.array([t[2] == USAGE_CLASS for t in triples_b])

    observed = harmonic_aggregate(
        list(score_a), [t[2] for t in triples_a]
    ) - harmonic_aggregate(list(score_b), [t[2] for t in triples_b])

    n = len(corpus_a)
    masks = np.empty((cfg.resamples, n), dtype=bool)
    for r in range(cfg.resamples):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, r]))
        masks[r] = rng.random(n) < 0.5

    sa = np.where(masks, score_b, score_a)
    sb = np.where(masks, score_a, score_b)
    ua = np.where(masks, usage_b, usage_a)
    ub = np.where(masks, usage_a, usage_b)
    stats = _hams4_rows(sa, ua) - _hams4_rows(sb, ub)

    hits = int(np.count_nonzero(np.abs(stats) >= abs(observed)))
    p_value = (1.0 + hits) / (cfg.resamples + 1.0)
    return PermutationResult(p_value, observed, p_value < cfg.alpha_corrected)


class AgreementResult(NamedTuple):
    mean: float
    std: float
    pairwise: np.ndarray
    annotators: tuple[str, ...]


def inter_annotator_agreement(
    label_sets: Sequence[tuple[str, dict[str, UsageOptionSet]]], sim: SimFn
) -> AgreementResult:
    """Mean pairwise S4 agreement between annotators.

    The mean and the population standard deviation pool every (pair, review)
    score; the pairwise matrix holds per-pair means with 1.0 on the diagonal.
    All annotators must cover the same review ids.
    """
    if len(label_sets) < 2:
        raise ContractViolation("agreement needs at least two annotators")
    base_ids = set(label_sets[0][1])
    for name, labels in label_sets[1:]:
        if set(labels) != base_ids:
            missing = sorted(base_ids ^ set(labels))
            raise ContractViolation(
                f"annotator {name!r} coverage differs; mismatched review_ids: {missing}"
            )
    ordered_ids = sorted(base_ids)
    k = len(label_sets)
    pairwise = np.eye(k)
    pooled: list[float] = []
    for i in range(k):
        for j in range(i + 1, k):
            scores = [
                s4(label_sets[i][1][rid], label_sets[j][1][rid], sim) for rid in ordered_ids
            ]
            pairwise[i, j] = pairwise[j, i] = float(np.mean(scores))
            pooled.extend(scores)
    mean = float(np.mean(pooled))
    std = float(np.std(pooled))  # population std, matching per-item dispersion
    return AgreementResult(mean, std, pairwise, tuple(name for name, _ in label_sets))
