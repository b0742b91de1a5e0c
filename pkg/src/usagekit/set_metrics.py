"""S4 and MS4: similarity scores between sets of short strings.

S4 compares a prediction set against one reference set. Each string is
greedily matched to its best counterpart (an independent per-string max, not
a one-to-one assignment), strings are weighted by their average distance to
the rest of their own set so near-duplicates count less, and the two
directional scores are combined by a harmonic mean:

    P(pred, ref) = sum_i w(x_i, pred) * max_j sim(x_i, y_j) / sum_i w(x_i, pred)
    S4(pred, ref) = 2 * P(pred, ref) * P(ref, pred) / (P(pred, ref) + P(ref, pred))
    w(x, s) = (1/|s|) * sum_{u in s} (1 - sim(x, u))        (self term included)

Empty sets follow fixed conventions: both empty scores 1, exactly one empty
scores 0. MS4 takes the max of S4 over several reference sets.

The self term makes a singleton's weight total zero; whenever the weight
total falls below 1e-12 the weights are replaced by uniform ones, which for
singletons reduces to the lone max term.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractViolation

# Strings in a set are unique, trimmed and non-empty; tuples keep a stable
# iteration order for deterministic numerics.
UsageOptionSet = tuple[str, ...]
SimFn = Callable[[str, str], float]

WEIGHT_EPS = 1e-12


def option_set(options: Iterable[str]) -> UsageOptionSet:
    """Normalize raw strings into a usage-option set.

    Trims whitespace, drops empty strings and exact duplicates (first
    occurrence wins). Near-duplicates are kept; the weight function
    discounts them. A bare string is rejected rather than iterated
    character by character.
    """
    if isinstance(options, str):
        raise ContractViolation(
            f"expected a collection of option strings, got the string {options!r}"
        )
    seen: dict[str, None] = {}
    for raw in options:
        if not isinstance(raw, str):
            raise ContractViolation(f"usage options must be strings, got {type(raw).__name__}")
        text = raw.strip()
        if text and text not in seen:
            seen[text] = None
    return tuple(seen)


def sim_matrix(xs: Sequence[str], ys: Sequence[str], sim) -> np.ndarray:
    """Pairwise sim values; uses the similarity object's batched matrix
    path when it has one, plain calls otherwise."""
    if hasattr(sim, "matrix"):
        return sim.matrix(xs, ys)
    out = np.zeros((len(xs), len(ys)))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            out[i, j] = sim(x, y)
    return out


def set_weights(s: Sequence[str], sim: SimFn, *, include_self: bool = True) -> np.ndarray:
    """Raw (unnormalized) weights of every member of ``s``.

    ``include_self`` keeps the x==u term of the sum; dropping it only
    matters if sim is not reflexive, since sim(x, x) = 1 zeroes the term.
    """
    if not s:
        raise ContractViolation("weights of an empty set are undefined")
    inner = sim_matrix(s, s, sim)
    dist = 1.0 - inner
    if not include_self:
        np.fill_diagonal(dist, 0.0)
    return dist.sum(axis=1) / len(s)


def weight(x: str, s: UsageOptionSet, sim: SimFn, *, include_self: bool = True) -> float:
    """Average distance of ``x`` to the members of its own set ``s``."""
    if x not in s:
        raise ContractViolation(f"{x!r} is not a member of the set it is weighted against")
    return float(set_weights(s, sim, include_self=include_self)[s.index(x)])


def weighted_precision(max_sims: np.ndarray, weights: np.ndarray) -> float:
    """Weighted average of per-string best matches, with the uniform
    fallback when the weight total degenerates."""
    total = float(weights.sum())
    if total < WEIGHT_EPS:
        return float(max_sims.mean())
    return float(np.dot(weights, max_sims) / total)


def s4_precision(pred: UsageOptionSet, ref: UsageOptionSet, sim: SimFn) -> float:
    """Directional S4 precision of ``pred`` against ``ref``."""
    if not pred or not ref:
        raise ContractViolation("s4_precision requires non-empty sets; use s4 for empty inputs")
    cross = sim_matrix(pred, ref, sim)
    return weighted_precision(cross.max(axis=1), set_weights(pred, sim))


def _harmonic(p: float, r: float) -> float:
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def s4(pred: UsageOptionSet, ref: UsageOptionSet, sim: SimFn) -> float:
    """S4 score between two usage-option sets, in [0, 1]."""
    if not pred and not ref:
        return 1.0
    if not pred or not ref:
        return 0.0
    cross = sim_matrix(pred, ref, sim)
    precision = weighted_precision(cross.max(axis=1), set_weights(pred, sim))
    recall = weighted_precision(cross.max(axis=0), set_weights(ref, sim))
    return _harmonic(precision, recall)


def ms4(pred: UsageOptionSet, refs: Sequence[UsageOptionSet], sim: SimFn) -> float:
    """Max of S4 over multiple reference sets."""
    if not refs:
        raise ContractViolation("ms4 requires at least one reference set")
    return max(s4(pred, ref, sim) for ref in refs)
