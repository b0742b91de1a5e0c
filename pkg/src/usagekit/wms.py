"""Word Mover's Similarity over usage-option sets.

A modified Word Mover's Distance: unit weights come from each unit's
normalized average distance (1 - sim) to the rest of its set instead of
frequencies, and the transport cost between two units is -ln(sim), with sim
floored at 1e-6 so the log stays finite. WMS is the negative logarithm of
the WMD, clamped into [0, 1] by default.

Units default to whole usage-option strings, matching the embeddings that
sim is defined over; a whitespace-token mode is available as well. Empty-set
conventions and max-aggregation over multiple references mirror S4/MS4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation
from .set_metrics import SimFn, UsageOptionSet, WEIGHT_EPS, sim_matrix, set_weights
from .transport import TransportProblem, solve_transport

UNIT_MODES = ("usage-option", "whitespace-token")

# floor applied to the WMD before the outer logarithm, so identical sets
# (WMD = 0) map to a large positive WMS that clamps to 1
WMD_FLOOR = 1e-9


@dataclass
class WmsConfig:
    sim_floor: float = 1e-6
    unit: str = "usage-option"
    multi_ref: str = "max"
    clamp: bool = True

    def __post_init__(self):
        if not 0.0 < self.sim_floor < 1.0:
            raise ContractViolation(f"sim_floor must lie in (0, 1), got {self.sim_floor}")
        if self.unit not in UNIT_MODES:
            raise ContractViolation(f"unknown unit mode {self.unit!r}; expected one of {UNIT_MODES}")
        if self.multi_ref != "max":
            raise ContractViolation("only max aggregation over reference sets is supported")


def extract_units(options: UsageOptionSet, unit: str) -> tuple[str, ...]:
    """Units of a set: the option strings themselves, or their deduplicated
    whitespace tokens."""
    if unit == "usage-option":
        return tuple(options)
    seen: dict[str, None] = {}
    for option in options:
        for token in option.split():
            if token not in seen:
                seen[token] = None
    return tuple(seen)


def unit_weights(units: Sequence[str], sim: SimFn) -> np.ndarray:
    """Probability weights from normalized average intra-set distances;
    falls back to uniform when every distance vanishes."""
    if not units:
        raise ContractViolation("unit_weights requires at least one unit")
    raw = set_weights(units, sim)
    total = float(raw.sum())
    if total < WEIGHT_EPS:
        return np.full(len(units), 1.0 / len(units))
    return raw / total


def wmd(pred: UsageOptionSet, ref: UsageOptionSet, cfg: WmsConfig, sim: SimFn) -> float:
    """Modified Word Mover's Distance between two non-empty sets."""
    pred_units = extract_units(pred, cfg.unit)
    ref_units = extract_units(ref, cfg.unit)
    if not pred_units or not ref_units:
        raise ContractViolation("wmd requires non-empty unit lists; empty sets are scored by wms_example")
    sims = sim_matrix(pred_units, ref_units, sim)
    costs = -np.log(np.maximum(sims, cfg.sim_floor))
    problem = TransportProblem(unit_weights(pred_units, sim), unit_weights(ref_units, sim), costs)
    _, objective = solve_transport(problem)
    return objective


def wms_example(pred: UsageOptionSet, refs: Sequence[UsageOptionSet], cfg: WmsConfig, sim: SimFn) -> float:
    """WMS of one prediction against its reference sets (max over sets)."""
    if not refs:
        raise ContractViolation("wms_example requires at least one reference set")
    best = -math.inf
    for ref in refs:
        if not pred and not ref:
            value = 1.0
        elif not pred or not ref:
            value = 0.0
        else:
            value = -math.log(max(wmd(pred, ref, cfg, sim), WMD_FLOOR))
            if cfg.clamp:
                value = min(1.0, max(0.0, value))
        best = max(best, value)
    return best


def corpus_wms(corpus, cfg: WmsConfig, sim: SimFn) -> float:
    """Corpus-level WMS: same class split and harmonic aggregation as HAMS4,
    with per-example WMS in place of MS4."""
    from .corpus_stats import classify_example, harmonic_aggregate

    if not corpus:
        raise ContractViolation("corpus_wms requires a non-empty corpus")
    scores = [wms_example(ex.prediction, ex.references, cfg, sim) for ex in corpus]
    classes = [classify_example(ex) for ex in corpus]
    return harmonic_aggregate(scores, classes)
