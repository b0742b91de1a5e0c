#!/usr/bin/env python3
"""Compare two systems with the paired permutation test.

System A reproduces the references with occasional mistakes, system B makes
many more, so the HAMS4 difference should come out significant at the
multiple-comparison-corrected threshold 0.05 / 7.
"""

import numpy as np

from usagekit import LabeledExample, SignificanceConfig, permutation_test
from usagekit import deterministic_similarity

rng = np.random.default_rng(0)
vocab = ["grill parties", "smoke vegetables", "charge phones", "read at night",
         "store tools", "clean floors"]


def noisy_copy(truth, error_rate):
    if rng.random() < error_rate:
        k = int(rng.integers(0, 3))
        return tuple(sorted(rng.choice(vocab, size=k, replace=False)))
    return truth


references = []
for i in range(60):
    truth = () if i % 2 == 0 else tuple(sorted(rng.choice(vocab, size=int(rng.integers(1, 3)), replace=False)))
    references.append((f"r{i}", (truth,)))

system_a = [LabeledExample(rid, noisy_copy(refs[0], 0.15), refs) for rid, refs in references]
system_b = [LabeledExample(rid, noisy_copy(refs[0], 0.70), refs) for rid, refs in references]

cfg = SignificanceConfig(resamples=10_000, alpha=0.05, corrections=7, seed=42)
result = permutation_test(system_a, system_b, cfg, deterministic_similarity())

print(f"observed HAMS4 difference: {result.observed_diff:+.4f}")
print(f"two-sided p-value:         {result.p_value:.5f}  ({cfg.resamples} resamples)")
print(f"corrected threshold:       {cfg.alpha_corrected:.5f}")
print("verdict:", "significant" if result.significant else "not significant")
